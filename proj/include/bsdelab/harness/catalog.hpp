#pragma once

#include <span>
#include <string>

#include "json.hpp"

namespace bsdelab::harness {

struct CatalogEntry {
  const char* id;
  const char* title;
  const char* config;  // JSON text
};

std::span<const CatalogEntry> catalog();

/// Parsed config of a catalog entry; unknown ids are usage errors.
nlohmann::json catalog_config(const std::string& id);

}  // namespace bsdelab::harness
