#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsdelab {

enum class ErrorKind {
  kConfiguration,
  kNumericalOverflow,
  kDomainViolation,
  kDegenerateBasis,
  kDivergence,
  kIllPosed,
  kDegenerateInput,
  kDegenerateCore,
  kFdNonconvergence,
  kDiscretization,
  kUsage,
  kIo,
};

std::string_view to_string(ErrorKind kind);

/// Base for every error raised by the library. The kind is stable and is
/// what the CLI maps onto exit codes and report verdicts.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfiguration: return "configuration error";
    case ErrorKind::kNumericalOverflow: return "numerical overflow";
    case ErrorKind::kDomainViolation: return "core-domain violation";
    case ErrorKind::kDegenerateBasis: return "degenerate basis";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kIllPosed: return "ill-posed scenario";
    case ErrorKind::kDegenerateInput: return "degenerate input";
    case ErrorKind::kDegenerateCore: return "degenerate core";
    case ErrorKind::kFdNonconvergence: return "FD non-convergence";
    case ErrorKind::kDiscretization: return "discretization error";
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

}  // namespace bsdelab
