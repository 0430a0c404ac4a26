#include "wml/error.hpp"

namespace wml {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::UnknownIdentifier: return "unknown_identifier";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Quadrature: return "quadrature";
    case ErrorKind::NoConvergence: return "no_convergence";
    case ErrorKind::Shooting: return "shooting";
    case ErrorKind::StepUnderflow: return "step_underflow";
    case ErrorKind::UnknownPreset: return "unknown_preset";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

}  // namespace wml
