#include "soblab/errors.hpp"

namespace soblab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::ExponentOutOfRange: return "exponent-out-of-range";
    case ErrorKind::ParameterDomain: return "parameter-domain";
    case ErrorKind::Format: return "format";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::ConvergenceFailure: return "convergence-failure";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::DivergentIntegral: return "divergent-integral";
    case ErrorKind::StepSize: return "step-size";
    case ErrorKind::Admissibility: return "admissibility";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::HypothesisViolation: return "hypothesis-violation";
    case ErrorKind::IllConditionedInverse: return "ill-conditioned-inverse";
    case ErrorKind::Io: return "io";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace soblab
