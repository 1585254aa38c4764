#include "cmc/error.hpp"

namespace cmc {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::MeshQualityFailure: return "mesh-quality-failure";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::LinearFailure: return "linear-failure";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::IllConditionedLoop: return "ill-conditioned-loop";
    case ErrorKind::UnderflowFit: return "underflow-fit";
    case ErrorKind::ConfigError: return "config-error";
    case ErrorKind::IoError: return "io-error";
  }
  return "unknown";
}

}  // namespace cmc
