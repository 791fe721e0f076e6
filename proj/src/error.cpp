#include "aosr/error.hpp"

namespace aosr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::infeasible_region: return "infeasible region";
    case ErrorKind::numerical: return "numerical failure";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::undefined_normalizer: return "undefined normalizer";
    case ErrorKind::io: return "i/o error";
  }
  return "error";
}

Error Error::with_context(std::string_view context) const {
  return Error(kind_, std::string(context) + ": " + what());
}

void throw_invalid(const std::string& what) { throw Error(ErrorKind::invalid_argument, what); }

}  // namespace aosr
