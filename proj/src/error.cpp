#include "igv/error.hpp"

namespace igv {

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::UnsupportedFamily:
    case ErrorKind::RankDeficient:
    case ErrorKind::Schema:
    case ErrorKind::MissingInput:
      return true;
    case ErrorKind::IntegrationFault:
    case ErrorKind::Underdetermined:
    case ErrorKind::Io:
      return false;
  }
  return false;
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::UnsupportedFamily: return "unsupported_family";
    case ErrorKind::RankDeficient: return "rank_deficient";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::MissingInput: return "missing_input";
    case ErrorKind::IntegrationFault: return "integration_fault";
    case ErrorKind::Underdetermined: return "underdetermined";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

Error Error::integration_fault(double time, const std::string& what) {
  Error e(ErrorKind::IntegrationFault,
          what + " at t=" + std::to_string(time));
  e.time_ = time;
  return e;
}

Error Error::with_stage(const std::string& stage) const {
  Error e(kind_, "[" + stage + "] " + what());
  e.time_ = time_;
  e.stage_ = stage;
  return e;
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace igv
