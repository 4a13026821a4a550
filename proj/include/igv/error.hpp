#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace igv {

// Failure categories. The CLI maps the first group to exit code 1
// (validation) and the second group to exit code 2 (runtime).
enum class ErrorKind {
  InvalidInput,       // dimension mismatch, off-grid time, malformed data
  UnsupportedFamily,  // epsilon recovery requested for a custom feedback
  RankDeficient,      // R lacks full column rank
  Schema,             // config or file schema violation
  MissingInput,       // input file absent or unreadable
  IntegrationFault,   // non-finite derivative during integration
  Underdetermined,    // too few epochs for the recursion fit
  Io,                 // output could not be written
};

bool is_validation_error(ErrorKind kind);
const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  // Integration faults carry the time at which the derivative blew up.
  static Error integration_fault(double time, const std::string& what);

  ErrorKind kind() const { return kind_; }
  std::optional<double> time() const { return time_; }
  const std::string& stage() const { return stage_; }

  // Returns a copy tagged with the pipeline stage it escaped from.
  Error with_stage(const std::string& stage) const;

 private:
  ErrorKind kind_;
  std::optional<double> time_;
  std::string stage_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace igv
