#pragma once

#include <stdexcept>
#include <string>

namespace aknn {

enum class Status {
  ok = 0,
  io_error = 1,
  format_error = 2,
  invalid_argument = 3,
  dimension_mismatch = 4,
  zero_norm = 5,
  out_of_range = 6,
  bad_state = 7,
  no_convergence = 8,
  internal = 9,
};

inline const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::io_error: return "io_error";
    case Status::format_error: return "format_error";
    case Status::invalid_argument: return "invalid_argument";
    case Status::dimension_mismatch: return "dimension_mismatch";
    case Status::zero_norm: return "zero_norm";
    case Status::out_of_range: return "out_of_range";
    case Status::bad_state: return "bad_state";
    case Status::no_convergence: return "no_convergence";
    case Status::internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}

  Status status() const { return status_; }

 private:
  Status status_;
};

[[noreturn]] inline void raise(Status s, const std::string& msg) {
  throw Error(s, msg);
}

}  // namespace aknn
