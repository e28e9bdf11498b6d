#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace krylovff {

enum class ErrorKind {
  parse,
  dimension_mismatch,
  not_normalized,
  invalid_argument,
  dense_limit_exceeded,
  eigensolver_failure,
  empty_subspace,
  subspace_exhausted,
  dark_ground_state,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::not_normalized: return "not_normalized";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dense_limit_exceeded: return "dense_limit_exceeded";
    case ErrorKind::eigensolver_failure: return "eigensolver_failure";
    case ErrorKind::empty_subspace: return "empty_subspace";
    case ErrorKind::subspace_exhausted: return "subspace_exhausted";
    case ErrorKind::dark_ground_state: return "dark_ground_state";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can report structured errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace detail
}  // namespace krylovff
