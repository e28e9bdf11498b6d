#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "krylovff/error.hpp"

namespace krylovff {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Basis index of a computational-basis state. Qubit 0 is the leftmost
/// character of a bitstring and the most significant bit of the index.
using BasisIndex = std::uint64_t;

inline constexpr std::size_t kMaxQubits = 62;

inline std::size_t dimension_for(std::size_t qubit_count) {
  return std::size_t{1} << qubit_count;
}

inline BasisIndex parse_bitstring(std::string_view bits) {
  detail::require(!bits.empty() && bits.size() <= kMaxQubits, ErrorKind::parse,
                  "bitstring length must be in [1, 62]");
  BasisIndex index = 0;
  for (char c : bits) {
    detail::require(c == '0' || c == '1', ErrorKind::parse,
                    "bitstring '" + std::string(bits) + "' contains characters outside {0,1}");
    index = (index << 1) | static_cast<BasisIndex>(c == '1');
  }
  return index;
}

inline std::string format_bitstring(BasisIndex index, std::size_t qubit_count) {
  std::string bits(qubit_count, '0');
  for (std::size_t k = 0; k < qubit_count; ++k) {
    if ((index >> (qubit_count - 1 - k)) & 1U) bits[k] = '1';
  }
  return bits;
}

/// Dense amplitude vector over the 2^N computational basis states.
struct StateVector {
  std::size_t qubit_count = 0;
  Vector amplitudes;

  StateVector() = default;
  StateVector(std::size_t n, Vector amps) : qubit_count(n), amplitudes(std::move(amps)) {
    detail::require(static_cast<std::size_t>(amplitudes.size()) == dimension_for(n),
                    ErrorKind::dimension_mismatch,
                    "amplitude vector length does not match 2^qubit_count");
  }

  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }

  static StateVector basis(std::size_t n, BasisIndex index) {
    detail::require(n >= 1 && n <= kMaxQubits, ErrorKind::invalid_argument,
                    "qubit count must be in [1, 62]");
    detail::require(index < dimension_for(n), ErrorKind::invalid_argument,
                    "basis index out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dimension_for(n)));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return {n, std::move(v)};
  }

  static StateVector from_bitstring(std::string_view bits) {
    return basis(bits.size(), parse_bitstring(bits));
  }
};

namespace detail {

inline void require_same_dimension(const StateVector& a, const StateVector& b) {
  require(a.qubit_count == b.qubit_count && a.dimension() == b.dimension(),
          ErrorKind::dimension_mismatch, "state dimensions differ");
}

inline void require_normalized(const StateVector& v, double tol, const char* what) {
  require(std::abs(v.norm() - 1.0) <= tol, ErrorKind::not_normalized,
          std::string(what) + " is not normalized");
}

/// Index of the basis state when `v` is a single computational-basis state
/// (up to global phase), or -1.
inline long long basis_index_of(const StateVector& v, double tol = 1e-12) {
  Eigen::Index best = 0;
  v.amplitudes.cwiseAbs().maxCoeff(&best);
  if (std::abs(std::abs(v.amplitudes(best)) - 1.0) > tol) return -1;
  return static_cast<long long>(best);
}

}  // namespace detail
}  // namespace krylovff
