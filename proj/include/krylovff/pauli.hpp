#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "krylovff/error.hpp"
#include "krylovff/state.hpp"

namespace krylovff {

inline constexpr std::size_t kDefaultDenseLimit = 14;

/// Tensor product of single-qubit Paulis stored as X/Z bit masks. Bit
/// (N-1-k) of each mask belongs to qubit k, matching the basis-index order.
class PauliString {
 public:
  PauliString() = default;

  explicit PauliString(std::string_view labels) : qubit_count_(labels.size()) {
    detail::require(!labels.empty() && labels.size() <= kMaxQubits, ErrorKind::parse,
                    "pauli word length must be in [1, 62]");
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const std::uint64_t bit = std::uint64_t{1} << (qubit_count_ - 1 - k);
      switch (labels[k]) {
        case 'I': break;
        case 'X': x_mask_ |= bit; break;
        case 'Z': z_mask_ |= bit; break;
        case 'Y':
          x_mask_ |= bit;
          z_mask_ |= bit;
          break;
        default:
          throw Error(ErrorKind::parse, "pauli word '" + std::string(labels) +
                                            "' contains characters outside {I,X,Y,Z}");
      }
    }
  }

  static PauliString identity(std::size_t n) { return PauliString(std::string(n, 'I')); }

  std::size_t qubit_count() const { return qubit_count_; }
  std::uint64_t x_mask() const { return x_mask_; }
  std::uint64_t z_mask() const { return z_mask_; }
  int y_count() const { return std::popcount(x_mask_ & z_mask_); }

  char label(std::size_t qubit) const {
    const std::uint64_t bit = std::uint64_t{1} << (qubit_count_ - 1 - qubit);
    const bool x = x_mask_ & bit, z = z_mask_ & bit;
    return x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
  }

  std::string to_string() const {
    std::string s(qubit_count_, 'I');
    for (std::size_t k = 0; k < qubit_count_; ++k) s[k] = label(k);
    return s;
  }

  /// Phase picked up by basis state `index`; P|index> = phase |index ^ x_mask>.
  Complex phase(BasisIndex index) const {
    static constexpr std::array<Complex, 4> kPowersOfI{
        Complex{1, 0}, Complex{0, 1}, Complex{-1, 0}, Complex{0, -1}};
    int power = y_count();
    if (std::popcount(index & z_mask_) & 1) power += 2;
    return kPowersOfI[static_cast<std::size_t>(power & 3)];
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::size_t qubit_count_ = 0;
  std::uint64_t x_mask_ = 0;
  std::uint64_t z_mask_ = 0;
};

struct PauliTerm {
  double coefficient = 0.0;
  PauliString string;

  friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
};

/// Hermitian operator sum_i h_i P_i with real h_i. Terms are kept in
/// first-appearance order and never share a Pauli string.
class PauliSumOperator {
 public:
  PauliSumOperator() = default;
  explicit PauliSumOperator(std::size_t qubit_count) : qubit_count_(qubit_count) {}

  std::size_t qubit_count() const { return qubit_count_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Adds a term, merging into an existing term with the same string.
  void add_term(double coefficient, const PauliString& string) {
    detail::require(std::isfinite(coefficient), ErrorKind::invalid_argument,
                    "pauli coefficient must be finite");
    if (qubit_count_ == 0) qubit_count_ = string.qubit_count();
    detail::require(string.qubit_count() == qubit_count_, ErrorKind::dimension_mismatch,
                    "pauli word length " + std::to_string(string.qubit_count()) +
                        " does not match operator qubit count " + std::to_string(qubit_count_));
    for (auto& term : terms_) {
      if (term.string == string) {
        term.coefficient += coefficient;
        return;
      }
    }
    terms_.push_back({coefficient, string});
  }

  void add_term(double coefficient, std::string_view labels) {
    add_term(coefficient, PauliString(labels));
  }

  /// Sum of |h_i|, an upper bound on the spectral norm.
  double one_norm() const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.coefficient);
    return s;
  }

  friend bool operator==(const PauliSumOperator&, const PauliSumOperator&) = default;

 private:
  std::size_t qubit_count_ = 0;
  std::vector<PauliTerm> terms_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) tokens.push_back(s.substr(i, j - i));
    i = j;
  }
  return tokens;
}

inline std::optional<double> parse_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

inline std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace detail

/// Parses the `<coefficient> <pauli-word>` text format. `#` starts a comment.
inline PauliSumOperator parse_pauli_sum(std::istream& in,
                                        std::optional<std::size_t> expected_qubits = std::nullopt,
                                        std::string_view source = "<input>") {
  PauliSumOperator op(expected_qubits.value_or(0));
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::parse, std::string(source) + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto tokens = detail::split_ws(view);
    if (tokens.size() != 2) fail("expected '<coefficient> <pauli-word>'");
    const auto coefficient = detail::parse_double(tokens[0]);
    if (!coefficient) fail("bad coefficient '" + std::string(tokens[0]) + "'");
    if (!std::isfinite(*coefficient)) fail("non-finite coefficient");
    try {
      op.add_term(*coefficient, PauliString(tokens[1]));
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (op.empty()) throw Error(ErrorKind::parse, std::string(source) + ": operator has no terms");
  return op;
}

inline PauliSumOperator parse_pauli_sum(std::string_view text,
                                        std::optional<std::size_t> expected_qubits = std::nullopt) {
  std::istringstream in{std::string(text)};
  return parse_pauli_sum(in, expected_qubits);
}

/// Inverse of parse_pauli_sum; coefficients are written with 17 significant
/// digits so they reload exactly.
inline std::string serialize(const PauliSumOperator& op) {
  std::string out;
  for (const auto& term : op.terms()) {
    out += detail::format_double(term.coefficient);
    out += ' ';
    out += term.string.to_string();
    out += '\n';
  }
  return out;
}

inline StateVector apply_pauli_string(const PauliString& p, const StateVector& v) {
  detail::require(p.qubit_count() == v.qubit_count, ErrorKind::dimension_mismatch,
                  "pauli string and state qubit counts differ");
  Vector out(v.amplitudes.size());
  const std::uint64_t flip = p.x_mask();
  for (Eigen::Index i = 0; i < v.amplitudes.size(); ++i) {
    const auto index = static_cast<BasisIndex>(i);
    out(static_cast<Eigen::Index>(index ^ flip)) = p.phase(index) * v.amplitudes(i);
  }
  return {v.qubit_count, std::move(out)};
}

namespace detail {

/// out += H v without materializing H.
inline void accumulate_operator(const PauliSumOperator& h, const Vector& v, Vector& out) {
  for (const auto& term : h.terms()) {
    const std::uint64_t flip = term.string.x_mask();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const auto index = static_cast<BasisIndex>(i);
      out(static_cast<Eigen::Index>(index ^ flip)) +=
          term.coefficient * term.string.phase(index) * v(i);
    }
  }
}

}  // namespace detail

inline StateVector apply_operator(const PauliSumOperator& h, const StateVector& v) {
  detail::require(h.qubit_count() == v.qubit_count, ErrorKind::dimension_mismatch,
                  "operator and state qubit counts differ");
  Vector out = Vector::Zero(v.amplitudes.size());
  detail::accumulate_operator(h, v.amplitudes, out);
  return {v.qubit_count, std::move(out)};
}

inline Matrix to_dense_matrix(const PauliSumOperator& h,
                              std::size_t dense_limit = kDefaultDenseLimit) {
  detail::require(h.qubit_count() >= 1, ErrorKind::invalid_argument, "operator has no qubits");
  detail::require(h.qubit_count() <= dense_limit, ErrorKind::dense_limit_exceeded,
                  std::to_string(h.qubit_count()) + " qubits exceeds the dense limit of " +
                      std::to_string(dense_limit));
  const auto dim = static_cast<Eigen::Index>(dimension_for(h.qubit_count()));
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& term : h.terms()) {
    const std::uint64_t flip = term.string.x_mask();
    for (Eigen::Index col = 0; col < dim; ++col) {
      const auto index = static_cast<BasisIndex>(col);
      m(static_cast<Eigen::Index>(index ^ flip), col) += term.coefficient * term.string.phase(index);
    }
  }
  return m;
}

/// Re<v|H|v> for a normalized v.
inline double expectation(const PauliSumOperator& h, const StateVector& v) {
  detail::require_normalized(v, 1e-10, "state");
  const StateVector hv = apply_operator(h, v);
  const Complex value = v.amplitudes.dot(hv.amplitudes);
  detail::require(std::abs(value.imag()) < 1e-10 * std::max(1.0, h.one_norm()),
                  ErrorKind::invalid_argument, "expectation value has a non-negligible imaginary part");
  return value.real();
}

}  // namespace krylovff
