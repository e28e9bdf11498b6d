#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "krylovff/error.hpp"
#include "krylovff/pauli.hpp"

namespace krylovff {

enum class ModelKind { heisenberg, tfim, random_pauli };

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "heisenberg") return ModelKind::heisenberg;
  if (name == "tfim") return ModelKind::tfim;
  if (name == "random_pauli" || name == "random-pauli") return ModelKind::random_pauli;
  throw Error(ErrorKind::invalid_argument, "unknown model kind '" + std::string(name) + "'");
}

struct ModelParams {
  double field = 1.0;       // transverse field g of the TFIM
  std::size_t terms = 0;    // number of distinct strings for random_pauli
  bool periodic = false;    // close chain models into a ring
};

namespace detail {

inline std::string two_site_word(std::size_t n, std::size_t i, std::size_t j, char p) {
  std::string w(n, 'I');
  w[i] = p;
  w[j] = p;
  return w;
}

}  // namespace detail

/// Spin models used as small stand-ins for molecular Hamiltonians.
///   heisenberg:   sum_j X_j X_{j+1} + Y_j Y_{j+1} + Z_j Z_{j+1}
///   tfim:         -sum_j Z_j Z_{j+1} - g sum_j X_j
///   random_pauli: `terms` distinct random strings, coefficients U[-1, 1]
inline PauliSumOperator generate_test_hamiltonian(ModelKind kind, std::size_t n,
                                                  const ModelParams& params = {},
                                                  std::uint64_t seed = 0) {
  detail::require(n >= 1 && n <= kMaxQubits, ErrorKind::invalid_argument,
                  "qubit count must be in [1, 62]");
  PauliSumOperator op(n);
  const bool chain = kind != ModelKind::random_pauli;
  detail::require(!chain || n >= 2, ErrorKind::invalid_argument, "chain models need at least 2 qubits");
  const std::size_t bonds = (params.periodic && n > 2) ? n : n - 1;

  switch (kind) {
    case ModelKind::heisenberg:
      for (std::size_t b = 0; b < bonds; ++b) {
        for (char p : {'X', 'Y', 'Z'}) op.add_term(1.0, detail::two_site_word(n, b, (b + 1) % n, p));
      }
      break;
    case ModelKind::tfim:
      for (std::size_t b = 0; b < bonds; ++b) op.add_term(-1.0, detail::two_site_word(n, b, (b + 1) % n, 'Z'));
      if (params.field != 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
          std::string w(n, 'I');
          w[j] = 'X';
          op.add_term(-params.field, w);
        }
      }
      break;
    case ModelKind::random_pauli: {
      detail::require(params.terms >= 1, ErrorKind::invalid_argument, "random_pauli needs terms >= 1");
      detail::require(n >= 32 || params.terms <= (std::uint64_t{1} << (2 * n)),
                      ErrorKind::invalid_argument, "more terms requested than distinct Pauli strings");
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> letter(0, 3);
      std::uniform_real_distribution<double> coefficient(-1.0, 1.0);
      static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
      while (op.terms().size() < params.terms) {
        std::string w(n, 'I');
        for (auto& c : w) c = kLetters[letter(rng)];
        const PauliString s(w);
        bool seen = false;
        for (const auto& t : op.terms()) seen = seen || t.string == s;
        const double h = coefficient(rng);
        if (!seen) op.add_term(h, s);
      }
      break;
    }
  }
  return op;
}

}  // namespace krylovff
