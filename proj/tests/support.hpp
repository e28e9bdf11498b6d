#pragma once

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "krylovff/krylovff.hpp"

namespace testing_support {

using krylovff::Complex;
using krylovff::Matrix;
using krylovff::PauliSumOperator;
using krylovff::StateVector;
using krylovff::Vector;

inline Matrix pauli_2x2(char c) {
  Matrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1; break;
  }
  return m;
}

// Kronecker-product construction, leftmost letter as the most significant factor.
inline Matrix kron_word(const std::string& word) {
  Matrix m = Matrix::Identity(1, 1);
  for (char c : word) m = Eigen::kroneckerProduct(m, pauli_2x2(c)).eval();
  return m;
}

inline Matrix kron_dense(const PauliSumOperator& h) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << h.qubit_count());
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& t : h.terms()) m += t.coefficient * kron_word(t.string.to_string());
  return m;
}

// exp(-iHt) v by Pade/scaling-squaring, independent of the eigensolver path.
inline Vector expm_apply(const Matrix& h, const Vector& v, double t) {
  const Matrix a = (Complex(0.0, -t) * h).eval();
  return a.exp() * v;
}

inline PauliSumOperator random_operator(std::size_t n, std::size_t terms, std::mt19937_64& rng) {
  static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  std::uniform_int_distribution<int> letter(0, 3);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  PauliSumOperator op(n);
  for (std::size_t k = 0; k < terms; ++k) {
    std::string w(n, 'I');
    for (auto& c : w) c = kLetters[letter(rng)];
    op.add_term(coef(rng), w);
  }
  return op;
}

inline StateVector random_state(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(static_cast<Eigen::Index>(std::size_t{1} << n));
  for (auto& a : v) a = Complex(g(rng), g(rng));
  return {n, v / v.norm()};
}

inline StateVector plus_state() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return {1, v};
}

// psi(0) supported on m eigenstates whose phases e^{-iE tau} are pairwise
// separated on the unit circle, so a single ladder with M >= m spans the
// exact trajectory.
struct ExactSpanInstance {
  PauliSumOperator hamiltonian;
  krylovff::SpectralDecomposition decomposition;
  StateVector psi0;
  std::size_t support = 0;
  double tau = 0.0;
};

inline ExactSpanInstance make_exact_span_instance(std::mt19937_64& rng, std::size_t min_qubits = 2,
                                                  std::size_t max_qubits = 4, std::size_t max_support = 4) {
  std::uniform_int_distribution<std::size_t> qubits(min_qubits, max_qubits);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  static constexpr double kTaus[3] = {0.3, 0.5, 0.8};
  while (true) {
    ExactSpanInstance inst;
    const std::size_t n = qubits(rng);
    inst.hamiltonian = random_operator(n, 2 * n + 2, rng);
    inst.decomposition = krylovff::eig_decompose(inst.hamiltonian);
    inst.tau = kTaus[rng() % 3];
    const auto dim = inst.decomposition.eigenvalues.size();
    const std::size_t target = 1 + rng() % std::min<std::size_t>(max_support, static_cast<std::size_t>(dim));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    for (Eigen::Index f = 0; f < dim; ++f) order[static_cast<std::size_t>(f)] = f;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Eigen::Index> chosen;
    for (Eigen::Index f : order) {
      const Complex pf = std::polar(1.0, -inst.decomposition.eigenvalues(f) * inst.tau);
      bool separated = true;
      for (Eigen::Index g : chosen) {
        const Complex pg = std::polar(1.0, -inst.decomposition.eigenvalues(g) * inst.tau);
        separated = separated && std::abs(pf - pg) > 0.25;
      }
      if (separated) chosen.push_back(f);
      if (chosen.size() == target) break;
    }
    if (chosen.size() != target) continue;
    Vector psi = Vector::Zero(dim);
    for (Eigen::Index f : chosen) {
      psi += std::polar(0.3 + 0.7 * unit(rng), 6.283185307179586 * unit(rng)) *
             inst.decomposition.eigenvectors.col(f);
    }
    inst.psi0 = StateVector{n, psi / psi.norm()};
    inst.support = target;
    return inst;
  }
}

// Two-qubit single-reference instance whose overlap matrix keeps every
// direction with room to spare (smallest eigenvalue above 1e-3).
struct FullRankInstance {
  PauliSumOperator hamiltonian;
  krylovff::SpectralDecomposition decomposition;
  StateVector psi0;
  krylovff::KrylovConfig config;
};

inline FullRankInstance make_full_rank_instance(std::mt19937_64& rng) {
  while (true) {
    FullRankInstance inst;
    inst.hamiltonian = random_operator(2, 6, rng);
    inst.decomposition = krylovff::eig_decompose(inst.hamiltonian);
    inst.psi0 = random_state(2, rng);
    inst.config.tau = 0.5;
    inst.config.krylov_dim = 2 + rng() % 3;
    const auto basis = krylovff::build_krylov_basis(inst.decomposition, {inst.psi0}, inst.config);
    const auto raw = krylovff::assemble_subspace_matrices(basis, inst.hamiltonian, inst.psi0);
    Eigen::SelfAdjointEigenSolver<Matrix> s(raw.overlap, Eigen::EigenvaluesOnly);
    if (s.eigenvalues().minCoeff() > 1e-3) return inst;
  }
}

// Dipole problem where mu|G> has either negligible or clearly resolved weight
// on every eigenstate, with the supported phases separated at step tau, so a
// single ladder of length `support` spans the excited dynamics exactly.
struct DipoleInstance {
  PauliSumOperator hamiltonian;
  PauliSumOperator dipole;
  krylovff::SpectralDecomposition decomposition;
  std::vector<double> gaps;  // E_f - E_G over the supported eigenstates
  std::size_t support = 0;
  double tau = 0.5;
};

inline DipoleInstance make_dipole_instance(std::mt19937_64& rng, std::size_t n = 3) {
  while (true) {
    DipoleInstance inst;
    inst.hamiltonian = random_operator(n, 3 * n, rng);
    inst.dipole = random_operator(n, 3, rng);
    inst.decomposition = krylovff::eig_decompose(inst.hamiltonian);
    const auto& d = inst.decomposition;
    if (d.eigenvalues(1) - d.eigenvalues(0) < 1e-6) continue;
    const Vector excited = kron_dense(inst.dipole) * d.eigenvectors.col(0);
    if (excited.norm() < 1e-3) continue;
    const krylovff::RealVector w = (d.eigenvectors.adjoint() * excited).cwiseAbs2() / excited.squaredNorm();
    bool ok = true;
    std::vector<Eigen::Index> supported;
    for (Eigen::Index f = 0; f < w.size() && ok; ++f) {
      if (w(f) < 1e-24) continue;
      ok = w(f) > 1e-3;
      for (Eigen::Index g : supported) {
        ok = ok && std::abs(std::polar(1.0, -d.eigenvalues(f) * inst.tau) -
                            std::polar(1.0, -d.eigenvalues(g) * inst.tau)) > 0.25;
      }
      supported.push_back(f);
    }
    if (!ok) continue;
    for (Eigen::Index f : supported) inst.gaps.push_back(d.eigenvalues(f) - d.eigenvalues(0));
    inst.support = supported.size();
    return inst;
  }
}

inline PauliSumOperator op_from(const std::string& text) { return krylovff::parse_pauli_sum(text); }

}  // namespace testing_support
