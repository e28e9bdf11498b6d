#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "krylovff/detail/parallel.hpp"
#include "krylovff/error.hpp"
#include "krylovff/exact.hpp"
#include "krylovff/pauli.hpp"
#include "krylovff/state.hpp"

namespace krylovff {

inline constexpr double kDefaultTau = 0.1;
inline constexpr std::size_t kDefaultKrylovDim = 6;
inline constexpr double kDefaultSvdThreshold = 1e-9;

/// Additive complex Gaussian noise on the subspace matrices.
struct NoiseConfig {
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(std::isfinite(sigma) && sigma >= 0.0, ErrorKind::invalid_argument,
                    "noise sigma must be >= 0");
  }
};

struct KrylovConfig {
  double tau = kDefaultTau;
  std::size_t krylov_dim = kDefaultKrylovDim;
  double svd_threshold = kDefaultSvdThreshold;
  std::optional<NoiseConfig> noise;

  void validate() const {
    detail::require(std::isfinite(tau) && tau > 0.0, ErrorKind::invalid_argument, "tau must be > 0");
    detail::require(krylov_dim >= 1, ErrorKind::invalid_argument, "krylov dimension must be >= 1");
    detail::require(std::isfinite(svd_threshold) && svd_threshold >= 0.0,
                    ErrorKind::invalid_argument, "svd threshold must be >= 0");
    if (noise) noise->validate();
  }
};

/// Columns phi_{n,r} = e^{-iH n tau}|r>, flattened as k = n + r * M with
/// zero-based n in [0, M) and r in [0, R).
struct KrylovBasis {
  std::size_t qubit_count = 0;
  std::size_t krylov_dim = 0;
  std::vector<StateVector> references;
  Matrix columns;

  std::size_t size() const { return static_cast<std::size_t>(columns.cols()); }
  static std::size_t index(std::size_t n, std::size_t r, std::size_t krylov_dim) {
    return n + r * krylov_dim;
  }
  StateVector column(std::size_t k) const {
    return {qubit_count, columns.col(static_cast<Eigen::Index>(k))};
  }
};

/// Projected matrices H, S, d0 and, once whitened, the canonical
/// orthogonalization X with X^dagger S X = I on the kept subspace.
struct SubspaceModel {
  Matrix hamiltonian;  // [H]_{k'k} = <phi_k'|H|phi_k>
  Matrix overlap;      // [S]_{k'k} = <phi_k'|phi_k>
  Vector d0;           // <phi_k|psi(0)>

  bool whitened = false;
  double svd_threshold = 0.0;
  std::size_t kept_rank = 0;
  RealVector overlap_eigenvalues;  // all of them, ascending, negatives clamped to 0
  RealVector kept_singular_values;
  Matrix whitener;                 // X = U_kept D_kept^{-1/2}, refined so X^dagger S X = I
  Matrix reduced_hamiltonian;      // X^dagger H X
  RealVector reduced_eigenvalues;  // Lambda
  Matrix reduced_eigenvectors;     // W
  Matrix propagator_basis;         // X W

  std::size_t size() const { return static_cast<std::size_t>(overlap.rows()); }

  /// S^+ = U_kept D_kept^{-1} U_kept^dagger.
  Matrix pseudoinverse() const {
    detail::require(whitened, ErrorKind::invalid_argument, "subspace model is not whitened");
    return whitener * whitener.adjoint();
  }
};

namespace detail {

inline void hermitize(Matrix& m) { m = (0.5 * (m + m.adjoint())).eval(); }

/// X^dagger A X accumulated in extended precision. Near the threshold the
/// entries of X reach eps^{-1/2}, and a double product would lose the
/// orthonormality X^dagger S X = I that the conservation laws rest on.
inline Matrix congruence(const Matrix& x, const Matrix& a) {
  using Wide = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
  const Wide xw = x.cast<std::complex<long double>>();
  const Wide product = xw.adjoint() * (a.cast<std::complex<long double>>() * xw);
  Matrix out = product.cast<Complex>();
  hermitize(out);
  return out;
}

}  // namespace detail

inline KrylovBasis build_krylov_basis(const SpectralDecomposition& d,
                                      const std::vector<StateVector>& references,
                                      const KrylovConfig& cfg) {
  cfg.validate();
  detail::require(!references.empty(), ErrorKind::invalid_argument, "reference list is empty");
  for (const auto& r : references) {
    detail::require_matching(d, r);
    detail::require_normalized(r, 1e-10, "reference state");
  }
  const std::size_t m = cfg.krylov_dim;
  KrylovBasis basis;
  basis.qubit_count = d.qubit_count;
  basis.krylov_dim = m;
  basis.references = references;
  basis.columns.resize(static_cast<Eigen::Index>(d.dimension()),
                       static_cast<Eigen::Index>(m * references.size()));
  // One eigenbasis projection per reference, then phases per step.
  detail::parallel_for(references.size(), [&](std::size_t r) {
    const Vector projected = d.eigenvectors.adjoint() * references[r].amplitudes;
    basis.columns.col(static_cast<Eigen::Index>(KrylovBasis::index(0, r, m))) =
        references[r].amplitudes;
    Vector phased(projected.size());
    for (std::size_t n = 1; n < m; ++n) {
      const double t = static_cast<double>(n) * cfg.tau;
      for (Eigen::Index f = 0; f < projected.size(); ++f) {
        phased(f) = projected(f) * std::polar(1.0, -d.eigenvalues(f) * t);
      }
      basis.columns.col(static_cast<Eigen::Index>(KrylovBasis::index(n, r, m))) =
          d.eigenvectors * phased;
    }
  });
  return basis;
}

inline SubspaceModel assemble_subspace_matrices(const KrylovBasis& basis, const PauliSumOperator& h,
                                                const StateVector& psi0) {
  detail::require(h.qubit_count() == basis.qubit_count && psi0.qubit_count == basis.qubit_count &&
                      static_cast<Eigen::Index>(psi0.dimension()) == basis.columns.rows(),
                  ErrorKind::dimension_mismatch, "basis, operator and initial state differ in size");
  detail::require_normalized(psi0, 1e-10, "initial state");
  const auto k = basis.columns.cols();
  Matrix h_columns(basis.columns.rows(), k);
  detail::parallel_for(static_cast<std::size_t>(k), [&](std::size_t col) {
    Vector out = Vector::Zero(basis.columns.rows());
    detail::accumulate_operator(h, basis.columns.col(static_cast<Eigen::Index>(col)), out);
    h_columns.col(static_cast<Eigen::Index>(col)) = out;
  });
  SubspaceModel model;
  model.hamiltonian = basis.columns.adjoint() * h_columns;
  model.overlap = basis.columns.adjoint() * basis.columns;
  model.d0 = basis.columns.adjoint() * psi0.amplitudes;
  detail::hermitize(model.hamiltonian);
  detail::hermitize(model.overlap);
  return model;
}

/// Adds zero-mean complex Gaussian noise with E|delta|^2 = sigma^2 to H, S
/// and d0. Off-diagonal and d0 entries get N(0, sigma^2/2) per component,
/// diagonal entries real N(0, sigma^2). Any whitening is discarded unless
/// sigma is zero, in which case the model is returned untouched.
inline SubspaceModel perturb_matrices(const SubspaceModel& model, const NoiseConfig& noise) {
  noise.validate();
  if (noise.sigma == 0.0) return model;
  SubspaceModel out;
  out.hamiltonian = model.hamiltonian;
  out.overlap = model.overlap;
  out.d0 = model.d0;
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> component(0.0, noise.sigma / std::sqrt(2.0));
  std::normal_distribution<double> diagonal(0.0, noise.sigma);
  auto perturb_hermitian = [&](Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, i) += diagonal(rng);
      for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
        const double re = component(rng);
        const double im = component(rng);
        m(i, j) += Complex(re, im);
        m(j, i) = std::conj(m(i, j));
      }
    }
  };
  perturb_hermitian(out.hamiltonian);
  perturb_hermitian(out.overlap);
  for (Eigen::Index i = 0; i < out.d0.size(); ++i) {
    const double re = component(rng);
    const double im = component(rng);
    out.d0(i) += Complex(re, im);
  }
  return out;
}

/// Canonical orthogonalization of S with singular values <= eps discarded.
inline SubspaceModel threshold_and_whiten(SubspaceModel model, double eps) {
  detail::require(std::isfinite(eps) && eps >= 0.0, ErrorKind::invalid_argument,
                  "svd threshold must be >= 0");
  detail::require(model.overlap.rows() == model.overlap.cols() &&
                      model.hamiltonian.rows() == model.overlap.rows() &&
                      model.hamiltonian.cols() == model.overlap.cols() &&
                      model.d0.size() == model.overlap.rows(),
                  ErrorKind::dimension_mismatch, "subspace matrices have inconsistent sizes");
  Eigen::SelfAdjointEigenSolver<Matrix> overlap_solver(model.overlap);
  detail::require(overlap_solver.info() == Eigen::Success, ErrorKind::eigensolver_failure,
                  "overlap eigendecomposition failed");
  // For Hermitian PSD S the eigendecomposition is its SVD; rounding-level
  // negative eigenvalues are clamped to zero.
  RealVector values = overlap_solver.eigenvalues().cwiseMax(0.0);
  const Matrix& vectors = overlap_solver.eigenvectors();

  // Kept directions ordered by descending singular value, ties by position.
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (values(j) > eps) kept.push_back(j);
  }
  std::stable_sort(kept.begin(), kept.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  detail::require(!kept.empty(), ErrorKind::empty_subspace,
                  "all overlap singular values are below the threshold");

  const auto rank = static_cast<Eigen::Index>(kept.size());
  model.whitener.resize(model.overlap.rows(), rank);
  model.kept_singular_values.resize(rank);
  for (Eigen::Index c = 0; c < rank; ++c) {
    const double value = values(kept[static_cast<std::size_t>(c)]);
    model.kept_singular_values(c) = value;
    model.whitener.col(c) = vectors.col(kept[static_cast<std::size_t>(c)]) / std::sqrt(value);
  }
  // One refinement step X <- X (X^dagger S X)^{-1/2} absorbs the eigensolver's
  // error in the small singular directions. Skipped when directions at the
  // rounding floor are kept (eps ~ 0) and the Gram matrix is nowhere near I.
  const Matrix gram = detail::congruence(model.whitener, model.overlap);
  Eigen::SelfAdjointEigenSolver<Matrix> gram_solver(gram);
  if (gram_solver.info() == Eigen::Success && gram_solver.eigenvalues().minCoeff() > 0.5 &&
      gram_solver.eigenvalues().maxCoeff() < 2.0) {
    model.whitener = (model.whitener * gram_solver.operatorInverseSqrt()).eval();
  }

  model.overlap_eigenvalues = values;
  model.kept_rank = kept.size();
  model.svd_threshold = eps;

  model.reduced_hamiltonian = detail::congruence(model.whitener, model.hamiltonian);
  Eigen::SelfAdjointEigenSolver<Matrix> reduced_solver(model.reduced_hamiltonian);
  detail::require(reduced_solver.info() == Eigen::Success, ErrorKind::eigensolver_failure,
                  "reduced Hamiltonian eigendecomposition failed");
  model.reduced_eigenvalues = reduced_solver.eigenvalues();
  model.reduced_eigenvectors = reduced_solver.eigenvectors();
  model.propagator_basis = model.whitener * model.reduced_eigenvectors;
  model.whitened = true;
  return model;
}

/// Propagates a vector of overlaps <phi_k|v> to coefficients of
/// e^{-iHt}|v> projected on the kept subspace: X W e^{-i Lambda t} W^dagger X^dagger o.
inline Vector propagate_overlaps(const SubspaceModel& model, const Vector& overlaps, double t) {
  detail::require(model.whitened, ErrorKind::invalid_argument, "subspace model is not whitened");
  detail::require(overlaps.size() == model.overlap.rows(), ErrorKind::dimension_mismatch,
                  "overlap vector length does not match the subspace");
  Vector weights = model.propagator_basis.adjoint() * overlaps;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    weights(j) *= std::polar(1.0, -model.reduced_eigenvalues(j) * t);
  }
  return model.propagator_basis * weights;
}

/// c(t) = e^{-i S^+ H t} S^+ d0, evaluated through the whitened spectrum.
inline Vector fast_forward_coefficients(const SubspaceModel& model, double t) {
  return propagate_overlaps(model, model.d0, t);
}

/// |psi_K> = sum_k c_k |phi_k>, unnormalized.
inline StateVector reconstruct_state(const KrylovBasis& basis, const Vector& c) {
  detail::require(c.size() == basis.columns.cols(), ErrorKind::dimension_mismatch,
                  "coefficient vector length does not match the basis");
  return {basis.qubit_count, basis.columns * c};
}

}  // namespace krylovff
