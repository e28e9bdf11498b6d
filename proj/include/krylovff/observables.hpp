#pragma once

#include <cmath>
#include <vector>

#include "krylovff/detail/parallel.hpp"
#include "krylovff/error.hpp"
#include "krylovff/exact.hpp"
#include "krylovff/krylov.hpp"
#include "krylovff/pauli.hpp"
#include "krylovff/series.hpp"

namespace krylovff {

/// C(t_j) = d0^dagger c(t_j).
inline CorrelationSeries autocorrelation_ff(const SubspaceModel& model, const TimeGrid& grid) {
  detail::require(model.whitened, ErrorKind::invalid_argument, "subspace model is not whitened");
  CorrelationSeries series;
  series.grid = grid;
  series.kind = CorrelationKind::autocorrelation;
  series.values.resize(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t j) {
    series.values[j] = model.d0.dot(fast_forward_coefficients(model, grid[j]));
  });
  return series;
}

/// F(t_j) between e^{-iHt_j}|psi0> and the reconstructed subspace state.
inline std::vector<double> fidelity_series(const SpectralDecomposition& d, const StateVector& psi0,
                                           const KrylovBasis& basis, const SubspaceModel& model,
                                           const TimeGrid& grid) {
  std::vector<double> out(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t j) {
    const double t = grid[j];
    const StateVector approx = reconstruct_state(basis, fast_forward_coefficients(model, t));
    out[j] = approx.norm() > 0.0 ? fidelity(evolve_exact(d, psi0, t), approx).value : 0.0;
  });
  return out;
}

/// [O]_{k'k} = <phi_k'|O|phi_k>, optionally between two different bases.
inline Matrix operator_matrix(const KrylovBasis& bra, const PauliSumOperator& op, const KrylovBasis& ket) {
  detail::require(op.qubit_count() == bra.qubit_count && op.qubit_count() == ket.qubit_count,
                  ErrorKind::dimension_mismatch, "operator and basis qubit counts differ");
  const auto k = ket.columns.cols();
  Matrix applied(ket.columns.rows(), k);
  detail::parallel_for(static_cast<std::size_t>(k), [&](std::size_t col) {
    Vector out = Vector::Zero(ket.columns.rows());
    detail::accumulate_operator(op, ket.columns.col(static_cast<Eigen::Index>(col)), out);
    applied.col(static_cast<Eigen::Index>(col)) = out;
  });
  return bra.columns.adjoint() * applied;
}

inline Matrix operator_matrix(const KrylovBasis& basis, const PauliSumOperator& op) {
  Matrix m = operator_matrix(basis, op, basis);
  detail::hermitize(m);
  return m;
}

/// O(t_j) = c(t_j)^dagger [O] c(t_j) with [O] assembled once.
inline std::vector<double> observable_expectation_ff(const SubspaceModel& model, const KrylovBasis& basis,
                                                     const PauliSumOperator& obs, const TimeGrid& grid) {
  detail::require(model.whitened, ErrorKind::invalid_argument, "subspace model is not whitened");
  detail::require(static_cast<Eigen::Index>(basis.size()) == model.overlap.rows(),
                  ErrorKind::dimension_mismatch, "basis does not match the subspace model");
  const Matrix o = operator_matrix(basis, obs);
  std::vector<double> out(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t j) {
    const Vector c = fast_forward_coefficients(model, grid[j]);
    const Complex value = c.dot(o * c);
    detail::require(std::abs(value.imag()) < 1e-9 * std::max(1.0, obs.one_norm() * c.squaredNorm()),
                    ErrorKind::invalid_argument, "observable expectation is not real");
    out[j] = value.real();
  });
  return out;
}

}  // namespace krylovff
