#pragma once

#include <cmath>
#include <vector>

#include "krylovff/error.hpp"
#include "krylovff/exact.hpp"
#include "krylovff/krylov.hpp"
#include "krylovff/observables.hpp"
#include "krylovff/pauli.hpp"
#include "krylovff/selection.hpp"
#include "krylovff/series.hpp"

namespace krylovff {

/// <A(t + lag) B(t)> = <psi(t+lag)| A e^{-iH lag} B |psi(t)>.
///
/// `main` fast-forwards psi(t). `aux` supplies the subspace in which
/// e^{-iH lag} B|phi_k> is propagated; its initial state is normally
/// B|psi(0)>/||B|psi(0)>||. Both runs must share the Hamiltonian.
inline Complex two_time_correlation_ff(const SqkffResult& main, const SqkffResult& aux,
                                       const PauliSumOperator& a, const PauliSumOperator& b, double t,
                                       double lag) {
  detail::require(main.hamiltonian == aux.hamiltonian, ErrorKind::invalid_argument,
                  "two-time correlation needs runs with the same Hamiltonian");
  const KrylovBasis& basis = main.basis();
  const KrylovBasis& aux_basis = aux.basis();
  const SubspaceModel& model = main.model();
  const SubspaceModel& aux_model = aux.model();

  // <phi_k'|A|chi_k''> and <chi_j|B|phi_k> across the two bases.
  const Matrix a_cross = operator_matrix(basis, a, aux_basis);
  const Matrix b_cross = operator_matrix(aux_basis, b, basis);

  // Propagated aux coefficients of e^{-iH lag} B|phi_k>, one column per k.
  Vector phases(aux_model.reduced_eigenvalues.size());
  for (Eigen::Index j = 0; j < phases.size(); ++j) {
    phases(j) = std::polar(1.0, -aux_model.reduced_eigenvalues(j) * lag);
  }
  const Matrix propagated = aux_model.propagator_basis * phases.asDiagonal() *
                            (aux_model.propagator_basis.adjoint() * b_cross);
  const Matrix lagged = a_cross * propagated;

  const Vector later = fast_forward_coefficients(model, t + lag);
  const Vector now = fast_forward_coefficients(model, t);
  return later.dot(lagged * now);
}

struct DipoleCorrelation {
  CorrelationSeries series;
  SqkffResult run;
  GroundState ground;
  StateVector initial;  // mu|G> / ||mu|G>||
};

/// <G|mu e^{-iHt} mu|G> e^{i E_G t} from a single run started at mu|G>.
/// The ground state comes from the exact decomposition.
inline DipoleCorrelation dipole_correlation_ff(const PauliSumOperator& h, const SpectralDecomposition& d,
                                               const PauliSumOperator& mu, const KrylovConfig& cfg,
                                               const SelectionConfig& sel, const TimeGrid& grid,
                                               bool oracle_enabled = false) {
  detail::require(mu.qubit_count() == h.qubit_count(), ErrorKind::dimension_mismatch,
                  "dipole operator and Hamiltonian qubit counts differ");
  DipoleCorrelation out;
  out.ground = ground_state(d);
  StateVector excited = apply_operator(mu, out.ground.state);
  const double norm = excited.norm();
  detail::require(norm >= 1e-12, ErrorKind::dark_ground_state,
                  "dipole operator annihilates the ground state");
  excited.amplitudes /= norm;
  out.initial = excited;
  out.run = run_sqkff(h, d, out.initial, cfg, sel, oracle_enabled);

  const SubspaceModel& model = out.run.model();
  out.series.grid = grid;
  out.series.kind = CorrelationKind::dipole;
  out.series.norm_factor = norm * norm;
  out.series.energy_shift = out.ground.energy;
  out.series.values.resize(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t j) {
    const double t = grid[j];
    out.series.values[j] = std::polar(out.series.norm_factor, out.ground.energy * t) *
                           model.d0.dot(fast_forward_coefficients(model, t));
  });
  return out;
}

inline DipoleCorrelation dipole_correlation_ff(const PauliSumOperator& h, const PauliSumOperator& mu,
                                               const KrylovConfig& cfg, const SelectionConfig& sel,
                                               const TimeGrid& grid, bool oracle_enabled = false) {
  return dipole_correlation_ff(h, eig_decompose(h), mu, cfg, sel, grid, oracle_enabled);
}

}  // namespace krylovff
