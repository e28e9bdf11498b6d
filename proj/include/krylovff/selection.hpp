#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "krylovff/detail/parallel.hpp"
#include "krylovff/error.hpp"
#include "krylovff/exact.hpp"
#include "krylovff/krylov.hpp"
#include "krylovff/observables.hpp"
#include "krylovff/pauli.hpp"
#include "krylovff/series.hpp"
#include "krylovff/state.hpp"

namespace krylovff {

enum class SelectionMode { bitstring, symmetry_eigvec };

inline std::string_view to_string(SelectionMode mode) {
  return mode == SelectionMode::bitstring ? "bitstring" : "symmetry-eigvec";
}

struct SqkffResult;
struct KrylovRound;

/// Maps one round to the real-valued dynamical property watched by the
/// stopping rule. The default watches |C(t)|.
using MonitorFn = std::function<std::vector<double>(const KrylovRound&)>;

struct SelectionConfig {
  std::size_t shots = 1000;
  bool exact_sampling = false;
  std::size_t max_references = 1;
  std::size_t references_per_round = 1;
  SelectionMode mode = SelectionMode::bitstring;
  std::uint64_t seed = 0;
  double t_max = 20.0;
  double eps_stop = 1e-4;
  TimeGrid eval_grid{0.0, 20.0, 201};
  MonitorFn monitor;

  void validate() const {
    detail::require(exact_sampling || shots >= 1, ErrorKind::invalid_argument, "shots must be >= 1");
    detail::require(max_references >= 1, ErrorKind::invalid_argument, "max references must be >= 1");
    detail::require(references_per_round >= 1 && references_per_round <= max_references,
                    ErrorKind::invalid_argument, "references per round must lie in [1, max references]");
    detail::require(std::isfinite(t_max) && t_max > 0.0, ErrorKind::invalid_argument, "t_max must be > 0");
    detail::require(std::isfinite(eps_stop) && eps_stop > 0.0, ErrorKind::invalid_argument,
                    "eps_stop must be > 0");
  }
};

/// A bitstring together with its observed (or exact) transition probability.
struct SampledBitstring {
  BasisIndex index = 0;
  double frequency = 0.0;

  friend bool operator==(const SampledBitstring&, const SampledBitstring&) = default;
};

enum class Provenance { initial, sampled, symmetry_adapted };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::initial: return "initial";
    case Provenance::sampled: return "sampled";
    case Provenance::symmetry_adapted: return "symmetry_adapted";
  }
  return "sampled";
}

struct PoolEntry {
  std::optional<BasisIndex> bitstring;
  StateVector state;
  Provenance provenance = Provenance::sampled;
  double frequency = 0.0;
};

/// Ordered reference pool; entry 0 is always the initial state.
struct ReferencePool {
  std::size_t qubit_count = 0;
  std::vector<PoolEntry> entries;

  static ReferencePool seeded_with(const StateVector& psi0) {
    ReferencePool pool;
    pool.qubit_count = psi0.qubit_count;
    PoolEntry first;
    first.state = psi0;
    first.provenance = Provenance::initial;
    first.frequency = 0.0;
    if (const auto index = detail::basis_index_of(psi0); index >= 0) {
      first.bitstring = static_cast<BasisIndex>(index);
    }
    pool.entries.push_back(std::move(first));
    return pool;
  }

  bool contains(BasisIndex index) const {
    return std::any_of(entries.begin(), entries.end(),
                       [&](const PoolEntry& e) { return e.bitstring == index; });
  }

  std::size_t size() const { return entries.size(); }
};

/// Draws bitstrings from p(x) = |<x|e^{-iH(M-1)tau}|psi0>|^2 and ranks them by
/// descending frequency, ties toward the smaller basis index.
inline std::vector<SampledBitstring> sample_transition_bitstrings(const SpectralDecomposition& d,
                                                                  const StateVector& psi0,
                                                                  const KrylovConfig& cfg,
                                                                  const SelectionConfig& sel) {
  cfg.validate();
  const double t = static_cast<double>(cfg.krylov_dim - 1) * cfg.tau;
  const RealVector p = transition_probabilities(d, psi0, t);
  std::vector<SampledBitstring> ranked;
  if (sel.exact_sampling) {
    for (Eigen::Index x = 0; x < p.size(); ++x) {
      if (p(x) > 1e-14) ranked.push_back({static_cast<BasisIndex>(x), p(x)});
    }
    // Probabilities within 1e-12 of each other count as ties.
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return std::llround(a.frequency * 1e12) > std::llround(b.frequency * 1e12);
    });
    return ranked;
  }
  detail::require(sel.shots >= 1, ErrorKind::invalid_argument, "shots must be >= 1");
  std::mt19937_64 rng(sel.seed);
  std::discrete_distribution<std::size_t> draw(p.data(), p.data() + p.size());
  std::vector<std::size_t> counts(static_cast<std::size_t>(p.size()), 0);
  for (std::size_t s = 0; s < sel.shots; ++s) ++counts[draw(rng)];
  for (std::size_t x = 0; x < counts.size(); ++x) {
    if (counts[x] > 0) {
      ranked.push_back({static_cast<BasisIndex>(x),
                        static_cast<double>(counts[x]) / static_cast<double>(sel.shots)});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.frequency > b.frequency; });
  return ranked;
}

/// Appends up to `count` of the highest-ranked candidates not already present.
inline ReferencePool extend_pool(ReferencePool pool, const std::vector<SampledBitstring>& candidates,
                                 std::size_t count) {
  detail::require(count >= 1, ErrorKind::invalid_argument, "count must be >= 1");
  std::size_t added = 0;
  for (const auto& c : candidates) {
    if (added == count) break;
    if (pool.contains(c.index)) continue;
    PoolEntry entry;
    entry.bitstring = c.index;
    entry.state = StateVector::basis(pool.qubit_count, c.index);
    entry.provenance = Provenance::sampled;
    entry.frequency = c.frequency;
    pool.entries.push_back(std::move(entry));
    ++added;
  }
  detail::require(added > 0, ErrorKind::subspace_exhausted, "no new candidate bitstrings remain");
  return pool;
}

/// Eigenvectors of <x'|H|x> over the given bitstrings, as superpositions of
/// those bitstrings, ordered by ascending eigenvalue.
inline std::vector<StateVector> symmetry_adapted_references(const PauliSumOperator& h,
                                                            const std::vector<BasisIndex>& bitstrings) {
  detail::require(!bitstrings.empty(), ErrorKind::invalid_argument, "no bitstrings given");
  const std::size_t n = h.qubit_count();
  std::unordered_map<BasisIndex, Eigen::Index> position;
  for (std::size_t i = 0; i < bitstrings.size(); ++i) {
    detail::require(bitstrings[i] < dimension_for(n), ErrorKind::dimension_mismatch,
                    "bitstring does not fit the operator qubit count");
    detail::require(position.emplace(bitstrings[i], static_cast<Eigen::Index>(i)).second,
                    ErrorKind::invalid_argument, "duplicate bitstring");
  }
  const auto size = static_cast<Eigen::Index>(bitstrings.size());
  Matrix projected = Matrix::Zero(size, size);
  for (Eigen::Index col = 0; col < size; ++col) {
    const BasisIndex x = bitstrings[static_cast<std::size_t>(col)];
    for (const auto& term : h.terms()) {
      const auto it = position.find(x ^ term.string.x_mask());
      if (it != position.end()) projected(it->second, col) += term.coefficient * term.string.phase(x);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(projected);
  detail::require(solver.info() == Eigen::Success, ErrorKind::eigensolver_failure,
                  "bitstring subspace eigensolver failed");
  Matrix vectors = solver.eigenvectors();
  detail::fix_eigenvector_phases(vectors);
  std::vector<StateVector> out;
  out.reserve(bitstrings.size());
  for (Eigen::Index c = 0; c < size; ++c) {
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(dimension_for(n)));
    for (Eigen::Index r = 0; r < size; ++r) {
      amps(static_cast<Eigen::Index>(bitstrings[static_cast<std::size_t>(r)])) = vectors(r, c);
    }
    out.emplace_back(n, std::move(amps));
  }
  return out;
}

namespace detail {

inline std::vector<double> magnitudes(const CorrelationSeries& s) {
  std::vector<double> out(s.values.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::abs(s.values[j]);
  return out;
}

inline double max_abs_change(const std::vector<double>& prev, const std::vector<double>& curr) {
  require(prev.size() == curr.size(), ErrorKind::dimension_mismatch,
          "monitored series differ in length");
  double worst = 0.0;
  for (std::size_t j = 0; j < prev.size(); ++j) worst = std::max(worst, std::abs(curr[j] - prev[j]));
  return worst;
}

}  // namespace detail

/// True when sup_t | |C_curr(t)| - |C_prev(t)| | <= eps_stop.
inline bool stopping_check(const CorrelationSeries& prev, const CorrelationSeries& curr, double eps_stop) {
  detail::require(prev.grid == curr.grid && prev.values.size() == curr.values.size(),
                  ErrorKind::dimension_mismatch, "correlation series are on different grids");
  return detail::max_abs_change(detail::magnitudes(prev), detail::magnitudes(curr)) <= eps_stop;
}

enum class StopReason { converged, max_references, subspace_exhausted };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_references: return "max_references";
    case StopReason::subspace_exhausted: return "subspace_exhausted";
  }
  return "converged";
}

/// Everything produced by one pass of build, assemble, whiten and fast-forward.
struct KrylovRound {
  std::size_t round = 0;
  std::vector<PoolEntry> pool;  // bitstrings chosen so far (entry 0 = psi0)
  KrylovBasis basis;
  SubspaceModel model;
  CorrelationSeries correlation;
  std::optional<std::vector<double>> fidelity;
  std::optional<double> max_delta;  // change of the monitored property vs the previous round
};

struct SqkffResult {
  PauliSumOperator hamiltonian;
  StateVector psi0;
  std::vector<KrylovRound> rounds;
  StopReason stop_reason = StopReason::max_references;

  std::size_t rounds_executed() const { return rounds.size(); }
  const KrylovRound& final_round() const { return rounds.back(); }
  const KrylovBasis& basis() const { return rounds.back().basis; }
  const SubspaceModel& model() const { return rounds.back().model; }
};

namespace detail {

inline std::vector<StateVector> references_for(const ReferencePool& pool, const PauliSumOperator& h,
                                               const SelectionConfig& sel) {
  std::vector<StateVector> refs{pool.entries.front().state};
  if (sel.mode == SelectionMode::bitstring) {
    for (std::size_t i = 1; i < pool.size(); ++i) refs.push_back(pool.entries[i].state);
    return refs;
  }
  std::vector<BasisIndex> sampled;
  for (std::size_t i = 1; i < pool.size(); ++i) sampled.push_back(*pool.entries[i].bitstring);
  if (sampled.empty()) return refs;
  auto adapted = symmetry_adapted_references(h, sampled);
  const std::size_t room = sel.max_references - 1;
  for (std::size_t i = 0; i < adapted.size() && i < room; ++i) refs.push_back(std::move(adapted[i]));
  return refs;
}

}  // namespace detail

/// The selected multi-reference loop: grow the reference pool from sampled
/// transition bitstrings until the monitored property stops changing.
inline SqkffResult run_sqkff(const PauliSumOperator& h, const SpectralDecomposition& d,
                             const StateVector& psi0, const KrylovConfig& cfg,
                             const SelectionConfig& sel, bool oracle_enabled) {
  cfg.validate();
  sel.validate();
  detail::require(d.hamiltonian_hash == content_hash(h) && d.qubit_count == h.qubit_count(),
                  ErrorKind::invalid_argument, "decomposition does not belong to the Hamiltonian");
  detail::require_matching(d, psi0);
  detail::require_normalized(psi0, 1e-10, "initial state");

  const MonitorFn monitor = sel.monitor ? sel.monitor : [](const KrylovRound& r) {
    return detail::magnitudes(r.correlation);
  };

  SqkffResult result;
  result.hamiltonian = h;
  result.psi0 = psi0;

  ReferencePool pool = ReferencePool::seeded_with(psi0);
  std::vector<SampledBitstring> candidates;
  bool sampled = false;
  std::vector<double> previous_monitor;

  for (std::size_t round = 1;; ++round) {
    if (round > 1) {
      if (!sampled) {
        candidates = sample_transition_bitstrings(d, psi0, cfg, sel);
        sampled = true;
      }
      try {
        pool = extend_pool(std::move(pool), candidates, sel.references_per_round);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::subspace_exhausted) throw;
        result.stop_reason = StopReason::subspace_exhausted;
        break;
      }
    }
    KrylovRound r;
    r.round = round;
    r.pool = pool.entries;
    std::vector<StateVector> refs = detail::references_for(pool, h, sel);
    if (refs.size() > sel.max_references) refs.resize(sel.max_references);
    r.basis = build_krylov_basis(d, refs, cfg);
    SubspaceModel raw = assemble_subspace_matrices(r.basis, h, psi0);
    if (cfg.noise && cfg.noise->sigma > 0.0) {
      raw = perturb_matrices(raw, NoiseConfig{cfg.noise->sigma, cfg.noise->seed + round - 1});
    }
    r.model = threshold_and_whiten(std::move(raw), cfg.svd_threshold);
    r.correlation = autocorrelation_ff(r.model, sel.eval_grid);
    if (oracle_enabled) r.fidelity = fidelity_series(d, psi0, r.basis, r.model, sel.eval_grid);

    std::vector<double> current = monitor(r);
    bool converged = false;
    if (round > 1) {
      r.max_delta = detail::max_abs_change(previous_monitor, current);
      converged = *r.max_delta <= sel.eps_stop;
    }
    previous_monitor = std::move(current);
    const std::size_t reference_count = r.basis.references.size();
    result.rounds.push_back(std::move(r));

    if (converged) {
      result.stop_reason = StopReason::converged;
      break;
    }
    if (reference_count >= sel.max_references) {
      result.stop_reason = StopReason::max_references;
      break;
    }
  }
  return result;
}

inline SqkffResult run_sqkff(const PauliSumOperator& h, const StateVector& psi0,
                             const KrylovConfig& cfg, const SelectionConfig& sel,
                             bool oracle_enabled) {
  return run_sqkff(h, eig_decompose(h), psi0, cfg, sel, oracle_enabled);
}

}  // namespace krylovff
