#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>

#include "krylovff/detail/parallel.hpp"
#include "krylovff/error.hpp"
#include "krylovff/pauli.hpp"
#include "krylovff/series.hpp"
#include "krylovff/state.hpp"

namespace krylovff {

/// H = U diag(eigenvalues) U^dagger with ascending eigenvalues.
struct SpectralDecomposition {
  std::size_t qubit_count = 0;
  RealVector eigenvalues;
  Matrix eigenvectors;
  std::uint64_t hamiltonian_hash = 0;

  std::size_t dimension() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// FNV-1a over the canonical serialized form.
inline std::uint64_t content_hash(const PauliSumOperator& h) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize(h)) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace detail {

// Rotate each column so its largest-magnitude entry (first one on ties) is
// real and positive.
inline void fix_eigenvector_phases(Matrix& vectors) {
  for (Eigen::Index col = 0; col < vectors.cols(); ++col) {
    auto column = vectors.col(col);
    const double largest = column.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    while (std::abs(column(pivot)) < largest * (1.0 - 1e-10)) ++pivot;
    const Complex phase = column(pivot) / std::abs(column(pivot));
    column *= std::conj(phase);
    column(pivot) = std::abs(column(pivot));
  }
}

inline void require_matching(const SpectralDecomposition& d, const StateVector& v) {
  require(d.qubit_count == v.qubit_count && d.dimension() == v.dimension(),
          ErrorKind::dimension_mismatch, "state does not match the decomposition dimension");
}

}  // namespace detail

inline SpectralDecomposition eig_decompose(const PauliSumOperator& h,
                                           std::size_t dense_limit = kDefaultDenseLimit) {
  const Matrix dense = to_dense_matrix(h, dense_limit);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense);
  detail::require(solver.info() == Eigen::Success, ErrorKind::eigensolver_failure,
                  "Hermitian eigensolver did not converge");
  SpectralDecomposition d;
  d.qubit_count = h.qubit_count();
  d.eigenvalues = solver.eigenvalues();
  d.eigenvectors = solver.eigenvectors();
  detail::fix_eigenvector_phases(d.eigenvectors);
  d.hamiltonian_hash = content_hash(h);
  return d;
}

/// e^{-iHt}|v>.
inline StateVector evolve_exact(const SpectralDecomposition& d, const StateVector& v, double t) {
  detail::require_matching(d, v);
  Vector coeffs = d.eigenvectors.adjoint() * v.amplitudes;
  for (Eigen::Index f = 0; f < coeffs.size(); ++f) {
    coeffs(f) *= std::polar(1.0, -d.eigenvalues(f) * t);
  }
  return {v.qubit_count, d.eigenvectors * coeffs};
}

struct GroundState {
  double energy = 0.0;
  StateVector state;
  bool degenerate = false;
};

inline GroundState ground_state(const SpectralDecomposition& d) {
  GroundState g;
  g.energy = d.eigenvalues(0);
  g.state = StateVector(d.qubit_count, d.eigenvectors.col(0));
  g.degenerate = d.eigenvalues.size() > 1 && d.eigenvalues(1) - d.eigenvalues(0) < 1e-10;
  return g;
}

/// C(t_j) = sum_f |<E_f|v0>|^2 e^{-i E_f t_j}.
inline CorrelationSeries exact_autocorrelation(const SpectralDecomposition& d,
                                               const StateVector& v0, const TimeGrid& grid) {
  detail::require_matching(d, v0);
  detail::require_normalized(v0, 1e-10, "initial state");
  const RealVector weights = (d.eigenvectors.adjoint() * v0.amplitudes).cwiseAbs2();
  CorrelationSeries series;
  series.grid = grid;
  series.kind = CorrelationKind::autocorrelation;
  series.values.resize(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t j) {
    Complex c{0.0, 0.0};
    const double t = grid[j];
    for (Eigen::Index f = 0; f < weights.size(); ++f) {
      c += weights(f) * std::polar(1.0, -d.eigenvalues(f) * t);
    }
    series.values[j] = c;
  });
  return series;
}

/// p(x) = |<x|e^{-iHt}|v0>|^2 indexed by basis index.
inline RealVector transition_probabilities(const SpectralDecomposition& d, const StateVector& v0,
                                           double t) {
  detail::require_normalized(v0, 1e-10, "initial state");
  return evolve_exact(d, v0, t).amplitudes.cwiseAbs2();
}

struct Fidelity {
  double value = 0.0;
  // Norm of the approximate state before renormalization.
  double approx_norm = 0.0;
};

/// |<exact|approx>|^2 with both arguments renormalized.
inline Fidelity fidelity(const StateVector& exact, const StateVector& approx) {
  detail::require_same_dimension(exact, approx);
  const double approx_norm = approx.norm();
  const double exact_norm = exact.norm();
  detail::require(approx_norm > 0.0 && exact_norm > 0.0, ErrorKind::invalid_argument,
                  "fidelity of a zero-norm state is undefined");
  const double overlap = std::abs(exact.amplitudes.dot(approx.amplitudes)) / (approx_norm * exact_norm);
  return {overlap * overlap, approx_norm};
}

// Binary cache: magic, hash, qubit count, dimension, eigenvalues, then the
// eigenvector matrix column-major as (re, im) pairs. Native endianness.
namespace detail {
inline constexpr char kCacheMagic[8] = {'K', 'F', 'F', 'E', 'I', 'G', '1', '\n'};
}

inline void save_decomposition(const std::filesystem::path& path, const SpectralDecomposition& d) {
  std::ofstream out(path, std::ios::binary);
  detail::require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  const std::uint64_t header[3] = {d.hamiltonian_hash, d.qubit_count, d.dimension()};
  out.write(detail::kCacheMagic, sizeof detail::kCacheMagic);
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(d.eigenvalues.data()),
            static_cast<std::streamsize>(sizeof(double) * d.dimension()));
  out.write(reinterpret_cast<const char*>(d.eigenvectors.data()),
            static_cast<std::streamsize>(sizeof(Complex) * d.dimension() * d.dimension()));
  detail::require(static_cast<bool>(out), ErrorKind::io, "short write to " + path.string());
}

inline SpectralDecomposition load_decomposition(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  detail::require(static_cast<bool>(in), ErrorKind::io, "cannot read " + path.string());
  char magic[sizeof detail::kCacheMagic];
  std::uint64_t header[3];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(header), sizeof header);
  detail::require(in && std::equal(magic, magic + sizeof magic, detail::kCacheMagic),
                  ErrorKind::io, path.string() + " is not a decomposition cache");
  const auto dim = static_cast<Eigen::Index>(header[2]);
  detail::require(header[1] <= kMaxQubits && header[2] == dimension_for(header[1]), ErrorKind::io,
                  path.string() + " has an inconsistent header");
  SpectralDecomposition d;
  d.hamiltonian_hash = header[0];
  d.qubit_count = header[1];
  d.eigenvalues.resize(dim);
  d.eigenvectors.resize(dim, dim);
  in.read(reinterpret_cast<char*>(d.eigenvalues.data()),
          static_cast<std::streamsize>(sizeof(double) * header[2]));
  in.read(reinterpret_cast<char*>(d.eigenvectors.data()),
          static_cast<std::streamsize>(sizeof(Complex) * header[2] * header[2]));
  detail::require(static_cast<bool>(in), ErrorKind::io, path.string() + " is truncated");
  return d;
}

/// Loads the decomposition of `h` from `cache_dir` when present, otherwise
/// computes and stores it there.
inline SpectralDecomposition eig_decompose_cached(const PauliSumOperator& h,
                                                  const std::filesystem::path& cache_dir,
                                                  std::size_t dense_limit = kDefaultDenseLimit) {
  const std::uint64_t key = content_hash(h);
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.eig", static_cast<unsigned long long>(key));
  const auto path = cache_dir / name;
  if (std::filesystem::exists(path)) {
    SpectralDecomposition d = load_decomposition(path);
    if (d.hamiltonian_hash == key && d.qubit_count == h.qubit_count()) return d;
  }
  SpectralDecomposition d = eig_decompose(h, dense_limit);
  std::filesystem::create_directories(cache_dir);
  save_decomposition(path, d);
  return d;
}

}  // namespace krylovff
