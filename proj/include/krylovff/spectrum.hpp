#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "krylovff/detail/parallel.hpp"
#include "krylovff/error.hpp"
#include "krylovff/series.hpp"

namespace krylovff {

inline constexpr double kDefaultGamma = 1.5e-2;

/// Damped time window 8/gamma; e^{-8} ~ 3.4e-4 of the initial weight remains.
inline double default_spectrum_t_end(double gamma) { return 8.0 / gamma; }

/// Uniform frequency grid with `points` samples on [lo, hi].
inline std::vector<double> frequency_grid(double lo, double hi, std::size_t points) {
  detail::require(points >= 2 && hi > lo, ErrorKind::invalid_argument, "bad frequency grid");
  std::vector<double> omega(points);
  for (std::size_t i = 0; i < points; ++i) {
    omega[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return omega;
}

/// Re I(omega) = 2 int_0^T Re[e^{i(E_G + omega)t} C(t)] e^{-gamma t} dt by the
/// trapezoidal rule; negative times are folded in through C(-t) = C(t)^*.
/// A phase e^{i E t} already carried by the series (energy_shift) is not
/// applied twice.
inline SpectrumSeries lineshape(const CorrelationSeries& series, double gamma,
                                const std::vector<double>& omega, double e_ground,
                                Axis axis = Axis::z) {
  detail::require(std::isfinite(gamma) && gamma > 0.0, ErrorKind::invalid_argument, "gamma must be > 0");
  detail::require(series.grid.t_start() == 0.0, ErrorKind::invalid_argument,
                  "lineshape needs a time grid starting at t = 0");
  detail::require(series.values.size() == series.grid.size(), ErrorKind::dimension_mismatch,
                  "correlation values do not match the time grid");
  detail::require(!omega.empty(), ErrorKind::invalid_argument, "empty frequency grid");

  const double shift = e_ground - series.energy_shift;
  const double dt = series.grid.dt();
  const std::size_t n = series.values.size();
  std::vector<double> times = series.grid.times();

  SpectrumSeries out;
  out.omega = omega;
  out.gamma = gamma;
  out.ground_energy = e_ground;
  auto& channel = out.lineshape[static_cast<std::size_t>(axis)];
  channel.assign(omega.size(), 0.0);
  detail::parallel_for(omega.size(), [&](std::size_t i) {
    const double frequency = shift + omega[i];
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = times[j];
      const Complex phase = std::polar(std::exp(-gamma * t), frequency * t);
      const double weight = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      sum += weight * (phase * series.values[j]).real();
    }
    channel[i] = 2.0 * dt * sum;
  });
  out.oscillator_strength.resize(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    out.oscillator_strength[i] = (2.0 / 3.0) * omega[i] * channel[i];
  }
  return out;
}

/// f(omega) = (2/3) omega sum_xi Re I_xi(omega). Absent channels count as zero.
inline SpectrumSeries oscillator_strength(const std::vector<SpectrumSeries>& channels) {
  detail::require(!channels.empty(), ErrorKind::invalid_argument, "no spectrum channels given");
  SpectrumSeries out;
  out.omega = channels.front().omega;
  out.gamma = channels.front().gamma;
  out.ground_energy = channels.front().ground_energy;
  for (const auto& c : channels) {
    detail::require(c.omega == out.omega, ErrorKind::dimension_mismatch,
                    "spectrum channels use different frequency grids");
    for (std::size_t axis = 0; axis < 3; ++axis) {
      if (c.lineshape[axis].empty()) continue;
      auto& target = out.lineshape[axis];
      if (target.empty()) target.assign(out.omega.size(), 0.0);
      for (std::size_t i = 0; i < target.size(); ++i) target[i] += c.lineshape[axis][i];
    }
  }
  out.oscillator_strength.assign(out.omega.size(), 0.0);
  for (const auto& channel : out.lineshape) {
    if (channel.empty()) continue;
    for (std::size_t i = 0; i < channel.size(); ++i) {
      out.oscillator_strength[i] += (2.0 / 3.0) * out.omega[i] * channel[i];
    }
  }
  return out;
}

}  // namespace krylovff
