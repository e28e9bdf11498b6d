#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "krylovff/error.hpp"
#include "krylovff/state.hpp"

namespace krylovff {

/// Uniform time grid t_j = t_start + j * dt, j = 0 .. points-1.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t_start, double t_end, std::size_t points)
      : t_start_(t_start), t_end_(t_end), points_(points) {
    detail::require(std::isfinite(t_start) && std::isfinite(t_end) && t_start >= 0.0,
                    ErrorKind::invalid_argument, "time grid must start at t >= 0");
    detail::require(t_end > t_start, ErrorKind::invalid_argument, "time grid needs t_end > t_start");
    detail::require(points >= 2, ErrorKind::invalid_argument, "time grid needs at least 2 points");
  }

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  std::size_t size() const { return points_; }
  double dt() const { return (t_end_ - t_start_) / static_cast<double>(points_ - 1); }

  double operator[](std::size_t j) const {
    return j + 1 == points_ ? t_end_ : t_start_ + static_cast<double>(j) * dt();
  }

  std::vector<double> times() const {
    std::vector<double> t(points_);
    for (std::size_t j = 0; j < points_; ++j) t[j] = (*this)[j];
    return t;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t_start_ = 0.0;
  double t_end_ = 1.0;
  std::size_t points_ = 2;
};

enum class CorrelationKind { autocorrelation, dipole, custom };

inline std::string_view to_string(CorrelationKind kind) {
  switch (kind) {
    case CorrelationKind::autocorrelation: return "autocorrelation";
    case CorrelationKind::dipole: return "dipole";
    case CorrelationKind::custom: return "custom";
  }
  return "custom";
}

struct CorrelationSeries {
  TimeGrid grid;
  std::vector<Complex> values;
  CorrelationKind kind = CorrelationKind::autocorrelation;
  // Squared norm of the unnormalized initial vector, e.g. ||mu|G>||^2.
  double norm_factor = 1.0;
  // Energy whose phase e^{+i E t} has already been multiplied into values.
  double energy_shift = 0.0;
};

enum class Axis : std::size_t { x = 0, y = 1, z = 2 };

struct SpectrumSeries {
  std::vector<double> omega;
  // Re I_xi(omega) for xi = x, y, z; an empty vector marks an absent channel.
  std::array<std::vector<double>, 3> lineshape;
  std::vector<double> oscillator_strength;
  double gamma = 0.0;
  double ground_energy = 0.0;
};

}  // namespace krylovff
