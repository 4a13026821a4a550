#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace igv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Per-player pair; index 0 is player 1.
template <typename T>
using PerPlayer = std::array<T, 2>;

// Uniform time grid: time(k) = t0 + k * dt. Times are always computed from
// the index, never accumulated, so independently built grids agree bitwise.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t size = 0;

  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double t_end() const { return size == 0 ? t0 : time(size - 1); }

  // Index of a grid point within 1e-9 * dt of t, if any.
  bool find_index(double t, std::size_t* k) const;

  // Grid on [t0, t_end] whose last point is the largest t0 + m*dt <= t_end.
  static TimeGrid covering(double t0, double t_end, double dt);
};

bool all_finite(const Vector& v);

}  // namespace igv
