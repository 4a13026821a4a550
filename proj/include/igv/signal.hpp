#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "igv/types.hpp"

namespace igv {

// Exogenous time signal (u° or ε). Value-semantic; copies share nothing
// mutable, and evaluation is a pure function of t.
class Signal {
 public:
  using Fn = std::function<Vector(double)>;

  Signal() = default;
  Signal(std::size_t dim, Fn fn, std::string label = "custom")
      : dim_(dim), fn_(std::move(fn)), label_(std::move(label)) {}

  Vector operator()(double t) const { return fn_(t); }
  std::size_t dim() const { return dim_; }
  const std::string& label() const { return label_; }
  explicit operator bool() const { return static_cast<bool>(fn_); }

 private:
  std::size_t dim_ = 0;
  Fn fn_;
  std::string label_;
};

namespace signals {

Signal constant(Vector value);
Signal zero(std::size_t dim);

// values[j] holds on [breakpoints[j-1], breakpoints[j]); values.size() must be
// breakpoints.size() + 1. A time within 1e-9 (relative) of a breakpoint
// counts as past it, so grid points that land on a breakpoint pick up the
// new value.
Signal piecewise_constant(std::vector<double> breakpoints,
                          std::vector<Vector> values);

// offset + amplitude * sin(omega * t + phase), componentwise.
Signal sinusoid(Vector offset, Vector amplitude, double omega, double phase);

// base for t < t_start, base + slope * (t - t_start) afterwards.
Signal linear_drift(Vector base, Vector slope, double t_start);

// Seeded random walk on knots t0 + j * knot_dt with uniform increments in
// [-step, step], linearly interpolated between knots and held past the
// last knot.
Signal random_walk(std::uint64_t seed, Vector start, double step, double t0,
                   double t_end, double knot_dt);

}  // namespace signals

}  // namespace igv
