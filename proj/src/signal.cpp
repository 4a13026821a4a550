#include "igv/signal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "igv/error.hpp"
#include "igv/rng.hpp"

namespace igv {

bool TimeGrid::find_index(double t, std::size_t* k) const {
  if (size == 0 || !(dt > 0.0)) return false;
  const double pos = (t - t0) / dt;
  const double rounded = std::round(pos);
  if (rounded < 0.0 || rounded > static_cast<double>(size - 1)) return false;
  if (std::abs(pos - rounded) > 1e-9) return false;
  *k = static_cast<std::size_t>(rounded);
  return true;
}

TimeGrid TimeGrid::covering(double t0, double t_end, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    fail(ErrorKind::InvalidInput, "grid step must be positive and finite");
  }
  if (!(t_end >= t0)) {
    fail(ErrorKind::InvalidInput, "grid end precedes grid start");
  }
  const double steps = std::floor((t_end - t0) / dt + 1e-9);
  return TimeGrid{t0, dt, static_cast<std::size_t>(steps) + 1};
}

bool all_finite(const Vector& v) { return v.allFinite(); }

namespace signals {

Signal constant(Vector value) {
  const auto dim = static_cast<std::size_t>(value.size());
  return Signal(dim, [value = std::move(value)](double) { return value; },
                "constant");
}

Signal zero(std::size_t dim) {
  return constant(Vector::Zero(static_cast<Eigen::Index>(dim)));
}

Signal piecewise_constant(std::vector<double> breakpoints,
                          std::vector<Vector> values) {
  if (values.size() != breakpoints.size() + 1) {
    fail(ErrorKind::InvalidInput,
         "piecewise_constant needs one more value than breakpoints");
  }
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end())) {
    fail(ErrorKind::InvalidInput, "breakpoints must be sorted");
  }
  const auto dim = static_cast<std::size_t>(values.front().size());
  for (const auto& v : values) {
    if (static_cast<std::size_t>(v.size()) != dim) {
      fail(ErrorKind::InvalidInput, "piecewise_constant values differ in size");
    }
  }
  auto shared = std::make_shared<const std::pair<std::vector<double>,
                                                 std::vector<Vector>>>(
      std::move(breakpoints), std::move(values));
  return Signal(
      dim,
      [shared](double t) {
        const auto& [bps, vals] = *shared;
        std::size_t j = 0;
        while (j < bps.size() &&
               t >= bps[j] - 1e-9 * std::max(1.0, std::abs(bps[j]))) {
          ++j;
        }
        return vals[j];
      },
      "piecewise_constant");
}

Signal sinusoid(Vector offset, Vector amplitude, double omega, double phase) {
  if (offset.size() != amplitude.size()) {
    fail(ErrorKind::InvalidInput, "sinusoid offset/amplitude size mismatch");
  }
  const auto dim = static_cast<std::size_t>(offset.size());
  return Signal(
      dim,
      [offset = std::move(offset), amplitude = std::move(amplitude), omega,
       phase](double t) -> Vector {
        return offset + amplitude * std::sin(omega * t + phase);
      },
      "sinusoid");
}

Signal linear_drift(Vector base, Vector slope, double t_start) {
  if (base.size() != slope.size()) {
    fail(ErrorKind::InvalidInput, "linear_drift base/slope size mismatch");
  }
  const auto dim = static_cast<std::size_t>(base.size());
  return Signal(
      dim,
      [base = std::move(base), slope = std::move(slope),
       t_start](double t) -> Vector {
        if (t <= t_start) return base;
        return base + slope * (t - t_start);
      },
      "linear_drift");
}

Signal random_walk(std::uint64_t seed, Vector start, double step, double t0,
                   double t_end, double knot_dt) {
  if (!(knot_dt > 0.0) || !(t_end >= t0)) {
    fail(ErrorKind::InvalidInput, "random_walk needs knot_dt > 0, t_end >= t0");
  }
  const auto dim = start.size();
  const auto knots =
      static_cast<std::size_t>(std::ceil((t_end - t0) / knot_dt - 1e-9)) + 1;
  SplitMix64 rng(seed);
  auto path = std::make_shared<std::vector<Vector>>();
  path->reserve(knots);
  path->push_back(std::move(start));
  for (std::size_t j = 1; j < knots; ++j) {
    Vector next = path->back();
    for (Eigen::Index i = 0; i < dim; ++i) next[i] += rng.uniform(-step, step);
    path->push_back(std::move(next));
  }
  return Signal(
      static_cast<std::size_t>(dim),
      [path, t0, knot_dt](double t) -> Vector {
        const auto& p = *path;
        const double pos = (t - t0) / knot_dt;
        if (pos <= 0.0) return p.front();
        const double j = std::floor(pos);
        if (j >= static_cast<double>(p.size() - 1)) return p.back();
        const auto jj = static_cast<std::size_t>(j);
        const double w = pos - j;
        return (1.0 - w) * p[jj] + w * p[jj + 1];
      },
      "random_walk");
}

}  // namespace signals

}  // namespace igv
