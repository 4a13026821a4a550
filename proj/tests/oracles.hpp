#pragma once

// Reference computations used only by tests. Each one takes a route that
// shares no code with the library path it checks.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igv/scenarios.hpp"

namespace oracle {

using igv::Matrix;
using igv::Vector;

// exp(A) by scaling and squaring a 30-term Taylor series.
inline Matrix expm(const Matrix& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix x = a / std::ldexp(1.0, squarings);
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// Exact state of a linear game at time t under constant u° and ε:
// z' = K z + b with z = (φ, ξ), solved through the block exponential of
// [[K, b], [0, 0]].
inline Vector linear_closed_form(const igv::LinearGameParams& p,
                                 const igv::PerPlayer<Vector>& u_free,
                                 const igv::PerPlayer<Vector>& eps, double t) {
  const Eigen::Index n = p.A.rows();
  const Eigen::Index m = p.D.rows();
  Matrix k(n + m, n + m);
  k.topLeftCorner(n, n) = p.A + p.B1 * p.P[0] + p.B2 * p.P[1];
  k.topRightCorner(n, m) = p.C + p.B1 * p.Q[0] + p.B2 * p.Q[1];
  k.bottomLeftCorner(m, n) = p.E1 * p.P[0] + p.E2 * p.P[1];
  k.bottomRightCorner(m, m) = p.D + p.E1 * p.Q[0] + p.E2 * p.Q[1];
  const Vector w1 = u_free[0] + p.R[0] * eps[0];
  const Vector w2 = u_free[1] + p.R[1] * eps[1];
  Vector b(n + m);
  b.head(n) = p.B1 * w1 + p.B2 * w2;
  b.tail(m) = p.E1 * w1 + p.E2 * w2;
  Matrix aug = Matrix::Zero(n + m + 1, n + m + 1);
  aug.topLeftCorner(n + m, n + m) = k * t;
  aug.topRightCorner(n + m, 1) = b * t;
  Vector z0(n + m + 1);
  z0 << p.phi0, p.xi0, 1.0;
  return (expm(aug) * z0).head(n + m);
}

// Trapezoid time average written as a sum of panel areas over the span.
inline Vector trapezoid_mean(const Matrix& samples, double dt) {
  Vector area = Vector::Zero(samples.cols());
  for (Eigen::Index k = 0; k + 1 < samples.rows(); ++k) {
    area += 0.5 * dt * (samples.row(k) + samples.row(k + 1)).transpose();
  }
  return area / (dt * static_cast<double>(samples.rows() - 1));
}

// Bin of x among `bins` equal cells of [lo, hi], top edge in the last cell.
inline std::uint64_t bin_of(double x, double lo, double hi, std::size_t bins) {
  if (!(hi > lo)) return 0;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::uint64_t b = 0;
  while (b + 1 < bins && x >= lo + static_cast<double>(b + 1) * width) ++b;
  return b;
}

// Memory system integrated directly: Heun steps of size h for φ, with each
// kernel integral m(t) = ∫_0^t c e^{-λ(t-τ)} g(φ(τ)) dτ evaluated by the
// trapezoid rule over the stored history. The exponential kernel lets the
// trapezoid sum be carried forward as S_{n+1} = e^{-λh} S_n + (h/2)(e^{-λh}
// g_n + g_{n+1}), which is the same quadrature sum without the O(n²) cost.
// u° is held on the coarse grid of step dt. Returns φ on the coarse grid.
struct MemoryOracle {
  const igv::MemorySetup* setup;
  igv::PerPlayer<igv::Signal> u_free;
  double dt;
  int substeps;

  Vector memory_of(std::size_t player, const std::vector<Vector>& sums) const {
    const auto& pm = setup->spec.players[player];
    Vector m = Vector::Zero(static_cast<Eigen::Index>(pm.observation_dim));
    for (std::size_t j = 0; j < pm.kernel.size(); ++j) m += pm.kernel[j].weight * sums[j];
    return m;
  }

  Matrix run(const Vector& phi0, std::size_t coarse_steps) const {
    const double h = dt / substeps;
    std::vector<Vector> s1(setup->spec.players[0].kernel.size(), Vector::Zero(1));
    std::vector<Vector> s2(setup->spec.players[1].kernel.size(), Vector::Zero(1));
    for (auto& v : s1) v = Vector::Zero(static_cast<Eigen::Index>(setup->spec.players[0].observation_dim));
    for (auto& v : s2) v = Vector::Zero(static_cast<Eigen::Index>(setup->spec.players[1].observation_dim));
    Matrix out(static_cast<Eigen::Index>(coarse_steps + 1), phi0.size());
    Vector phi = phi0;
    out.row(0) = phi.transpose();

    auto rhs = [&](const Vector& x, const std::vector<Vector>& a, const std::vector<Vector>& b,
                   const Vector& uf1, const Vector& uf2) {
      const Vector u1 = setup->spec.players[0].respond(uf1, memory_of(0, a));
      const Vector u2 = setup->spec.players[1].respond(uf2, memory_of(1, b));
      return setup->base(x, u1, u2);
    };
    auto advance = [&](const std::vector<Vector>& sums, std::size_t player,
                       const Vector& g_old, const Vector& g_new) {
      std::vector<Vector> next = sums;
      const auto& kernel = setup->spec.players[player].kernel;
      for (std::size_t j = 0; j < kernel.size(); ++j) {
        const double decay = std::exp(-kernel[j].decay * h);
        next[j] = decay * sums[j] + 0.5 * h * (decay * g_old + g_new);
      }
      return next;
    };

    for (std::size_t n = 0; n < coarse_steps; ++n) {
      const double t = static_cast<double>(n) * dt;
      const Vector uf1 = u_free[0](t);
      const Vector uf2 = u_free[1](t);
      for (int s = 0; s < substeps; ++s) {
        const auto& obs1 = setup->spec.players[0].observe;
        const auto& obs2 = setup->spec.players[1].observe;
        const Vector f0 = rhs(phi, s1, s2, uf1, uf2);
        const Vector pred = phi + h * f0;
        const auto p1 = advance(s1, 0, obs1(phi), obs1(pred));
        const auto p2 = advance(s2, 1, obs2(phi), obs2(pred));
        const Vector f1 = rhs(pred, p1, p2, uf1, uf2);
        const Vector next = phi + 0.5 * h * (f0 + f1);
        s1 = advance(s1, 0, obs1(phi), obs1(next));
        s2 = advance(s2, 1, obs2(phi), obs2(next));
        phi = next;
      }
      out.row(static_cast<Eigen::Index>(n + 1)) = phi.transpose();
    }
    return out;
  }
};

// Direct O(n²) trapezoid of ∫_0^t c e^{-λ(t-τ)} g(τ) dτ on samples g_k = g(kh).
inline double direct_kernel_trapezoid(const std::vector<double>& g, double h, double weight,
                                      double decay) {
  const std::size_t n = g.size() - 1;
  const double t = static_cast<double>(n) * h;
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    acc += w * std::exp(-decay * (t - static_cast<double>(k) * h)) * g[k];
  }
  return weight * h * acc;
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace oracle
