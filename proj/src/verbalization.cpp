#include "igv/verbalization.hpp"

#include <cmath>
#include <limits>

#include "igv/dialogue.hpp"
#include "igv/error.hpp"
#include "igv/quadrature.hpp"

namespace igv {

void VerbalizationConfig::validate() const {
  if (!(min_epoch_len > 0.0) || !std::isfinite(min_epoch_len)) {
    fail(ErrorKind::InvalidInput, "min_epoch_len must be positive");
  }
  if (!(changepoint_penalty > 0.0) || !std::isfinite(changepoint_penalty)) {
    fail(ErrorKind::InvalidInput, "changepoint_penalty must be positive");
  }
  if (!(score_threshold > 0.0 && score_threshold < 1.0)) {
    fail(ErrorKind::InvalidInput, "score_threshold must lie in (0, 1)");
  }
  if (symbol_bins == 0) fail(ErrorKind::InvalidInput, "symbol_bins must be positive");
}

namespace {

// Squared error of a constant fit on intervals [a, b), from prefix sums.
class SegmentCost {
 public:
  explicit SegmentCost(const Matrix& x) : s1_(x.rows() + 1, x.cols()), s2_(x.rows() + 1) {
    s1_.row(0).setZero();
    s2_[0] = 0.0;
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      s1_.row(k + 1) = s1_.row(k) + x.row(k);
      s2_[k + 1] = s2_[k] + x.row(k).squaredNorm();
    }
  }

  double operator()(std::size_t a, std::size_t b) const {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    const double n = static_cast<double>(b - a);
    return (s2_[ib] - s2_[ia]) - (s1_.row(ib) - s1_.row(ia)).squaredNorm() / n;
  }

 private:
  Matrix s1_;
  Vector s2_;
};

void split(const SegmentCost& cost, std::size_t a, std::size_t b, std::size_t min_len,
           double penalty, std::vector<std::size_t>* cuts) {
  if (b - a < 2 * min_len) return;
  const double whole = cost(a, b);
  double best_gain = -std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t s = a + min_len; s + min_len <= b; ++s) {
    const double gain = whole - cost(a, s) - cost(s, b);
    if (gain > best_gain) {
      best_gain = gain;
      best = s;
    }
  }
  if (!(best_gain > penalty)) return;
  split(cost, a, best, min_len, penalty, cuts);
  cuts->push_back(best);
  split(cost, best, b, min_len, penalty, cuts);
}

Matrix stacked_estimate(const EpsilonEstimate& est) {
  const auto& e1 = est.epsilon_hat[0];
  const auto& e2 = est.epsilon_hat[1];
  Matrix x(e1.rows(), e1.cols() + e2.cols());
  x << e1, e2;
  return x;
}

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

}  // namespace

Partition segment_epochs(const EpsilonEstimate& eps_est, const VerbalizationConfig& cfg) {
  cfg.validate();
  const auto& grid = eps_est.grid;
  if (grid.size < 2 || static_cast<std::size_t>(eps_est.epsilon_hat[0].rows()) != grid.size) {
    fail(ErrorKind::InvalidInput, "epsilon estimate is empty or inconsistent");
  }
  const std::size_t intervals = grid.size - 1;
  const auto min_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.min_epoch_len / grid.dt - 1e-9)));
  if (intervals < 2 * min_len) {
    fail(ErrorKind::InvalidInput, "trajectory shorter than two minimum-length epochs");
  }

  Matrix x = stacked_estimate(eps_est).topRows(static_cast<Eigen::Index>(intervals));
  x.rowwise() -= x.colwise().mean();
  const SegmentCost cost(x);

  std::vector<std::size_t> cuts;
  split(cost, 0, intervals, min_len, cfg.changepoint_penalty, &cuts);

  Partition p;
  p.indices.push_back(0);
  p.indices.insert(p.indices.end(), cuts.begin(), cuts.end());
  p.indices.push_back(intervals);
  for (auto k : p.indices) p.boundaries.push_back(grid.time(k));
  return p;
}

EpochFeatures extract_utterance_features(const Trajectory& traj,
                                         const EpsilonEstimate& eps_est,
                                         const Partition& partition,
                                         const VerbalizationConfig& cfg) {
  const auto& g = traj.grid;
  if (eps_est.grid.size != g.size || eps_est.grid.dt != g.dt || eps_est.grid.t0 != g.t0) {
    fail(ErrorKind::InvalidInput, "estimate grid differs from trajectory grid");
  }
  if (partition.indices.size() < 2 ||
      partition.indices.size() != partition.boundaries.size()) {
    fail(ErrorKind::InvalidInput, "partition needs at least one epoch");
  }
  for (std::size_t j = 0; j < partition.indices.size(); ++j) {
    const auto k = partition.indices[j];
    if (k >= g.size || (j > 0 && k <= partition.indices[j - 1]) ||
        g.time(k) != partition.boundaries[j]) {
      fail(ErrorKind::InvalidInput, "partition does not match the trajectory grid");
    }
  }

  const auto epochs = static_cast<Eigen::Index>(partition.epoch_count());
  const Eigen::Index e_dim = eps_est.epsilon_hat[0].cols() + eps_est.epsilon_hat[1].cols();
  const Eigen::Index phi_dim = traj.phi.cols();
  const Eigen::Index v_dim = traj.u_free[0].cols() + traj.u_free[1].cols();
  const bool omega_phi = cfg.features.omega_includes_phi;

  EpochFeatures f;
  f.omega.resize(epochs, e_dim + (omega_phi ? phi_dim : 0));
  f.v.resize(epochs, v_dim);
  f.phi.resize(epochs, cfg.features.regress_on_phi ? phi_dim : 0);
  for (Eigen::Index n = 0; n < epochs; ++n) {
    const auto k0 = partition.indices[static_cast<std::size_t>(n)];
    const auto k1 = partition.indices[static_cast<std::size_t>(n) + 1];
    const auto tr = make_epoch_trace(traj, eps_est.epsilon_hat, k0, k1);
    const Vector e1 = trapezoid_mean(tr.epsilon[0]);
    const Vector e2 = trapezoid_mean(tr.epsilon[1]);
    const Vector u1 = trapezoid_mean(tr.u_free[0]);
    const Vector u2 = trapezoid_mean(tr.u_free[1]);
    const Vector phi = trapezoid_mean(tr.phi);
    f.omega.row(n).head(e1.size()) = e1.transpose();
    f.omega.row(n).segment(e1.size(), e2.size()) = e2.transpose();
    if (omega_phi) f.omega.row(n).tail(phi_dim) = phi.transpose();
    f.v.row(n).head(u1.size()) = u1.transpose();
    f.v.row(n).tail(u2.size()) = u2.transpose();
    if (cfg.features.regress_on_phi) f.phi.row(n) = phi.transpose();
  }
  if (!f.omega.allFinite() || !f.v.allFinite() || !f.phi.allFinite()) {
    fail(ErrorKind::InvalidInput, "epoch features are not finite");
  }
  return f;
}

RecursionFit fit_recursion_map(const Matrix& omega, const Matrix& v,
                               const Matrix& phi_features) {
  const Eigen::Index epochs = omega.rows();
  if (v.rows() != epochs || phi_features.rows() != epochs) {
    fail(ErrorKind::InvalidInput, "feature sequences differ in length");
  }
  const Eigen::Index dw = omega.cols();
  const Eigen::Index dv = v.cols();
  const Eigen::Index dp = phi_features.cols();
  const Eigen::Index p = dw + dv + dp + 1;
  if (epochs < p + 2) {
    fail(ErrorKind::Underdetermined,
         "recursion fit needs " + std::to_string(p + 2) + " epochs, got " +
             std::to_string(epochs));
  }

  const Eigen::Index rows = epochs - 1;
  Matrix X(rows, p);
  Matrix Y = omega.bottomRows(rows);
  X.leftCols(dw) = omega.topRows(rows);
  X.middleCols(dw, dv) = v.bottomRows(rows);
  X.middleCols(dw + dv, dp) = phi_features.bottomRows(rows);
  X.col(p - 1).setOnes();

  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(X);
  const Matrix coef = cod.solve(Y);  // p x dw
  const Matrix resid = Y - X * coef;

  RecursionFit fit;
  fit.A = coef.topRows(dw).transpose();
  fit.B = coef.middleRows(dw, dv).transpose();
  fit.C = coef.middleRows(dw + dv, dp).transpose();
  fit.c = coef.row(p - 1).transpose();
  fit.residuals = resid.rowwise().norm();
  fit.design_rank = cod.rank();

  const double rss = resid.squaredNorm();
  const double tss = (Y.rowwise() - Y.colwise().mean()).squaredNorm();
  const double scale = 1.0 + Y.squaredNorm();
  if (tss <= 1e-24 * scale) {
    fit.score = 1.0;
  } else {
    fit.score = 1.0 - rss / tss;
  }
  return fit;
}

SymbolSequence symbolize_transcript(const Matrix& omega, std::size_t symbol_bins) {
  if (omega.rows() == 0) fail(ErrorKind::InvalidInput, "cannot symbolize an empty sequence");
  if (symbol_bins == 0) fail(ErrorKind::InvalidInput, "symbol_bins must be positive");
  const double radix = static_cast<double>(symbol_bins);
  if (std::pow(radix, static_cast<double>(omega.cols())) > 9.0e15) {
    fail(ErrorKind::InvalidInput, "symbol alphabet too large for 64-bit indices");
  }
  const Eigen::RowVectorXd lo = omega.colwise().minCoeff();
  const Eigen::RowVectorXd hi = omega.colwise().maxCoeff();

  SymbolSequence out;
  out.symbols.reserve(static_cast<std::size_t>(omega.rows()));
  for (Eigen::Index n = 0; n < omega.rows(); ++n) {
    std::uint64_t symbol = 0;
    std::uint64_t place = 1;
    for (Eigen::Index j = 0; j < omega.cols(); ++j) {
      std::uint64_t bin = 0;
      const double span = hi[j] - lo[j];
      if (span > 0.0) {
        const double pos = std::floor((omega(n, j) - lo[j]) / span * radix);
        bin = static_cast<std::uint64_t>(std::clamp(pos, 0.0, radix - 1.0));
      }
      symbol += bin * place;
      place *= symbol_bins;
    }
    out.symbols.push_back(symbol);
  }
  for (std::size_t n = 1; n < out.symbols.size(); ++n) {
    ++out.bigrams[{out.symbols[n - 1], out.symbols[n]}];
  }
  return out;
}

VerbalizationResult verbalize(const Trajectory& traj, const GameDefinition& game,
                              const VerbalizationConfig& cfg) {
  run_stage("config", [&] { cfg.validate(); });
  const auto est = run_stage("estimate", [&] { return estimate_epsilon(traj, game); });

  VerbalizationResult res;
  res.partition = run_stage("segment", [&] { return segment_epochs(est, cfg); });
  res.features = run_stage(
      "features", [&] { return extract_utterance_features(traj, est, res.partition, cfg); });

  if (res.partition.epoch_count() == 1) {
    const auto& f = res.features;
    res.fit.A = Matrix::Zero(f.omega.cols(), f.omega.cols());
    res.fit.B = Matrix::Zero(f.omega.cols(), f.v.cols());
    res.fit.C = Matrix::Zero(f.omega.cols(), f.phi.cols());
    res.fit.c = f.omega.row(0).transpose();
    res.fit.residuals = Vector(0);
    res.fit.score = 1.0;
  } else {
    res.fit = run_stage("fit", [&] {
      return fit_recursion_map(res.features.omega, res.features.v, res.features.phi);
    });
  }
  res.score = res.fit.score;
  res.verbalizable = res.score >= cfg.score_threshold;
  res.symbols = run_stage(
      "symbolize", [&] { return symbolize_transcript(res.features.omega, cfg.symbol_bins); });
  return res;
}

}  // namespace igv
