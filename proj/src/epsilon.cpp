#include "igv/epsilon.hpp"

#include <cmath>

#include "igv/error.hpp"

namespace igv {

namespace {

void require_recovery_support(const GameDefinition& game) {
  game.validate();
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& fb = game.feedback[i];
    const std::string who = "player " + std::to_string(i + 1);
    if (!fb.is_affine()) {
      fail(ErrorKind::UnsupportedFamily,
           who + " feedback is not affine; epsilon recovery unsupported");
    }
    if (!fb.recovery_supported()) {
      fail(ErrorKind::RankDeficient, who + " feedback R lacks full column rank");
    }
  }
}

void require_matching(const Trajectory& traj, const GameDefinition& game) {
  traj.validate();
  auto cols = [](const Matrix& m) { return static_cast<std::size_t>(m.cols()); };
  bool ok = cols(traj.phi) == game.state_dim && cols(traj.xi) == game.intention_dim;
  for (std::size_t i = 0; i < 2; ++i) {
    ok = ok && cols(traj.u_free[i]) == game.control_dims[i] &&
         cols(traj.u_realized[i]) == game.control_dims[i];
  }
  if (!ok) fail(ErrorKind::InvalidInput, "trajectory columns do not match the game");
}

struct PlayerSolver {
  const FeedbackFamily* family;
  Eigen::ColPivHouseholderQR<Matrix> qr;

  explicit PlayerSolver(const FeedbackFamily& f) : family(&f), qr(f.R()) {}

  // Returns ε̂ and accumulates the squared residual.
  Vector solve(const Trajectory& traj, std::size_t player, std::size_t k,
               double* residual_sq) const {
    const auto kk = static_cast<Eigen::Index>(k);
    Vector r = traj.u_realized[player].row(kk).transpose();
    r -= traj.u_free[player].row(kk).transpose();
    r.noalias() -= family->P() * traj.phi.row(kk).transpose();
    r.noalias() -= family->Q() * traj.xi.row(kk).transpose();
    Vector eps = qr.solve(r);
    *residual_sq += (r - family->R() * eps).squaredNorm();
    return eps;
  }
};

}  // namespace

EpsilonEstimate estimate_epsilon(const Trajectory& traj, const GameDefinition& game) {
  require_recovery_support(game);
  require_matching(traj, game);

  const PlayerSolver solvers[2] = {PlayerSolver(game.feedback[0]),
                                   PlayerSolver(game.feedback[1])};
  const auto n = static_cast<Eigen::Index>(traj.size());
  EpsilonEstimate est;
  est.grid = traj.grid;
  est.residual_norm.resize(n);
  for (std::size_t i = 0; i < 2; ++i) {
    est.epsilon_hat[i].resize(n, static_cast<Eigen::Index>(game.epsilon_dims[i]));
    est.rank_ok[i] = game.feedback[i].recovery_supported();
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    double res_sq = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      est.epsilon_hat[i].row(k) =
          solvers[i].solve(traj, i, static_cast<std::size_t>(k), &res_sq).transpose();
    }
    est.residual_norm[k] = std::sqrt(res_sq);
  }
  return est;
}

PerPlayer<Vector> estimate_epsilon_at(const Trajectory& traj,
                                      const GameDefinition& game, std::size_t k) {
  require_recovery_support(game);
  require_matching(traj, game);
  if (k >= traj.size()) fail(ErrorKind::InvalidInput, "grid index past trajectory end");
  double unused = 0.0;
  return {PlayerSolver(game.feedback[0]).solve(traj, 0, k, &unused),
          PlayerSolver(game.feedback[1]).solve(traj, 1, k, &unused)};
}

double PredictionReport::max_error() const {
  return error_profile.size() == 0 ? 0.0 : error_profile.maxCoeff();
}

PredictionReport freeze_and_predict(const GameDefinition& game, const Trajectory& traj,
                                    double t0, double horizon,
                                    const PerPlayer<Signal>& u_free_future) {
  std::size_t k0 = 0;
  if (!traj.grid.find_index(t0, &k0)) {
    fail(ErrorKind::InvalidInput, "anchor time is not on the trajectory grid");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    fail(ErrorKind::InvalidInput, "prediction horizon must be positive");
  }
  const double dt = traj.grid.dt;
  const auto steps = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
  if (steps == 0) fail(ErrorKind::InvalidInput, "prediction horizon shorter than dt");

  PredictionReport rep;
  rep.anchor_time = traj.grid.time(k0);
  rep.horizon = horizon;
  rep.frozen_epsilon = estimate_epsilon_at(traj, game, k0);
  rep.grid = TimeGrid{rep.anchor_time, dt, steps + 1};

  Simulator sim(game, traj.state_at(k0), u_free_future,
                {signals::constant(rep.frozen_epsilon[0]),
                 signals::constant(rep.frozen_epsilon[1])},
                rep.grid);
  const Trajectory pred = std::move(sim).finish();
  rep.predicted_phi = pred.phi;
  // The anchor row is the recorded state itself.
  rep.predicted_phi.row(0) = traj.phi.row(static_cast<Eigen::Index>(k0));

  const std::size_t available = traj.size() - 1 - k0;
  const std::size_t shared = std::min(steps, available) + 1;
  if (available > 0) {
    rep.actual_phi = traj.phi.middleRows(static_cast<Eigen::Index>(k0),
                                         static_cast<Eigen::Index>(shared));
    rep.error_profile.resize(static_cast<Eigen::Index>(shared));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(shared); ++j) {
      rep.error_profile[j] =
          (rep.predicted_phi.row(j) - rep.actual_phi->row(j)).cwiseAbs().maxCoeff();
    }
  }
  return rep;
}

std::vector<AnchorError> prediction_error_profile(
    const GameDefinition& game, const Trajectory& traj,
    const std::vector<double>& anchors, double horizon,
    const PerPlayer<Signal>& u_free_future) {
  std::vector<AnchorError> table;
  table.reserve(anchors.size());
  for (double t0 : anchors) {
    AnchorError row;
    row.anchor = t0;
    try {
      const auto rep = freeze_and_predict(game, traj, t0, horizon, u_free_future);
      row.max_error = rep.max_error();
    } catch (const Error& e) {
      row.error = e.what();
    }
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace igv
