#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igv/dynamics.hpp"

namespace igv {

// Pointwise recovery of ε from realized controls.
struct EpsilonEstimate {
  TimeGrid grid;
  PerPlayer<Matrix> epsilon_hat;  // one row per grid point
  Vector residual_norm;           // ‖(r1, r2)‖₂ of both players' residuals
  PerPlayer<bool> rank_ok{false, false};
};

// Least-squares ε̂_i = argmin ‖u_i - u°_i - Pφ - Qξ - Rε‖₂ at every grid
// point, solved through a column-pivoted QR of R. Requires affine families
// with full-column-rank R; custom families raise UnsupportedFamily and
// rank-deficient R raises RankDeficient.
EpsilonEstimate estimate_epsilon(const Trajectory& traj, const GameDefinition& game);

// Same estimate restricted to one grid index.
PerPlayer<Vector> estimate_epsilon_at(const Trajectory& traj,
                                      const GameDefinition& game, std::size_t k);

struct PredictionReport {
  double anchor_time = 0.0;
  double horizon = 0.0;
  TimeGrid grid;  // prediction grid, starts at the anchor
  PerPlayer<Vector> frozen_epsilon;
  Matrix predicted_phi;
  std::optional<Matrix> actual_phi;  // rows shared with predicted_phi
  Vector error_profile;              // sup-norm error per shared row

  double max_error() const;
};

// Integrates forward from the recorded state at t0 with ε frozen at ε̂(t0)
// and the supplied future free controls. The horizon is rounded down to a
// whole number of steps (at least one).
PredictionReport freeze_and_predict(const GameDefinition& game, const Trajectory& traj,
                                    double t0, double horizon,
                                    const PerPlayer<Signal>& u_free_future);

struct AnchorError {
  double anchor = 0.0;
  std::optional<double> max_error;
  std::string error;  // set when the anchor failed
};

// One prediction per anchor; failures are recorded per row, not thrown.
std::vector<AnchorError> prediction_error_profile(
    const GameDefinition& game, const Trajectory& traj,
    const std::vector<double>& anchors, double horizon,
    const PerPlayer<Signal>& u_free_future);

}  // namespace igv
