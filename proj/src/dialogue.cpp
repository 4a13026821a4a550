#include "igv/dialogue.hpp"

#include <cmath>

#include "igv/error.hpp"
#include "igv/quadrature.hpp"

namespace igv {

namespace {

Vector stack(const PerPlayer<Vector>& v) {
  Vector out(v[0].size() + v[1].size());
  out << v[0], v[1];
  return out;
}

std::vector<std::size_t> align_schedule(const std::vector<double>& schedule, double dt) {
  if (schedule.size() < 2) {
    fail(ErrorKind::InvalidInput, "dialogue schedule needs at least two times");
  }
  if (!(dt > 0.0)) fail(ErrorKind::InvalidInput, "dialogue dt must be positive");
  std::vector<std::size_t> idx;
  idx.reserve(schedule.size());
  const double t0 = schedule.front();
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    if (j > 0 && !(schedule[j] > schedule[j - 1])) {
      fail(ErrorKind::InvalidInput, "dialogue schedule must be strictly increasing");
    }
    const double pos = (schedule[j] - t0) / dt;
    const double k = std::round(pos);
    if (std::abs(pos - k) > 1e-9) {
      fail(ErrorKind::InvalidInput, "dialogue schedule is not aligned with the grid");
    }
    idx.push_back(static_cast<std::size_t>(k));
  }
  return idx;
}

double residual(const DiscreteStepMap& step, const Utterance& prev, const Utterance& cur,
                const EpochTrace& trace) {
  const Vector predicted = step(prev.phi, cur.v, trace);
  if (predicted.size() != cur.phi.size()) {
    fail(ErrorKind::InvalidInput, "discrete step map returned the wrong dimension");
  }
  return (cur.phi - predicted).norm();
}

}  // namespace

EpochTrace make_epoch_trace(const Trajectory& traj, const PerPlayer<Matrix>& epsilon,
                            std::size_t k0, std::size_t k1) {
  if (!(k0 < k1 && k1 < traj.size())) {
    fail(ErrorKind::InvalidInput, "epoch must span at least two grid points");
  }
  EpochTrace tr;
  tr.t_begin = traj.grid.time(k0);
  tr.t_end = traj.grid.time(k1);
  for (std::size_t i = 0; i < 2; ++i) {
    tr.epsilon[i] = held_trace(epsilon[i], k0, k1);
    tr.u_free[i] = held_trace(traj.u_free[i], k0, k1);
  }
  tr.xi = state_trace(traj.xi, k0, k1);
  tr.phi = state_trace(traj.phi, k0, k1);
  return tr;
}

Vector utterance_state_functional(const PerPlayer<Matrix>& epsilon_trace,
                                  const Matrix& /*xi_trace*/, const Matrix& M) {
  const auto& e1 = epsilon_trace[0];
  const auto& e2 = epsilon_trace[1];
  if (e1.rows() < 2 || e1.rows() != e2.rows()) {
    fail(ErrorKind::InvalidInput, "epsilon traces must share at least two grid points");
  }
  Matrix stacked(e1.rows(), e1.cols() + e2.cols());
  stacked << e1, e2;
  if (M.cols() != stacked.cols()) {
    fail(ErrorKind::InvalidInput, "utterance matrix M has the wrong column count");
  }
  return M * trapezoid_mean(stacked);
}

PerPlayer<Vector> utterance_control_functional(const PerPlayer<Matrix>& u_free_trace,
                                               const Matrix& /*xi_trace*/) {
  return {trapezoid_mean(u_free_trace[0]), trapezoid_mean(u_free_trace[1])};
}

UtteranceStateMap mean_epsilon_state(Matrix M) {
  return [M = std::move(M)](const EpochTrace& tr) {
    return utterance_state_functional(tr.epsilon, tr.xi, M);
  };
}

UtteranceControlMap mean_free_control() {
  return [](const EpochTrace& tr) { return utterance_control_functional(tr.u_free, tr.xi); };
}

DiscreteStepMap affine_step_map(Matrix A, Matrix B, Vector c) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || c.size() != A.rows()) {
    fail(ErrorKind::InvalidInput, "affine step map dimensions are inconsistent");
  }
  return [A = std::move(A), B = std::move(B), c = std::move(c)](
             const Vector& phi_prev, const PerPlayer<Vector>& v, const EpochTrace&) {
    const Vector vs = stack(v);
    if (phi_prev.size() != A.cols() || vs.size() != B.cols()) {
      fail(ErrorKind::InvalidInput, "affine step map input has the wrong dimension");
    }
    Vector next = c;
    next.noalias() += A * phi_prev;
    next.noalias() += B * vs;
    return next;
  };
}

DialogueTranscript run_dialogue(const DialogueDefinition& def,
                                const PerPlayer<Signal>& u_free_signals,
                                const PerPlayer<Signal>& epsilon_signals, double dt) {
  if (!def.state_map || !def.control_map || !def.step_map) {
    fail(ErrorKind::InvalidInput, "dialogue definition is missing a map");
  }
  const auto idx = align_schedule(def.schedule, dt);
  const TimeGrid grid{def.schedule.front(), dt, idx.back() + 1};

  GameState init = def.init;
  init.time = grid.t0;
  Simulator sim(def.continuous, init, u_free_signals, epsilon_signals, grid);
  for (std::size_t j = 1; j < idx.size(); ++j) sim.advance_to(idx[j]);

  DialogueTranscript out;
  out.trace = std::move(sim).finish();
  out.boundary_index = idx;
  const auto& eps = *out.trace.epsilon_truth;
  for (std::size_t j = 1; j < idx.size(); ++j) {
    const auto tr = make_epoch_trace(out.trace, eps, idx[j - 1], idx[j]);
    Utterance u;
    u.index = j - 1;
    u.t_begin = tr.t_begin;
    u.t_end = tr.t_end;
    u.phi = def.state_map(tr);
    u.v = def.control_map(tr);
    if (!u.phi.allFinite() || !u.v[0].allFinite() || !u.v[1].allFinite()) {
      fail(ErrorKind::InvalidInput, "utterance map produced non-finite values");
    }
    if (!out.utterances.empty()) {
      out.step_residuals.push_back(residual(def.step_map, out.utterances.back(), u, tr));
    }
    out.utterances.push_back(std::move(u));
  }
  return out;
}

ResidualStats check_step_consistency(const DialogueTranscript& transcript,
                                     const DiscreteStepMap& step_map) {
  const auto& utt = transcript.utterances;
  if (utt.size() < 2) {
    fail(ErrorKind::InvalidInput, "step consistency needs at least two utterances");
  }
  if (transcript.boundary_index.size() != utt.size() + 1 ||
      !transcript.trace.epsilon_truth) {
    fail(ErrorKind::InvalidInput, "transcript lacks its continuous trace");
  }
  const auto& eps = *transcript.trace.epsilon_truth;
  ResidualStats stats;
  double sum = 0.0;
  for (std::size_t n = 1; n < utt.size(); ++n) {
    const auto tr = make_epoch_trace(transcript.trace, eps, transcript.boundary_index[n],
                                     transcript.boundary_index[n + 1]);
    const double r = residual(step_map, utt[n - 1], utt[n], tr);
    stats.max = std::max(stats.max, r);
    sum += r;
  }
  stats.mean = sum / static_cast<double>(utt.size() - 1);
  return stats;
}

}  // namespace igv
