#include "igv/dynamics.hpp"

#include <cmath>
#include <string>

#include "igv/error.hpp"

namespace igv {

namespace {

std::string dims(Eigen::Index a, Eigen::Index b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

void expect_size(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    fail(ErrorKind::InvalidInput,
         std::string(what) + " has wrong dimension: " +
             dims(v.size(), static_cast<Eigen::Index>(n)));
  }
}

}  // namespace

FeedbackFamily FeedbackFamily::affine(Matrix P, Matrix Q, Matrix R) {
  if (P.rows() != Q.rows() || P.rows() != R.rows() || P.rows() == 0) {
    fail(ErrorKind::InvalidInput, "P, Q, R must share a non-zero row count");
  }
  if (P.cols() == 0 || Q.cols() == 0 || R.cols() == 0) {
    fail(ErrorKind::InvalidInput, "P, Q, R must have at least one column");
  }
  if (!P.allFinite() || !Q.allFinite() || !R.allFinite()) {
    fail(ErrorKind::InvalidInput, "feedback gains must be finite");
  }
  FeedbackFamily f;
  f.kind_ = Kind::AffineBuiltin;
  f.control_dim_ = static_cast<std::size_t>(P.rows());
  f.state_dim_ = static_cast<std::size_t>(P.cols());
  f.intention_dim_ = static_cast<std::size_t>(Q.cols());
  f.epsilon_dim_ = static_cast<std::size_t>(R.cols());
  const Matrix gram = R.transpose() * R;
  f.recovery_supported_ =
      Eigen::FullPivLU<Matrix>(gram).rank() == gram.cols();
  f.P_ = std::move(P);
  f.Q_ = std::move(Q);
  f.R_ = std::move(R);
  return f;
}

FeedbackFamily FeedbackFamily::custom(std::size_t control_dim,
                                      std::size_t state_dim,
                                      std::size_t intention_dim,
                                      std::size_t epsilon_dim, CustomFn fn) {
  if (control_dim == 0 || state_dim == 0 || intention_dim == 0 ||
      epsilon_dim == 0) {
    fail(ErrorKind::InvalidInput, "custom feedback dimensions must be >= 1");
  }
  if (!fn) fail(ErrorKind::InvalidInput, "custom feedback needs a function");
  FeedbackFamily f;
  f.kind_ = Kind::Custom;
  f.control_dim_ = control_dim;
  f.state_dim_ = state_dim;
  f.intention_dim_ = intention_dim;
  f.epsilon_dim_ = epsilon_dim;
  f.custom_ = std::move(fn);
  return f;
}

void GameDefinition::validate() const {
  if (state_dim == 0 || intention_dim == 0 || control_dims[0] == 0 ||
      control_dims[1] == 0 || epsilon_dims[0] == 0 || epsilon_dims[1] == 0) {
    fail(ErrorKind::InvalidInput, "game dimensions must be >= 1");
  }
  if (jet_order > 2) {
    fail(ErrorKind::InvalidInput, "jet_order above 2 is not supported");
  }
  if (!phi_dynamics || !xi_dynamics) {
    fail(ErrorKind::InvalidInput, "game is missing a dynamics map");
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& fb = feedback[i];
    const std::string who = "player " + std::to_string(i + 1) + " feedback ";
    if (fb.control_dim() != control_dims[i] || fb.state_dim() != state_dim ||
        fb.intention_dim() != intention_dim ||
        fb.epsilon_dim() != epsilon_dims[i]) {
      fail(ErrorKind::InvalidInput, who + "dimensions disagree with the game");
    }
    if (fb.is_affine() && jet_order != 0) {
      fail(ErrorKind::InvalidInput, who + "is affine but jet_order != 0");
    }
  }
}

GameState Trajectory::state_at(std::size_t k) const {
  if (k >= size()) fail(ErrorKind::InvalidInput, "trajectory index past end");
  return GameState{grid.time(k), phi.row(static_cast<Eigen::Index>(k)).transpose(),
                   xi.row(static_cast<Eigen::Index>(k)).transpose()};
}

void Trajectory::validate() const {
  if (grid.size == 0 || !(grid.dt > 0.0)) {
    fail(ErrorKind::InvalidInput, "trajectory grid is empty or has dt <= 0");
  }
  const auto n = static_cast<Eigen::Index>(grid.size);
  auto check = [n](const Matrix& m, const char* what) {
    if (m.rows() != n) {
      fail(ErrorKind::InvalidInput,
           std::string(what) + " row count differs from grid length");
    }
    if (!m.allFinite()) {
      fail(ErrorKind::InvalidInput, std::string(what) + " has non-finite entries");
    }
  };
  check(phi, "phi");
  check(xi, "xi");
  for (std::size_t i = 0; i < 2; ++i) {
    check(u_free[i], "u_free");
    check(u_realized[i], "u_realized");
    if (epsilon_truth) check((*epsilon_truth)[i], "epsilon_truth");
  }
}

Vector eval_feedback(const FeedbackFamily& family, const Vector& u_free,
                     std::span<const Vector> phi_jet, const Vector& xi,
                     const Vector& epsilon) {
  if (phi_jet.empty()) fail(ErrorKind::InvalidInput, "phi jet is empty");
  expect_size(u_free, family.control_dim(), "u_free");
  for (const auto& d : phi_jet) expect_size(d, family.state_dim(), "phi jet entry");
  expect_size(xi, family.intention_dim(), "xi");
  expect_size(epsilon, family.epsilon_dim(), "epsilon");

  if (family.is_affine()) {
    Vector u = u_free;
    u.noalias() += family.P() * phi_jet[0];
    u.noalias() += family.Q() * xi;
    u.noalias() += family.R() * epsilon;
    return u;
  }
  Vector u = family.custom_fn()(u_free, phi_jet, xi, epsilon);
  expect_size(u, family.control_dim(), "custom feedback output");
  return u;
}

namespace {

struct Derivative {
  Vector dphi;
  Vector dxi;
};

Derivative evaluate_rhs(const GameDefinition& game, const Vector& phi,
                        const Vector& xi, const PerPlayer<Vector>& u_free,
                        const PerPlayer<Vector>& epsilon,
                        std::span<const Vector> held_jet, double t) {
  std::vector<Vector> jet;
  jet.reserve(held_jet.size() + 1);
  jet.push_back(phi);
  jet.insert(jet.end(), held_jet.begin(), held_jet.end());

  const Vector u1 = eval_feedback(game.feedback[0], u_free[0], jet, xi, epsilon[0]);
  const Vector u2 = eval_feedback(game.feedback[1], u_free[1], jet, xi, epsilon[1]);
  Derivative d{game.phi_dynamics(phi, xi, u1, u2), game.xi_dynamics(xi, phi, u1, u2)};
  if (static_cast<std::size_t>(d.dphi.size()) != game.state_dim ||
      static_cast<std::size_t>(d.dxi.size()) != game.intention_dim) {
    fail(ErrorKind::InvalidInput, "dynamics map returned the wrong dimension");
  }
  if (!d.dphi.allFinite() || !d.dxi.allFinite()) {
    throw Error::integration_fault(t, "non-finite derivative");
  }
  return d;
}

}  // namespace

GameState step_integrate(const GameDefinition& game, const GameState& state,
                         const PerPlayer<Vector>& u_free,
                         const PerPlayer<Vector>& epsilon, double dt,
                         std::span<const Vector> held_jet) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    fail(ErrorKind::InvalidInput, "step size must be positive and finite");
  }
  if (held_jet.size() != game.jet_order) {
    fail(ErrorKind::InvalidInput, "held jet length must equal jet_order");
  }
  expect_size(state.phi, game.state_dim, "phi");
  expect_size(state.xi, game.intention_dim, "xi");
  if (!state.phi.allFinite() || !state.xi.allFinite()) {
    fail(ErrorKind::InvalidInput, "state has non-finite entries");
  }

  const double t = state.time;
  const double h2 = 0.5 * dt;
  const auto k1 = evaluate_rhs(game, state.phi, state.xi, u_free, epsilon, held_jet, t);
  const auto k2 = evaluate_rhs(game, state.phi + h2 * k1.dphi, state.xi + h2 * k1.dxi,
                               u_free, epsilon, held_jet, t + h2);
  const auto k3 = evaluate_rhs(game, state.phi + h2 * k2.dphi, state.xi + h2 * k2.dxi,
                               u_free, epsilon, held_jet, t + h2);
  const auto k4 = evaluate_rhs(game, state.phi + dt * k3.dphi, state.xi + dt * k3.dxi,
                               u_free, epsilon, held_jet, t + dt);

  const double w = dt / 6.0;
  GameState next;
  next.time = t + dt;
  next.phi = state.phi + w * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi);
  next.xi = state.xi + w * (k1.dxi + 2.0 * k2.dxi + 2.0 * k3.dxi + k4.dxi);
  if (!next.phi.allFinite() || !next.xi.allFinite()) {
    throw Error::integration_fault(t + dt, "state left the finite range");
  }
  return next;
}

Simulator::Simulator(const GameDefinition& game, GameState init,
                     PerPlayer<Signal> u_free, PerPlayer<Signal> epsilon,
                     TimeGrid grid)
    : game_(game),
      state_(std::move(init)),
      u_free_(std::move(u_free)),
      epsilon_(std::move(epsilon)) {
  game.validate();
  if (grid.size == 0 || !(grid.dt > 0.0)) {
    fail(ErrorKind::InvalidInput, "simulation grid is empty");
  }
  expect_size(state_.phi, game.state_dim, "initial phi");
  expect_size(state_.xi, game.intention_dim, "initial xi");
  if (!state_.phi.allFinite() || !state_.xi.allFinite()) {
    fail(ErrorKind::InvalidInput, "initial state has non-finite entries");
  }
  for (std::size_t i = 0; i < 2; ++i) {
    if (!u_free_[i] || u_free_[i].dim() != game.control_dims[i]) {
      fail(ErrorKind::InvalidInput, "u_free signal dimension mismatch");
    }
    if (!epsilon_[i] || epsilon_[i].dim() != game.epsilon_dims[i]) {
      fail(ErrorKind::InvalidInput, "epsilon signal dimension mismatch");
    }
  }
  state_.time = grid.t0;

  const auto n = static_cast<Eigen::Index>(grid.size);
  traj_.grid = grid;
  traj_.phi.resize(n, static_cast<Eigen::Index>(game.state_dim));
  traj_.xi.resize(n, static_cast<Eigen::Index>(game.intention_dim));
  PerPlayer<Matrix> eps;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto c = static_cast<Eigen::Index>(game.control_dims[i]);
    traj_.u_free[i].resize(n, c);
    traj_.u_realized[i].resize(n, c);
    eps[i].resize(n, static_cast<Eigen::Index>(game.epsilon_dims[i]));
  }
  traj_.epsilon_truth = std::move(eps);
  record_current();
}

std::vector<Vector> Simulator::jet_at(std::size_t k) const {
  std::vector<Vector> jet;
  const auto& phi = traj_.phi;
  const double dt = traj_.grid.dt;
  const auto kk = static_cast<Eigen::Index>(k);
  for (std::size_t order = 1; order <= game_.jet_order; ++order) {
    if (k < order) {
      jet.push_back(Vector::Zero(static_cast<Eigen::Index>(game_.state_dim)));
    } else if (order == 1) {
      jet.push_back((phi.row(kk) - phi.row(kk - 1)).transpose() / dt);
    } else {
      jet.push_back((phi.row(kk) - 2.0 * phi.row(kk - 1) + phi.row(kk - 2)).transpose() /
                    (dt * dt));
    }
  }
  return jet;
}

void Simulator::record_current() {
  const std::size_t k = recorded_;
  const auto kk = static_cast<Eigen::Index>(k);
  const double t = traj_.grid.time(k);
  traj_.phi.row(kk) = state_.phi.transpose();
  traj_.xi.row(kk) = state_.xi.transpose();

  std::vector<Vector> jet{state_.phi};
  const auto higher = jet_at(k);
  jet.insert(jet.end(), higher.begin(), higher.end());
  for (std::size_t i = 0; i < 2; ++i) {
    const Vector uf = u_free_[i](t);
    const Vector eps = epsilon_[i](t);
    expect_size(uf, game_.control_dims[i], "u_free sample");
    expect_size(eps, game_.epsilon_dims[i], "epsilon sample");
    if (!uf.allFinite() || !eps.allFinite()) {
      throw Error::integration_fault(t, "non-finite exogenous signal");
    }
    traj_.u_free[i].row(kk) = uf.transpose();
    (*traj_.epsilon_truth)[i].row(kk) = eps.transpose();
    traj_.u_realized[i].row(kk) =
        eval_feedback(game_.feedback[i], uf, jet, state_.xi, eps).transpose();
  }
  ++recorded_;
}

void Simulator::advance_to(std::size_t k) {
  if (k >= traj_.grid.size) fail(ErrorKind::InvalidInput, "advance past grid end");
  while (recorded_ <= k) {
    const std::size_t cur = recorded_ - 1;
    const auto kk = static_cast<Eigen::Index>(cur);
    PerPlayer<Vector> uf, eps;
    for (std::size_t i = 0; i < 2; ++i) {
      uf[i] = traj_.u_free[i].row(kk).transpose();
      eps[i] = (*traj_.epsilon_truth)[i].row(kk).transpose();
    }
    const auto held = jet_at(cur);
    state_ = step_integrate(game_, state_, uf, eps, traj_.grid.dt, held);
    state_.time = traj_.grid.time(cur + 1);
    record_current();
  }
}

Trajectory Simulator::finish() && {
  if (recorded_ != traj_.grid.size) advance_to(traj_.grid.size - 1);
  return std::move(traj_);
}

Trajectory simulate(const GameDefinition& game, const GameState& init,
                    const PerPlayer<Signal>& u_free_signals,
                    const PerPlayer<Signal>& epsilon_signals, double t_end,
                    double dt) {
  if (!(t_end > init.time)) {
    fail(ErrorKind::InvalidInput, "t_end must exceed the initial time");
  }
  const auto grid = TimeGrid::covering(init.time, t_end, dt);
  Simulator sim(game, init, u_free_signals, epsilon_signals, grid);
  return std::move(sim).finish();
}

}  // namespace igv
