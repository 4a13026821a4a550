#include "igv/scenarios.hpp"

#include <cmath>
#include <functional>
#include <set>

#include "igv/error.hpp"
#include "igv/quadrature.hpp"
#include "igv/rng.hpp"

namespace igv {

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
Vector vec1(double v) { return Vector::Constant(1, v); }

}  // namespace

GameDefinition make_linear_game(const LinearGameParams& p) {
  const Eigen::Index n = p.A.rows();
  const Eigen::Index m = p.D.rows();
  const bool ok = p.A.cols() == n && p.D.cols() == m && p.C.rows() == n && p.C.cols() == m &&
                  p.B1.rows() == n && p.B2.rows() == n && p.E1.rows() == m &&
                  p.E2.rows() == m && p.E1.cols() == p.B1.cols() &&
                  p.E2.cols() == p.B2.cols() && p.phi0.size() == n && p.xi0.size() == m;
  if (!ok || n == 0 || m == 0) {
    fail(ErrorKind::Schema, "linear game matrices are dimensionally inconsistent");
  }
  GameDefinition g;
  g.state_dim = static_cast<std::size_t>(n);
  g.intention_dim = static_cast<std::size_t>(m);
  g.control_dims = {static_cast<std::size_t>(p.B1.cols()),
                    static_cast<std::size_t>(p.B2.cols())};
  g.epsilon_dims = {static_cast<std::size_t>(p.R[0].cols()),
                    static_cast<std::size_t>(p.R[1].cols())};
  g.phi_dynamics = [A = p.A, B1 = p.B1, B2 = p.B2, C = p.C](
                       const Vector& phi, const Vector& xi, const Vector& u1,
                       const Vector& u2) -> Vector {
    return A * phi + B1 * u1 + B2 * u2 + C * xi;
  };
  g.xi_dynamics = [D = p.D, E1 = p.E1, E2 = p.E2](const Vector& xi, const Vector&,
                                                  const Vector& u1,
                                                  const Vector& u2) -> Vector {
    return D * xi + E1 * u1 + E2 * u2;
  };
  for (std::size_t i = 0; i < 2; ++i) {
    try {
      g.feedback[i] = FeedbackFamily::affine(p.P[i], p.Q[i], p.R[i]);
    } catch (const Error& e) {
      fail(ErrorKind::Schema, e.what());
    }
  }
  try {
    g.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Schema, e.what());
  }
  return g;
}

Matrix closed_loop_matrix(const LinearGameParams& p) {
  const Eigen::Index n = p.A.rows();
  const Eigen::Index m = p.D.rows();
  Matrix a(n + m, n + m);
  a.topLeftCorner(n, n) = p.A + p.B1 * p.P[0] + p.B2 * p.P[1];
  a.topRightCorner(n, m) = p.C + p.B1 * p.Q[0] + p.B2 * p.Q[1];
  a.bottomLeftCorner(m, n) = p.E1 * p.P[0] + p.E2 * p.P[1];
  a.bottomRightCorner(m, m) = p.D + p.E1 * p.Q[0] + p.E2 * p.Q[1];
  return a;
}

double spectral_abscissa(const Matrix& a) {
  const Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

PerPlayer<std::vector<Vector>> planted_recursion_values(
    const RecursionPlan& plan, std::size_t epochs,
    const PerPlayer<std::vector<Vector>>& v_plan) {
  if (epochs == 0) fail(ErrorKind::InvalidInput, "recursion plan needs an epoch");
  PerPlayer<std::vector<Vector>> omega;
  for (std::size_t i = 0; i < 2; ++i) {
    if (v_plan[i].size() != epochs) {
      fail(ErrorKind::InvalidInput, "v_plan length must equal the epoch count");
    }
    omega[i].push_back(plan.omega0[i]);
    for (std::size_t n = 1; n < epochs; ++n) {
      if (v_plan[i][n].size() != plan.omega0[i].size()) {
        fail(ErrorKind::InvalidInput, "v_plan entries must match the epsilon dimension");
      }
      Vector next = plan.alpha * omega[i].back() + plan.beta * v_plan[i][n];
      next.array() += plan.bias;
      omega[i].push_back(std::move(next));
    }
  }
  return omega;
}

PerPlayer<Signal> planted_recursion_epsilon(const RecursionPlan& plan,
                                            const std::vector<double>& boundaries,
                                            const PerPlayer<std::vector<Vector>>& v_plan) {
  if (boundaries.size() < 2) fail(ErrorKind::InvalidInput, "epoch plan needs two boundaries");
  for (std::size_t j = 1; j < boundaries.size(); ++j) {
    if (!(boundaries[j] > boundaries[j - 1])) {
      fail(ErrorKind::InvalidInput, "epoch plan must be strictly increasing");
    }
  }
  const std::size_t epochs = boundaries.size() - 1;
  const auto omega = planted_recursion_values(plan, epochs, v_plan);
  const std::vector<double> interior(boundaries.begin() + 1, boundaries.end() - 1);
  return {signals::piecewise_constant(interior, omega[0]),
          signals::piecewise_constant(interior, omega[1])};
}

Trajectory Scenario::simulate() const {
  return igv::simulate(game, init, u_free, epsilon, t_end, dt);
}

namespace {

LinearGameParams scalar_game() {
  LinearGameParams p;
  p.A = scalar(-1.0);
  p.B1 = scalar(1.0);
  p.B2 = scalar(0.5);
  p.C = scalar(0.5);
  p.D = scalar(-2.0);
  p.E1 = scalar(0.3);
  p.E2 = scalar(-0.2);
  p.P = {scalar(-0.5), scalar(0.2)};
  p.Q = {scalar(0.1), scalar(0.0)};
  p.R = {scalar(1.0), scalar(2.0)};
  p.phi0 = vec1(1.0);
  p.xi0 = vec1(0.0);
  return p;
}

LinearGameParams dialogue_game() {
  LinearGameParams p;
  p.A = scalar(0.0);
  p.B1 = scalar(0.0);
  p.B2 = scalar(0.0);
  p.C = Matrix::Zero(1, 2);
  p.D = Matrix::Zero(2, 2);
  p.D.diagonal() << -1.0, -0.5;
  p.E1 = Matrix(2, 1);
  p.E1 << 1.0, 0.2;
  p.E2 = Matrix(2, 1);
  p.E2 << -0.3, 1.0;
  p.P = {scalar(0.0), scalar(0.0)};
  p.Q = {Matrix(1, 2), Matrix(1, 2)};
  p.Q[0] << 0.2, 0.0;
  p.Q[1] << 0.0, -0.1;
  p.R = {scalar(1.0), scalar(1.0)};
  p.phi0 = vec1(0.0);
  p.xi0 = Vector::Zero(2);
  return p;
}

PerPlayer<Signal> smooth_free_controls() {
  return {signals::sinusoid(vec1(0.1), vec1(0.3), 1.3, 0.0),
          signals::sinusoid(vec1(-0.1), vec1(0.2), 0.7, 0.5)};
}

PerPlayer<Signal> walk_free_controls(SplitMix64& rng, double t_end) {
  const auto s1 = rng.next();
  const auto s2 = rng.next();
  return {signals::random_walk(s1, vec1(0.0), 0.4, 0.0, t_end, 0.25),
          signals::random_walk(s2, vec1(0.0), 0.4, 0.0, t_end, 0.25)};
}

std::vector<double> uniform_plan(double t0, double t_end, double step) {
  std::vector<double> b;
  const auto n = static_cast<std::size_t>(std::floor((t_end - t0) / step + 1e-9));
  for (std::size_t j = 0; j <= n; ++j) b.push_back(t0 + static_cast<double>(j) * step);
  return b;
}

// Matrix keys and the slot each one overrides.
std::map<std::string, Matrix*> matrix_slots(LinearGameParams& p) {
  return {{"A", &p.A},       {"B1", &p.B1},     {"B2", &p.B2},   {"C", &p.C},
          {"D", &p.D},       {"E1", &p.E1},     {"E2", &p.E2},   {"P1", &p.P[0]},
          {"P2", &p.P[1]},   {"Q1", &p.Q[0]},   {"Q2", &p.Q[1]}, {"R1", &p.R[0]},
          {"R2", &p.R[1]}};
}

void assign_shaped(const std::string& key, const Matrix& value, Matrix* slot) {
  if (value.rows() != slot->rows() || value.cols() != slot->cols()) {
    fail(ErrorKind::Schema, "override '" + key + "' must be " +
                                std::to_string(slot->rows()) + "x" +
                                std::to_string(slot->cols()));
  }
  if (!value.allFinite()) fail(ErrorKind::Schema, "override '" + key + "' is not finite");
  *slot = value;
}

void assign_vector(const std::string& key, const Matrix& value, Vector* slot) {
  Matrix as_col = value;
  if (value.rows() == 1 && value.cols() == slot->size()) as_col = value.transpose();
  Matrix target = *slot;
  assign_shaped(key, as_col, &target);
  *slot = target.col(0);
}

struct Recipe {
  std::string summary;
  bool linear = true;
  std::set<std::string> scalars;  // accepted scalar overrides
  bool accepts_m = false;
  std::function<void(Scenario&, SplitMix64&, const ScenarioOverrides&)> finish;
  std::function<LinearGameParams()> params;
  double t_end = 10.0;
  double dt = 0.01;
  std::uint64_t seed = 1;
};

double scalar_or(const ScenarioOverrides& o, const char* key, double fallback) {
  const auto it = o.scalars.find(key);
  return it == o.scalars.end() ? fallback : it->second;
}

Matrix m_or_identity(const ScenarioOverrides& o, Eigen::Index dim) {
  const auto it = o.matrices.find("M");
  if (it == o.matrices.end()) return Matrix::Identity(dim, dim);
  if (it->second.cols() != dim || it->second.rows() == 0) {
    fail(ErrorKind::Schema, "override 'M' must have " + std::to_string(dim) + " columns");
  }
  return it->second;
}

// Dialogue scenarios: a continuous intention field with the built-in mean
// functionals and an affine discrete step φ_n = α φ_{n-1} + β v_n.
void finish_dialogue(Scenario& s, SplitMix64& rng, const ScenarioOverrides& o,
                     bool coherent) {
  const double alpha = scalar_or(o, "alpha", 0.6);
  const double beta = scalar_or(o, "beta", 0.8);
  const Matrix M = m_or_identity(o, 2);
  const Eigen::Index phi_dim = M.rows();
  if (phi_dim != 2) fail(ErrorKind::Schema, "override 'M' must be 2x2 for dialogue scenarios");

  s.u_free = walk_free_controls(rng, s.t_end);
  const auto schedule = uniform_plan(0.0, s.t_end, 1.0);
  const std::size_t epochs = schedule.size() - 1;
  const TimeGrid grid = TimeGrid::covering(0.0, s.t_end, s.dt);

  // u° sampled on the grid exactly as the simulator will record it.
  PerPlayer<Matrix> u_samples;
  for (std::size_t i = 0; i < 2; ++i) {
    u_samples[i].resize(static_cast<Eigen::Index>(grid.size), 1);
    for (std::size_t k = 0; k < grid.size; ++k) {
      u_samples[i](static_cast<Eigen::Index>(k), 0) = s.u_free[i](grid.time(k))[0];
    }
  }
  std::vector<std::size_t> idx;
  for (double t : schedule) {
    std::size_t k = 0;
    if (!grid.find_index(t, &k)) fail(ErrorKind::Schema, "dialogue schedule off the grid");
    idx.push_back(k);
  }

  PerPlayer<std::vector<Vector>> eps_values;
  Vector phi_prev;
  const Eigen::ColPivHouseholderQR<Matrix> m_qr(M);
  for (std::size_t n = 0; n < epochs; ++n) {
    Vector eps(2);
    if (!coherent) {
      eps << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    } else if (n == 0) {
      eps << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5);
    } else {
      Vector v(2);
      v << trapezoid_mean(held_trace(u_samples[0], idx[n], idx[n + 1]))[0],
          trapezoid_mean(held_trace(u_samples[1], idx[n], idx[n + 1]))[0];
      const Vector target = alpha * phi_prev + beta * v;
      eps = m_qr.solve(target);
    }
    phi_prev = M * eps;
    eps_values[0].push_back(eps.head(1));
    eps_values[1].push_back(eps.tail(1));
  }
  const std::vector<double> interior(schedule.begin() + 1, schedule.end() - 1);
  s.epsilon = {signals::piecewise_constant(interior, eps_values[0]),
               signals::piecewise_constant(interior, eps_values[1])};
  s.epoch_plan = schedule;

  DialogueDefinition d;
  d.continuous = s.game;
  d.init = s.init;
  d.schedule = schedule;
  d.state_map = mean_epsilon_state(M);
  d.control_map = mean_free_control();
  d.step_map = affine_step_map(alpha * Matrix::Identity(2, 2), beta * Matrix::Identity(2, 2),
                               Vector::Zero(2));
  s.dialogue = std::move(d);
}

void finish_hidden_dialogue(Scenario& s, SplitMix64& rng, const ScenarioOverrides& o) {
  RecursionPlan plan;
  plan.alpha = scalar_or(o, "alpha", 0.8);
  plan.beta = scalar_or(o, "beta", 0.5);
  plan.bias = scalar_or(o, "bias", 0.1);
  if (plan.beta == 0.0) fail(ErrorKind::Schema, "override 'beta' must be non-zero");
  plan.omega0 = {vec1(rng.uniform(-0.5, 0.5)), vec1(rng.uniform(-0.5, 0.5))};

  const auto boundaries = uniform_plan(0.0, s.t_end, 1.0);
  const std::size_t epochs = boundaries.size() - 1;
  // v_n is chosen so that each player's ε jumps by 0.6..1.0 with
  // alternating sign at every boundary.
  PerPlayer<std::vector<Vector>> v_plan;
  for (std::size_t i = 0; i < 2; ++i) {
    double prev = plan.omega0[i][0];
    v_plan[i].push_back(vec1(rng.uniform(-1.0, 1.0)));
    for (std::size_t n = 1; n < epochs; ++n) {
      const double sign = ((n + i) % 2 == 0) ? 1.0 : -1.0;
      const double jump = sign * rng.uniform(0.6, 1.0);
      const double v = (prev + jump - plan.alpha * prev - plan.bias) / plan.beta;
      v_plan[i].push_back(vec1(v));
      prev = plan.alpha * prev + plan.beta * v + plan.bias;
    }
  }
  s.epsilon = planted_recursion_epsilon(plan, boundaries, v_plan);
  const std::vector<double> interior(boundaries.begin() + 1, boundaries.end() - 1);
  s.u_free = {signals::piecewise_constant(interior, v_plan[0]),
              signals::piecewise_constant(interior, v_plan[1])};
  s.epoch_plan = boundaries;
  s.recursion = plan;
}

const std::map<std::string, Recipe>& recipes() {
  static const std::map<std::string, Recipe> table = [] {
    std::map<std::string, Recipe> r;

    Recipe affine;
    affine.summary = "scalar closed-loop linear game, constant u0 and epsilon";
    affine.params = scalar_game;
    affine.finish = [](Scenario& s, SplitMix64&, const ScenarioOverrides&) {
      s.u_free = {signals::constant(vec1(0.2)), signals::constant(vec1(-0.1))};
      s.epsilon = {signals::constant(vec1(0.5)), signals::constant(vec1(-0.5))};
      s.pinned_abscissa = -1.685;
    };
    r["affine-1"] = affine;

    Recipe constant;
    constant.summary = "scalar game, sinusoidal u0, constant epsilon";
    constant.params = scalar_game;
    constant.finish = [](Scenario& s, SplitMix64&, const ScenarioOverrides&) {
      s.u_free = smooth_free_controls();
      s.epsilon = {signals::constant(vec1(0.5)), signals::constant(vec1(-0.5))};
      s.anchors = {1.0, 3.0, 5.0, 7.0};
      s.horizon = 1.0;
    };
    r["const-1"] = constant;

    Recipe drift;
    drift.summary = "scalar game, epsilon_1 drifts linearly after t=2";
    drift.params = scalar_game;
    drift.t_end = 6.0;
    drift.finish = [](Scenario& s, SplitMix64&, const ScenarioOverrides&) {
      s.u_free = smooth_free_controls();
      s.epsilon = {signals::linear_drift(vec1(0.3), vec1(0.2), 2.0),
                   signals::constant(vec1(-0.2))};
      s.anchors = {2.0};
      s.horizon = 1.0;
    };
    r["drift-1"] = drift;

    Recipe jump;
    jump.summary = "scalar game, epsilon_1 jumps 0.2 -> 0.8 at t=5";
    jump.params = scalar_game;
    jump.finish = [](Scenario& s, SplitMix64&, const ScenarioOverrides&) {
      s.u_free = smooth_free_controls();
      s.epsilon = {signals::piecewise_constant({5.0}, {vec1(0.2), vec1(0.8)}),
                   signals::constant(vec1(-0.2))};
      s.anchors = {4.5};
      s.horizon = 1.0;
    };
    r["jump-1"] = jump;

    Recipe dlg;
    dlg.summary = "consistent dialogue: epsilon generated by the discrete step map";
    dlg.params = dialogue_game;
    dlg.seed = 3;
    dlg.scalars = {"alpha", "beta"};
    dlg.accepts_m = true;
    dlg.finish = [](Scenario& s, SplitMix64& rng, const ScenarioOverrides& o) {
      finish_dialogue(s, rng, o, true);
    };
    r["dlg-1"] = dlg;

    Recipe incoherent = dlg;
    incoherent.summary = "incoherent dialogue: epsilon i.i.d. per epoch";
    incoherent.seed = 5;
    incoherent.finish = [](Scenario& s, SplitMix64& rng, const ScenarioOverrides& o) {
      finish_dialogue(s, rng, o, false);
    };
    r["dlg-incoherent"] = incoherent;

    Recipe verb;
    verb.summary = "scalar game, random-walk u0, irregular epsilon plateaus";
    verb.params = scalar_game;
    verb.seed = 11;
    verb.finish = [](Scenario& s, SplitMix64& rng, const ScenarioOverrides&) {
      s.u_free = walk_free_controls(rng, s.t_end);
      const std::vector<double> bps{2.5, 4.0, 6.5, 8.0};
      PerPlayer<std::vector<Vector>> vals;
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j <= bps.size(); ++j) {
          vals[i].push_back(vec1(rng.uniform(-1.0, 1.0)));
        }
      }
      s.epsilon = {signals::piecewise_constant(bps, vals[0]),
                   signals::piecewise_constant(bps, vals[1])};
    };
    r["verb-1"] = verb;

    Recipe hidden;
    hidden.summary = "epsilon from a planted linear recursion, constant per epoch";
    hidden.params = scalar_game;
    hidden.seed = 7;
    hidden.t_end = 20.0;
    hidden.scalars = {"alpha", "beta", "bias"};
    hidden.finish = finish_hidden_dialogue;
    r["hidden-dialogue-1"] = hidden;

    Recipe white;
    white.summary = "epsilon resampled i.i.d. every 0.5 time units";
    white.params = scalar_game;
    white.seed = 13;
    white.t_end = 30.0;
    white.finish = [](Scenario& s, SplitMix64& rng, const ScenarioOverrides&) {
      s.u_free = walk_free_controls(rng, s.t_end);
      const auto plan = uniform_plan(0.0, s.t_end, 0.5);
      const std::vector<double> interior(plan.begin() + 1, plan.end() - 1);
      PerPlayer<std::vector<Vector>> vals;
      for (std::size_t j = 0; j + 1 < plan.size(); ++j) {
        for (std::size_t i = 0; i < 2; ++i) vals[i].push_back(vec1(rng.uniform(-1.0, 1.0)));
      }
      s.epsilon = {signals::piecewise_constant(interior, vals[0]),
                   signals::piecewise_constant(interior, vals[1])};
      s.epoch_plan = plan;
    };
    r["white-1"] = white;

    Recipe memory;
    memory.summary = "exponential-memory feedbacks reduced to an intention field";
    memory.linear = false;
    memory.t_end = 5.0;
    memory.dt = 1e-3;
    memory.finish = [](Scenario& s, SplitMix64&, const ScenarioOverrides&) {
      MemorySetup m;
      m.base = [](const Vector& phi, const Vector& u1, const Vector& u2) -> Vector {
        return -phi + u1 + 0.5 * u2 + 0.2 * phi.array().sin().matrix();
      };
      m.spec.state_dim = 1;
      m.spec.control_dims = {1, 1};
      m.spec.players[0].kernel = {{0.8, 1.5}, {-0.3, 4.0}};
      m.spec.players[0].observe = [](const Vector& phi) -> Vector { return phi; };
      m.spec.players[0].respond = [](const Vector& u, const Vector& mem) -> Vector {
        return u - mem;
      };
      m.spec.players[1].kernel = {{0.5, 0.7}};
      m.spec.players[1].observe = [](const Vector& phi) -> Vector {
        return phi.array().sin().matrix();
      };
      m.spec.players[1].respond = [](const Vector& u, const Vector& mem) -> Vector {
        return u + 0.5 * mem;
      };
      s.game = augment_memory_feedback(m.base, m.spec);
      s.init.phi = vec1(1.0);
      s.init.xi = Vector::Zero(static_cast<Eigen::Index>(s.game.intention_dim));
      s.u_free = smooth_free_controls();
      s.epsilon = {signals::zero(1), signals::zero(1)};
      s.memory = std::move(m);
    };
    r["memory-1"] = memory;
    return r;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{
      "affine-1", "const-1",  "drift-1",           "jump-1",  "dlg-1",
      "dlg-incoherent", "verb-1", "hidden-dialogue-1", "white-1", "memory-1"};
  return names;
}

Scenario build_scenario(const std::string& name, const ScenarioOverrides& overrides) {
  const auto& table = recipes();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const auto& n : catalog_names()) known += (known.empty() ? "" : ", ") + n;
    fail(ErrorKind::Schema, "unknown scenario '" + name + "'; known: " + known);
  }
  const Recipe& recipe = it->second;

  Scenario s;
  s.name = name;
  s.summary = recipe.summary;
  s.seed = overrides.seed.value_or(recipe.seed);
  s.t_end = overrides.t_end.value_or(recipe.t_end);
  s.dt = overrides.dt.value_or(recipe.dt);
  if (!(s.dt > 0.0) || !std::isfinite(s.dt) || !(s.t_end > 0.0) || !std::isfinite(s.t_end)) {
    fail(ErrorKind::Schema, "grid overrides need t_end > 0 and dt > 0");
  }
  if (s.t_end / s.dt > 1e8) fail(ErrorKind::Schema, "grid too fine for t_end / dt");

  for (const auto& [key, value] : overrides.scalars) {
    if (!recipe.scalars.count(key)) {
      fail(ErrorKind::Schema, "override '" + key + "' does not apply to " + name);
    }
    if (!std::isfinite(value)) fail(ErrorKind::Schema, "override '" + key + "' is not finite");
  }

  if (recipe.linear) {
    LinearGameParams p = recipe.params();
    auto slots = matrix_slots(p);
    for (const auto& [key, value] : overrides.matrices) {
      if (key == "M") {
        if (!recipe.accepts_m) fail(ErrorKind::Schema, "override 'M' does not apply to " + name);
      } else if (key == "phi0") {
        assign_vector(key, value, &p.phi0);
      } else if (key == "xi0") {
        assign_vector(key, value, &p.xi0);
      } else if (const auto slot = slots.find(key); slot != slots.end()) {
        assign_shaped(key, value, slot->second);
      } else {
        fail(ErrorKind::Schema, "unknown override '" + key + "'");
      }
    }
    s.game = make_linear_game(p);
    s.init = GameState{0.0, p.phi0, p.xi0};
    s.params = p;
  } else if (!overrides.matrices.empty()) {
    fail(ErrorKind::Schema, "matrix overrides do not apply to " + name);
  }

  SplitMix64 rng(s.seed);
  recipe.finish(s, rng, overrides);
  return s;
}

}  // namespace igv
