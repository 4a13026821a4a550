#include <doctest.h>

#include "../oracles.hpp"
#include "igv/dialogue.hpp"
#include "igv/error.hpp"
#include "igv/quadrature.hpp"
#include "igv/scenarios.hpp"

using namespace igv;

TEST_CASE("trapezoid mean agrees with the panel-sum oracle") {
  Matrix x(7, 2);
  for (Eigen::Index k = 0; k < 7; ++k) {
    x(k, 0) = std::cos(0.4 * static_cast<double>(k));
    x(k, 1) = static_cast<double>(k * k);
  }
  const Vector ours = trapezoid_mean(x);
  const Vector ref = oracle::trapezoid_mean(x, 0.25);
  CHECK(ours[0] == doctest::Approx(ref[0]).epsilon(1e-14));
  CHECK(ours[1] == doctest::Approx(ref[1]).epsilon(1e-14));
  CHECK_THROWS_AS(trapezoid_mean(Matrix::Zero(1, 2)), Error);
}

TEST_CASE("held traces close with the left limit") {
  Matrix x(5, 1);
  x << 0.0, 1.0, 2.0, 3.0, 4.0;
  const Matrix h = held_trace(x, 1, 3);
  REQUIRE(h.rows() == 3);
  CHECK(h(0, 0) == 1.0);
  CHECK(h(1, 0) == 2.0);
  CHECK(h(2, 0) == 2.0);
  const Matrix s = state_trace(x, 1, 3);
  CHECK(s(2, 0) == 3.0);
}

TEST_CASE("utterance functionals") {
  const PerPlayer<Matrix> eps{Matrix::Constant(4, 1, 0.5), Matrix::Constant(4, 1, -1.0)};
  const Matrix m{{2.0, 0.0}, {1.0, 1.0}};
  const Vector phi = utterance_state_functional(eps, Matrix::Zero(4, 1), m);
  CHECK(phi[0] == doctest::Approx(1.0));
  CHECK(phi[1] == doctest::Approx(-0.5));
  CHECK_THROWS_AS(utterance_state_functional(eps, Matrix::Zero(4, 1), Matrix::Identity(3, 3)),
                  Error);

  const auto step = affine_step_map(Matrix::Identity(1, 1) * 0.5, Matrix{{1.0, -1.0}},
                                    Vector::Constant(1, 0.25));
  const Vector next = step(Vector::Constant(1, 2.0),
                           {Vector::Constant(1, 3.0), Vector::Constant(1, 1.0)}, EpochTrace{});
  CHECK(next[0] == doctest::Approx(0.5 * 2.0 + 3.0 - 1.0 + 0.25));
}

TEST_CASE("dlg-1 transcript") {
  const Scenario s = build_scenario("dlg-1");
  REQUIRE(s.dialogue.has_value());
  const DialogueTranscript t = run_dialogue(*s.dialogue, s.u_free, s.epsilon, s.dt);
  REQUIRE(t.utterances.size() == s.epoch_plan.size() - 1);
  CHECK(t.step_residuals.size() == t.utterances.size() - 1);
  CHECK(t.boundary_index.front() == 0);
  CHECK(t.boundary_index.back() == t.trace.size() - 1);

  const auto& eps = *t.trace.epsilon_truth;
  for (const auto& u : t.utterances) {
    const std::size_t k0 = t.boundary_index[u.index];
    const std::size_t k1 = t.boundary_index[u.index + 1];
    CHECK(u.t_begin == doctest::Approx(s.epoch_plan[u.index]));
    // Held trace: rows k0..k1-1 closed by a repeat of row k1-1.
    Matrix stacked(static_cast<Eigen::Index>(k1 - k0 + 1), 2);
    for (std::size_t k = k0; k <= k1; ++k) {
      const std::size_t src = k == k1 ? k1 - 1 : k;
      stacked(static_cast<Eigen::Index>(k - k0), 0) = eps[0](static_cast<Eigen::Index>(src), 0);
      stacked(static_cast<Eigen::Index>(k - k0), 1) = eps[1](static_cast<Eigen::Index>(src), 0);
    }
    const Vector ref = oracle::trapezoid_mean(stacked, s.dt);
    CHECK((u.phi - ref).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // Residuals recomputed with the planted α, β.
  for (std::size_t n = 1; n < t.utterances.size(); ++n) {
    Vector v(2);
    v << t.utterances[n].v[0][0], t.utterances[n].v[1][0];
    const Vector pred = 0.6 * t.utterances[n - 1].phi + 0.8 * v;
    CHECK((t.utterances[n].phi - pred).norm() <= 1e-9);
  }
  const ResidualStats st = check_step_consistency(t, s.dialogue->step_map);
  CHECK(st.max <= 1e-9);
  CHECK(st.mean <= st.max);
}

TEST_CASE("dialogue runs continue the state across epochs") {
  const Scenario s = build_scenario("dlg-1");
  const DialogueTranscript t = run_dialogue(*s.dialogue, s.u_free, s.epsilon, s.dt);
  const Trajectory whole = s.simulate();
  CHECK(t.trace.xi == whole.xi);
}

TEST_CASE("dialogue input validation") {
  const Scenario s = build_scenario("dlg-1");
  DialogueDefinition d = *s.dialogue;
  d.schedule = {0.0, 0.555, 1.0};
  CHECK_THROWS_AS(run_dialogue(d, s.u_free, s.epsilon, s.dt), Error);
  d.schedule = {0.0, 2.0, 1.0};
  CHECK_THROWS_AS(run_dialogue(d, s.u_free, s.epsilon, s.dt), Error);
  d.schedule = {0.0, 1.0};
  const DialogueTranscript one = run_dialogue(d, s.u_free, s.epsilon, s.dt);
  CHECK(one.utterances.size() == 1);
  CHECK_THROWS_AS(check_step_consistency(one, d.step_map), Error);
}

TEST_CASE("incoherent dialogue violates the step map") {
  const Scenario s = build_scenario("dlg-incoherent");
  const DialogueTranscript t = run_dialogue(*s.dialogue, s.u_free, s.epsilon, s.dt);
  CHECK(check_step_consistency(t, s.dialogue->step_map).max > 0.1);
}

TEST_CASE("overriding M keeps dlg-1 coherent") {
  ScenarioOverrides o;
  o.matrices["M"] = Matrix{{1.0, 0.5}, {-0.2, 2.0}};
  const Scenario s = build_scenario("dlg-1", o);
  const DialogueTranscript t = run_dialogue(*s.dialogue, s.u_free, s.epsilon, s.dt);
  CHECK(check_step_consistency(t, s.dialogue->step_map).max <= 1e-9);
}
