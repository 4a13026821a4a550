#include <doctest.h>

#include "../oracles.hpp"
#include "igv/error.hpp"
#include "igv/rng.hpp"
#include "igv/scenarios.hpp"
#include "igv/verbalization.hpp"

using namespace igv;

namespace {

// ε̂ of player 1 switching value at the given rows; player 2 constant.
EpsilonEstimate staircase(std::size_t n, const std::vector<std::size_t>& at,
                          const std::vector<double>& values) {
  EpsilonEstimate e;
  e.grid = TimeGrid{0.0, 0.01, n};
  e.epsilon_hat[0] = Matrix::Zero(static_cast<Eigen::Index>(n), 1);
  e.epsilon_hat[1] = Matrix::Constant(static_cast<Eigen::Index>(n), 1, 0.3);
  e.residual_norm = Vector::Zero(static_cast<Eigen::Index>(n));
  e.rank_ok = {true, true};
  std::size_t piece = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (piece < at.size() && k >= at[piece]) ++piece;
    e.epsilon_hat[0](static_cast<Eigen::Index>(k), 0) = values[piece];
  }
  return e;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an igv::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("segmentation finds clear plateaus") {
  VerbalizationConfig cfg;
  cfg.min_epoch_len = 0.2;
  const Partition p = segment_epochs(staircase(101, {30, 70}, {0.0, 1.0, -1.0}), cfg);
  CHECK(p.indices == std::vector<std::size_t>{0, 30, 70, 100});
  CHECK(p.boundaries.front() == 0.0);
  CHECK(p.boundaries.back() == doctest::Approx(1.0));
  CHECK(p.epoch_count() == 3);
}

TEST_CASE("segmentation respects the minimum length and the penalty") {
  VerbalizationConfig cfg;
  cfg.min_epoch_len = 0.2;
  const Partition near_edge = segment_epochs(staircase(101, {5}, {0.0, 1.0}), cfg);
  for (std::size_t j = 1; j < near_edge.indices.size(); ++j) {
    CHECK(near_edge.indices[j] - near_edge.indices[j - 1] >= 20);
  }
  // Gain of the true split is 50*50/100 * 0.1^2 = 0.25, below the penalty.
  const Partition small = segment_epochs(staircase(101, {50}, {0.0, 0.1}), cfg);
  CHECK(small.epoch_count() == 1);
  cfg.changepoint_penalty = 0.2;
  CHECK(segment_epochs(staircase(101, {50}, {0.0, 0.1}), cfg).epoch_count() == 2);
}

TEST_CASE("recursion fit recovers an exact affine map") {
  SplitMix64 rng(99);
  const Eigen::Index n = 12;
  Matrix omega(n, 1), v(n, 1);
  omega(0, 0) = 0.2;
  v(0, 0) = 0.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    v(k, 0) = rng.uniform(-1.0, 1.0);
    omega(k, 0) = 0.7 * omega(k - 1, 0) + 0.3 * v(k, 0) + 0.05;
  }
  const RecursionFit fit = fit_recursion_map(omega, v, Matrix(n, 0));
  CHECK(fit.A(0, 0) == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(fit.B(0, 0) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(fit.c[0] == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(fit.score == doctest::Approx(1.0));
  CHECK(fit.residuals.size() == n - 1);
  CHECK(fit.design_rank == 3);

  CHECK(kind_of([&] { fit_recursion_map(omega.topRows(4), v.topRows(4), Matrix(4, 0)); }) ==
        ErrorKind::Underdetermined);

  const RecursionFit flat =
      fit_recursion_map(Matrix::Constant(8, 1, 0.4), v.topRows(8), Matrix(8, 0));
  CHECK(flat.score == 1.0);
}

TEST_CASE("symbols follow uniform per-coordinate bins") {
  SplitMix64 rng(5);
  Matrix w(40, 2);
  for (Eigen::Index k = 0; k < 40; ++k) {
    w(k, 0) = rng.uniform(-2.0, 3.0);
    w(k, 1) = rng.uniform(0.0, 1.0);
  }
  const std::size_t bins = 3;
  const SymbolSequence s = symbolize_transcript(w, bins);
  REQUIRE(s.symbols.size() == 40);
  for (Eigen::Index k = 0; k < 40; ++k) {
    const auto b0 = oracle::bin_of(w(k, 0), w.col(0).minCoeff(), w.col(0).maxCoeff(), bins);
    const auto b1 = oracle::bin_of(w(k, 1), w.col(1).minCoeff(), w.col(1).maxCoeff(), bins);
    CHECK(s.symbols[static_cast<std::size_t>(k)] == b0 + bins * b1);
  }
  std::size_t total = 0;
  for (const auto& [pair, count] : s.bigrams) total += count;
  CHECK(total == 39);
  CHECK(symbolize_transcript(Matrix::Constant(3, 1, 1.0), 4).symbols ==
        std::vector<std::uint64_t>{0, 0, 0});
}

TEST_CASE("hidden dialogue is verbalizable with the planted recursion") {
  const Scenario s = build_scenario("hidden-dialogue-1");
  const Trajectory t = s.simulate();
  VerbalizationConfig cfg;
  cfg.features.omega_includes_phi = false;
  cfg.features.regress_on_phi = false;
  const VerbalizationResult r = verbalize(t, s.game, cfg);
  CHECK(r.partition.epoch_count() == 20);
  CHECK(r.fit.A.rows() == 2);
  CHECK(r.fit.A(0, 0) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(r.fit.A(1, 1) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(r.fit.B(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.fit.c[1] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(r.verbalizable);
  CHECK(r.symbols.symbols.size() == 20);
}

TEST_CASE("planted recursion values follow the plan") {
  RecursionPlan plan;
  plan.omega0 = {Vector::Constant(1, 0.2), Vector::Constant(1, -0.1)};
  PerPlayer<std::vector<Vector>> v;
  for (std::size_t i = 0; i < 2; ++i) {
    for (int n = 0; n < 4; ++n) v[i].push_back(Vector::Constant(1, 0.1 * n - 0.2 * i));
  }
  const auto w = planted_recursion_values(plan, 4, v);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(w[i][0][0] == plan.omega0[i][0]);
    for (std::size_t n = 1; n < 4; ++n) {
      CHECK(w[i][n][0] == doctest::Approx(0.8 * w[i][n - 1][0] + 0.5 * v[i][n][0] + 0.1));
    }
  }
}

TEST_CASE("verbalize is reproducible and tags failing stages") {
  const Scenario w = build_scenario("white-1");
  const Trajectory t = w.simulate();
  const VerbalizationConfig cfg;
  const VerbalizationResult a = verbalize(t, w.game, cfg);
  const VerbalizationResult b = verbalize(t, w.game, cfg);
  CHECK(a.score == b.score);
  CHECK(a.partition.indices == b.partition.indices);
  CHECK(a.symbols.symbols == b.symbols.symbols);
  CHECK_FALSE(a.verbalizable);

  const Scenario m = build_scenario("memory-1", ScenarioOverrides{{}, 0.5, 1e-2, {}, {}});
  try {
    verbalize(m.simulate(), m.game, cfg);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.stage() == "estimate");
    CHECK(e.kind() == ErrorKind::UnsupportedFamily);
    CHECK(std::string(e.what()).rfind("[estimate]", 0) == 0);
  }

  VerbalizationConfig bad;
  bad.score_threshold = 1.5;
  try {
    verbalize(t, w.game, bad);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.stage() == "config");
  }

  const Scenario j = build_scenario("jump-1");
  try {
    verbalize(j.simulate(), j.game, cfg);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.stage() == "fit");
    CHECK(e.kind() == ErrorKind::Underdetermined);
  }
}
