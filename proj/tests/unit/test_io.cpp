#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "igv/error.hpp"
#include "igv/io.hpp"
#include "igv/scenarios.hpp"

using namespace igv;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an igv::Error");
  return ErrorKind::Io;
}

bool same_samples(const Trajectory& a, const Trajectory& b) {
  bool ok = a.phi == b.phi && a.xi == b.xi;
  for (std::size_t i = 0; i < 2; ++i) {
    ok = ok && a.u_free[i] == b.u_free[i] && a.u_realized[i] == b.u_realized[i];
  }
  return ok;
}

}  // namespace

TEST_CASE("CSV layout") {
  const Scenario s = build_scenario("affine-1");
  const Trajectory t = s.simulate();
  const std::string csv = io::format_trajectory_csv(t);
  CHECK(csv.rfind("time,phi_0,xi_0,u1_0,u2_0,eps1_0,eps2_0,ufree1_0,ufree2_0\n", 0) == 0);
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == static_cast<long>(std::floor(s.t_end / s.dt + 1e-9)) + 2);
  const auto meta = io::trajectory_metadata(t, s.name, s.seed);
  CHECK(meta["schema_version"] == 1);
  CHECK(meta["columns"].size() == 9);
}

TEST_CASE("round trip is value-exact") {
  const Scenario s = build_scenario("dlg-1");
  const Trajectory t = s.simulate();
  const std::string csv = io::format_trajectory_csv(t);

  const Trajectory with_meta =
      io::parse_trajectory_csv(csv, io::trajectory_metadata(t, s.name, s.seed));
  CHECK(same_samples(t, with_meta));
  CHECK(with_meta.grid.dt == t.grid.dt);
  CHECK((*with_meta.epsilon_truth)[1] == (*t.epsilon_truth)[1]);
  CHECK(io::format_trajectory_csv(with_meta) == csv);

  const Trajectory bare = io::parse_trajectory_csv(csv);
  CHECK(same_samples(t, bare));
  CHECK(bare.grid.dt == doctest::Approx(t.grid.dt).epsilon(1e-12));

  Trajectory awkward = t;
  awkward.phi(3, 0) = 0.1 + 0.2;
  awkward.phi(4, 0) = std::numeric_limits<double>::denorm_min();
  awkward.phi(5, 0) = -1.0 / 3.0;
  CHECK(same_samples(awkward, io::parse_trajectory_csv(io::format_trajectory_csv(awkward))));
}

TEST_CASE("files on disk") {
  const fs::path dir = fs::temp_directory_path() / "igv_test_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Scenario s = build_scenario("memory-1", ScenarioOverrides{{}, 0.5, 1e-2, {}, {}});
  const Trajectory t = s.simulate();
  io::write_trajectory(dir / "m.csv", t, s.name, s.seed);
  CHECK(fs::exists(dir / "m.meta.json"));
  const Trajectory back = io::read_trajectory(dir / "m.csv");
  CHECK(same_samples(t, back));
  CHECK(back.grid.t0 == t.grid.t0);
  CHECK(back.grid.dt == t.grid.dt);
  CHECK(kind_of([&] { io::read_trajectory(dir / "none.csv"); }) == ErrorKind::MissingInput);
  io::write_text(dir / "bad.csv", io::format_trajectory_csv(t));
  io::write_text(dir / "bad.meta.json", "{not json");
  CHECK(kind_of([&] { io::read_trajectory(dir / "bad.csv"); }) == ErrorKind::Schema);
  io::write_text(dir / "bad.meta.json", R"({"schema_version": 2, "t0": 0, "dt": 0.01})");
  CHECK(kind_of([&] { io::read_trajectory(dir / "bad.csv"); }) == ErrorKind::Schema);
  fs::remove_all(dir);
}

TEST_CASE("malformed CSV is a schema error") {
  const auto bad = [](const std::string& text) {
    return kind_of([&] { io::parse_trajectory_csv(text); });
  };
  const std::string head = "time,phi_0,xi_0,u1_0,u2_0,ufree1_0,ufree2_0\n";
  CHECK(bad("") == ErrorKind::Schema);
  CHECK(bad("time,phi_0,xi_0\n0,1,0\n0.1,1,0\n") == ErrorKind::Schema);
  CHECK(bad("time,phi_0,xi_0,u1_0,u2_0\n0,1,0,0,0\n0.1,1,0,0,0\n") == ErrorKind::Schema);
  CHECK(bad(head + "0,1,0,0,0,0,0\n") == ErrorKind::Schema);
  CHECK(bad(head + "0,1,0,0,0,0,0\n0.1,1,0,0,x,0,0\n") == ErrorKind::Schema);
  CHECK(bad(head + "0,1,0,0,0,0,0\n0.1,1,0,0,0,0\n") == ErrorKind::Schema);
  CHECK(bad(head + "0,1,0,0,0,0,0\n0.1,1,0,0,nan,0,0\n") == ErrorKind::Schema);
  CHECK(bad(head + "0,1,0,0,0,0,0\n0.1,1,0,0,0,0,0\n0.3,1,0,0,0,0,0\n") == ErrorKind::Schema);
  CHECK(bad("time,phi_0,xi_0,u1_0,u2_0,ufree1_0,ufree2_0,eps1_0\n0,1,0,0,0,0,0,0\n"
            "0.1,1,0,0,0,0,0,0\n") == ErrorKind::Schema);
  const Trajectory ok = io::parse_trajectory_csv(head + "0,1,0,0,0,0,0\r\n0.5,1,0,0,0,0,0\r\n");
  CHECK(ok.size() == 2);
  CHECK(ok.grid.dt == 0.5);
  CHECK_FALSE(ok.epsilon_truth.has_value());
}

TEST_CASE("reports carry schema version and kind") {
  const Scenario s = build_scenario("const-1");
  const Trajectory t = s.simulate();
  const auto est = io::estimate_report(estimate_epsilon(t, s.game));
  CHECK(est["schema_version"] == 1);
  CHECK(est["kind"] == "epsilon_estimate");
  CHECK(est["epsilon_hat"]["player1"].size() == t.size());
  const auto rows = prediction_error_profile(s.game, t, {1.0, 1.005}, 1.0, s.u_free);
  const auto pred = io::prediction_report(rows, {});
  CHECK(pred["anchors"][0].contains("max_error"));
  CHECK(pred["anchors"][1].contains("error"));
}
