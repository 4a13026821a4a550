#include "igv/cli.hpp"

#include <set>

#include <CLI11.hpp>

#include "igv/error.hpp"
#include "igv/io.hpp"
#include "igv/survey.hpp"

namespace igv::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands{"simulate", "estimate", "predict", "dialogue",
                                      "verbalize"};

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(ErrorKind::Schema, where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(ErrorKind::Schema, "unknown key '" + key + "' in " + where);
  }
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) fail(ErrorKind::Schema, what + " must be a number");
  return v.get<double>();
}

std::string text(const json& v, const std::string& what) {
  if (!v.is_string()) fail(ErrorKind::Schema, what + " must be a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& what) {
  if (!v.is_boolean()) fail(ErrorKind::Schema, what + " must be a boolean");
  return v.get<bool>();
}

std::uint64_t count(const json& v, const std::string& what) {
  if (!v.is_number_unsigned()) fail(ErrorKind::Schema, what + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

// A number is 1x1, a flat array a column vector, nested arrays row-major.
Matrix matrix(const json& v, const std::string& what) {
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) fail(ErrorKind::Schema, what + " must be a number or array");
  if (!v.front().is_array()) {
    Matrix m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) {
      m(static_cast<Eigen::Index>(i), 0) = number(v[i], what);
    }
    return m;
  }
  const std::size_t cols = v.front().size();
  if (cols == 0) fail(ErrorKind::Schema, what + " has an empty row");
  Matrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) {
      fail(ErrorKind::Schema, what + " rows must be arrays of equal length");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], what);
    }
  }
  return m;
}

const std::set<std::string> kScalarOverrides{"alpha", "beta", "bias"};
const std::set<std::string> kMatrixOverrides{"A",  "B1", "B2", "C",  "D",    "E1",  "E2", "P1",
                                             "P2", "Q1", "Q2", "R1", "R2", "phi0", "xi0", "M"};

ScenarioOverrides parse_overrides(const json& obj) {
  std::set<std::string> allowed{"seed"};
  allowed.insert(kScalarOverrides.begin(), kScalarOverrides.end());
  allowed.insert(kMatrixOverrides.begin(), kMatrixOverrides.end());
  check_keys(obj, "overrides", allowed);
  ScenarioOverrides o;
  for (const auto& [key, value] : obj.items()) {
    const std::string what = "overrides." + key;
    if (key == "seed") {
      o.seed = count(value, what);
    } else if (kScalarOverrides.count(key)) {
      o.scalars[key] = number(value, what);
    } else {
      o.matrices[key] = matrix(value, what);
    }
  }
  return o;
}

void parse_analysis(const json& obj, AnalysisConfig* a) {
  check_keys(obj, "analysis",
             {"input", "anchors", "horizon", "min_epoch_len", "changepoint_penalty",
              "score_threshold", "symbol_bins", "omega_includes_phi", "regress_on_phi", "all"});
  auto& v = a->verbalization;
  for (const auto& [key, value] : obj.items()) {
    const std::string what = "analysis." + key;
    if (key == "input") {
      a->input = text(value, what);
    } else if (key == "anchors") {
      if (!value.is_array()) fail(ErrorKind::Schema, what + " must be an array");
      std::vector<double> anchors;
      for (const auto& x : value) anchors.push_back(number(x, what));
      a->anchors = std::move(anchors);
    } else if (key == "horizon") {
      a->horizon = number(value, what);
    } else if (key == "min_epoch_len") {
      v.min_epoch_len = number(value, what);
    } else if (key == "changepoint_penalty") {
      v.changepoint_penalty = number(value, what);
    } else if (key == "score_threshold") {
      v.score_threshold = number(value, what);
    } else if (key == "symbol_bins") {
      v.symbol_bins = static_cast<std::size_t>(count(value, what));
    } else if (key == "omega_includes_phi") {
      v.features.omega_includes_phi = boolean(value, what);
    } else if (key == "regress_on_phi") {
      v.features.regress_on_phi = boolean(value, what);
    } else {
      a->all = boolean(value, what);
    }
  }
  try {
    v.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Schema, e.what());
  }
}

std::string require_scenario(const RunConfig& cfg) {
  if (cfg.scenario.empty()) fail(ErrorKind::Schema, cfg.command + " needs a scenario");
  return cfg.scenario;
}

void stamp(json* report, const Scenario& s) {
  (*report)["scenario"] = s.name;
  (*report)["seed"] = s.seed;
}

Trajectory source_trajectory(const RunConfig& cfg, const Scenario& s) {
  if (cfg.analysis.input) return io::read_trajectory(*cfg.analysis.input);
  return s.simulate();
}

std::filesystem::path write_json(const std::filesystem::path& dir, const std::string& name,
                                 const json& report) {
  const auto path = dir / name;
  io::write_text(path, report.dump(2) + "\n");
  return path;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  check_keys(doc, "config", {"command", "scenario", "overrides", "grid", "analysis"});
  RunConfig cfg;
  if (doc.contains("command")) {
    cfg.command = text(doc["command"], "command");
    if (!kCommands.count(cfg.command)) {
      fail(ErrorKind::Schema, "unknown command '" + cfg.command + "'");
    }
  }
  if (doc.contains("scenario")) cfg.scenario = text(doc["scenario"], "scenario");
  if (doc.contains("overrides")) cfg.overrides = parse_overrides(doc["overrides"]);
  if (doc.contains("grid")) {
    const json& grid = doc["grid"];
    check_keys(grid, "grid", {"t_end", "dt"});
    if (grid.contains("t_end")) cfg.overrides.t_end = number(grid["t_end"], "grid.t_end");
    if (grid.contains("dt")) cfg.overrides.dt = number(grid["dt"], "grid.dt");
  }
  if (doc.contains("analysis")) parse_analysis(doc["analysis"], &cfg.analysis);
  return cfg;
}

std::vector<std::filesystem::path> execute(const RunConfig& cfg, std::ostream& log) {
  if (!kCommands.count(cfg.command)) fail(ErrorKind::Schema, "no command given");
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) fail(ErrorKind::Io, "cannot create '" + cfg.out.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  if (cfg.command == "verbalize" && cfg.analysis.all) {
    const auto table = format_survey_csv(survey_catalog(cfg.analysis.verbalization));
    const auto path = cfg.out / "verbalizability_table.csv";
    io::write_text(path, table);
    log << table;
    written.push_back(path);
    return written;
  }

  const Scenario s = build_scenario(require_scenario(cfg), cfg.overrides);
  if (cfg.command == "simulate") {
    const Trajectory traj = s.simulate();
    const auto path = cfg.out / "trajectory.csv";
    io::write_trajectory(path, traj, s.name, s.seed);
    log << "simulate " << s.name << ": " << traj.size() << " rows -> " << path.string() << "\n";
    written.push_back(path);
    auto meta = path;
    written.push_back(meta.replace_extension(".meta.json"));
  } else if (cfg.command == "estimate") {
    const Trajectory traj = source_trajectory(cfg, s);
    const EpsilonEstimate est = estimate_epsilon(traj, s.game);
    json report = io::estimate_report(est);
    stamp(&report, s);
    written.push_back(write_json(cfg.out, "epsilon_estimate.json", report));
    log << "estimate " << s.name << ": max residual " << report["max_residual"].get<double>()
        << "\n";
  } else if (cfg.command == "predict") {
    const Trajectory traj = source_trajectory(cfg, s);
    const auto anchors = cfg.analysis.anchors.value_or(s.anchors);
    const double horizon = cfg.analysis.horizon.value_or(s.horizon);
    if (!(horizon > 0.0)) fail(ErrorKind::Schema, "predict needs analysis.horizon > 0");
    const auto table = prediction_error_profile(s.game, traj, anchors, horizon, s.u_free);
    std::vector<PredictionReport> profiles;
    for (const auto& row : table) {
      if (row.max_error) {
        profiles.push_back(freeze_and_predict(s.game, traj, row.anchor, horizon, s.u_free));
      }
    }
    json report = io::prediction_report(table, profiles);
    stamp(&report, s);
    written.push_back(write_json(cfg.out, "prediction.json", report));
    for (const auto& row : table) {
      log << "anchor " << row.anchor << ": ";
      if (row.max_error) {
        log << "max error " << *row.max_error << "\n";
      } else {
        log << row.error << "\n";
      }
    }
  } else if (cfg.command == "dialogue") {
    if (!s.dialogue) fail(ErrorKind::Schema, "scenario '" + s.name + "' defines no dialogue");
    const DialogueTranscript t = run_dialogue(*s.dialogue, s.u_free, s.epsilon, s.dt);
    const ResidualStats stats = check_step_consistency(t, s.dialogue->step_map);
    json report = io::transcript_report(t, stats);
    stamp(&report, s);
    written.push_back(write_json(cfg.out, "transcript.json", report));
    log << "dialogue " << s.name << ": " << t.utterances.size() << " utterances, max residual "
        << stats.max << "\n";
  } else {
    const Trajectory traj = source_trajectory(cfg, s);
    const VerbalizationResult r = verbalize(traj, s.game, cfg.analysis.verbalization);
    json report = io::verbalization_report(r, cfg.analysis.verbalization);
    stamp(&report, s);
    written.push_back(write_json(cfg.out, "verbalization.json", report));
    log << "verbalize " << s.name << ": score " << r.score
        << (r.verbalizable ? " (verbalizable)" : " (not verbalizable)") << "\n";
  }
  return written;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate intention games, recover ε, and test dialogue structure"};
  app.name("igv");
  std::string config_path, out_dir, scenario, input;
  std::uint64_t seed = 0;
  bool all = false;
  auto* config_opt = app.add_option("--config", config_path, "JSON run configuration");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (default .)");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed, overrides the config");
  auto* scenario_opt = app.add_option("--scenario", scenario, "catalog scenario name");
  auto* input_opt = app.add_option("--input", input, "trajectory CSV to analyze");
  app.add_flag("--all", all, "verbalize: tabulate the whole catalog");
  app.fallthrough();
  app.require_subcommand(0, 1);
  app.add_subcommand("simulate", "write a scenario trajectory (CSV + metadata JSON)");
  app.add_subcommand("estimate", "recover ε pointwise from realized controls");
  app.add_subcommand("predict", "frozen-ε prediction error at anchors");
  app.add_subcommand("dialogue", "run a dialogue scenario and check step consistency");
  app.add_subcommand("verbalize", "segment, fit and score the utterance recursion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig cfg;
    if (*config_opt) {
      const std::string doc = io::read_text(config_path);
      json parsed;
      try {
        parsed = json::parse(doc);
      } catch (const json::parse_error& e) {
        fail(ErrorKind::Schema, "config is not valid JSON: " + std::string(e.what()));
      }
      cfg = parse_config(parsed);
    }
    if (!app.get_subcommands().empty()) {
      const std::string cmd = app.get_subcommands().front()->get_name();
      if (!cfg.command.empty() && cfg.command != cmd) {
        fail(ErrorKind::Schema,
             "config command '" + cfg.command + "' conflicts with '" + cmd + "'");
      }
      cfg.command = cmd;
    }
    if (*scenario_opt) cfg.scenario = scenario;
    if (*seed_opt) cfg.overrides.seed = seed;
    if (*out_opt) cfg.out = out_dir;
    if (*input_opt) cfg.analysis.input = input;
    if (all) cfg.analysis.all = true;
    execute(cfg, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return is_validation_error(e.kind()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace igv::cli
