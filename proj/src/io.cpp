#include "igv/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "igv/error.hpp"

namespace igv::io {

using nlohmann::json;

namespace {

void append_number(std::string* out, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out->append(buf, static_cast<std::size_t>(n));
}

double parse_number(const std::string& cell, std::size_t line) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  // ERANGE also flags subnormal results, which are exact and must round-trip;
  // overflow shows up as a non-finite value.
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    fail(ErrorKind::Schema,
         "line " + std::to_string(line) + ": '" + cell + "' is not a finite number");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) cells.push_back(cur);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void add_columns(std::vector<std::string>* cols, const std::string& prefix, Eigen::Index n) {
  for (Eigen::Index j = 0; j < n; ++j) cols->push_back(prefix + "_" + std::to_string(j));
}

// Column indices of one prefix group, in order prefix_0, prefix_1, ...
std::vector<std::size_t> group(const std::map<std::string, std::size_t>& index,
                               const std::string& prefix) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0;; ++j) {
    const auto it = index.find(prefix + "_" + std::to_string(j));
    if (it == index.end()) break;
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

std::vector<std::string> trajectory_columns(const Trajectory& traj) {
  std::vector<std::string> cols{"time"};
  add_columns(&cols, "phi", traj.phi.cols());
  add_columns(&cols, "xi", traj.xi.cols());
  add_columns(&cols, "u1", traj.u_realized[0].cols());
  add_columns(&cols, "u2", traj.u_realized[1].cols());
  if (traj.epsilon_truth) {
    add_columns(&cols, "eps1", (*traj.epsilon_truth)[0].cols());
    add_columns(&cols, "eps2", (*traj.epsilon_truth)[1].cols());
  }
  add_columns(&cols, "ufree1", traj.u_free[0].cols());
  add_columns(&cols, "ufree2", traj.u_free[1].cols());
  return cols;
}

std::string format_trajectory_csv(const Trajectory& traj) {
  traj.validate();
  std::string out;
  const auto cols = trajectory_columns(traj);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j) out += ',';
    out += cols[j];
  }
  out += '\n';
  std::vector<const Matrix*> blocks{&traj.phi, &traj.xi, &traj.u_realized[0],
                                    &traj.u_realized[1]};
  if (traj.epsilon_truth) {
    blocks.push_back(&(*traj.epsilon_truth)[0]);
    blocks.push_back(&(*traj.epsilon_truth)[1]);
  }
  blocks.push_back(&traj.u_free[0]);
  blocks.push_back(&traj.u_free[1]);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    append_number(&out, traj.grid.time(k));
    for (const Matrix* m : blocks) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) {
        out += ',';
        append_number(&out, (*m)(static_cast<Eigen::Index>(k), j));
      }
    }
    out += '\n';
  }
  return out;
}

json trajectory_metadata(const Trajectory& traj, const std::string& scenario,
                         std::uint64_t seed) {
  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["kind"] = "trajectory";
  meta["scenario"] = scenario;
  meta["seed"] = seed;
  meta["t0"] = traj.grid.t0;
  meta["dt"] = traj.grid.dt;
  meta["rows"] = traj.size();
  meta["columns"] = trajectory_columns(traj);
  return meta;
}

Trajectory parse_trajectory_csv(const std::string& text,
                                const std::optional<json>& metadata) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Schema, "trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!index.emplace(header[j], j).second) {
      fail(ErrorKind::Schema, "duplicate CSV column '" + header[j] + "'");
    }
  }
  if (header.empty() || header[0] != "time") {
    fail(ErrorKind::Schema, "first CSV column must be 'time'");
  }
  const auto phi = group(index, "phi");
  const auto xi = group(index, "xi");
  const PerPlayer<std::vector<std::size_t>> u{group(index, "u1"), group(index, "u2")};
  const PerPlayer<std::vector<std::size_t>> uf{group(index, "ufree1"), group(index, "ufree2")};
  const PerPlayer<std::vector<std::size_t>> eps{group(index, "eps1"), group(index, "eps2")};
  if (phi.empty()) fail(ErrorKind::Schema, "trajectory CSV lacks phi columns");
  if (xi.empty()) fail(ErrorKind::Schema, "trajectory CSV lacks xi columns");
  if (u[0].empty() || u[1].empty()) {
    fail(ErrorKind::Schema, "trajectory CSV lacks realized-control columns u1_*/u2_*");
  }
  if (uf[0].size() != u[0].size() || uf[1].size() != u[1].size()) {
    fail(ErrorKind::Schema, "trajectory CSV needs ufree columns matching u1/u2");
  }
  const bool has_eps = !eps[0].empty() || !eps[1].empty();
  if (has_eps && (eps[0].empty() || eps[1].empty())) {
    fail(ErrorKind::Schema, "trajectory CSV has eps columns for only one player");
  }
  std::size_t expected = 1 + phi.size() + xi.size() + 2 * (u[0].size() + u[1].size());
  if (has_eps) expected += eps[0].size() + eps[1].size();
  if (expected != header.size()) fail(ErrorKind::Schema, "unrecognized CSV columns");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      fail(ErrorKind::Schema, "line " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) fail(ErrorKind::Schema, "trajectory CSV needs at least two rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  auto take = [&](const std::vector<std::size_t>& cols) {
    Matrix m(n, static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        m(k, static_cast<Eigen::Index>(j)) = rows[static_cast<std::size_t>(k)][cols[j]];
      }
    }
    return m;
  };

  Trajectory traj;
  if (metadata) {
    try {
      if (metadata->at("schema_version").get<int>() != kSchemaVersion) {
        fail(ErrorKind::Schema, "unsupported trajectory schema_version");
      }
      traj.grid = TimeGrid{metadata->at("t0").get<double>(), metadata->at("dt").get<double>(),
                           rows.size()};
    } catch (const json::exception& e) {
      fail(ErrorKind::Schema, std::string("bad trajectory metadata: ") + e.what());
    }
  } else {
    const double t0 = rows.front()[0];
    traj.grid = TimeGrid{t0, (rows.back()[0] - t0) / static_cast<double>(rows.size() - 1),
                         rows.size()};
  }
  if (!(traj.grid.dt > 0.0)) fail(ErrorKind::Schema, "trajectory time column not increasing");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double t = traj.grid.time(k);
    if (std::abs(rows[k][0] - t) > 1e-9 * std::max({1.0, std::abs(t), traj.grid.dt})) {
      fail(ErrorKind::Schema, "trajectory time column is not a uniform grid");
    }
  }
  traj.phi = take(phi);
  traj.xi = take(xi);
  for (std::size_t i = 0; i < 2; ++i) {
    traj.u_realized[i] = take(u[i]);
    traj.u_free[i] = take(uf[i]);
  }
  if (has_eps) traj.epsilon_truth = PerPlayer<Matrix>{take(eps[0]), take(eps[1])};
  return traj;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingInput, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::filesystem::path metadata_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

}  // namespace

void write_trajectory(const std::filesystem::path& csv_path, const Trajectory& traj,
                      const std::string& scenario, std::uint64_t seed) {
  write_text(csv_path, format_trajectory_csv(traj));
  write_text(metadata_path(csv_path), trajectory_metadata(traj, scenario, seed).dump(2) + "\n");
}

Trajectory read_trajectory(const std::filesystem::path& csv_path) {
  const std::string text = read_text(csv_path);
  std::optional<json> meta;
  const auto mp = metadata_path(csv_path);
  if (std::filesystem::exists(mp)) {
    try {
      meta = json::parse(read_text(mp));
    } catch (const json::parse_error& e) {
      fail(ErrorKind::Schema, "metadata is not valid JSON: " + std::string(e.what()));
    }
  }
  return parse_trajectory_csv(text, meta);
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json estimate_report(const EpsilonEstimate& est) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["kind"] = "epsilon_estimate";
  r["grid"] = {{"t0", est.grid.t0}, {"dt", est.grid.dt}, {"size", est.grid.size}};
  r["rank_ok"] = {est.rank_ok[0], est.rank_ok[1]};
  r["max_residual"] = est.residual_norm.size() ? est.residual_norm.maxCoeff() : 0.0;
  r["epsilon_hat"] = {{"player1", matrix_json(est.epsilon_hat[0])},
                      {"player2", matrix_json(est.epsilon_hat[1])}};
  r["residual_norm"] = vector_json(est.residual_norm);
  return r;
}

json prediction_report(const std::vector<AnchorError>& table,
                       const std::vector<PredictionReport>& profiles) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["kind"] = "prediction";
  json rows = json::array();
  for (const auto& row : table) {
    json j{{"anchor", row.anchor}};
    if (row.max_error) {
      j["max_error"] = *row.max_error;
    } else {
      j["error"] = row.error;
    }
    rows.push_back(std::move(j));
  }
  r["anchors"] = std::move(rows);
  json prof = json::array();
  for (const auto& p : profiles) {
    prof.push_back({{"anchor", p.anchor_time},
                    {"horizon", p.horizon},
                    {"dt", p.grid.dt},
                    {"frozen_epsilon", {vector_json(p.frozen_epsilon[0]),
                                        vector_json(p.frozen_epsilon[1])}},
                    {"predicted_phi", matrix_json(p.predicted_phi)},
                    {"error_profile", vector_json(p.error_profile)}});
  }
  r["profiles"] = std::move(prof);
  return r;
}

json transcript_report(const DialogueTranscript& t, const ResidualStats& stats) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["kind"] = "dialogue_transcript";
  r["epoch_count"] = t.utterances.size();
  json utt = json::array();
  for (const auto& u : t.utterances) {
    utt.push_back({{"index", u.index},
                   {"t_begin", u.t_begin},
                   {"t_end", u.t_end},
                   {"phi", vector_json(u.phi)},
                   {"v1", vector_json(u.v[0])},
                   {"v2", vector_json(u.v[1])}});
  }
  r["utterances"] = std::move(utt);
  r["step_residuals"] = t.step_residuals;
  r["residual_max"] = stats.max;
  r["residual_mean"] = stats.mean;
  return r;
}

json verbalization_report(const VerbalizationResult& res, const VerbalizationConfig& cfg) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["kind"] = "verbalization";
  r["partition"] = res.partition.boundaries;
  r["epoch_count"] = res.partition.epoch_count();
  r["omega"] = matrix_json(res.features.omega);
  r["v"] = matrix_json(res.features.v);
  r["fitted_map"] = {{"A", matrix_json(res.fit.A)},
                     {"B", matrix_json(res.fit.B)},
                     {"C", matrix_json(res.fit.C)},
                     {"c", vector_json(res.fit.c)},
                     {"design_rank", res.fit.design_rank}};
  r["residuals"] = vector_json(res.fit.residuals);
  r["score"] = res.score;
  r["score_threshold"] = cfg.score_threshold;
  r["verbalizable"] = res.verbalizable;
  r["symbols"] = res.symbols.symbols;
  json bigrams = json::array();
  for (const auto& [pair, count] : res.symbols.bigrams) {
    bigrams.push_back({{"from", pair.first}, {"to", pair.second}, {"count", count}});
  }
  r["bigrams"] = std::move(bigrams);
  return r;
}

}  // namespace igv::io
