#include "igv/survey.hpp"

#include <cstdio>

#include "igv/scenarios.hpp"

namespace igv {

std::vector<SurveyRow> survey_catalog(const VerbalizationConfig& cfg) {
  cfg.validate();
  std::vector<SurveyRow> rows;
  for (const auto& name : catalog_names()) {
    const Scenario s = build_scenario(name);
    const Trajectory traj = s.simulate();
    SurveyRow row;
    row.scenario = name;
    row.grid_points = traj.size();
    try {
      const VerbalizationResult r = verbalize(traj, s.game, cfg);
      row.epochs = r.partition.epoch_count();
      row.score = r.score;
      row.verbalizable = r.verbalizable;
      row.status = "ok";
    } catch (const Error& e) {
      row.status = to_string(e.kind());
      row.stage = e.stage();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_survey_csv(const std::vector<SurveyRow>& rows) {
  std::string out = "scenario,grid_points,epochs,score,verbalizable,status,stage\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.scenario;
    out += ',' + std::to_string(r.grid_points) + ',';
    if (r.epochs) out += std::to_string(*r.epochs);
    out += ',';
    if (r.score) {
      std::snprintf(buf, sizeof(buf), "%.6f", *r.score);
      out += buf;
    }
    out += r.verbalizable ? ",true," : ",false,";
    out += r.status + ',' + r.stage + '\n';
  }
  return out;
}

}  // namespace igv
