#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igv/error.hpp"
#include "igv/verbalization.hpp"

namespace igv {

// One row of the catalog-wide verbalizability table. Scenarios the pipeline
// cannot process (non-affine feedback, too few epochs) keep their error
// kind and stage instead of a score.
struct SurveyRow {
  std::string scenario;
  std::size_t grid_points = 0;
  std::optional<std::size_t> epochs;
  std::optional<double> score;
  bool verbalizable = false;
  std::string status;  // "ok" or the error kind
  std::string stage;   // failing stage, empty when ok
};

std::vector<SurveyRow> survey_catalog(const VerbalizationConfig& cfg);

// Fixed-precision CSV (scores to 6 decimals) so the table is stable across
// platforms.
std::string format_survey_csv(const std::vector<SurveyRow>& rows);

}  // namespace igv
