#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igv/dialogue.hpp"
#include "igv/epsilon.hpp"
#include "igv/verbalization.hpp"

namespace igv::io {

inline constexpr int kSchemaVersion = 1;

// Column order of the trajectory CSV:
//   time, phi_*, xi_*, u1_*, u2_*[, eps1_*, eps2_*], ufree1_*, ufree2_*
// u1/u2 are the realized controls, ufree the free intentions u°.
// Values use 17 significant digits.
std::vector<std::string> trajectory_columns(const Trajectory& traj);

std::string format_trajectory_csv(const Trajectory& traj);
nlohmann::json trajectory_metadata(const Trajectory& traj, const std::string& scenario,
                                   std::uint64_t seed);

// Parses a trajectory CSV. Realized-control columns are mandatory. When
// metadata is given its t0/dt define the grid exactly; otherwise dt is
// inferred from the time column, which must be uniform.
Trajectory parse_trajectory_csv(const std::string& text,
                                const std::optional<nlohmann::json>& metadata = {});

// Writes <stem>.csv and <stem>.meta.json.
void write_trajectory(const std::filesystem::path& csv_path, const Trajectory& traj,
                      const std::string& scenario, std::uint64_t seed);
// Reads a CSV, picking up the sibling <stem>.meta.json when present.
Trajectory read_trajectory(const std::filesystem::path& csv_path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

nlohmann::json matrix_json(const Matrix& m);
nlohmann::json vector_json(const Vector& v);

nlohmann::json estimate_report(const EpsilonEstimate& est);
nlohmann::json prediction_report(const std::vector<AnchorError>& table,
                                 const std::vector<PredictionReport>& profiles);
nlohmann::json transcript_report(const DialogueTranscript& t, const ResidualStats& stats);
nlohmann::json verbalization_report(const VerbalizationResult& r,
                                    const VerbalizationConfig& cfg);

}  // namespace igv::io
