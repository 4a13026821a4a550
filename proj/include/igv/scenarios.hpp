#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "igv/dialogue.hpp"
#include "igv/dynamics.hpp"
#include "igv/memory.hpp"

namespace igv {

// Linear game with affine feedbacks:
//   dφ/dt = A φ + B1 u1 + B2 u2 + C ξ
//   dξ/dt = D ξ + E1 u1 + E2 u2
//   u_i   = u°_i + P_i φ + Q_i ξ + R_i ε_i
struct LinearGameParams {
  Matrix A, B1, B2, C;
  Matrix D, E1, E2;
  PerPlayer<Matrix> P, Q, R;
  Vector phi0, xi0;
};

GameDefinition make_linear_game(const LinearGameParams& p);

// State matrix of the closed loop in z = (φ, ξ) with u° = 0 and ε = 0.
Matrix closed_loop_matrix(const LinearGameParams& p);
double spectral_abscissa(const Matrix& a);

// ω_n = alpha ω_{n-1} + beta v_n + bias, applied per player and coordinate.
struct RecursionPlan {
  double alpha = 0.8;
  double beta = 0.5;
  double bias = 0.1;
  PerPlayer<Vector> omega0;
};

// Piecewise-constant ε equal to ω_n on epoch n = [b_n, b_{n+1}); v_plan[i][n]
// drives epoch n (the entry for n = 0 is unused). The last value is held
// past the final boundary.
PerPlayer<Signal> planted_recursion_epsilon(const RecursionPlan& plan,
                                            const std::vector<double>& boundaries,
                                            const PerPlayer<std::vector<Vector>>& v_plan);

// The ω_n values behind planted_recursion_epsilon.
PerPlayer<std::vector<Vector>> planted_recursion_values(
    const RecursionPlan& plan, std::size_t epochs,
    const PerPlayer<std::vector<Vector>>& v_plan);

struct MemorySetup {
  BaseDynamics base;
  MemoryFeedbackSpec spec;
};

struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> t_end;
  std::optional<double> dt;
  std::map<std::string, Matrix> matrices;  // A, B1, ..., R2, phi0, xi0, M
  std::map<std::string, double> scalars;   // alpha, beta, bias
};

struct Scenario {
  std::string name;
  std::string summary;
  std::uint64_t seed = 0;
  std::optional<LinearGameParams> params;
  std::optional<MemorySetup> memory;
  GameDefinition game;
  GameState init;
  PerPlayer<Signal> u_free;
  PerPlayer<Signal> epsilon;
  double t_end = 0.0;
  double dt = 0.0;

  std::optional<DialogueDefinition> dialogue;
  std::vector<double> epoch_plan;  // planted epoch boundaries, if any
  std::optional<RecursionPlan> recursion;
  std::vector<double> anchors;     // prediction anchors, if any
  double horizon = 0.0;
  std::optional<double> pinned_abscissa;

  Trajectory simulate() const;
};

const std::vector<std::string>& catalog_names();

// Deterministic: same name, seed and overrides give bit-identical data.
// Unknown names and inapplicable or mis-shaped overrides raise Schema.
Scenario build_scenario(const std::string& name, const ScenarioOverrides& overrides = {});

}  // namespace igv
