#pragma once

#include <functional>
#include <vector>

#include "igv/dynamics.hpp"

namespace igv {

// Continuous traces restricted to one epoch [t_{n-1}, t_n]. Held inputs
// (ε, u°) use held_trace(); states (φ, ξ) use state_trace().
struct EpochTrace {
  double t_begin = 0.0;
  double t_end = 0.0;
  PerPlayer<Matrix> epsilon;
  PerPlayer<Matrix> u_free;
  Matrix xi;
  Matrix phi;
};

// Builds the trace of epoch [grid index k0, grid index k1]. `epsilon`
// replaces the trajectory's stored ε (pass an estimate, or the truth).
EpochTrace make_epoch_trace(const Trajectory& traj, const PerPlayer<Matrix>& epsilon,
                            std::size_t k0, std::size_t k1);

// Utterance state φ_n from (ε, ξ) on the epoch.
using UtteranceStateMap = std::function<Vector(const EpochTrace&)>;
// Utterance controls v_n from (u°, ξ) on the epoch.
using UtteranceControlMap = std::function<PerPlayer<Vector>(const EpochTrace&)>;
// Discrete step φ_n = Φ(φ_{n-1}, v_n; ξ on the epoch).
using DiscreteStepMap = std::function<Vector(
    const Vector& phi_prev, const PerPlayer<Vector>& v, const EpochTrace&)>;

// M times the trapezoid average of the stacked (ε1, ε2) trace. ξ is
// accepted for the contract and unused by the built-in map.
Vector utterance_state_functional(const PerPlayer<Matrix>& epsilon_trace,
                                  const Matrix& xi_trace, const Matrix& M);

// Per-player trapezoid averages of u°.
PerPlayer<Vector> utterance_control_functional(const PerPlayer<Matrix>& u_free_trace,
                                               const Matrix& xi_trace);

UtteranceStateMap mean_epsilon_state(Matrix M);
UtteranceControlMap mean_free_control();
// φ_n = A φ_{n-1} + B (v1, v2) + c
DiscreteStepMap affine_step_map(Matrix A, Matrix B, Vector c);

struct DialogueDefinition {
  GameDefinition continuous;  // φ is bookkeeping only
  GameState init;
  std::vector<double> schedule;  // t_0 < t_1 < ... (grid aligned)
  UtteranceStateMap state_map;
  UtteranceControlMap control_map;
  DiscreteStepMap step_map;
};

struct Utterance {
  std::size_t index = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  Vector phi;
  PerPlayer<Vector> v;
};

struct DialogueTranscript {
  std::vector<Utterance> utterances;
  std::vector<std::size_t> boundary_index;  // grid index of each schedule time
  Trajectory trace;
  std::vector<double> step_residuals;  // one per utterance after the first
};

// Integrates the intention field across all epochs without resetting
// state, then evaluates the utterance maps per epoch and the step
// residuals ‖φ_n - Φ(φ_{n-1}, v_n; ξ)‖₂.
DialogueTranscript run_dialogue(const DialogueDefinition& def,
                                const PerPlayer<Signal>& u_free_signals,
                                const PerPlayer<Signal>& epsilon_signals, double dt);

struct ResidualStats {
  double max = 0.0;
  double mean = 0.0;
};

ResidualStats check_step_consistency(const DialogueTranscript& transcript,
                                     const DiscreteStepMap& step_map);

}  // namespace igv
