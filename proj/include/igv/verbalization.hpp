#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "igv/epsilon.hpp"

namespace igv {

// A-posteriori partition t_0 < ... < t_N of a trajectory grid.
struct Partition {
  std::vector<double> boundaries;
  std::vector<std::size_t> indices;  // grid index of each boundary

  std::size_t epoch_count() const {
    return indices.empty() ? 0 : indices.size() - 1;
  }
};

// Which epoch means enter the utterance features. ε̂ means always form the
// head of ω_n; v_n is always the u° means.
struct FeatureSpec {
  bool omega_includes_phi = true;   // append the epoch-mean φ to ω_n
  bool regress_on_phi = true;       // epoch-mean φ as a regressor of the fit
};

struct VerbalizationConfig {
  double min_epoch_len = 0.5;
  double changepoint_penalty = 1.0;
  FeatureSpec features;
  double score_threshold = 0.95;
  std::size_t symbol_bins = 4;

  void validate() const;
};

struct EpochFeatures {
  Matrix omega;  // one row per epoch
  Matrix v;
  Matrix phi;    // epoch-mean φ (regressors), possibly zero columns
};

// ω_n = A ω_{n-1} + B v_n + C φ̄_n + c
struct RecursionFit {
  Matrix A, B, C;
  Vector c;
  Vector residuals;  // ‖ω_n - ω̂_n‖₂ for n = 1..N-1
  double score = 1.0;
  Eigen::Index design_rank = 0;
};

using Bigram = std::pair<std::uint64_t, std::uint64_t>;

struct SymbolSequence {
  std::vector<std::uint64_t> symbols;
  std::map<Bigram, std::size_t> bigrams;
};

struct VerbalizationResult {
  Partition partition;
  EpochFeatures features;
  RecursionFit fit;
  double score = 1.0;
  bool verbalizable = false;
  SymbolSequence symbols;
};

// Penalized least-squares change points of the stacked ε̂ signal under a
// piecewise-constant model, found by top-down binary segmentation. Each
// held interval [t_k, t_{k+1}) carries ε̂_k; a split is accepted when it
// lowers the squared error by strictly more than the penalty and leaves
// both sides at least min_epoch_len long. Equal gains resolve to the
// earliest split point.
Partition segment_epochs(const EpsilonEstimate& eps_est, const VerbalizationConfig& cfg);

// ω_n = (mean ε̂1, mean ε̂2[, mean φ]), v_n = (mean u°1, mean u°2); epoch
// means use the trapezoid rule on the epoch traces.
EpochFeatures extract_utterance_features(const Trajectory& traj,
                                         const EpsilonEstimate& eps_est,
                                         const Partition& partition,
                                         const VerbalizationConfig& cfg);

// Joint least squares of ω_n on (ω_{n-1}, v_n, φ̄_n, 1) over n >= 1.
// Requires at least (regressor count + 2) epochs. score = 1 - RSS/TSS, and
// 1 when the targets have no variance. Collinear regressors get the
// minimum-norm solution; design_rank reports the rank.
RecursionFit fit_recursion_map(const Matrix& omega, const Matrix& v,
                               const Matrix& phi_features);

// Uniform per-coordinate binning over the observed range; the symbol is
// the mixed-radix index with coordinate 0 as the lowest digit.
SymbolSequence symbolize_transcript(const Matrix& omega, std::size_t symbol_bins);

// estimate_epsilon -> segment_epochs -> extract_utterance_features ->
// fit_recursion_map -> symbolize_transcript. Errors carry the stage name.
// A single-epoch partition is the constant dialogue: trivial map, score 1.
VerbalizationResult verbalize(const Trajectory& traj, const GameDefinition& game,
                              const VerbalizationConfig& cfg);

}  // namespace igv
