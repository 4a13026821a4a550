#pragma once

#include <functional>
#include <vector>

#include "igv/dynamics.hpp"

namespace igv {

// One term c * exp(-decay * (t - τ)) of an exponential memory kernel.
struct KernelTerm {
  double weight = 0.0;
  double decay = 1.0;
};

// Feedback of one player that reads its history through a finite sum of
// exponential kernels:
//   m(t) = Σ_j c_j ∫_0^t exp(-λ_j (t - τ)) g(φ(τ)) dτ,   u = h(u°, m(t)).
struct PlayerMemory {
  std::vector<KernelTerm> kernel;
  std::size_t observation_dim = 1;
  std::function<Vector(const Vector& phi)> observe;                      // g
  std::function<Vector(const Vector& u_free, const Vector& memory)> respond;  // h
};

struct MemoryFeedbackSpec {
  std::size_t state_dim = 1;
  PerPlayer<std::size_t> control_dims{1, 1};
  PerPlayer<PlayerMemory> players;
};

// State dynamics Φ(φ, u1, u2) of the system before augmentation.
using BaseDynamics =
    std::function<Vector(const Vector& phi, const Vector& u1, const Vector& u2)>;

// Rewrites the memory-feedback system as a differential game with an
// intention field: ξ stacks one filter block per (player, kernel term),
// ξ̇_j = -λ_j ξ_j + g(φ), and player i realizes u_i = h_i(u°_i, Σ_j c_j ξ_j).
// Blocks are ordered player 1 terms first. With ξ(0) = 0 the augmented game
// reproduces the memory system with an empty pre-history. ε has dimension
// one per player and is ignored. A game without any kernel term gets a
// single inert ξ component.
GameDefinition augment_memory_feedback(const BaseDynamics& base_state_dynamics,
                                       const MemoryFeedbackSpec& spec);

}  // namespace igv
