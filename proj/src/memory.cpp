#include "igv/memory.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "igv/error.hpp"

namespace igv {

namespace {

struct Block {
  std::size_t player;
  Eigen::Index offset;
  Eigen::Index size;
  double weight;
  double decay;
};

}  // namespace

GameDefinition augment_memory_feedback(const BaseDynamics& base_state_dynamics,
                                       const MemoryFeedbackSpec& spec) {
  if (!base_state_dynamics) {
    fail(ErrorKind::InvalidInput, "memory augmentation needs base dynamics");
  }
  auto blocks = std::make_shared<std::vector<Block>>();
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& pm = spec.players[i];
    if (!pm.observe || !pm.respond || pm.observation_dim == 0) {
      fail(ErrorKind::InvalidInput,
           "player " + std::to_string(i + 1) + " memory spec is incomplete");
    }
    for (const auto& term : pm.kernel) {
      if (!(term.decay > 0.0) || !std::isfinite(term.decay) ||
          !std::isfinite(term.weight)) {
        fail(ErrorKind::InvalidInput,
             "kernel decay rates must be positive and finite");
      }
      const auto size = static_cast<Eigen::Index>(pm.observation_dim);
      blocks->push_back(Block{i, offset, size, term.weight, term.decay});
      offset += size;
    }
  }
  const bool inert = offset == 0;
  const Eigen::Index xi_dim = inert ? 1 : offset;

  auto players = std::make_shared<const PerPlayer<PlayerMemory>>(spec.players);

  GameDefinition game;
  game.state_dim = spec.state_dim;
  game.intention_dim = static_cast<std::size_t>(xi_dim);
  game.control_dims = spec.control_dims;
  game.epsilon_dims = {1, 1};
  game.jet_order = 0;
  game.phi_dynamics = [base_state_dynamics](const Vector& phi, const Vector&,
                                            const Vector& u1, const Vector& u2) {
    return base_state_dynamics(phi, u1, u2);
  };
  game.xi_dynamics = [blocks, players, xi_dim](const Vector& xi, const Vector& phi,
                                               const Vector&, const Vector&) {
    Vector dxi = Vector::Zero(xi_dim);
    for (const auto& b : *blocks) {
      const Vector g = (*players)[b.player].observe(phi);
      if (g.size() != b.size) {
        fail(ErrorKind::InvalidInput, "observation map returned the wrong dimension");
      }
      dxi.segment(b.offset, b.size) = -b.decay * xi.segment(b.offset, b.size) + g;
    }
    return dxi;
  };
  for (std::size_t i = 0; i < 2; ++i) {
    const auto obs_dim = static_cast<Eigen::Index>(spec.players[i].observation_dim);
    game.feedback[i] = FeedbackFamily::custom(
        spec.control_dims[i], spec.state_dim, game.intention_dim, 1,
        [blocks, players, i, obs_dim](const Vector& u_free, std::span<const Vector>,
                                      const Vector& xi, const Vector&) {
          Vector memory = Vector::Zero(obs_dim);
          for (const auto& b : *blocks) {
            if (b.player == i) memory += b.weight * xi.segment(b.offset, b.size);
          }
          return (*players)[i].respond(u_free, memory);
        });
  }
  game.validate();
  return game;
}

}  // namespace igv
