#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "igv/signal.hpp"
#include "igv/types.hpp"

namespace igv {

// Realized control of one player as a known function of its free control
// u°, the φ-jet (φ, φ', ..., φ^(k)), the intention field ξ and the unknown
// parameter ε.
class FeedbackFamily {
 public:
  enum class Kind { AffineBuiltin, Custom };

  using CustomFn = std::function<Vector(const Vector& u_free,
                                        std::span<const Vector> phi_jet,
                                        const Vector& xi,
                                        const Vector& epsilon)>;

  // u = u° + P φ + Q ξ + R ε. Rows of P, Q, R are the control dimension.
  // Default state has zero dimensions and fails GameDefinition::validate().
  FeedbackFamily() = default;

  static FeedbackFamily affine(Matrix P, Matrix Q, Matrix R);
  static FeedbackFamily custom(std::size_t control_dim, std::size_t state_dim,
                               std::size_t intention_dim,
                               std::size_t epsilon_dim, CustomFn fn);

  Kind kind() const { return kind_; }
  bool is_affine() const { return kind_ == Kind::AffineBuiltin; }

  std::size_t control_dim() const { return control_dim_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t intention_dim() const { return intention_dim_; }
  std::size_t epsilon_dim() const { return epsilon_dim_; }

  // Only meaningful for affine families.
  const Matrix& P() const { return P_; }
  const Matrix& Q() const { return Q_; }
  const Matrix& R() const { return R_; }

  // True when R has full column rank (rank of RᵀR equals dim ε), decided
  // once at construction. Always false for custom families.
  bool recovery_supported() const { return recovery_supported_; }

  const CustomFn& custom_fn() const { return custom_; }

 private:
  Kind kind_ = Kind::AffineBuiltin;
  std::size_t control_dim_ = 0;
  std::size_t state_dim_ = 0;
  std::size_t intention_dim_ = 0;
  std::size_t epsilon_dim_ = 0;
  Matrix P_, Q_, R_;
  bool recovery_supported_ = false;
  CustomFn custom_;
};

// Φ̃(φ, ξ, u1, u2) -> dφ/dt
using PhiDynamics = std::function<Vector(const Vector& phi, const Vector& xi,
                                         const Vector& u1, const Vector& u2)>;
// Ξ(ξ, φ, u1, u2) -> dξ/dt
using XiDynamics = std::function<Vector(const Vector& xi, const Vector& phi,
                                        const Vector& u1, const Vector& u2)>;

struct GameDefinition {
  std::size_t state_dim = 1;
  std::size_t intention_dim = 1;
  PerPlayer<std::size_t> control_dims{1, 1};
  PerPlayer<std::size_t> epsilon_dims{1, 1};
  // Highest φ-derivative read by the feedbacks. Built-in affine families use
  // 0; custom families may go up to 2 (finite differences on the grid).
  std::size_t jet_order = 0;
  PhiDynamics phi_dynamics;
  XiDynamics xi_dynamics;
  PerPlayer<FeedbackFamily> feedback;

  // Throws InvalidInput when dimensions or maps are inconsistent.
  void validate() const;
};

struct GameState {
  double time = 0.0;
  Vector phi;
  Vector xi;
};

// Dense record of a run; row k of every matrix belongs to grid.time(k).
struct Trajectory {
  TimeGrid grid;
  Matrix phi;
  Matrix xi;
  PerPlayer<Matrix> u_free;
  PerPlayer<Matrix> u_realized;
  std::optional<PerPlayer<Matrix>> epsilon_truth;

  std::size_t size() const { return grid.size; }
  GameState state_at(std::size_t k) const;

  // Throws InvalidInput when row counts or finiteness are off.
  void validate() const;
};

Vector eval_feedback(const FeedbackFamily& family, const Vector& u_free,
                     std::span<const Vector> phi_jet, const Vector& xi,
                     const Vector& epsilon);

// One classical RK4 step of the coupled (φ, ξ) system. u° and ε are held
// over the step; the feedbacks are re-evaluated at every stage with the
// stage values of φ and ξ. held_jet supplies φ-derivatives 1..k, also held.
GameState step_integrate(const GameDefinition& game, const GameState& state,
                         const PerPlayer<Vector>& u_free,
                         const PerPlayer<Vector>& epsilon, double dt,
                         std::span<const Vector> held_jet = {});

// Incremental fixed-step integrator over a uniform grid. Grid times are
// computed from the index, so advancing in several calls gives the same
// bits as advancing in one.
class Simulator {
 public:
  Simulator(const GameDefinition& game, GameState init,
            PerPlayer<Signal> u_free, PerPlayer<Signal> epsilon,
            TimeGrid grid);

  // Records grid points up to and including index k.
  void advance_to(std::size_t k);
  std::size_t recorded() const { return recorded_; }
  const GameState& state() const { return state_; }

  Trajectory finish() &&;

 private:
  void record_current();
  std::vector<Vector> jet_at(std::size_t k) const;

  GameDefinition game_;
  GameState state_;
  PerPlayer<Signal> u_free_;
  PerPlayer<Signal> epsilon_;
  Trajectory traj_;
  std::size_t recorded_ = 0;
};

Trajectory simulate(const GameDefinition& game, const GameState& init,
                    const PerPlayer<Signal>& u_free_signals,
                    const PerPlayer<Signal>& epsilon_signals, double t_end,
                    double dt);

}  // namespace igv
