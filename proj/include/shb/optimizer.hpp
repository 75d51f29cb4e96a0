// Stochastic heavy ball (SHB) with projection, its SGD specialisation and the
// equivalent two-step heavy-ball recursion.
#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "shb/common.hpp"
#include "shb/oracle.hpp"

namespace shb {

enum class StepMode {
  ConstantHorizon,  // alpha = alpha0 / sqrt(K + 1) for every k
  Decaying,         // alpha_k = alpha0 / sqrt(k + 1)
};

/// beta_k = min(nu * alpha_k, 1).
struct MomentumNu {
  double nu = 1.0;
};
/// Constant beta in (0, 1].
struct MomentumFixed {
  double beta = 1.0;
};

class ParamSchedule {
 public:
  using Momentum = std::variant<MomentumNu, MomentumFixed>;

  /// `horizon` is K; required in constant-horizon mode.
  ParamSchedule(StepMode mode, double alpha0, Momentum momentum,
                std::optional<std::size_t> horizon = std::nullopt);

  static ParamSchedule constant_horizon(double alpha0, Momentum momentum, std::size_t horizon) {
    return ParamSchedule(StepMode::ConstantHorizon, alpha0, momentum, horizon);
  }
  static ParamSchedule decaying(double alpha0, Momentum momentum) {
    return ParamSchedule(StepMode::Decaying, alpha0, momentum);
  }

  double alpha(std::size_t k) const;
  double beta(std::size_t k) const;

  StepMode mode() const { return mode_; }
  double alpha0() const { return alpha0_; }
  const Momentum& momentum() const { return momentum_; }
  std::optional<std::size_t> horizon() const { return horizon_; }
  /// The same step sizes with beta pinned to 1.
  ParamSchedule as_sgd() const { return ParamSchedule(mode_, alpha0_, MomentumFixed{1.0}, horizon_); }

 private:
  StepMode mode_;
  double alpha0_;
  Momentum momentum_;
  std::optional<std::size_t> horizon_;
};

/// Coefficients of x_{k+1} = x_k - eta_k g_k + lambda_k (x_k - x_{k-1}).
struct HeavyBallParams {
  double eta;
  double lambda;
};

/// Defined for k >= 1 only.
HeavyBallParams heavy_ball_params(const ParamSchedule& schedule, std::size_t k);

/// Iterate triple (x_k, x_{k-1}, z_k) plus the stream it draws samples from.
struct ShbState {
  Vector x;
  Vector x_prev;
  Vector z;
  std::size_t k = 0;
  Rng rng;
  /// Parameters of the step that produced x_k (the k = 0 values at start).
  double last_alpha = 0.0;
  double last_beta = 1.0;
  bool projected_init = false;
  Vector scratch;  // g_{k+1}

  /// d_k = (x_{k-1} - x_k) / alpha.
  Vector d() const { return (x_prev - x) / last_alpha; }
  /// p_k = (1 - beta) / beta (x_k - x_{k-1}).
  Vector p() const { return ((1.0 - last_beta) / last_beta) * (x - x_prev); }
};

/// Divergence guard: ||x|| above this (or any non-finite entry) aborts a run.
inline constexpr double kDivergenceNorm = 1e12;

/// x_0 is projected onto X when infeasible; z_0 = f'(x_0, S_0).
ShbState init(const StochasticProblem& problem, const Vector& x0, const ParamSchedule& schedule,
              std::uint64_t seed);

/// x_{k+1} = Pi_X(x_k - alpha_k z_k),
/// z_{k+1} = beta_k g_{k+1} + (1 - beta_k)(x_k - x_{k+1}) / alpha_k.
/// Throws DivergedError when the new iterate is non-finite or exceeds the guard.
void step(ShbState& state, const StochasticProblem& problem, const ParamSchedule& schedule);

/// Per-step hook used by tests that need to inject g_{k+1}.
void step_with_subgradient(ShbState& state, const ConvexSet& set, double alpha, double beta,
                           const Vector& g_next);

struct RecordSpec {
  /// Rows at every multiple of `stride`, plus the final iterate.
  std::size_t stride = 1;
  /// Also record k + 1 after each multiple of `stride` (one-step monitors).
  bool with_successor = false;
  /// Keep x_k, x_{k-1} and z_k in each row for diagnostics.
  bool store_points = false;
  /// f(x*) or another reference value; f_gap is recorded relative to it.
  std::optional<double> f_reference;
  /// Evaluate f(x_k) at recorded rows (O(m n) each).
  bool record_objective = true;
  /// Draw k* after the loop and keep x_{k*}, x_{k*-1}.
  bool select_kstar = true;
};

struct TrajectoryRow {
  std::size_t k = 0;
  double f = 0.0;
  double f_gap = 0.0;
  double d_norm_sq = 0.0;
  double z_norm_sq = 0.0;
  bool feasible = true;
  // Filled when RecordSpec::store_points is set.
  Vector x;
  Vector x_prev;
  Vector z;
  double alpha_prev = 0.0;  // step size that produced x_k
  double beta_prev = 1.0;
  double alpha_next = 0.0;  // step size applied to x_k
  double beta_next = 1.0;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  std::size_t iterations = 0;
  bool projected_init = false;
  bool diverged = false;
  std::size_t diverged_at = 0;
  double max_iterate_norm = 0.0;
  std::optional<std::size_t> kstar;
  Vector x_kstar;
  Vector x_prev_kstar;
  double beta_kstar = 1.0;
  /// x_bar at k*; equals x_{k*} for SGD.
  Vector x_bar_kstar;
};

/// Divergence during run(); carries everything recorded before the abort.
class RunDiverged : public DivergedError {
 public:
  RunDiverged(std::size_t iteration, const std::string& what, Trajectory partial)
      : DivergedError(iteration, what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

/// K steps of SHB from x0. Deterministic given the seed; k* is drawn
/// uniformly from {0, ..., K} on the run's stream after the loop.
Trajectory run(const StochasticProblem& problem, const Vector& x0, const ParamSchedule& schedule,
               std::size_t iterations, std::uint64_t seed, const RecordSpec& record = {});

/// Plain projected stochastic subgradient method x_{k+1} = Pi_X(x_k - alpha_k g_k),
/// written independently of step(). Consumes the stream exactly like run().
Trajectory run_sgd_reference(const StochasticProblem& problem, const Vector& x0, const ParamSchedule& schedule,
                             std::size_t iterations, std::uint64_t seed, const RecordSpec& record = {});

/// Unconstrained heavy-ball recursion driven by heavy_ball_params() on the same
/// sample stream as run(). Returns x_0, ..., x_K.
std::vector<Vector> run_heavy_ball_form(const StochasticProblem& problem, const Vector& x0,
                                        const ParamSchedule& schedule, std::size_t iterations,
                                        std::uint64_t seed);

/// Every iterate x_0, ..., x_K of the SHB recursion (no recording overhead).
std::vector<Vector> shb_iterates(const StochasticProblem& problem, const Vector& x0, const ParamSchedule& schedule,
                                 std::size_t iterations, std::uint64_t seed);

}  // namespace shb
