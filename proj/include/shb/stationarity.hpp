// Moreau-envelope stationarity: the corrected iterate x_bar, the proximal
// subproblem for F = f + indicator(X), and the bounds derived from it.
#pragma once

#include <optional>
#include <vector>

#include "shb/common.hpp"
#include "shb/oracle.hpp"
#include "shb/parallel.hpp"

namespace shb {

enum class LambdaRange {
  /// 1/lambda >= 2 rho (weakly convex case; the default).
  Standard,
  /// 1/lambda in (3 rho / 2, 2 rho] (smooth unconstrained bound).
  SmoothUnconstrained,
};

struct MoreauConfig {
  double lambda = 0.0;
  double rho_hat = 0.0;
  std::size_t inner_iters = 2000;
  /// Stop once the envelope-gradient estimate moves less than this, relatively
  /// (checked every 50 iterations). 0 runs all inner_iters.
  double inner_tol = 1e-6;
  LambdaRange range = LambdaRange::Standard;

  /// Validates lambda against rho_hat for the requested range.
  static MoreauConfig make(double lambda, double rho_hat, std::size_t inner_iters = 2000, double inner_tol = 1e-6,
                           LambdaRange range = LambdaRange::Standard);
  /// lambda = 1 / (2 rho_hat).
  static MoreauConfig standard(double rho_hat, std::size_t inner_iters = 2000, double inner_tol = 1e-6);

  /// Strong-convexity modulus of the subproblem, 1/lambda - rho_hat.
  double modulus() const { return 1.0 / lambda - rho_hat; }
};

struct MoreauEstimate {
  Vector x_bar;
  Vector x_hat;
  /// ||x_bar - x_hat|| / lambda.
  double grad_norm = 0.0;
  /// f(x_hat) + ||x_hat - x_bar||^2 / (2 lambda); an upper estimate of F_lambda(x_bar).
  double envelope_value = 0.0;
  /// 2 M^2 / (mu (T + 1)) for the weighted average of the inner iterates.
  double subproblem_gap_bound = 0.0;
  std::size_t iterations = 0;
};

/// x_k + (1 - beta)/beta (x_k - x_{k-1}).
Vector bar_iterate(const Vector& x, const Vector& x_prev, double beta);

/// Approximate prox of lambda F at x_bar by the projected subgradient method on
///   y -> f(y) + ||y - x_bar||^2 / (2 lambda),  y in X,
/// with step 2 / (mu (t + 2)) and (t + 1)-weighted averaging. Returns the best
/// of the averaged, last and best-seen iterates.
MoreauEstimate prox_solve(const StochasticProblem& problem, const Vector& x_bar, const MoreauConfig& config,
                          const std::optional<Vector>& warm_start = std::nullopt);

/// prox_solve over many query points; the parallel path is bitwise equal to the serial one.
std::vector<MoreauEstimate> prox_solve_batch(const StochasticProblem& problem, const std::vector<Vector>& points,
                                             const MoreauConfig& config, Execution exec = Execution::Parallel);

/// Right-hand side of
///   ||x_k - x_hat||^2 / lambda^2 <= 2 ||grad F_lambda(x_bar)||^2 + 2 xi^2 ||d_k||^2 / lambda^2.
double stationarity_transfer(double grad_norm, double lambda, double xi, double d_norm);

/// Left-hand side of the same inequality.
double iterate_stationarity(const Vector& x, const MoreauEstimate& estimate, double lambda);

/// (3/2)(1 + 1/sqrt 2) times the envelope gradient norm at lambda = 1/(2 rho).
double gradient_mapping_bound(double grad_norm_at_half_rho);

/// (x - Pi_X(x - step grad f(x))) / step for a smooth problem.
Vector gradient_mapping(const StochasticProblem& problem, const Vector& x, double step);

}  // namespace shb
