#include "shb/stationarity.hpp"

#include <algorithm>
#include <cmath>

namespace shb {

MoreauConfig MoreauConfig::make(double lambda, double rho_hat, std::size_t inner_iters, double inner_tol,
                                LambdaRange range) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive and finite");
  if (!(rho_hat >= 0.0) || !std::isfinite(rho_hat)) throw ConfigError("rho_hat must be finite and >= 0");
  if (inner_iters < 1) throw ConfigError("inner_iters must be >= 1");
  if (!(inner_tol >= 0.0)) throw ConfigError("inner_tol must be >= 0");
  const double inv = 1.0 / lambda;
  const double slack = 1e-12 * std::max(1.0, 2.0 * rho_hat);
  if (range == LambdaRange::Standard) {
    if (inv < 2.0 * rho_hat - slack) throw ConfigError("Moreau parameter needs 1/lambda >= 2 rho_hat");
  } else {
    if (!(inv > 1.5 * rho_hat) || inv > 2.0 * rho_hat + slack) {
      throw ConfigError("smooth unconstrained bound needs 1/lambda in (3 rho_hat / 2, 2 rho_hat]");
    }
  }
  MoreauConfig c;
  c.lambda = lambda;
  c.rho_hat = rho_hat;
  c.inner_iters = inner_iters;
  c.inner_tol = inner_tol;
  c.range = range;
  return c;
}

MoreauConfig MoreauConfig::standard(double rho_hat, std::size_t inner_iters, double inner_tol) {
  if (!(rho_hat > 0.0)) throw ConfigError("the default lambda = 1/(2 rho_hat) needs rho_hat > 0");
  return make(1.0 / (2.0 * rho_hat), rho_hat, inner_iters, inner_tol);
}

Vector bar_iterate(const Vector& x, const Vector& x_prev, double beta) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(x_prev.size()), "bar_iterate");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("bar_iterate needs beta in (0, 1]");
  return x + ((1.0 - beta) / beta) * (x - x_prev);
}

MoreauEstimate prox_solve(const StochasticProblem& problem, const Vector& x_bar, const MoreauConfig& cfg,
                          const std::optional<Vector>& warm_start) {
  require_dim(problem.dim(), static_cast<std::size_t>(x_bar.size()), "prox_solve");
  const double mu = cfg.modulus();
  if (!(mu > 0.0)) throw ConfigError("prox subproblem is not strongly convex for this lambda");
  const ConvexSet& set = problem.feasible_set();
  const double inv_lambda = 1.0 / cfg.lambda;

  auto value_at = [&](const Vector& y, Vector& g) {
    return problem.value_and_subgradient(y, g) + 0.5 * inv_lambda * (y - x_bar).squaredNorm();
  };

  Vector y = set.project(warm_start ? *warm_start : x_bar);
  Vector g(y.size());
  Vector avg = Vector::Zero(y.size());
  Vector best = y;
  double best_value = kInfinity;
  double weight_sum = 0.0;
  double max_sub = 0.0;
  double last_grad_norm = -1.0;
  constexpr std::size_t kCheckEvery = 50;

  std::size_t t = 0;
  for (; t < cfg.inner_iters; ++t) {
    const double value = value_at(y, g);
    if (!std::isfinite(value) || !g.allFinite()) {
      throw DivergedError(t, "non-finite value in the prox subproblem");
    }
    if (value < best_value) {
      best_value = value;
      best = y;
    }
    g += inv_lambda * (y - x_bar);
    max_sub = std::max(max_sub, g.norm());

    const double w = static_cast<double>(t + 1);
    weight_sum += w;
    avg += (w / weight_sum) * (y - avg);

    y -= (2.0 / (mu * static_cast<double>(t + 2))) * g;
    set.project_into(y, y);

    if ((t + 1) % kCheckEvery == 0) {
      const double gn = (x_bar - avg).norm() * inv_lambda;
      if (cfg.inner_tol > 0.0 && last_grad_norm >= 0.0 && std::abs(gn - last_grad_norm) <= cfg.inner_tol * gn) {
        ++t;
        break;
      }
      last_grad_norm = gn;
    }
  }

  MoreauEstimate est;
  est.x_bar = x_bar;
  est.iterations = t;
  est.subproblem_gap_bound = 2.0 * max_sub * max_sub / (mu * static_cast<double>(t + 1));

  const double avg_value = value_at(avg, g);
  const double last_value = value_at(y, g);
  est.x_hat = best;
  est.envelope_value = best_value;
  if (avg_value < est.envelope_value) {
    est.x_hat = avg;
    est.envelope_value = avg_value;
  }
  if (last_value < est.envelope_value) {
    est.x_hat = y;
    est.envelope_value = last_value;
  }
  est.grad_norm = (x_bar - est.x_hat).norm() * inv_lambda;
  return est;
}

std::vector<MoreauEstimate> prox_solve_batch(const StochasticProblem& problem, const std::vector<Vector>& points,
                                             const MoreauConfig& config, Execution exec) {
  std::vector<MoreauEstimate> out(points.size());
  parallel_for(points.size(), exec, [&](std::size_t i) { out[i] = prox_solve(problem, points[i], config); });
  return out;
}

double stationarity_transfer(double grad_norm, double lambda, double xi, double d_norm) {
  return 2.0 * grad_norm * grad_norm + 2.0 * xi * xi * d_norm * d_norm / (lambda * lambda);
}

double iterate_stationarity(const Vector& x, const MoreauEstimate& estimate, double lambda) {
  return (x - estimate.x_hat).squaredNorm() / (lambda * lambda);
}

double gradient_mapping_bound(double grad_norm_at_half_rho) {
  return 1.5 * (1.0 + 1.0 / std::sqrt(2.0)) * grad_norm_at_half_rho;
}

Vector gradient_mapping(const StochasticProblem& problem, const Vector& x, double step) {
  if (!(step > 0.0)) throw ConfigError("gradient mapping step must be positive");
  const Vector g = problem.full_subgradient(x);
  return (x - problem.feasible_set().project(x - step * g)) / step;
}

}  // namespace shb
