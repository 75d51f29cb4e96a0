#include "shb/diagnostics.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "shb/text.hpp"

namespace shb {

double h_conjugate(const ConvexSet& set, const Vector& y) {
  const Vector p = set.project(y);
  return y.dot(p) - 0.5 * p.squaredNorm();
}

double phi(const Vector& x, const Vector& z, double alpha, const ConvexSet& set) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(z.size()), "phi");
  const Vector y = x - alpha * z;
  const double step = alpha * z.norm();
  const double dist = (y - set.project(y)).norm();
  return 0.5 * (step - dist) * (step + dist);
}

double lyapunov_V(const VInputs& in, const LyapunovParams& p) {
  const double l2 = p.lambda * p.lambda;
  const double xi2 = p.xi * p.xi;
  return in.moreau_at_bar + p.nu * xi2 / (4.0 * l2) * in.p_norm_sq + p.alpha * xi2 / (2.0 * l2) * in.d_norm_sq +
         ((1.0 - p.beta) * xi2 / (2.0 * l2) + p.xi / p.lambda) * in.f_prev;
}

double lyapunov_W(double f_x, double phi_k, double d_norm_sq, double nu, double alpha, double xi) {
  return 2.0 * f_x + phi_k / (nu * alpha * alpha) + 0.5 * xi * d_norm_sq;
}

bool w_step_admissible(double alpha, double rho) { return alpha > 0.0 && 4.0 * rho * alpha <= 1.0; }

double gamma_exact(double rho, double lambda, double beta, double nu) {
  const double xi = (1.0 - beta) / nu;
  return xi * xi * (rho * (1.0 - beta) / 2.0 + nu) / lambda + rho * xi / 2.0 + 1.0;
}

double gamma1_exact(double /*rho*/, double lambda, double beta, double nu) {
  const double xi = (1.0 - beta) / nu;
  return 1.0 + (1.0 - beta) * xi * xi / (2.0 * lambda * lambda) + xi / lambda;
}

double gamma_bound(double rho, double alpha0) { return rho * rho * alpha0 * alpha0 + 3.0 * rho * alpha0 + 1.0; }

double gamma1_bound(double rho, double alpha0) { return 2.0 * rho * rho * alpha0 * alpha0 + 2.0 * rho * alpha0 + 1.0; }

LyapunovSnapshot snapshot(const StochasticProblem& problem, const TrajectoryRow& row, double nu,
                          const MoreauConfig& moreau, const std::optional<Vector>& warm_start) {
  if (row.x.size() == 0) throw ConfigError("snapshot needs rows recorded with store_points");
  const double beta = row.beta_prev;
  const double alpha = row.alpha_next;
  const Vector x_bar = bar_iterate(row.x, row.x_prev, beta);
  const MoreauEstimate est = prox_solve(problem, x_bar, moreau, warm_start);

  LyapunovSnapshot s;
  s.k = row.k;
  s.moreau_at_bar = est.envelope_value;
  s.grad_norm = est.grad_norm;
  s.p_norm_sq = (((1.0 - beta) / beta) * (row.x - row.x_prev)).squaredNorm();
  s.d_norm_sq = ((row.x_prev - row.x) / row.alpha_prev).squaredNorm();
  s.f_x = problem.objective(row.x);
  s.f_prev = problem.objective(row.x_prev);
  s.phi = phi(row.x, row.z, alpha, problem.feasible_set());

  LyapunovParams p;
  p.lambda = moreau.lambda;
  p.nu = nu;
  p.xi = (1.0 - beta) / nu;
  p.alpha = alpha;
  p.beta = beta;
  s.V = lyapunov_V({s.moreau_at_bar, s.p_norm_sq, s.d_norm_sq, s.f_prev}, p);
  s.W = lyapunov_W(s.f_x, s.phi, s.d_norm_sq, nu, alpha, p.xi);
  return s;
}

BoundReport theorem_bound(TheoremId theorem, const BoundConstants& c, std::size_t K) {
  // rho = 0 (convex) is allowed for T1/T2: lambda = +inf and the noise term vanishes.
  if (!(c.rho >= 0.0) || !(c.alpha0 > 0.0)) throw ConfigError("theorem bound needs rho >= 0 and alpha0 > 0");
  if (c.delta < 0.0 || c.L < 0.0 || c.sigma < 0.0 || c.G < 0.0) {
    throw ConfigError("theorem constants must be nonnegative");
  }
  BoundReport r;
  r.theorem = theorem;
  r.K = K;
  r.constants = c;
  const double root = std::sqrt(static_cast<double>(K) + 1.0);
  if (theorem == TheoremId::T1 || theorem == TheoremId::T2) {
    r.lambda = 1.0 / (2.0 * c.rho);
    r.gamma = gamma_bound(c.rho, c.alpha0);
    r.gamma1 = gamma1_bound(c.rho, c.alpha0);
    const double noise = theorem == TheoremId::T1 ? c.L * c.L : c.sigma * c.sigma + c.G * c.G;
    r.rhs = 2.0 * (r.gamma1 * c.delta + r.gamma * noise * c.alpha0 * c.alpha0 / (2.0 * r.lambda)) / (c.alpha0 * root);
    return r;
  }
  if (!(c.rho > 0.0)) throw ConfigError("T3 needs rho > 0");
  if (4.0 * c.rho * c.alpha0 > 1.0 * (1.0 + 1e-12)) throw ConfigError("T3 needs alpha0 in (0, 1/(4 rho)]");
  r.lambda = c.lambda.value_or(1.0 / (2.0 * c.rho));
  const double inv = 1.0 / r.lambda;
  if (!(inv > 1.5 * c.rho) || inv > 2.0 * c.rho * (1.0 + 1e-12)) {
    throw ConfigError("T3 needs 1/lambda in (3 rho / 2, 2 rho]");
  }
  r.c = 2.0 * inv / (2.0 * inv - 3.0 * c.rho);
  const double a = c.alpha0;
  r.rhs = r.c *
          ((1.0 + 2.0 * a * a * inv * inv) * c.delta +
           (1.0 + 8.0 * a * inv) * c.sigma * c.sigma * a * a / (2.0 * r.lambda)) /
          (a * root);
  return r;
}

const char* to_string(TheoremId t) {
  switch (t) {
    case TheoremId::T1: return "T1";
    case TheoremId::T2: return "T2";
    case TheoremId::T3: return "T3";
  }
  return "?";
}

TheoremId parse_theorem(const std::string& s) {
  if (s == "T1" || s == "t1" || s == "1") return TheoremId::T1;
  if (s == "T2" || s == "t2" || s == "2") return TheoremId::T2;
  if (s == "T3" || s == "t3" || s == "3") return TheoremId::T3;
  throw ConfigError("unknown theorem id '" + s + "' (expected T1, T2 or T3)");
}

double v_excess(double v_k, double v_next, double grad_norm_sq, double alpha, double gamma, double L,
                double lambda) {
  return v_next - v_k + 0.5 * alpha * grad_norm_sq - gamma * alpha * alpha * L * L / (2.0 * lambda);
}

double w_excess(double w_k, double w_next, double d_next_sq, double alpha, double nu, double sigma) {
  return w_next - w_k + alpha * d_next_sq - 4.0 * nu * alpha * alpha * sigma * sigma;
}

MonitorReport descent_monitor(const std::vector<std::size_t>& grid, const std::vector<std::vector<double>>& excess,
                              std::size_t min_seeds, double abs_tol) {
  if (excess.size() < min_seeds || excess.size() < 2) {
    throw ConfigError("descent monitor needs at least " + std::to_string(std::max<std::size_t>(min_seeds, 2)) +
                      " seeds, got " + std::to_string(excess.size()));
  }
  for (const auto& series : excess) require_dim(grid.size(), series.size(), "monitor series");
  MonitorReport report;
  report.seeds = excess.size();
  const double n = static_cast<double>(excess.size());
  std::size_t violated = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double mean = 0.0;
    for (const auto& series : excess) mean += series[j];
    mean /= n;
    double var = 0.0;
    for (const auto& series : excess) var += (series[j] - mean) * (series[j] - mean);
    var /= (n - 1.0);
    MonitorRow row;
    row.k = grid[j];
    row.mean_slack = mean;
    row.stderr_ = std::sqrt(var / n);
    row.violated = mean > 2.0 * row.stderr_ + abs_tol;
    violated += row.violated;
    report.rows.push_back(row);
  }
  report.violated_fraction = grid.empty() ? 0.0 : static_cast<double>(violated) / static_cast<double>(grid.size());
  return report;
}

MonitorReport pathwise_monitor(const std::vector<std::size_t>& grid, const std::vector<double>& excess, double tol) {
  require_dim(grid.size(), excess.size(), "monitor series");
  MonitorReport report;
  report.seeds = 1;
  std::size_t violated = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    MonitorRow row{grid[j], excess[j], 0.0, excess[j] > tol};
    violated += row.violated;
    report.rows.push_back(row);
  }
  report.violated_fraction = grid.empty() ? 0.0 : static_cast<double>(violated) / static_cast<double>(grid.size());
  return report;
}

std::string monitor_csv(const MonitorReport& report) {
  std::ostringstream out;
  out << "k,mean_slack,stderr,violated\n";
  for (const auto& r : report.rows) {
    out << r.k << ',' << text::format(r.mean_slack) << ',' << text::format(r.stderr_) << ',' << (r.violated ? 1 : 0)
        << '\n';
  }
  return out.str();
}

}  // namespace shb
