// Lyapunov functions, theorem right-hand sides and cross-seed descent monitors.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shb/common.hpp"
#include "shb/geometry.hpp"
#include "shb/oracle.hpp"
#include "shb/optimizer.hpp"
#include "shb/stationarity.hpp"

namespace shb {

/// h*(y) for h = 0.5||.||^2 + indicator(X): <y, p> - 0.5||p||^2 with p = Pi_X(y).
double h_conjugate(const ConvexSet& set, const Vector& y);

/// phi = h*(x - alpha z) - 0.5||x||^2 + alpha <x, z>, evaluated in the
/// cancellation-free form 0.5 (alpha^2 ||z||^2 - dist(x - alpha z, X)^2).
double phi(const Vector& x, const Vector& z, double alpha, const ConvexSet& set);

struct LyapunovParams {
  double lambda = 0.0;
  double nu = 1.0;
  double xi = 0.0;  // (1 - beta) / nu
  double alpha = 0.0;
  double beta = 1.0;
};

struct VInputs {
  double moreau_at_bar = 0.0;  // F_lambda(x_bar_k)
  double p_norm_sq = 0.0;
  double d_norm_sq = 0.0;
  double f_prev = 0.0;  // f(x_{k-1})
};

/// V_k = F_lambda(x_bar) + nu xi^2/(4 lambda^2)||p||^2 + alpha xi^2/(2 lambda^2)||d||^2
///       + ((1 - beta) xi^2/(2 lambda^2) + xi/lambda) f(x_{k-1}).
double lyapunov_V(const VInputs& in, const LyapunovParams& p);

/// W_k = 2 f(x_k) + phi_k / (nu alpha^2) + (xi / 2)||d_k||^2.
double lyapunov_W(double f_x, double phi_k, double d_norm_sq, double nu, double alpha, double xi);

/// Whether alpha lies in the step range (0, 1/(4 rho)] the W descent needs.
bool w_step_admissible(double alpha, double rho);

/// Exact gamma = xi^2 (rho (1 - beta)/2 + nu) / lambda + rho xi / 2 + 1.
double gamma_exact(double rho, double lambda, double beta, double nu);
/// Exact gamma_1 = 1 + (1 - beta) xi^2 / (2 lambda^2) + xi / lambda.
double gamma1_exact(double rho, double lambda, double beta, double nu);
/// rho^2 alpha0^2 + 3 rho alpha0 + 1.
double gamma_bound(double rho, double alpha0);
/// 2 rho^2 alpha0^2 + 2 rho alpha0 + 1.
double gamma1_bound(double rho, double alpha0);

struct LyapunovSnapshot {
  std::size_t k = 0;
  double V = 0.0;
  double W = 0.0;
  double phi = 0.0;
  double moreau_at_bar = 0.0;
  double grad_norm = 0.0;  // at x_bar_k
  double p_norm_sq = 0.0;
  double d_norm_sq = 0.0;
  double f_x = 0.0;
  double f_prev = 0.0;
};

/// Evaluates every Lyapunov quantity at a recorded row (needs store_points).
/// One prox solve per call.
LyapunovSnapshot snapshot(const StochasticProblem& problem, const TrajectoryRow& row, double nu,
                          const MoreauConfig& moreau, const std::optional<Vector>& warm_start = std::nullopt);

enum class TheoremId { T1, T2, T3 };

struct BoundConstants {
  double rho = 0.0;
  double L = 0.0;      // T1
  double sigma = 0.0;  // T2, T3
  double G = 0.0;      // T2
  double delta = 0.0;  // f(x_0) - f*
  double alpha0 = 0.0;
  std::optional<double> lambda;  // T3 only; defaults to 1/(2 rho)
};

struct BoundReport {
  TheoremId theorem = TheoremId::T1;
  double rhs = 0.0;
  std::size_t K = 0;
  BoundConstants constants;
  double gamma = 0.0;
  double gamma1 = 0.0;
  double c = 0.0;
  double lambda = 0.0;
  std::optional<double> lhs_estimate;
  std::optional<double> lhs_stderr;
};

/// Right-hand side of the rate bound for K iterations with alpha = alpha0/sqrt(K+1).
/// T1/T2: 2 (gamma_1 Delta + gamma C alpha0^2 / (2 lambda)) / (alpha0 sqrt(K+1)),
/// lambda = 1/(2 rho), C = L^2 (T1) or sigma^2 + G^2 (T2), gamma and gamma_1 at
/// their beta-uniform bounds.
/// T3: c ((1 + 2 alpha0^2/lambda^2) Delta + (1 + 8 alpha0/lambda) sigma^2 alpha0^2/(2 lambda))
///     / (alpha0 sqrt(K+1)), c = 2/lambda / (2/lambda - 3 rho).
BoundReport theorem_bound(TheoremId theorem, const BoundConstants& constants, std::size_t K);

const char* to_string(TheoremId t);
TheoremId parse_theorem(const std::string& s);

/// One-step excess of the V relation:
///   V_{k+1} - V_k + (alpha/2) ||grad F_lambda(x_bar_k)||^2 - gamma alpha^2 L^2 / (2 lambda).
double v_excess(double v_k, double v_next, double grad_norm_sq, double alpha, double gamma, double L,
                double lambda);
/// One-step excess of the W relation: W_{k+1} - W_k + alpha ||d_{k+1}||^2 - 4 nu alpha^2 sigma^2.
double w_excess(double w_k, double w_next, double d_next_sq, double alpha, double nu, double sigma);

struct MonitorRow {
  std::size_t k = 0;
  double mean_slack = 0.0;  // seed mean of the excess; <= 0 when the relation holds
  double stderr_ = 0.0;
  bool violated = false;
};

struct MonitorReport {
  std::vector<MonitorRow> rows;
  double violated_fraction = 0.0;
  std::size_t seeds = 0;
};

/// excess[s][j] is seed s at grid point grid[j]. A grid point is violated when
/// its mean excess exceeds 2 standard errors (plus `abs_tol`).
MonitorReport descent_monitor(const std::vector<std::size_t>& grid, const std::vector<std::vector<double>>& excess,
                              std::size_t min_seeds = 30, double abs_tol = 0.0);

/// Single deterministic path: violated wherever excess > tol.
MonitorReport pathwise_monitor(const std::vector<std::size_t>& grid, const std::vector<double>& excess, double tol);

/// CSV with columns k,mean_slack,stderr,violated.
std::string monitor_csv(const MonitorReport& report);

}  // namespace shb
