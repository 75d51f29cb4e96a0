// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// `--criterion N` runs just one of them, no argument runs all ten.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "shb/diagnostics.hpp"
#include "shb/harness.hpp"
#include "shb/io.hpp"
#include "shb/optimizer.hpp"
#include "shb/stationarity.hpp"
#include "support/problems.hpp"

using namespace shb;
using shb::testing::AbsValue;
using shb::testing::half_squared_norm;
using shb::testing::random_normal;
using shb::testing::soft_threshold;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double std_error(const std::vector<double>& v) {
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / (v.size() - 1) / v.size());
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = mean(lx), my = mean(ly);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

const PhaseRetrievalParams kSmallPhase{20, 60, 10.0, 0.2, 5.0, XStarMode::UnitSphere};

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

// ---------------------------------------------------------------------------

Outcome specialization_identity() {
  std::size_t mismatches = 0;
  for (std::uint64_t c = 0; c < 10; ++c) {
    auto problem = generate_phase_retrieval({20, 60, 1.0 + c, 0.1 + 0.02 * c, 5.0, XStarMode::UnitSphere}, 100 + c);
    std::shared_ptr<StochasticProblem> p = problem;
    if (c % 3 == 2) {
      // Constrained variant: same data on a ball around the origin.
      p = std::make_shared<PhaseRetrieval>(problem->a(), problem->b(), problem->x_star(), problem->params(),
                                           problem->seed(), ConvexSet::ball(20, 1.5));
    }
    const double alpha0 = 1e-3 * (1 + c);
    const auto mode = c % 2 ? StepMode::ConstantHorizon : StepMode::Decaying;
    const ParamSchedule sched(mode, alpha0, MomentumFixed{1.0}, std::size_t{5000});
    Rng rng = make_rng(c, 1);
    const Vector x0 = random_normal(20, rng);
    RecordSpec rec;
    rec.store_points = true;
    rec.record_objective = c == 0;
    const auto a = run(*p, x0, sched, 5000, 7 + c, rec);
    const auto b = run_sgd_reference(*p, x0, sched, 5000, 7 + c, rec);
    bool ok = a.rows.size() == b.rows.size() && a.kstar == b.kstar && same_bits(a.x_bar_kstar, b.x_bar_kstar);
    for (std::size_t i = 0; ok && i < a.rows.size(); ++i) {
      ok = a.rows[i].k == b.rows[i].k && same_bits(a.rows[i].x, b.rows[i].x) &&
           std::memcmp(&a.rows[i].f, &b.rows[i].f, sizeof(double)) == 0;
    }
    mismatches += !ok;
  }
  return {mismatches == 0, std::to_string(mismatches) + "/10 configs differ"};
}

Outcome heavy_ball_equivalence() {
  const auto p = generate_phase_retrieval(kSmallPhase, 11);
  const double rho = p->analytic_rho();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sched = ParamSchedule::decaying(0.5 / rho, MomentumNu{0.2 * rho});
    Rng rng = make_rng(seed, 1);
    const Vector x0 = random_normal(20, rng);
    const auto a = shb_iterates(*p, x0, sched, 10000, seed);
    const auto b = run_heavy_ball_form(*p, x0, sched, 10000, seed);
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, (a[k] - b[k]).norm() / a[k].norm());
  }
  return {worst <= 1e-8, "max relative deviation " + fmt("%.3e", worst)};
}

Outcome prox_equivalence() {
  Rng rng = make_rng(2024, 3);
  std::uniform_real_distribution<double> lam(0.05, 3.0);
  const auto q = half_squared_norm(4);
  AbsValue f;
  double worst_q = 0.0, worst_abs = 0.0;
  for (int t = 0; t < 100; ++t) {
    // Both functions are convex, so any lambda > 0 satisfies 1/lambda >= 2 rho = 0.
    const double lambda = lam(rng);
    const Vector xb = random_normal(4, rng, 2.0);
    const auto e = prox_solve(*q, xb, MoreauConfig::make(lambda, 0.0, 20000, 0.0));
    worst_q = std::max(worst_q, (e.x_hat - xb / (1 + lambda)).lpNorm<Eigen::Infinity>());
    const Vector x1 = random_normal(1, rng, 2.0);
    const auto e1 = prox_solve(f, x1, MoreauConfig::make(lambda, 0.0, 20000, 0.0));
    worst_abs = std::max(worst_abs, std::abs(e1.x_hat[0] - soft_threshold(x1[0], lambda)));
  }
  return {worst_q <= 1e-4 && worst_abs <= 1e-4,
          "max error quadratic " + fmt("%.2e", worst_q) + ", abs " + fmt("%.2e", worst_abs)};
}

ExperimentConfig theorem_one_config(std::size_t K) {
  ExperimentConfig c;
  c.problem.phase = kSmallPhase;
  c.problem.instance_seed = 5;
  c.methods = {MethodSpec::parse("shb:nu_inv_alpha0")};
  c.step_mode = StepMode::ConstantHorizon;
  c.iterations = K;
  c.seeds = 50;
  c.epsilons = {1e-1};
  c.evaluate_kstar = true;
  c.moreau_inner_iters = 4000;
  c.moreau_inner_tol = 0.0;
  return c;
}

Outcome theorem_one() {
  const auto problem = make_problem(theorem_one_config(1).problem);
  const double rho = problem->analytic_rho();
  bool pass = true;
  std::ostringstream out;
  for (std::size_t K : {std::size_t{1000}, std::size_t{4000}}) {
    auto cfg = theorem_one_config(K);
    cfg.alpha0_grid = {1.0 / rho};
    const auto r = run_experiment(cfg, *problem);
    std::vector<double> sq;
    for (const auto& rec : r.records) sq.push_back(*rec.grad_norm_kstar * *rec.grad_norm_kstar);
    const double L = r.constants.L_hat;
    // Closed form of the rate bound at alpha0 = 1/rho, computed independently of theorem_bound.
    const double rhs = 10.0 * (rho * r.delta + L * L) / std::sqrt(K + 1.0);
    const double lhs = mean(sq) + 2.0 * std_error(sq);
    BoundConstants bc;
    bc.rho = rho;
    bc.L = L;
    bc.delta = r.delta;
    bc.alpha0 = 1.0 / rho;
    const auto check = bound_check_report(r.records, bc, TheoremId::T1, K);
    const bool ok = lhs <= rhs && check.pass && std::abs(check.report.rhs - rhs) <= 1e-9 * rhs;
    pass = pass && ok;
    out << "K=" << K << " lhs=" << fmt("%.4g", lhs) << " rhs=" << fmt("%.4g", rhs) << "; ";
  }
  return {pass, out.str()};
}

Outcome rate_order() {
  const auto problem = make_problem(theorem_one_config(1).problem);
  const double rho = problem->analytic_rho();
  const double alpha0 = 1.0 / rho;
  const std::size_t n = problem->dim(), m = problem->sample_count();
  const auto moreau = MoreauConfig::standard(rho, 4000, 0.0);
  std::vector<double> Ks, means;
  std::ostringstream out;
  for (std::size_t K : {std::size_t{1000}, std::size_t{4000}, std::size_t{16000}}) {
    const auto sched = ParamSchedule::constant_horizon(alpha0, MomentumNu{1.0 / alpha0}, K);
    RecordSpec rec;
    rec.stride = m;
    rec.store_points = true;
    rec.record_objective = false;
    rec.select_kstar = false;
    std::vector<double> best(50);
    parallel_for(50, Execution::Parallel, [&](std::size_t s) {
      const std::uint64_t seed = 1 + s;
      Rng rng = make_rng(seed, 1);
      const auto t = run(*problem, random_normal(n, rng), sched, K, seed, rec);
      double b = kInfinity;
      for (const auto& row : t.rows) {
        const auto est = prox_solve(*problem, bar_iterate(row.x, row.x_prev, row.beta_prev), moreau);
        b = std::min(b, est.grad_norm * est.grad_norm);
      }
      best[s] = b;
    });
    Ks.push_back(static_cast<double>(K));
    means.push_back(mean(best));
    out << "K=" << K << " mean_min=" << fmt("%.4g", means.back()) << "; ";
  }
  const double slope = loglog_slope(Ks, means);
  out << "slope=" << fmt("%.3f", slope);
  return {slope <= -0.35, out.str()};
}

Outcome lyapunov_deterministic() {
  const std::size_t n = 10;
  const auto q = generate_smooth_quadratic({n, 1, 1.5, 0.0}, ConvexSet::ball(n, 1.0), 12);
  const double rho = q->analytic_rho();
  double worst = -kInfinity, first = -kInfinity;
  std::size_t steps = 0;
  for (double frac : {1.0, 0.5}) {
    const double alpha = frac / (4.0 * rho);
    if (!w_step_admissible(alpha, rho)) return {false, "step outside the admissible range"};
    for (double nu : {0.3 / alpha, 1.0 / alpha}) {
      const std::size_t K = 10000;
      const auto sched = ParamSchedule::constant_horizon(alpha * std::sqrt(K + 1.0), MomentumNu{nu}, K);
      RecordSpec rec;
      rec.store_points = true;
      rec.select_kstar = false;
      rec.record_objective = false;
      Rng rng = make_rng(3, 1);
      const auto t = run(*q, random_normal(n, rng, 2.0), sched, K, 3, rec);
      const double beta = sched.beta(0);
      const double xi = (1.0 - beta) / nu;
      std::vector<double> W(t.rows.size()), dsq(t.rows.size());
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        dsq[i] = i == 0 ? 0.0 : ((r.x_prev - r.x) / alpha).squaredNorm();
        W[i] = lyapunov_W(q->objective(r.x), phi(r.x, r.z, alpha, q->feasible_set()), dsq[i], nu, alpha, xi);
      }
      // z_0 = g_0 does not follow z_k = beta g_k + (1 - beta) d_k, which the
      // relation relies on, so the first transition is reported but not checked.
      first = std::max(first, w_excess(W[0], W[1], dsq[1], alpha, nu, 0.0));
      for (std::size_t i = 1; i + 1 < W.size(); ++i) {
        worst = std::max(worst, w_excess(W[i], W[i + 1], dsq[i + 1], alpha, nu, 0.0));
        ++steps;
      }
    }
  }
  return {worst <= 1e-9, std::to_string(steps) + " steps, largest excess " + fmt("%.3e", worst) +
                             ", first step " + fmt("%.3e", first)};
}

Outcome lyapunov_stochastic() {
  const auto problem = generate_phase_retrieval(kSmallPhase, 5);
  const double rho = problem->analytic_rho();
  const double alpha0 = 1.0 / rho, nu = 1.0 / alpha0;
  const std::size_t n = problem->dim(), m = problem->sample_count(), K = 40 * m, seeds = 50;
  const auto sched = ParamSchedule::constant_horizon(alpha0, MomentumNu{nu}, K);
  const double alpha = sched.alpha(0), beta = sched.beta(0);
  const auto moreau = MoreauConfig::standard(rho, 3000, 0.0);
  const double gamma = gamma_exact(rho, moreau.lambda, beta, nu);

  RecordSpec rec;
  rec.stride = m;
  rec.with_successor = true;
  rec.store_points = true;
  rec.record_objective = false;
  rec.select_kstar = false;
  std::vector<Trajectory> runs(seeds);
  parallel_for(seeds, Execution::Parallel, [&](std::size_t s) {
    Rng rng = make_rng(1 + s, 1);
    runs[s] = run(*problem, random_normal(n, rng), sched, K, 1 + s, rec);
  });
  double x_max = 0.0;
  for (const auto& t : runs) x_max = std::max(x_max, t.max_iterate_norm);
  const auto consts = estimate_constants(*problem, ConvexSet::ball(n, x_max), 200, 1);

  std::vector<std::size_t> grid;
  std::vector<std::vector<double>> excess(seeds);
  parallel_for(seeds, Execution::Parallel, [&](std::size_t s) {
    const auto& rows = runs[s].rows;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      if (rows[i + 1].k != rows[i].k + 1 || rows[i].k == 0) continue;
      const auto s0 = snapshot(*problem, rows[i], nu, moreau);
      const auto s1 = snapshot(*problem, rows[i + 1], nu, moreau);
      excess[s].push_back(
          v_excess(s0.V, s1.V, s0.grad_norm * s0.grad_norm, alpha, gamma, consts.L_hat, moreau.lambda));
    }
  });
  for (const auto& row : runs[0].rows)
    if (row.k % m == 0 && row.k > 0 && row.k < K) grid.push_back(row.k);
  const auto report = descent_monitor(grid, excess);
  double worst = -kInfinity;
  for (const auto& r : report.rows) worst = std::max(worst, r.mean_slack);
  return {report.violated_fraction <= 0.10, std::to_string(grid.size()) + " grid points, violated fraction " +
                                                fmt("%.3f", report.violated_fraction) + ", largest mean excess " +
                                                fmt("%.3e", worst)};
}

Outcome transient_growth() {
  ExperimentConfig c;
  c.problem.phase = {50, 150, 1.0, 0.2, 5.0, XStarMode::UnitSphere};
  c.problem.instance_seed = 1;
  c.methods = {MethodSpec::parse("shb:sqrtK:10"), MethodSpec::parse("sgd")};
  c.step_mode = StepMode::Decaying;
  c.alpha0_grid = {0.15};
  c.epochs = 400;
  c.seeds = 50;
  c.epsilons = {1e-2};
  const auto r = run_experiment(c);
  std::vector<double> shb_init, shb_final;
  std::size_t sgd_growth = 0, sgd_runs = 0;
  for (const auto& rec : r.records) {
    if (rec.method == "sgd") {
      ++sgd_runs;
      sgd_growth += rec.max_gap > 10.0 * rec.initial_gap;
    } else {
      shb_init.push_back(rec.initial_gap);
      shb_final.push_back(rec.diverged ? kInfinity : rec.final_gap);
    }
  }
  const double med_init = quantile_lower(shb_init, 0.5), med_final = quantile_lower(shb_final, 0.5);
  const double growth = static_cast<double>(sgd_growth) / sgd_runs;
  return {med_final <= med_init && growth >= 0.2,
          "SHB median gap " + fmt("%.4g", med_init) + " -> " + fmt("%.4g", med_final) + ", SGD growth fraction " +
              fmt("%.2f", growth)};
}

Outcome robustness() {
  ExperimentConfig c;
  c.problem.phase = {50, 150, 10.0, 0.3, 5.0, XStarMode::UnitSphere};
  c.problem.instance_seed = 2;
  c.methods.clear();
  for (const char* m : {"sgd", "shb:sqrtK:1", "shb:inv_alpha0", "shb:fixed:0.1", "shb:fixed:0.01"})
    c.methods.push_back(MethodSpec::parse(m));
  c.step_mode = StepMode::Decaying;
  c.alpha0_grid.clear();
  for (int i = 0; i < 9; ++i) c.alpha0_grid.push_back(1e-3 * std::pow(10.0, 0.5 * i));
  c.epochs = 400;
  c.seeds = 50;
  c.epsilons = {1e-2};
  const auto r = run_experiment(c);
  std::vector<std::string> labels;
  std::vector<int> finite;
  for (const auto& a : r.aggregates) {
    auto it = std::find(labels.begin(), labels.end(), a.method);
    if (it == labels.end()) {
      labels.push_back(a.method);
      finite.push_back(0);
      it = labels.end() - 1;
    }
    finite[it - labels.begin()] += std::isfinite(a.median);
  }
  const int sgd = finite[std::find(labels.begin(), labels.end(), "sgd") - labels.begin()];
  bool pass = labels.size() == 5;
  std::ostringstream out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels[i] << "=" << finite[i] << " ";
    if (labels[i] != "sgd") pass = pass && finite[i] >= sgd;
  }
  out << "(of " << c.alpha0_grid.size() << " step sizes)";
  return {pass, out.str()};
}

// Invariant suites: geometry, weak convexity, phi and gamma bounds, determinism.
Outcome invariants() {
  std::vector<std::string> failed;
  Rng rng = make_rng(99, 4);
  const std::size_t n = 6;

  const std::vector<ConvexSet> sets{ConvexSet::whole_space(n), ConvexSet::ball(random_normal(n, rng), 1.3),
                                    ConvexSet::box(n, -0.5, 0.8)};
  bool geo = true;
  for (const auto& set : sets) {
    for (int t = 0; t < 500; ++t) {
      const Vector y = random_normal(n, rng, 3.0), w = random_normal(n, rng, 3.0);
      const Vector py = set.project(y), pw = set.project(w);
      const Vector x = set.project(random_normal(n, rng, 3.0));
      geo = geo && set.contains(py, 1e-12) && (set.project(py) - py).norm() <= 1e-12 * (1 + py.norm());
      geo = geo && (py - pw).norm() <= (y - w).norm() * (1 + 1e-12);
      geo = geo && (py - pw).squaredNorm() <= (py - pw).dot(y - w) + 1e-10;
      geo = geo && (y - py).dot(x - py) <= 1e-10;
    }
  }
  if (!geo) failed.push_back("projection");

  const auto p = generate_phase_retrieval({n, 30, 5.0, 0.3, 5.0, XStarMode::UnitSphere}, 8);
  const double rho = p->analytic_rho();
  bool wc = true;
  for (int t = 0; t < 500; ++t) {
    const Vector x = random_normal(n, rng), y = random_normal(n, rng);
    const std::size_t i = p->draw_sample(rng);
    const double lin = p->sample_subgradient(x, i).dot(y - x);
    wc = wc && p->sample_value(y, i) >= p->sample_value(x, i) + lin - 0.5 * rho * (y - x).squaredNorm() - 1e-9;
    const double full = p->full_subgradient(x).dot(y - x);
    wc = wc && p->objective(y) >= p->objective(x) + full - 0.5 * rho * (y - x).squaredNorm() - 1e-9;
  }
  if (!wc) failed.push_back("weak convexity");

  bool ph = true;
  for (const auto& set : sets) {
    for (int t = 0; t < 500; ++t) {
      const Vector x = set.project(random_normal(n, rng, 2.0)), z = random_normal(n, rng, 2.0);
      const double a = std::exp(std::uniform_real_distribution<double>(-5, 1)(rng));
      const double v = phi(x, z, a, set);
      const double conj = h_conjugate(set, x - a * z) - 0.5 * x.squaredNorm() + a * x.dot(z);
      ph = ph && v >= 0.0 && std::abs(v - conj) <= 1e-8 * (1 + std::abs(conj) + x.squaredNorm());
    }
  }
  if (!ph) failed.push_back("phi");

  bool gm = true;
  for (double r : {0.05, 1.0, 30.0}) {
    for (double a0 : {1e-3, 0.2, 1.0 / r, 10.0}) {
      for (int i = 0; i <= 200; ++i) {
        const double beta = std::max(i / 200.0, 1e-6);
        gm = gm && gamma_exact(r, 1 / (2 * r), beta, 1 / a0) <= gamma_bound(r, a0) * (1 + 1e-14);
        gm = gm && gamma1_exact(r, 1 / (2 * r), beta, 1 / a0) <= gamma1_bound(r, a0) * (1 + 1e-14);
      }
    }
  }
  if (!gm) failed.push_back("gamma");

  ExperimentConfig c;
  c.problem.phase = {8, 24, 5.0, 0.2, 5.0, XStarMode::UnitSphere};
  c.methods = {MethodSpec::parse("shb:sqrtK:10"), MethodSpec::parse("sgd")};
  c.alpha0_grid = {0.01, 0.3};
  c.epochs = 50;
  c.seeds = 6;
  c.epsilons = {1.0, 0.1};
  c.evaluate_kstar = true;
  c.moreau_inner_iters = 300;
  const fs::path base = fs::temp_directory_path() / "shb_acceptance_determinism";
  fs::remove_all(base);
  emit_outputs(run_experiment(c, Execution::Parallel), base / "a", true);
  emit_outputs(run_experiment(c, Execution::Parallel), base / "b", true);
  emit_outputs(run_experiment(c, Execution::Serial), base / "c", true);
  const std::string ma = io::read_file(base / "a" / "manifest.txt");
  if (ma.empty() || ma != io::read_file(base / "b" / "manifest.txt") || ma != io::read_file(base / "c" / "manifest.txt"))
    failed.push_back("determinism");
  fs::remove_all(base);

  std::string detail = failed.empty() ? "projection, weak convexity, phi, gamma, determinism" : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"SHB(beta=1) equals SGD bitwise", specialization_identity},
    {"heavy-ball form equivalence", heavy_ball_equivalence},
    {"prox solver vs closed forms", prox_equivalence},
    {"rate bound at x_bar_k*", theorem_one},
    {"log-log rate slope", rate_order},
    {"W descent pathwise", lyapunov_deterministic},
    {"V descent in mean", lyapunov_stochastic},
    {"SGD transient growth vs SHB", transient_growth},
    {"step-size robustness", robustness},
    {"invariant suites", invariants},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  if (which.empty())
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) which.push_back(i);

  bool all = true;
  for (int id : which) {
    if (id < 1 || id > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "no criterion %d\n", id);
      return 2;
    }
    const auto& [name, fn] = kCriteria[id - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s: %s (%s) [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
