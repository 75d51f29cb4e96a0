// Command-line front end: generate, run, sweep, moreau, report.
//
// Every run/sweep flag can also come from a config file (--config FILE, INI or
// TOML syntax, keys in a [run] or [sweep] section); flags given on the command
// line win over the file.

#include <cmath>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "shb/harness.hpp"
#include "shb/io.hpp"
#include "shb/log.hpp"
#include "shb/text.hpp"

namespace {

using namespace shb;

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct ProblemFlags {
  std::string family = "phase";
  std::size_t n = 20;
  std::size_t m = 60;
  double kappa = 10.0;
  double p_fail = 0.2;
  double noise_scale = 5.0;
  std::string x_star_mode = "unit-sphere";
  double curvature = 1.0;
  double noise = 0.1;
  std::string feasible = "whole";
  std::uint64_t instance_seed = 1;
  std::string instance_dir;

  void attach(CLI::App* app) {
    app->add_option("--family", family, "phase | smooth")->check(CLI::IsMember({"phase", "smooth"}));
    app->add_option("--n", n, "dimension");
    app->add_option("--m", m, "number of samples");
    app->add_option("--kappa", kappa, "condition number of A (phase)");
    app->add_option("--p-fail", p_fail, "corruption probability (phase)");
    app->add_option("--noise-scale", noise_scale, "std-dev of corruptions (phase)");
    app->add_option("--x-star-mode", x_star_mode, "unit-sphere | standard-normal")
        ->check(CLI::IsMember({"unit-sphere", "standard-normal"}));
    app->add_option("--curvature", curvature, "spread of the shared Hessian (smooth)");
    app->add_option("--noise", noise, "per-sample perturbation (smooth)");
    app->add_option("--feasible", feasible, "whole | ball:R[:c] | box:lo:hi");
    app->add_option("--instance-seed", instance_seed, "seed of the generated instance");
    app->add_option("--instance", instance_dir, "load a saved instance instead of generating");
  }

  ProblemSpec spec() const {
    ProblemSpec s;
    s.family = family == "phase" ? ProblemFamily::PhaseRetrieval : ProblemFamily::SmoothQuadratic;
    s.phase = {n, m, kappa, p_fail, noise_scale,
               x_star_mode == "unit-sphere" ? XStarMode::UnitSphere : XStarMode::StandardNormal};
    s.smooth = {n, m, curvature, noise};
    s.feasible = feasible;
    s.instance_seed = instance_seed;
    s.instance_dir = instance_dir;
    return s;
  }
};

struct ExperimentFlags {
  ProblemFlags problem;
  std::vector<std::string> methods{"shb:sqrtK:10"};
  std::string schedule = "decaying";
  std::vector<double> alpha0{0.1};
  std::size_t iterations = 0;
  std::size_t epochs = 400;
  std::size_t seeds = 50;
  std::uint64_t base_seed = 1;
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
  std::size_t stride = 0;
  bool kstar = false;
  double moreau_lambda = 0.0;
  std::size_t inner_iters = 2000;
  double inner_tol = 1e-6;
  std::size_t probes = 200;
  double x0_scale = 1.0;
  std::string out = "out";
  bool svg = false;
  bool serial = false;

  void attach(CLI::App* app) {
    problem.attach(app);
    app->add_option("--method", methods, "sgd | shb:fixed:B | shb:sqrtK:C | shb:inv_alpha0 | shb:nu:V | shb:nu_inv_alpha0");
    app->add_option("--schedule", schedule, "decaying | constant")->check(CLI::IsMember({"decaying", "constant"}));
    app->add_option("--alpha0", alpha0, "initial step size(s)");
    app->add_option("--iterations", iterations, "K (overrides --epochs)");
    app->add_option("--epochs", epochs, "K = epochs * m when --iterations is 0");
    app->add_option("--seeds", seeds, "replicates per (method, alpha0)");
    app->add_option("--base-seed", base_seed, "replicate r uses base_seed + r");
    app->add_option("--eps", epsilons, "accuracy levels for epochs-to-eps");
    app->add_option("--stride", stride, "snapshot stride (0 = one row per epoch)");
    app->add_flag("--kstar", kstar, "evaluate the envelope gradient at x_bar_{k*}");
    app->add_option("--moreau-lambda", moreau_lambda, "prox parameter (0 = 1/(2 rho))");
    app->add_option("--inner-iters", inner_iters, "prox solver iterations");
    app->add_option("--inner-tol", inner_tol, "prox solver relative stopping tolerance");
    app->add_option("--probes", probes, "probe points for the empirical constants");
    app->add_option("--x0-scale", x0_scale, "x0 ~ N(0, s^2 I)");
    app->add_option("--out", out, "output directory");
    app->add_flag("--svg", svg, "also write plots/*.svg");
    app->add_flag("--serial", serial, "disable OpenMP over runs");
  }

  ExperimentConfig config() const {
    ExperimentConfig c;
    c.problem = problem.spec();
    c.methods.clear();
    for (const auto& m : methods) c.methods.push_back(MethodSpec::parse(m));
    c.step_mode = schedule == "decaying" ? StepMode::Decaying : StepMode::ConstantHorizon;
    c.alpha0_grid = alpha0;
    c.iterations = iterations;
    c.epochs = epochs;
    c.seeds = seeds;
    c.base_seed = base_seed;
    c.epsilons = epsilons;
    c.stride = stride;
    c.evaluate_kstar = kstar;
    if (moreau_lambda > 0.0) c.moreau_lambda = moreau_lambda;
    c.moreau_inner_iters = inner_iters;
    c.moreau_inner_tol = inner_tol;
    c.constant_probes = probes;
    c.x0_scale = x0_scale;
    return c;
  }
};

void print_aggregates(const ExperimentResult& res) {
  std::cout << "method,alpha0,epsilon,median,p10,p90,reach_fraction\n";
  for (const auto& a : res.aggregates) {
    std::cout << a.method << ',' << text::format(a.alpha0) << ',' << text::format(a.epsilon) << ','
              << text::format(a.median) << ',' << text::format(a.p10) << ',' << text::format(a.p90) << ','
              << text::format(a.reach_fraction) << '\n';
  }
}

int do_experiment(const ExperimentFlags& flags, bool single) {
  const ExperimentConfig cfg = flags.config();
  if (single && (cfg.methods.size() != 1 || cfg.alpha0_grid.size() != 1)) {
    throw ConfigError("'run' takes one method and one alpha0; use 'sweep' for grids");
  }
  const auto problem = make_problem(cfg.problem);
  const ExperimentResult res =
      run_experiment(cfg, *problem, flags.serial ? Execution::Serial : Execution::Parallel);
  const auto manifest = emit_outputs(res, flags.out, flags.svg);
  log::info("wrote " + std::to_string(manifest.size() + 1) + " files to " + flags.out);
  print_aggregates(res);

  std::size_t diverged = 0;
  for (const auto& r : res.records) diverged += r.diverged ? 1 : 0;
  if (diverged) std::cerr << diverged << " of " << res.records.size() << " runs diverged\n";
  if (single && cfg.seeds == 1 && diverged) {
    const auto& r = res.records.front();
    std::cerr << "run diverged at iteration " << r.diverged_at << '\n';
    return kExitDiverged;
  }
  return 0;
}

int do_generate(const ProblemFlags& flags, const std::string& out) {
  const auto problem = make_problem(flags.spec());
  io::save_instance(*problem, out);
  std::cout << "instance written to " << out << " (n = " << problem->dim() << ", m = " << problem->sample_count()
            << ", rho_hat = " << text::format(problem->analytic_rho()) << ")\n";
  return 0;
}

int do_moreau(const ProblemFlags& flags, const std::string& points_csv, const std::string& prev_csv,
              const std::vector<double>& betas, double lambda, std::size_t inner_iters, double inner_tol,
              bool serial) {
  const auto problem = make_problem(flags.spec());
  const Matrix pts = io::read_csv_matrix(points_csv);
  require_dim(problem->dim(), static_cast<std::size_t>(pts.cols()), "points file");
  std::vector<Vector> queries;
  if (!prev_csv.empty()) {
    const Matrix prev = io::read_csv_matrix(prev_csv);
    if (prev.rows() != pts.rows() || prev.cols() != pts.cols()) throw DimensionError("previous-iterate file shape");
    if (betas.size() != 1 && betas.size() != static_cast<std::size_t>(pts.rows())) {
      throw ConfigError("--beta takes one value or one per point");
    }
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      const double beta = betas.size() == 1 ? betas[0] : betas[static_cast<std::size_t>(i)];
      queries.push_back(bar_iterate(pts.row(i).transpose(), prev.row(i).transpose(), beta));
    }
  } else {
    for (Eigen::Index i = 0; i < pts.rows(); ++i) queries.emplace_back(pts.row(i).transpose());
  }
  const double rho = problem->analytic_rho();
  const double lam = lambda > 0.0 ? lambda : 1.0 / (2.0 * rho);
  const MoreauConfig cfg = MoreauConfig::make(lam, rho, inner_iters, inner_tol);
  const auto est = prox_solve_batch(*problem, queries, cfg, serial ? Execution::Serial : Execution::Parallel);
  std::cout << "index,grad_norm,envelope_value,subproblem_gap_bound,iterations\n";
  for (std::size_t i = 0; i < est.size(); ++i) {
    std::cout << i << ',' << text::format(est[i].grad_norm) << ',' << text::format(est[i].envelope_value) << ','
              << text::format(est[i].subproblem_gap_bound) << ',' << est[i].iterations << '\n';
  }
  return 0;
}

int do_report(const std::string& dir, const std::string& theorem, double alpha0_override) {
  const ExperimentResult res = read_outputs(dir);
  print_aggregates(res);
  if (theorem.empty()) return 0;

  std::map<double, std::vector<RunRecord>> by_alpha;
  for (const auto& r : res.records) by_alpha[r.alpha0].push_back(r);
  for (const auto& [alpha0, records] : by_alpha) {
    BoundConstants bc;
    bc.rho = res.constants.rho_hat;
    bc.L = res.constants.L_hat;
    bc.sigma = res.constants.sigma_hat;
    bc.G = res.constants.G_hat;
    bc.delta = res.delta;
    bc.alpha0 = alpha0_override > 0.0 ? alpha0_override : alpha0;
    const BoundCheck check = bound_check_report(records, bc, parse_theorem(theorem), res.K);
    std::cout << "bound " << theorem << " alpha0=" << text::format(bc.alpha0) << " K=" << res.K
              << " lhs_mean=" << text::format(check.lhs_mean) << " lhs_stderr=" << text::format(check.lhs_stderr)
              << " rhs=" << text::format(check.report.rhs) << " runs=" << check.runs << ' '
              << (check.pass ? "PASS" : "FAIL") << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic heavy ball experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file (INI/TOML); command-line flags override it");

  ProblemFlags gen_flags;
  std::string gen_out = "instance";
  auto* gen = app.add_subcommand("generate", "write a problem instance to a directory");
  gen_flags.attach(gen);
  gen->add_option("--out", gen_out, "instance directory");

  ExperimentFlags run_flags;
  run_flags.seeds = 1;
  auto* run_cmd = app.add_subcommand("run", "one method and step size; exit 3 if a single run diverges");
  run_flags.attach(run_cmd);

  ExperimentFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "grid over methods and alpha0; divergences are recorded");
  sweep_flags.attach(sweep);

  ProblemFlags mor_flags;
  std::string points, prev;
  std::vector<double> betas{1.0};
  double lambda = 0.0, inner_tol = 1e-6;
  std::size_t inner_iters = 2000;
  bool mor_serial = false;
  auto* mor = app.add_subcommand("moreau", "envelope gradient norm at saved iterates (one per CSV row)");
  mor_flags.attach(mor);
  mor->add_option("--points", points, "CSV of x_k (or x_bar when --prev is absent)")->required();
  mor->add_option("--prev", prev, "CSV of x_{k-1}; x_bar is formed with --beta");
  mor->add_option("--beta", betas, "momentum parameter(s) for x_bar");
  mor->add_option("--lambda", lambda, "prox parameter (0 = 1/(2 rho))");
  mor->add_option("--inner-iters", inner_iters, "prox solver iterations");
  mor->add_option("--inner-tol", inner_tol, "relative stopping tolerance");
  mor->add_flag("--serial", mor_serial, "disable OpenMP over points");

  std::string rep_dir = "out", theorem;
  double rep_alpha0 = 0.0;
  auto* rep = app.add_subcommand("report", "aggregates and theorem-bound checks from a run directory");
  rep->add_option("--dir", rep_dir, "directory written by run/sweep");
  rep->add_option("--theorem", theorem, "T1 | T2 | T3")->check(CLI::IsMember({"T1", "T2", "T3"}));
  rep->add_option("--alpha0", rep_alpha0, "override alpha0 in the bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return do_generate(gen_flags, gen_out);
    if (*run_cmd) return do_experiment(run_flags, true);
    if (*sweep) return do_experiment(sweep_flags, false);
    if (*mor) return do_moreau(mor_flags, points, prev, betas, lambda, inner_iters, inner_tol, mor_serial);
    if (*rep) return do_report(rep_dir, theorem, rep_alpha0);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergedError& e) {
    std::cerr << "diverged at iteration " << e.iteration() << ": " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
