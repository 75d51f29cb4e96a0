// Multi-seed experiment orchestration: sweeps over methods and initial step
// sizes, epochs-to-accuracy statistics, theorem-bound checks and output files.
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shb/common.hpp"
#include "shb/diagnostics.hpp"
#include "shb/oracle.hpp"
#include "shb/optimizer.hpp"
#include "shb/parallel.hpp"
#include "shb/stationarity.hpp"

namespace shb {

enum class ProblemFamily { PhaseRetrieval, SmoothQuadratic };

struct ProblemSpec {
  ProblemFamily family = ProblemFamily::PhaseRetrieval;
  PhaseRetrievalParams phase;
  SmoothQuadraticParams smooth;
  /// Feasible set in ConvexSet::parse syntax (smooth family; phase retrieval is unconstrained).
  std::string feasible = "whole";
  std::uint64_t instance_seed = 1;
  /// Load a saved instance instead of generating one.
  std::string instance_dir;
};

std::shared_ptr<StochasticProblem> make_problem(const ProblemSpec& spec);

/// f(x*) on the generated data for phase retrieval; nullopt otherwise.
std::optional<double> reference_value(const StochasticProblem& problem);

enum class BetaRule {
  Fixed,        // beta = param
  SqrtK,        // beta = param / sqrt(K)
  InvAlpha0,    // beta = 1 / (alpha0 sqrt(K))
  Nu,           // beta_k = min(param * alpha_k, 1)
  NuInvAlpha0,  // beta_k = min(alpha_k / alpha0, 1)
};

struct MethodSpec {
  bool sgd = false;
  BetaRule rule = BetaRule::Fixed;
  double param = 1.0;

  /// sgd | shb:fixed:B | shb:sqrtK:C | shb:inv_alpha0 | shb:nu:V | shb:nu_inv_alpha0
  static MethodSpec parse(const std::string& text);
  std::string label() const;
  std::string beta_rule_label() const;
  /// Step sizes and momentum for this method; constant betas are clamped to 1.
  ParamSchedule schedule(StepMode mode, double alpha0, std::size_t K) const;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<MethodSpec> methods{MethodSpec{}};
  StepMode step_mode = StepMode::Decaying;
  std::vector<double> alpha0_grid{0.1};
  /// K; when 0, K = epochs * m.
  std::size_t iterations = 0;
  std::size_t epochs = 400;
  /// Replicates per (method, alpha0). Replicate r runs with seed base_seed + r,
  /// shared across methods and step sizes.
  std::size_t seeds = 50;
  std::uint64_t base_seed = 1;
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
  /// Snapshot stride; 0 means one row per epoch (m iterations). Must divide m.
  std::size_t stride = 0;
  /// Evaluate ||grad F_lambda|| at x_bar_{k*} for every run.
  bool evaluate_kstar = false;
  std::optional<double> moreau_lambda;
  std::size_t moreau_inner_iters = 2000;
  double moreau_inner_tol = 1e-6;
  /// Probes for the empirical constants over the visited region.
  std::size_t constant_probes = 200;
  /// Standard deviation of x_0 ~ N(0, s^2 I).
  double x0_scale = 1.0;

  std::size_t horizon(std::size_t m) const { return iterations ? iterations : epochs * m; }
  std::size_t snapshot_stride(std::size_t m) const { return stride ? stride : m; }
};

/// Throws ConfigError for invalid sweeps (empty grids, eps <= 0, stride not dividing m, ...).
void validate(const ExperimentConfig& config, std::size_t m);

inline constexpr std::size_t kNotReached = static_cast<std::size_t>(-1);

struct RunRecord {
  std::size_t run_id = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::string method;
  double alpha0 = 0.0;
  std::string beta_rule;
  std::vector<TrajectoryRow> rows;
  std::optional<std::size_t> kstar;
  std::optional<double> grad_norm_kstar;
  /// One entry per epsilon; kNotReached when the accuracy is never reached.
  std::vector<std::size_t> epochs_to_eps;
  bool diverged = false;
  std::size_t diverged_at = 0;
  double initial_gap = 0.0;
  double final_gap = 0.0;
  /// Largest recorded gap; +inf for diverged runs.
  double max_gap = 0.0;
  double max_iterate_norm = 0.0;
};

struct AggregateRow {
  std::string method;
  double alpha0 = 0.0;
  double epsilon = 0.0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  double reach_fraction = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<AggregateRow> aggregates;
  std::vector<double> epsilons;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t K = 0;
  double f_star = 0.0;
  /// Mean over replicates of f(x_0) - f*.
  double delta = 0.0;
  ProblemConstants constants;
};

/// Executes |methods| x |alpha0 grid| x seeds runs. Divergent runs are recorded,
/// never fatal. The parallel path is byte-identical to the serial one.
ExperimentResult run_experiment(const ExperimentConfig& config, Execution exec = Execution::Parallel);
ExperimentResult run_experiment(const ExperimentConfig& config, const StochasticProblem& problem,
                                Execution exec = Execution::Parallel);

/// Smallest q with f(x_{m q}) - f_star <= epsilon, read off rows at epoch
/// boundaries. Throws ConfigError when an epoch boundary is missing.
std::size_t epochs_to_eps(const std::vector<TrajectoryRow>& rows, std::size_t m, double epsilon, double f_star);

/// Lower-interpolation quantile: sorted[floor(q (N - 1))]. +inf entries sort last.
double quantile_lower(std::vector<double> values, double q);

/// Median / p10 / p90 of epochs-to-eps per (method, alpha0, epsilon), in
/// method-then-alpha0-then-epsilon order of first appearance.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records, const std::vector<double>& epsilons);

struct BoundCheck {
  BoundReport report;
  double lhs_mean = 0.0;
  double lhs_stderr = 0.0;
  std::size_t runs = 0;
  bool pass = false;
};

/// Mean over runs of ||grad F_lambda(x_bar_{k*})||^2 against theorem_bound;
/// passes iff mean + 2 stderr <= rhs.
BoundCheck bound_check_report(const std::vector<RunRecord>& records, const BoundConstants& constants,
                              TheoremId theorem, std::size_t K);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Writes runs.csv, terminal.csv, aggregate.csv, constants.txt, plotdata/*.tsv
/// and manifest.txt (plus plots/*.svg when `svg` is set).
std::vector<ManifestEntry> emit_outputs(const ExperimentResult& result, const std::filesystem::path& outdir,
                                        bool svg = false);

/// Reads terminal.csv and constants.txt written by emit_outputs (no per-row data).
ExperimentResult read_outputs(const std::filesystem::path& outdir);

std::string sha256_hex(const std::string& bytes);

}  // namespace shb
