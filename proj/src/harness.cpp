#include "shb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "shb/io.hpp"
#include "shb/log.hpp"
#include "shb/text.hpp"

namespace shb {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Problems and methods

std::shared_ptr<StochasticProblem> make_problem(const ProblemSpec& spec) {
  if (!spec.instance_dir.empty()) return io::load_instance(spec.instance_dir);
  if (spec.family == ProblemFamily::PhaseRetrieval) {
    auto inst = generate_phase_retrieval(spec.phase, spec.instance_seed);
    if (spec.feasible == "whole") return inst;
    return std::make_shared<PhaseRetrieval>(inst->a(), inst->b(), inst->x_star(), inst->params(), inst->seed(),
                                            ConvexSet::parse(spec.feasible, spec.phase.n));
  }
  return generate_smooth_quadratic(spec.smooth, ConvexSet::parse(spec.feasible, spec.smooth.n), spec.instance_seed);
}

std::optional<double> reference_value(const StochasticProblem& problem) {
  if (const auto* pr = dynamic_cast<const PhaseRetrieval*>(&problem)) {
    if (pr->x_star().size() == static_cast<Eigen::Index>(pr->dim())) return pr->objective(pr->x_star());
  }
  return std::nullopt;
}

MethodSpec MethodSpec::parse(const std::string& text_in) {
  const auto parts = text::split(text::trim(text_in), ':');
  MethodSpec m;
  if (parts.size() == 1 && parts[0] == "sgd") {
    m.sgd = true;
    m.param = 1.0;
    return m;
  }
  if (parts[0] != "shb" || parts.size() < 2) throw ConfigError("unknown method '" + text_in + "'");
  const auto rule = parts[1];
  auto param = [&]() {
    if (parts.size() != 3) throw ConfigError("method '" + text_in + "' needs a parameter");
    const double v = text::parse_double(parts[2]);
    if (!(v > 0.0)) throw ConfigError("method parameter must be positive in '" + text_in + "'");
    return v;
  };
  if (rule == "fixed") {
    m.rule = BetaRule::Fixed;
    m.param = param();
    if (m.param > 1.0) throw ConfigError("fixed beta must lie in (0, 1]");
  } else if (rule == "sqrtK") {
    m.rule = BetaRule::SqrtK;
    m.param = param();
  } else if (rule == "nu") {
    m.rule = BetaRule::Nu;
    m.param = param();
  } else if (rule == "inv_alpha0" && parts.size() == 2) {
    m.rule = BetaRule::InvAlpha0;
  } else if (rule == "nu_inv_alpha0" && parts.size() == 2) {
    m.rule = BetaRule::NuInvAlpha0;
  } else {
    throw ConfigError("unknown method '" + text_in + "'");
  }
  return m;
}

std::string MethodSpec::beta_rule_label() const {
  if (sgd) return "beta=1";
  switch (rule) {
    case BetaRule::Fixed: return "fixed:" + text::format(param);
    case BetaRule::SqrtK: return "sqrtK:" + text::format(param);
    case BetaRule::InvAlpha0: return "inv_alpha0";
    case BetaRule::Nu: return "nu:" + text::format(param);
    case BetaRule::NuInvAlpha0: return "nu_inv_alpha0";
  }
  return "?";
}

std::string MethodSpec::label() const { return sgd ? "sgd" : "shb:" + beta_rule_label(); }

ParamSchedule MethodSpec::schedule(StepMode mode, double alpha0, std::size_t K) const {
  const std::optional<std::size_t> horizon = K;
  if (sgd) return ParamSchedule(mode, alpha0, MomentumFixed{1.0}, horizon);
  const double root_k = std::sqrt(static_cast<double>(std::max<std::size_t>(K, 1)));
  switch (rule) {
    case BetaRule::Fixed: return ParamSchedule(mode, alpha0, MomentumFixed{param}, horizon);
    case BetaRule::SqrtK: return ParamSchedule(mode, alpha0, MomentumFixed{std::min(1.0, param / root_k)}, horizon);
    case BetaRule::InvAlpha0:
      return ParamSchedule(mode, alpha0, MomentumFixed{std::min(1.0, 1.0 / (alpha0 * root_k))}, horizon);
    case BetaRule::Nu: return ParamSchedule(mode, alpha0, MomentumNu{param}, horizon);
    case BetaRule::NuInvAlpha0: return ParamSchedule(mode, alpha0, MomentumNu{1.0 / alpha0}, horizon);
  }
  throw ConfigError("unknown beta rule");
}

void validate(const ExperimentConfig& c, std::size_t m) {
  if (c.methods.empty()) throw ConfigError("method list is empty");
  if (c.alpha0_grid.empty()) throw ConfigError("alpha0 grid is empty");
  for (double a : c.alpha0_grid)
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("alpha0 values must be positive");
  if (c.seeds < 1) throw ConfigError("seeds must be >= 1");
  for (double e : c.epsilons)
    if (!(e > 0.0)) throw ConfigError("epsilon values must be > 0");
  if (c.horizon(m) < 1) throw ConfigError("iteration count K must be >= 1");
  const std::size_t stride = c.snapshot_stride(m);
  if (m % stride != 0) {
    throw ConfigError("snapshot stride " + std::to_string(stride) + " must divide m = " + std::to_string(m));
  }
  if (!(c.x0_scale >= 0.0)) throw ConfigError("x0_scale must be >= 0");
}

// ---------------------------------------------------------------------------
// Statistics

std::size_t epochs_to_eps(const std::vector<TrajectoryRow>& rows, std::size_t m, double epsilon, double f_star) {
  if (m == 0) throw ConfigError("epochs_to_eps needs m >= 1");
  std::size_t expected = 0;
  for (const auto& row : rows) {
    if (row.k % m != 0) continue;
    const std::size_t q = row.k / m;
    if (q != expected) {
      throw ConfigError("trajectory lacks the row for epoch " + std::to_string(expected) +
                        " (snapshot stride must divide m)");
    }
    if (row.f - f_star <= epsilon) return q;
    ++expected;
  }
  return kNotReached;
}

double quantile_lower(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1) + 1e-9));
  return values[std::min(idx, values.size() - 1)];
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records, const std::vector<double>& epsilons) {
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.method, r.alpha0);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& key : keys) {
    const auto& group = groups[key];
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      std::vector<double> values;
      std::size_t reached = 0;
      for (const RunRecord* r : group) {
        const std::size_t q = e < r->epochs_to_eps.size() ? r->epochs_to_eps[e] : kNotReached;
        if (q == kNotReached) {
          values.push_back(kInfinity);
        } else {
          values.push_back(static_cast<double>(q));
          ++reached;
        }
      }
      AggregateRow row;
      row.method = key.first;
      row.alpha0 = key.second;
      row.epsilon = epsilons[e];
      row.median = quantile_lower(values, 0.5);
      row.p10 = quantile_lower(values, 0.1);
      row.p90 = quantile_lower(values, 0.9);
      row.reach_fraction = static_cast<double>(reached) / static_cast<double>(group.size());
      rows.push_back(row);
    }
  }
  return rows;
}

BoundCheck bound_check_report(const std::vector<RunRecord>& records, const BoundConstants& constants,
                              TheoremId theorem, std::size_t K) {
  if (records.empty()) throw ConfigError("bound check needs at least one run");
  std::vector<double> lhs;
  for (const auto& r : records) {
    if (!r.grad_norm_kstar) {
      throw ConfigError("run " + std::to_string(r.run_id) + " lacks grad_norm at x_bar_{k*}");
    }
    lhs.push_back(*r.grad_norm_kstar * *r.grad_norm_kstar);
  }
  BoundCheck check;
  check.runs = lhs.size();
  const double n = static_cast<double>(lhs.size());
  double mean = 0.0;
  for (double v : lhs) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : lhs) var += (v - mean) * (v - mean);
  check.lhs_mean = mean;
  check.lhs_stderr = lhs.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
  check.report = theorem_bound(theorem, constants, K);
  check.report.lhs_estimate = check.lhs_mean;
  check.report.lhs_stderr = check.lhs_stderr;
  check.pass = check.lhs_mean + 2.0 * check.lhs_stderr <= check.report.rhs;
  return check;
}

// ---------------------------------------------------------------------------
// Experiment driver

namespace {

Vector initial_point(std::size_t n, std::uint64_t seed, double scale) {
  Rng rng = make_rng(seed, 1);
  std::normal_distribution<double> normal;
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = scale * normal(rng);
  return x;
}

void strip_points(std::vector<TrajectoryRow>& rows) {
  for (auto& r : rows) {
    r.x.resize(0);
    r.x_prev.resize(0);
    r.z.resize(0);
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, Execution exec) {
  const auto problem = make_problem(config.problem);
  return run_experiment(config, *problem, exec);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const StochasticProblem& problem, Execution exec) {
  const std::size_t m = problem.sample_count();
  validate(config, m);
  ExperimentResult result;
  result.n = problem.dim();
  result.m = m;
  result.K = config.horizon(m);
  result.epsilons = config.epsilons;
  result.f_star = reference_value(problem).value_or(0.0);
  result.constants.rho_hat = problem.analytic_rho();
  result.constants.rho_source = Provenance::Analytic;

  const std::size_t n_alpha = config.alpha0_grid.size();
  const std::size_t total = config.methods.size() * n_alpha * config.seeds;
  result.records.resize(total);

  std::optional<MoreauConfig> moreau;
  if (config.evaluate_kstar) {
    const double rho = result.constants.rho_hat;
    const double lambda = config.moreau_lambda.value_or(rho > 0.0 ? 1.0 / (2.0 * rho) : 1.0);
    moreau = MoreauConfig::make(lambda, rho, config.moreau_inner_iters, config.moreau_inner_tol);
  }

  RecordSpec rec;
  rec.stride = config.snapshot_stride(m);
  rec.f_reference = result.f_star;
  rec.select_kstar = config.evaluate_kstar;

  log::info("running " + std::to_string(total) + " runs of K = " + std::to_string(result.K) + " on " +
            std::to_string(exec == Execution::Parallel ? worker_count() : 1) + " worker(s)");

  parallel_for(total, exec, [&](std::size_t id) {
    const std::size_t replicate = id % config.seeds;
    const std::size_t alpha_idx = (id / config.seeds) % n_alpha;
    const std::size_t method_idx = id / (config.seeds * n_alpha);
    const MethodSpec& method = config.methods[method_idx];
    const double alpha0 = config.alpha0_grid[alpha_idx];

    RunRecord& r = result.records[id];
    r.run_id = id;
    r.replicate = replicate;
    r.seed = config.base_seed + replicate;
    r.method = method.label();
    r.alpha0 = alpha0;
    r.beta_rule = method.beta_rule_label();

    const ParamSchedule schedule = method.schedule(config.step_mode, alpha0, result.K);
    const Vector x0 = initial_point(problem.dim(), r.seed, config.x0_scale);
    Trajectory traj;
    try {
      traj = method.sgd ? run_sgd_reference(problem, x0, schedule, result.K, r.seed, rec)
                        : run(problem, x0, schedule, result.K, r.seed, rec);
    } catch (const RunDiverged& e) {
      traj = e.partial();
    }
    r.diverged = traj.diverged;
    r.diverged_at = traj.diverged_at;
    r.kstar = traj.kstar;
    r.max_iterate_norm = traj.max_iterate_norm;
    for (double eps : config.epsilons) r.epochs_to_eps.push_back(epochs_to_eps(traj.rows, m, eps, result.f_star));
    r.initial_gap = traj.rows.front().f_gap;
    r.final_gap = traj.rows.back().f_gap;
    r.max_gap = r.initial_gap;
    for (const auto& row : traj.rows) r.max_gap = std::max(r.max_gap, row.f_gap);
    if (r.diverged || !std::isfinite(r.max_gap)) r.max_gap = kInfinity;
    if (moreau && traj.kstar) r.grad_norm_kstar = prox_solve(problem, traj.x_bar_kstar, *moreau).grad_norm;
    strip_points(traj.rows);
    r.rows = std::move(traj.rows);
  });

  double delta = 0.0;
  for (std::size_t rep = 0; rep < config.seeds; ++rep) {
    Vector x0 = initial_point(problem.dim(), config.base_seed + rep, config.x0_scale);
    x0 = problem.feasible_set().project(x0);
    delta += problem.objective(x0) - result.f_star;
  }
  result.delta = std::max(0.0, delta / static_cast<double>(config.seeds));

  if (config.evaluate_kstar) {
    double radius = 0.0;
    for (const auto& r : result.records)
      if (!r.diverged) radius = std::max(radius, r.max_iterate_norm);
    if (radius > 0.0) {
      const ConvexSet region = ConvexSet::ball(problem.dim(), radius);
      result.constants = estimate_constants(problem, region, config.constant_probes, config.base_seed);
    }
  }
  result.aggregates = aggregate(result.records, config.epsilons);
  return result;
}

// ---------------------------------------------------------------------------
// Output files

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) { return v ? text::format(*v) : std::string(); }

std::string fmt_epochs(std::size_t q) { return q == kNotReached ? "inf" : std::to_string(q); }

std::string file_token(std::string s) {
  for (char& c : s)
    if (c == ':' || c == '=' || c == '/' || c == ' ') c = '_';
  return s;
}

std::string runs_csv(const ExperimentResult& res) {
  std::ostringstream out;
  out << "run_id,seed,method,alpha0,beta_rule,k,f,f_gap,d_norm_sq,z_norm_sq,feasible\n";
  for (const auto& r : res.records) {
    const std::string prefix = std::to_string(r.run_id) + ',' + std::to_string(r.seed) + ',' + r.method + ',' +
                               text::format(r.alpha0) + ',' + r.beta_rule + ',';
    for (const auto& row : r.rows) {
      out << prefix << row.k << ',' << text::format(row.f) << ',' << text::format(row.f_gap) << ','
          << text::format(row.d_norm_sq) << ',' << text::format(row.z_norm_sq) << ',' << (row.feasible ? 1 : 0)
          << '\n';
    }
  }
  return out.str();
}

std::string terminal_csv(const ExperimentResult& res) {
  std::ostringstream out;
  out << "run_id,replicate,seed,method,alpha0,beta_rule,diverged,diverged_at,kstar,grad_norm_kstar,initial_gap,"
         "final_gap,max_gap,max_iterate_norm";
  for (double e : res.epsilons) out << ",epochs_eps_" << text::format(e);
  out << '\n';
  for (const auto& r : res.records) {
    out << r.run_id << ',' << r.replicate << ',' << r.seed << ',' << r.method << ',' << text::format(r.alpha0) << ','
        << r.beta_rule << ',' << (r.diverged ? 1 : 0) << ',' << r.diverged_at << ','
        << (r.kstar ? std::to_string(*r.kstar) : std::string()) << ',' << fmt_opt(r.grad_norm_kstar) << ','
        << text::format(r.initial_gap) << ',' << text::format(r.final_gap) << ',' << text::format(r.max_gap) << ','
        << text::format(r.max_iterate_norm);
    for (std::size_t q : r.epochs_to_eps) out << ',' << fmt_epochs(q);
    out << '\n';
  }
  return out.str();
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "method,alpha0,epsilon,median,p10,p90,reach_fraction\n";
  for (const auto& a : rows) {
    out << a.method << ',' << text::format(a.alpha0) << ',' << text::format(a.epsilon) << ','
        << text::format(a.median) << ',' << text::format(a.p10) << ',' << text::format(a.p90) << ','
        << text::format(a.reach_fraction) << '\n';
  }
  return out.str();
}

std::string constants_txt(const ExperimentResult& res) {
  std::ostringstream out;
  out << "n = " << res.n << "\nm = " << res.m << "\nK = " << res.K << "\nf_star = " << text::format(res.f_star)
      << "\ndelta = " << text::format(res.delta) << "\nrho_hat = " << text::format(res.constants.rho_hat)
      << "\nL_hat = " << text::format(res.constants.L_hat) << "\nsigma_hat = " << text::format(res.constants.sigma_hat)
      << "\nG_hat = " << text::format(res.constants.G_hat) << "\nrho_source = " << to_string(res.constants.rho_source)
      << "\nL_source = " << to_string(res.constants.L_source) << "\nepsilons = ";
  for (std::size_t i = 0; i < res.epsilons.size(); ++i) out << (i ? "," : "") << text::format(res.epsilons[i]);
  out << '\n';
  return out.str();
}

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Median f_gap against k per (method, alpha0); runs missing a row (divergence) count as +inf.
std::vector<Series> gap_series(const ExperimentResult& res) {
  std::vector<Series> out;
  std::map<std::pair<std::string, double>, std::map<std::size_t, std::vector<double>>> acc;
  std::map<std::pair<std::string, double>, std::size_t> counts;
  std::vector<std::pair<std::string, double>> order;
  for (const auto& r : res.records) {
    const auto key = std::make_pair(r.method, r.alpha0);
    if (!counts.count(key)) order.push_back(key);
    ++counts[key];
    for (const auto& row : r.rows) acc[key][row.k].push_back(row.f_gap);
  }
  for (const auto& key : order) {
    Series s;
    s.name = "fgap_" + file_token(key.first) + "_alpha" + text::format(key.second);
    for (auto& [k, values] : acc[key]) {
      values.resize(counts[key], kInfinity);
      s.points.emplace_back(static_cast<double>(k), quantile_lower(values, 0.5));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Series> epoch_series(const ExperimentResult& res) {
  std::vector<Series> out;
  std::map<std::string, std::size_t> index;
  for (const auto& a : res.aggregates) {
    for (const char* stat : {"median", "p10", "p90"}) {
      const std::string name = std::string("epochs_") + file_token(a.method) + "_eps" + text::format(a.epsilon) + "_" + stat;
      if (!index.count(name)) {
        index[name] = out.size();
        out.push_back({name, {}});
      }
      const double v = std::string(stat) == "median" ? a.median : std::string(stat) == "p10" ? a.p10 : a.p90;
      out[index[name]].points.emplace_back(a.alpha0, v);
    }
  }
  return out;
}

std::string tsv(const Series& s) {
  std::string out;
  for (const auto& [x, y] : s.points) out += text::format(x) + '\t' + text::format(y) + '\n';
  return out;
}

/// Fixed-style line chart; y on a log10 scale of |value|, non-finite points skipped.
std::string svg_chart(const std::vector<Series>& series, bool log_x) {
  constexpr double W = 640, H = 400, pad = 50;
  double x_lo = kInfinity, x_hi = -kInfinity, y_lo = kInfinity, y_hi = -kInfinity;
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  auto ty = [](double y) { return std::log10(std::max(std::abs(y), 1e-16)); };
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(y) || (log_x && x <= 0)) continue;
      x_lo = std::min(x_lo, tx(x));
      x_hi = std::max(x_hi, tx(x));
      y_lo = std::min(y_lo, ty(y));
      y_hi = std::max(y_hi, ty(y));
    }
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!(x_hi > x_lo)) x_hi = x_lo + 1;
  if (!(y_hi > y_lo)) y_hi = y_lo + 1;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::size_t c = 0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[c++ % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(y) || (log_x && x <= 0)) continue;
      const double px = pad + (tx(x) - x_lo) / (x_hi - x_lo) * (W - 2 * pad);
      const double py = H - pad - (ty(y) - y_lo) / (y_hi - y_lo) * (H - 2 * pad);
      out << text::format(std::round(px * 10) / 10) << ',' << text::format(std::round(py * 10) / 10) << ' ';
    }
    out << "\"><title>" << s.name << "</title></polyline>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::vector<ManifestEntry> emit_outputs(const ExperimentResult& result, const fs::path& outdir, bool svg) {
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("runs.csv", runs_csv(result));
  files.emplace_back("terminal.csv", terminal_csv(result));
  files.emplace_back("aggregate.csv", aggregate_csv(result.aggregates));
  files.emplace_back("constants.txt", constants_txt(result));
  const auto gaps = gap_series(result);
  const auto epochs = epoch_series(result);
  for (const auto& s : gaps) files.emplace_back("plotdata/" + s.name + ".tsv", tsv(s));
  for (const auto& s : epochs) files.emplace_back("plotdata/" + s.name + ".tsv", tsv(s));
  if (svg) {
    files.emplace_back("plots/fgap.svg", svg_chart(gaps, false));
    files.emplace_back("plots/epochs.svg", svg_chart(epochs, true));
  }

  std::vector<ManifestEntry> manifest;
  std::string listing;
  for (const auto& [path, content] : files) {
    io::write_file(outdir / path, content);
    manifest.push_back({path, sha256_hex(content), content.size()});
    listing += manifest.back().sha256 + "  " + std::to_string(content.size()) + "  " + path + "\n";
  }
  io::write_file(outdir / "manifest.txt", listing);
  return manifest;
}

ExperimentResult read_outputs(const fs::path& outdir) {
  ExperimentResult res;
  const io::KeyValues kv = io::read_key_values(outdir / "constants.txt");
  auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("constants.txt lacks '" + std::string(key) + "'");
    return it->second;
  };
  res.n = static_cast<std::size_t>(text::parse_int(get("n")));
  res.m = static_cast<std::size_t>(text::parse_int(get("m")));
  res.K = static_cast<std::size_t>(text::parse_int(get("K")));
  res.f_star = text::parse_double(get("f_star"));
  res.delta = text::parse_double(get("delta"));
  res.constants.rho_hat = text::parse_double(get("rho_hat"));
  res.constants.L_hat = text::parse_double(get("L_hat"));
  res.constants.sigma_hat = text::parse_double(get("sigma_hat"));
  res.constants.G_hat = text::parse_double(get("G_hat"));
  const Vector eps = text::parse_vector(get("epsilons"));
  res.epsilons.assign(eps.data(), eps.data() + eps.size());

  std::istringstream in(io::read_file(outdir / "terminal.csv"));
  std::string line;
  std::getline(in, line);
  constexpr std::size_t kFixed = 14;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line, ',');
    if (f.size() != kFixed + res.epsilons.size()) throw ConfigError("terminal.csv: malformed row '" + line + "'");
    RunRecord r;
    r.run_id = static_cast<std::size_t>(text::parse_int(f[0]));
    r.replicate = static_cast<std::size_t>(text::parse_int(f[1]));
    r.seed = static_cast<std::uint64_t>(text::parse_int(f[2]));
    r.method = std::string(f[3]);
    r.alpha0 = text::parse_double(f[4]);
    r.beta_rule = std::string(f[5]);
    r.diverged = f[6] == "1";
    r.diverged_at = static_cast<std::size_t>(text::parse_int(f[7]));
    if (!f[8].empty()) r.kstar = static_cast<std::size_t>(text::parse_int(f[8]));
    if (!f[9].empty()) r.grad_norm_kstar = text::parse_double(f[9]);
    r.initial_gap = text::parse_double(f[10]);
    r.final_gap = text::parse_double(f[11]);
    r.max_gap = text::parse_double(f[12]);
    r.max_iterate_norm = text::parse_double(f[13]);
    for (std::size_t e = 0; e < res.epsilons.size(); ++e) {
      const auto v = f[kFixed + e];
      r.epochs_to_eps.push_back(v == "inf" ? kNotReached : static_cast<std::size_t>(text::parse_int(v)));
    }
    res.records.push_back(std::move(r));
  }
  res.aggregates = aggregate(res.records, res.epsilons);
  return res;
}

}  // namespace shb
