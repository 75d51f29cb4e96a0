#include "shb/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace shb {

// ---------------------------------------------------------------------------
// Schedules

ParamSchedule::ParamSchedule(StepMode mode, double alpha0, Momentum momentum, std::optional<std::size_t> horizon)
    : mode_(mode), alpha0_(alpha0), momentum_(momentum), horizon_(horizon) {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw ConfigError("alpha0 must be positive and finite");
  if (const auto* nu = std::get_if<MomentumNu>(&momentum_)) {
    if (!(nu->nu > 0.0) || !std::isfinite(nu->nu)) throw ConfigError("nu must be positive and finite");
  } else {
    const double beta = std::get<MomentumFixed>(momentum_).beta;
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
  }
  if (mode_ == StepMode::ConstantHorizon && !horizon_) {
    throw ConfigError("constant-horizon step sizes need the iteration count K up front");
  }
}

double ParamSchedule::alpha(std::size_t k) const {
  const double steps = mode_ == StepMode::ConstantHorizon ? static_cast<double>(*horizon_) : static_cast<double>(k);
  return alpha0_ / std::sqrt(steps + 1.0);
}

double ParamSchedule::beta(std::size_t k) const {
  if (const auto* nu = std::get_if<MomentumNu>(&momentum_)) return std::min(nu->nu * alpha(k), 1.0);
  return std::get<MomentumFixed>(momentum_).beta;
}

HeavyBallParams heavy_ball_params(const ParamSchedule& schedule, std::size_t k) {
  if (k == 0) throw ConfigError("heavy-ball coefficients need k >= 1");
  const double beta_prev = schedule.beta(k - 1);
  const double alpha_k = schedule.alpha(k);
  return {alpha_k * beta_prev, (1.0 - beta_prev) * alpha_k / schedule.alpha(k - 1)};
}

// ---------------------------------------------------------------------------
// SHB iteration

namespace {

bool exploded(const Vector& x, const Vector& z) {
  return !x.allFinite() || !z.allFinite() || x.norm() > kDivergenceNorm;
}

}  // namespace

ShbState init(const StochasticProblem& problem, const Vector& x0, const ParamSchedule& schedule,
              std::uint64_t seed) {
  require_dim(problem.dim(), static_cast<std::size_t>(x0.size()), "initial point");
  ShbState s;
  const ConvexSet& set = problem.feasible_set();
  if (set.contains(x0, 0.0)) {
    s.x = x0;
  } else {
    s.x = set.project(x0);
    s.projected_init = true;
  }
  s.x_prev = s.x;
  s.rng = make_rng(seed, 0);
  s.z.resize(s.x.size());
  problem.sample_subgradient_into(s.x, problem.draw_sample(s.rng), s.z);
  s.last_alpha = schedule.alpha(0);
  s.last_beta = schedule.beta(0);
  return s;
}

void step_with_subgradient(ShbState& s, const ConvexSet& set, double alpha, double beta, const Vector& g_next) {
  s.x_prev.swap(s.x);
  s.x.noalias() = s.x_prev - alpha * s.z;
  set.project_into(s.x, s.x);
  s.z = beta * g_next + (1.0 - beta) * ((s.x_prev - s.x) / alpha);
  s.last_alpha = alpha;
  s.last_beta = beta;
  ++s.k;
}

void step(ShbState& s, const StochasticProblem& problem, const ParamSchedule& schedule) {
  const double alpha = schedule.alpha(s.k);
  const double beta = schedule.beta(s.k);
  s.x_prev.swap(s.x);
  s.x.noalias() = s.x_prev - alpha * s.z;
  problem.feasible_set().project_into(s.x, s.x);
  problem.sample_subgradient_into(s.x, problem.draw_sample(s.rng), s.scratch);
  s.z = beta * s.scratch + (1.0 - beta) * ((s.x_prev - s.x) / alpha);
  s.last_alpha = alpha;
  s.last_beta = beta;
  ++s.k;
  if (exploded(s.x, s.z)) {
    throw DivergedError(s.k, "SHB diverged at iteration " + std::to_string(s.k));
  }
}

// ---------------------------------------------------------------------------
// Recording

namespace {

constexpr double kFeasibilityTol = 1e-9;

bool should_record(std::size_t k, std::size_t iterations, const RecordSpec& rec) {
  const std::size_t stride = std::max<std::size_t>(rec.stride, 1);
  return k % stride == 0 || (rec.with_successor && k % stride == 1) || k == iterations;
}

struct RowInputs {
  const Vector& x;
  const Vector& x_prev;
  const Vector& z;
  std::size_t k;
  double alpha_prev;
  double beta_prev;
  double alpha_next;
  double beta_next;
};

TrajectoryRow make_row(const StochasticProblem& problem, const RowInputs& in, const RecordSpec& rec) {
  TrajectoryRow row;
  row.k = in.k;
  if (rec.record_objective) {
    row.f = problem.objective(in.x);
    row.f_gap = row.f - rec.f_reference.value_or(0.0);
  }
  row.d_norm_sq = ((in.x_prev - in.x) / in.alpha_prev).squaredNorm();
  row.z_norm_sq = in.z.squaredNorm();
  row.feasible = problem.feasible_set().contains(in.x, kFeasibilityTol);
  row.alpha_prev = in.alpha_prev;
  row.beta_prev = in.beta_prev;
  row.alpha_next = in.alpha_next;
  row.beta_next = in.beta_next;
  if (rec.store_points) {
    row.x = in.x;
    row.x_prev = in.x_prev;
    row.z = in.z;
  }
  return row;
}

TrajectoryRow row_from_state(const StochasticProblem& problem, const ShbState& s, const ParamSchedule& schedule,
                             const RecordSpec& rec) {
  return make_row(problem,
                  {s.x, s.x_prev, s.z, s.k, s.last_alpha, s.last_beta, schedule.alpha(s.k), schedule.beta(s.k)},
                  rec);
}

Vector bar_point(const Vector& x, const Vector& x_prev, double beta) {
  return x + ((1.0 - beta) / beta) * (x - x_prev);
}

std::size_t draw_kstar(Rng& rng, std::size_t iterations) {
  std::uniform_int_distribution<std::size_t> pick(0, iterations);
  return pick(rng);
}

}  // namespace

Trajectory run(const StochasticProblem& problem, const Vector& x0, const ParamSchedule& schedule,
               std::size_t iterations, std::uint64_t seed, const RecordSpec& rec) {
  Trajectory traj;
  ShbState s = init(problem, x0, schedule, seed);
  traj.projected_init = s.projected_init;
  traj.max_iterate_norm = s.x.norm();
  traj.rows.push_back(row_from_state(problem, s, schedule, rec));

  // Checkpoints let k* be replayed after the loop without storing every iterate.
  const std::size_t interval =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(iterations) + 1.0))));
  std::vector<ShbState> checkpoints;
  if (rec.select_kstar) checkpoints.push_back(s);

  while (s.k < iterations) {
    try {
      step(s, problem, schedule);
    } catch (const DivergedError& e) {
      traj.diverged = true;
      traj.diverged_at = e.iteration();
      traj.iterations = s.k;
      traj.rows.push_back(row_from_state(problem, s, schedule, rec));
      throw RunDiverged(e.iteration(), e.what(), std::move(traj));
    }
    traj.max_iterate_norm = std::max(traj.max_iterate_norm, s.x.norm());
    if (should_record(s.k, iterations, rec)) traj.rows.push_back(row_from_state(problem, s, schedule, rec));
    if (rec.select_kstar && s.k % interval == 0) checkpoints.push_back(s);
  }
  traj.iterations = iterations;

  if (rec.select_kstar) {
    const std::size_t kstar = draw_kstar(s.rng, iterations);
    ShbState replay = checkpoints[kstar / interval];
    while (replay.k < kstar) step(replay, problem, schedule);
    traj.kstar = kstar;
    traj.x_kstar = replay.x;
    traj.x_prev_kstar = replay.x_prev;
    traj.beta_kstar = replay.last_beta;
    traj.x_bar_kstar = bar_point(replay.x, replay.x_prev, replay.last_beta);
  }
  return traj;
}

Trajectory run_sgd_reference(const StochasticProblem& problem, const Vector& x0, const ParamSchedule& schedule,
                             std::size_t iterations, std::uint64_t seed, const RecordSpec& rec) {
  require_dim(problem.dim(), static_cast<std::size_t>(x0.size()), "initial point");
  const ConvexSet& set = problem.feasible_set();
  Trajectory traj;
  Vector x = x0;
  if (!set.contains(x0, 0.0)) {
    x = set.project(x0);
    traj.projected_init = true;
  }
  Vector x_prev = x;
  Rng rng = make_rng(seed, 0);
  Vector g(x.size());
  problem.sample_subgradient_into(x, problem.draw_sample(rng), g);

  double alpha_prev = schedule.alpha(0);
  std::vector<Vector> iterates;
  if (rec.select_kstar) iterates.push_back(x);
  traj.max_iterate_norm = x.norm();
  traj.rows.push_back(make_row(problem, {x, x_prev, g, 0, alpha_prev, 1.0, schedule.alpha(0), 1.0}, rec));

  for (std::size_t k = 0; k < iterations; ++k) {
    const double alpha = schedule.alpha(k);
    x_prev = x;
    x = set.project(x_prev - alpha * g);
    problem.sample_subgradient_into(x, problem.draw_sample(rng), g);
    alpha_prev = alpha;
    const std::size_t next = k + 1;
    if (exploded(x, g)) {
      traj.diverged = true;
      traj.diverged_at = next;
      traj.iterations = next;
      traj.rows.push_back(
          make_row(problem, {x, x_prev, g, next, alpha_prev, 1.0, schedule.alpha(next), 1.0}, rec));
      throw RunDiverged(next, "SGD diverged at iteration " + std::to_string(next), std::move(traj));
    }
    traj.max_iterate_norm = std::max(traj.max_iterate_norm, x.norm());
    if (rec.select_kstar) iterates.push_back(x);
    if (should_record(next, iterations, rec)) {
      traj.rows.push_back(
          make_row(problem, {x, x_prev, g, next, alpha_prev, 1.0, schedule.alpha(next), 1.0}, rec));
    }
  }
  traj.iterations = iterations;

  if (rec.select_kstar) {
    const std::size_t kstar = draw_kstar(rng, iterations);
    traj.kstar = kstar;
    traj.x_kstar = iterates[kstar];
    traj.x_prev_kstar = iterates[kstar == 0 ? 0 : kstar - 1];
    traj.beta_kstar = 1.0;
    traj.x_bar_kstar = traj.x_kstar;
  }
  return traj;
}

std::vector<Vector> run_heavy_ball_form(const StochasticProblem& problem, const Vector& x0,
                                        const ParamSchedule& schedule, std::size_t iterations, std::uint64_t seed) {
  if (!problem.feasible_set().is_whole_space()) {
    throw ConfigError("the heavy-ball recursion is only equivalent on the whole space");
  }
  require_dim(problem.dim(), static_cast<std::size_t>(x0.size()), "initial point");
  Rng rng = make_rng(seed, 0);
  std::vector<Vector> xs{x0};
  xs.reserve(iterations + 1);
  Vector g(x0.size());
  problem.sample_subgradient_into(x0, problem.draw_sample(rng), g);
  if (iterations == 0) return xs;
  xs.push_back(x0 - schedule.alpha(0) * g);
  for (std::size_t k = 1; k < iterations; ++k) {
    const Vector& x = xs[k];
    problem.sample_subgradient_into(x, problem.draw_sample(rng), g);
    const HeavyBallParams hb = heavy_ball_params(schedule, k);
    xs.push_back(x - hb.eta * g + hb.lambda * (x - xs[k - 1]));
  }
  return xs;
}

std::vector<Vector> shb_iterates(const StochasticProblem& problem, const Vector& x0, const ParamSchedule& schedule,
                                 std::size_t iterations, std::uint64_t seed) {
  ShbState s = init(problem, x0, schedule, seed);
  std::vector<Vector> xs{s.x};
  xs.reserve(iterations + 1);
  while (s.k < iterations) {
    step(s, problem, schedule);
    xs.push_back(s.x);
  }
  return xs;
}

}  // namespace shb
