// Stochastic first-order oracles: robust phase retrieval and a smooth
// constrained quadratic family, plus estimation of rho, L, sigma and G.
#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "shb/common.hpp"
#include "shb/geometry.hpp"

namespace shb {

/// Finite-sum stochastic problem  min_{x in X} f(x) = (1/m) sum_i f(x; i).
/// Sample ids are uniform over {0, ..., m-1}. Instances are immutable and
/// every evaluation is const and allocation-local, so one instance may be
/// shared by any number of concurrent runs.
class StochasticProblem {
 public:
  explicit StochasticProblem(ConvexSet feasible) : feasible_(std::move(feasible)) {}
  virtual ~StochasticProblem() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t sample_count() const = 0;
  const ConvexSet& feasible_set() const { return feasible_; }

  /// Draws S ~ P (uniform index, with replacement).
  std::size_t draw_sample(Rng& rng) const;

  virtual double sample_value(const Vector& x, std::size_t sample) const = 0;
  /// f'(x, S) written into `out` (resized as needed).
  virtual void sample_subgradient_into(const Vector& x, std::size_t sample, Vector& out) const = 0;
  Vector sample_subgradient(const Vector& x, std::size_t sample) const;

  virtual double objective(const Vector& x) const;
  /// Exact average of the per-sample subgradients.
  virtual Vector full_subgradient(const Vector& x) const;
  /// f(x) and the full subgradient in one pass.
  virtual double value_and_subgradient(const Vector& x, Vector& grad) const;

  /// Analytic weak-convexity (or smoothness) modulus.
  virtual double analytic_rho() const = 0;

 protected:
  void check_sample(std::size_t sample) const;
  void check_point(const Vector& x) const;

 private:
  ConvexSet feasible_;
};

enum class XStarMode { UnitSphere, StandardNormal };

struct PhaseRetrievalParams {
  std::size_t n = 100;
  std::size_t m = 300;
  double kappa = 10.0;
  double p_fail = 0.2;
  double noise_scale = 5.0;
  XStarMode x_star_mode = XStarMode::UnitSphere;
};

/// f(x) = (1/m) sum_i |<a_i, x>^2 - b_i| with A = Q D, Q standard normal and D
/// linearly spaced on [1/kappa, 1]; b_i = <a_i, x*>^2 + delta_i zeta_i.
class PhaseRetrieval final : public StochasticProblem {
 public:
  PhaseRetrieval(RowMatrix a, Vector b, Vector x_star, PhaseRetrievalParams params, std::uint64_t seed,
                 ConvexSet feasible);

  std::size_t dim() const override { return static_cast<std::size_t>(a_.cols()); }
  std::size_t sample_count() const override { return static_cast<std::size_t>(a_.rows()); }

  double sample_value(const Vector& x, std::size_t sample) const override;
  void sample_subgradient_into(const Vector& x, std::size_t sample, Vector& out) const override;
  double objective(const Vector& x) const override;
  Vector full_subgradient(const Vector& x) const override;
  double value_and_subgradient(const Vector& x, Vector& grad) const override;

  /// 2 max_i ||a_i||^2, the per-sample bound on the Hessian of <a_i, x>^2.
  double analytic_rho() const override;

  const RowMatrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const Vector& x_star() const { return x_star_; }
  const PhaseRetrievalParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  /// <a_i, x> for every row. The generator builds b through this same routine,
  /// which keeps f(x*) exactly 0 on clean instances.
  Vector inner_products(const Vector& x) const;

 private:
  RowMatrix a_;
  Vector b_;
  Vector x_star_;
  PhaseRetrievalParams params_;
  std::uint64_t seed_;
};

std::shared_ptr<PhaseRetrieval> generate_phase_retrieval(const PhaseRetrievalParams& params,
                                                         std::uint64_t seed);

/// f(x; i) = 0.5 x^T H_i x + c_i^T x on a Ball or Box (or the whole space).
class SmoothQuadratic final : public StochasticProblem {
 public:
  SmoothQuadratic(std::vector<Matrix> hessians, std::vector<Vector> linear, ConvexSet feasible);

  std::size_t dim() const override { return static_cast<std::size_t>(linear_.front().size()); }
  std::size_t sample_count() const override { return linear_.size(); }

  double sample_value(const Vector& x, std::size_t sample) const override;
  void sample_subgradient_into(const Vector& x, std::size_t sample, Vector& out) const override;

  /// max_i ||H_i||_op.
  double analytic_rho() const override { return rho_smooth_; }

  const std::vector<Matrix>& hessians() const { return hessians_; }
  const std::vector<Vector>& linear_terms() const { return linear_; }

 private:
  std::vector<Matrix> hessians_;
  std::vector<Vector> linear_;
  double rho_smooth_;
};

struct SmoothQuadraticParams {
  std::size_t n = 10;
  std::size_t m = 20;
  /// Spread of the shared symmetric (indefinite) part.
  double curvature = 1.0;
  /// Per-sample perturbation of H_i and c_i; 0 gives a deterministic oracle.
  double noise = 0.1;
};

std::shared_ptr<SmoothQuadratic> generate_smooth_quadratic(const SmoothQuadraticParams& params,
                                                           ConvexSet feasible, std::uint64_t seed);

enum class Provenance { Unset, Analytic, Empirical };

struct ProblemConstants {
  double rho_hat = 0.0;
  double L_hat = 0.0;      // sqrt of the second moment of f'(x,S)
  double sigma_hat = 0.0;  // sqrt of the variance of f'(x,S)
  double G_hat = 0.0;      // norm of the full (sub)gradient
  Provenance rho_source = Provenance::Unset;
  Provenance L_source = Provenance::Unset;
  Provenance sigma_source = Provenance::Unset;
  Provenance G_source = Provenance::Unset;
};

/// rho from the analytic bound; L, sigma, G as maxima over `probes` points
/// drawn uniformly from `region`, which must be bounded.
ProblemConstants estimate_constants(const StochasticProblem& problem, const ConvexSet& region,
                                    std::size_t probes, std::uint64_t seed);

/// Uniform draw from a bounded set (ball or box).
Vector sample_uniform(const ConvexSet& region, Rng& rng);

const char* to_string(Provenance p);

}  // namespace shb
