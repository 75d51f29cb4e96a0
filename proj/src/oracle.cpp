#include "shb/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace shb {

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

Vector row_dots(const RowMatrix& a, const Vector& x) {
  Vector r(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) r[i] = a.row(i).dot(x);
  return r;
}

Matrix random_symmetric(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  const auto k = static_cast<Eigen::Index>(n);
  Matrix g(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) g(i, j) = normal(rng);
  return (g + g.transpose()) / (2.0 * std::sqrt(static_cast<double>(n)));
}

Vector random_normal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

std::size_t StochasticProblem::draw_sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, sample_count() - 1);
  return pick(rng);
}

void StochasticProblem::check_sample(std::size_t sample) const {
  if (sample >= sample_count()) {
    throw ConfigError("sample id " + std::to_string(sample) + " out of range [0, " +
                      std::to_string(sample_count()) + ")");
  }
}

void StochasticProblem::check_point(const Vector& x) const {
  require_dim(dim(), static_cast<std::size_t>(x.size()), "oracle query");
}

Vector StochasticProblem::sample_subgradient(const Vector& x, std::size_t sample) const {
  Vector out(x.size());
  sample_subgradient_into(x, sample, out);
  return out;
}

double StochasticProblem::objective(const Vector& x) const {
  check_point(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < sample_count(); ++i) sum += sample_value(x, i);
  return sum / static_cast<double>(sample_count());
}

Vector StochasticProblem::full_subgradient(const Vector& x) const {
  check_point(x);
  Vector sum = Vector::Zero(x.size());
  Vector g(x.size());
  for (std::size_t i = 0; i < sample_count(); ++i) {
    sample_subgradient_into(x, i, g);
    sum += g;
  }
  return sum / static_cast<double>(sample_count());
}

double StochasticProblem::value_and_subgradient(const Vector& x, Vector& grad) const {
  grad = full_subgradient(x);
  return objective(x);
}

// ---------------------------------------------------------------------------
// Phase retrieval

PhaseRetrieval::PhaseRetrieval(RowMatrix a, Vector b, Vector x_star, PhaseRetrievalParams params,
                               std::uint64_t seed, ConvexSet feasible)
    : StochasticProblem(std::move(feasible)),
      a_(std::move(a)),
      b_(std::move(b)),
      x_star_(std::move(x_star)),
      params_(params),
      seed_(seed) {
  if (a_.rows() == 0 || a_.cols() == 0) throw ConfigError("phase retrieval needs m, n >= 1");
  require_dim(static_cast<std::size_t>(a_.rows()), static_cast<std::size_t>(b_.size()), "measurements b");
  require_dim(static_cast<std::size_t>(a_.cols()), feasible_set().dim(), "feasible set");
  if (x_star_.size() != 0) require_dim(static_cast<std::size_t>(a_.cols()), static_cast<std::size_t>(x_star_.size()), "x*");
  params_.n = static_cast<std::size_t>(a_.cols());
  params_.m = static_cast<std::size_t>(a_.rows());
}

Vector PhaseRetrieval::inner_products(const Vector& x) const {
  check_point(x);
  return row_dots(a_, x);
}

double PhaseRetrieval::sample_value(const Vector& x, std::size_t sample) const {
  check_sample(sample);
  check_point(x);
  const auto i = static_cast<Eigen::Index>(sample);
  const double r = a_.row(i).dot(x);
  return std::abs(r * r - b_[i]);
}

void PhaseRetrieval::sample_subgradient_into(const Vector& x, std::size_t sample, Vector& out) const {
  check_sample(sample);
  const auto i = static_cast<Eigen::Index>(sample);
  const double r = a_.row(i).dot(x);
  // sign(0) = 0 picks the zero element of [-1, 1] * 2<a,x>a at the kink.
  const double coeff = 2.0 * r * sign_of(r * r - b_[i]);
  out.noalias() = coeff * a_.row(i).transpose();
}

double PhaseRetrieval::objective(const Vector& x) const {
  const Vector r = inner_products(x);
  return (r.array().square() - b_.array()).abs().sum() / static_cast<double>(a_.rows());
}

double PhaseRetrieval::value_and_subgradient(const Vector& x, Vector& grad) const {
  const Vector r = inner_products(x);
  Vector w(r.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double diff = r[i] * r[i] - b_[i];
    sum += std::abs(diff);
    w[i] = 2.0 * r[i] * sign_of(diff);
  }
  const double m = static_cast<double>(a_.rows());
  grad.noalias() = a_.transpose() * w;
  grad /= m;
  return sum / m;
}

Vector PhaseRetrieval::full_subgradient(const Vector& x) const {
  Vector g(x.size());
  value_and_subgradient(x, g);
  return g;
}

double PhaseRetrieval::analytic_rho() const { return 2.0 * a_.rowwise().squaredNorm().maxCoeff(); }

std::shared_ptr<PhaseRetrieval> generate_phase_retrieval(const PhaseRetrievalParams& p, std::uint64_t seed) {
  if (p.n < 1 || p.m < 1) throw ConfigError("phase retrieval needs n, m >= 1");
  if (!(p.kappa >= 1.0) || !std::isfinite(p.kappa)) throw ConfigError("kappa must be >= 1");
  if (!(p.p_fail >= 0.0 && p.p_fail < 1.0)) throw ConfigError("p_fail must lie in [0, 1)");
  if (!(p.noise_scale >= 0.0) || !std::isfinite(p.noise_scale)) throw ConfigError("noise_scale must be >= 0");

  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal;
  const auto m = static_cast<Eigen::Index>(p.m);
  const auto n = static_cast<Eigen::Index>(p.n);

  RowMatrix q(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) q(i, j) = normal(rng);

  Vector d(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d[j] = n == 1 ? 1.0
                  : 1.0 / p.kappa + (1.0 - 1.0 / p.kappa) * static_cast<double>(j) / static_cast<double>(n - 1);
  }
  RowMatrix a = q * d.asDiagonal();

  Vector x_star(n);
  for (Eigen::Index j = 0; j < n; ++j) x_star[j] = normal(rng);
  if (p.x_star_mode == XStarMode::UnitSphere) x_star /= x_star.norm();

  // Every measurement consumes one Bernoulli and one normal draw so that the
  // stream layout does not depend on p_fail.
  std::bernoulli_distribution fail(p.p_fail);
  Vector corruption(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool delta = fail(rng);
    const double zeta = p.noise_scale * normal(rng);
    corruption[i] = delta ? zeta : 0.0;
  }

  Vector b = row_dots(a, x_star).array().square().matrix() + corruption;
  return std::make_shared<PhaseRetrieval>(std::move(a), std::move(b), std::move(x_star), p, seed,
                                          ConvexSet::whole_space(p.n));
}

// ---------------------------------------------------------------------------
// Smooth quadratic family

SmoothQuadratic::SmoothQuadratic(std::vector<Matrix> hessians, std::vector<Vector> linear, ConvexSet feasible)
    : StochasticProblem(std::move(feasible)), hessians_(std::move(hessians)), linear_(std::move(linear)) {
  if (hessians_.empty() || hessians_.size() != linear_.size()) {
    throw ConfigError("smooth quadratic needs matching, non-empty H_i and c_i lists");
  }
  const auto n = linear_.front().size();
  require_dim(static_cast<std::size_t>(n), feasible_set().dim(), "feasible set");
  rho_smooth_ = 0.0;
  for (std::size_t i = 0; i < hessians_.size(); ++i) {
    const Matrix& h = hessians_[i];
    if (h.rows() != n || h.cols() != n || linear_[i].size() != n) {
      throw DimensionError("H_" + std::to_string(i) + " / c_" + std::to_string(i) + " size mismatch");
    }
    if (!h.isApprox(h.transpose(), 1e-12) && !(h - h.transpose()).isZero(1e-12)) {
      throw ConfigError("H_" + std::to_string(i) + " must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    rho_smooth_ = std::max(rho_smooth_, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
}

double SmoothQuadratic::sample_value(const Vector& x, std::size_t sample) const {
  check_sample(sample);
  check_point(x);
  return 0.5 * x.dot(hessians_[sample] * x) + linear_[sample].dot(x);
}

void SmoothQuadratic::sample_subgradient_into(const Vector& x, std::size_t sample, Vector& out) const {
  check_sample(sample);
  check_point(x);
  out.noalias() = hessians_[sample] * x;
  out += linear_[sample];
}

std::shared_ptr<SmoothQuadratic> generate_smooth_quadratic(const SmoothQuadraticParams& p, ConvexSet feasible,
                                                           std::uint64_t seed) {
  if (p.n < 1 || p.m < 1) throw ConfigError("smooth quadratic needs n, m >= 1");
  if (!(p.noise >= 0.0) || !(p.curvature >= 0.0)) throw ConfigError("curvature and noise must be >= 0");
  Rng rng = make_rng(seed, 0);
  const Matrix h0 = p.curvature * random_symmetric(p.n, rng);
  const Vector c0 = random_normal(p.n, rng);
  std::vector<Matrix> hs;
  std::vector<Vector> cs;
  for (std::size_t i = 0; i < p.m; ++i) {
    hs.push_back(h0 + p.noise * random_symmetric(p.n, rng));
    cs.push_back(c0 + p.noise * random_normal(p.n, rng));
  }
  return std::make_shared<SmoothQuadratic>(std::move(hs), std::move(cs), std::move(feasible));
}

// ---------------------------------------------------------------------------
// Constants

Vector sample_uniform(const ConvexSet& region, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(region.dim());
  if (const auto* ball = std::get_if<Ball>(&region.variant())) {
    Vector dir(n);
    for (Eigen::Index j = 0; j < n; ++j) dir[j] = normal(rng);
    const double norm = dir.norm();
    if (norm == 0.0) return ball->center;
    const double r = ball->radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
    return ball->center + (r / norm) * dir;
  }
  if (const auto* box = std::get_if<Box>(&region.variant())) {
    if (!region.bounded()) throw ConfigError("cannot sample uniformly from an unbounded box");
    Vector x(n);
    for (Eigen::Index j = 0; j < n; ++j) x[j] = box->lower[j] + (box->upper[j] - box->lower[j]) * unit(rng);
    return x;
  }
  throw ConfigError("cannot sample uniformly from the whole space");
}

ProblemConstants estimate_constants(const StochasticProblem& problem, const ConvexSet& region,
                                    std::size_t probes, std::uint64_t seed) {
  if (probes < 1) throw ConfigError("estimate_constants needs at least one probe");
  require_dim(problem.dim(), region.dim(), "probe region");
  if (!region.bounded()) {
    throw ConfigError("probe region is unbounded: empirical L, sigma, G are not estimable");
  }
  ProblemConstants c;
  c.rho_hat = problem.analytic_rho();
  c.rho_source = Provenance::Analytic;

  Rng rng = make_rng(seed, 7);
  const std::size_t m = problem.sample_count();
  Vector g(static_cast<Eigen::Index>(problem.dim()));
  for (std::size_t t = 0; t < probes; ++t) {
    const Vector x = sample_uniform(region, rng);
    const Vector full = problem.full_subgradient(x);
    double second = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      problem.sample_subgradient_into(x, i, g);
      second += g.squaredNorm();
      var += (g - full).squaredNorm();
    }
    c.L_hat = std::max(c.L_hat, std::sqrt(second / static_cast<double>(m)));
    c.sigma_hat = std::max(c.sigma_hat, std::sqrt(var / static_cast<double>(m)));
    c.G_hat = std::max(c.G_hat, full.norm());
  }
  c.L_source = c.sigma_source = c.G_source = Provenance::Empirical;
  return c;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Analytic: return "analytic";
    case Provenance::Empirical: return "empirical";
    case Provenance::Unset: break;
  }
  return "unset";
}

}  // namespace shb
