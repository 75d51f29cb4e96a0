#include "shb/geometry.hpp"

#include <cmath>

#include "shb/text.hpp"

namespace shb {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return Rng(seq);
}

ConvexSet ConvexSet::whole_space(std::size_t dim) { return ConvexSet(WholeSpace{dim}); }

ConvexSet ConvexSet::ball(Vector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ConfigError("ball radius must be positive and finite");
  }
  return ConvexSet(Ball{std::move(center), radius});
}

ConvexSet ConvexSet::ball(std::size_t dim, double radius) {
  return ball(Vector::Zero(static_cast<Eigen::Index>(dim)), radius);
}

ConvexSet ConvexSet::box(Vector lower, Vector upper) {
  require_dim(static_cast<std::size_t>(lower.size()), static_cast<std::size_t>(upper.size()),
              "box bounds");
  if ((lower.array() > upper.array()).any() || lower.hasNaN() || upper.hasNaN()) {
    throw ConfigError("box requires lower <= upper componentwise");
  }
  return ConvexSet(Box{std::move(lower), std::move(upper)});
}

ConvexSet ConvexSet::box(std::size_t dim, double lower, double upper) {
  const auto n = static_cast<Eigen::Index>(dim);
  return box(Vector::Constant(n, lower), Vector::Constant(n, upper));
}

std::size_t ConvexSet::dim() const {
  return std::visit(overloaded{[](const WholeSpace& s) { return s.dim; },
                               [](const Ball& b) { return static_cast<std::size_t>(b.center.size()); },
                               [](const Box& b) { return static_cast<std::size_t>(b.lower.size()); }},
                    set_);
}

bool ConvexSet::bounded() const {
  return std::visit(overloaded{[](const WholeSpace&) { return false; },
                               [](const Ball&) { return true; },
                               [](const Box& b) { return b.lower.allFinite() && b.upper.allFinite(); }},
                    set_);
}

Vector ConvexSet::project(const Vector& y) const {
  Vector out(y.size());
  project_into(y, out);
  return out;
}

void ConvexSet::project_into(const Vector& y, Vector& out) const {
  require_dim(dim(), static_cast<std::size_t>(y.size()), "project");
  std::visit(overloaded{[&](const WholeSpace&) {
                          if (&out != &y) out = y;
                        },
                        [&](const Ball& b) {
                          const double dist = (y - b.center).norm();
                          if (dist <= b.radius) {
                            if (&out != &y) out = y;
                          } else {
                            out = b.center + (b.radius / dist) * (y - b.center);
                          }
                        },
                        [&](const Box& b) { out = y.cwiseMax(b.lower).cwiseMin(b.upper); }},
             set_);
}

bool ConvexSet::contains(const Vector& x, double tol) const {
  require_dim(dim(), static_cast<std::size_t>(x.size()), "membership");
  if (!x.allFinite()) return false;
  return std::visit(
      overloaded{[](const WholeSpace&) { return true; },
                 [&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
                 [&](const Box& b) {
                   return ((x.array() >= b.lower.array() - tol) && (x.array() <= b.upper.array() + tol)).all();
                 }},
      set_);
}

double ConvexSet::indicator(const Vector& x) const {
  return contains(x, kIndicatorTolerance) ? 0.0 : kInfinity;
}

std::string ConvexSet::to_string() const {
  return std::visit(
      overloaded{[](const WholeSpace&) { return std::string("whole"); },
                 [](const Ball& b) {
                   std::string s = "ball:" + text::format(b.radius);
                   if (!b.center.isZero(0.0)) s += ":" + text::format(b.center);
                   return s;
                 },
                 [](const Box& b) {
                   const bool uniform = (b.lower.array() == b.lower[0]).all() &&
                                        (b.upper.array() == b.upper[0]).all();
                   if (uniform && b.lower.size() > 0) {
                     return "box:" + text::format(b.lower[0]) + ":" + text::format(b.upper[0]);
                   }
                   return "box:" + text::format(b.lower) + ":" + text::format(b.upper);
                 }},
      set_);
}

ConvexSet ConvexSet::parse(std::string_view spec, std::size_t dim) {
  spec = text::trim(spec);
  const auto parts = text::split(spec, ':');
  const auto kind = text::trim(parts[0]);
  const auto n = static_cast<Eigen::Index>(dim);
  if (kind == "whole" && parts.size() == 1) return whole_space(dim);
  if (kind == "ball" && (parts.size() == 2 || parts.size() == 3)) {
    const double r = text::parse_double(parts[1]);
    Vector c = parts.size() == 3 ? text::parse_vector(parts[2]) : Vector::Zero(n);
    require_dim(dim, static_cast<std::size_t>(c.size()), "ball centre");
    return ball(std::move(c), r);
  }
  if (kind == "box" && parts.size() == 3) {
    Vector lo = text::parse_vector(parts[1]);
    Vector hi = text::parse_vector(parts[2]);
    if (lo.size() == 1 && n != 1) lo = Vector::Constant(n, lo[0]);
    if (hi.size() == 1 && n != 1) hi = Vector::Constant(n, hi[0]);
    require_dim(dim, static_cast<std::size_t>(lo.size()), "box lower");
    require_dim(dim, static_cast<std::size_t>(hi.size()), "box upper");
    return box(std::move(lo), std::move(hi));
  }
  throw ConfigError("cannot parse feasible set '" + std::string(spec) + "'");
}

}  // namespace shb
