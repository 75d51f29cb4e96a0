// Closed convex feasible sets with exact Euclidean projections.
#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <variant>

#include "shb/common.hpp"

namespace shb {

struct WholeSpace {
  std::size_t dim = 0;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

struct Box {
  Vector lower;
  Vector upper;
};

/// Feasible set X. Immutable after construction; all members are pure.
class ConvexSet {
 public:
  using Variant = std::variant<WholeSpace, Ball, Box>;

  static ConvexSet whole_space(std::size_t dim);
  static ConvexSet ball(Vector center, double radius);
  /// Ball of the given radius centred at the origin.
  static ConvexSet ball(std::size_t dim, double radius);
  static ConvexSet box(Vector lower, Vector upper);
  static ConvexSet box(std::size_t dim, double lower, double upper);

  std::size_t dim() const;
  bool bounded() const;
  bool is_whole_space() const { return std::holds_alternative<WholeSpace>(set_); }
  const Variant& variant() const { return set_; }

  /// argmin over X of ||x - y||. A ball query at its centre returns the centre.
  Vector project(const Vector& y) const;
  /// Allocation-free variant; `out` may alias `y`.
  void project_into(const Vector& y, Vector& out) const;

  /// Euclidean distance to the ball, componentwise slack for boxes.
  bool contains(const Vector& x, double tol) const;

  /// 0 inside X (fixed tolerance 1e-12), +inf outside.
  double indicator(const Vector& x) const;

  /// Text form used by config files and instance headers:
  ///   whole | ball:R | ball:R:c1,c2,... | box:lo:hi | box:l1,...:u1,...
  std::string to_string() const;
  static ConvexSet parse(std::string_view text, std::size_t dim);

 private:
  explicit ConvexSet(Variant v) : set_(std::move(v)) {}
  Variant set_;
};

inline constexpr double kIndicatorTolerance = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline Vector project(const ConvexSet& set, const Vector& y) { return set.project(y); }
inline bool membership(const ConvexSet& set, const Vector& x, double tol) {
  return set.contains(x, tol);
}
inline double indicator_value(const ConvexSet& set, const Vector& x) { return set.indicator(x); }

}  // namespace shb
