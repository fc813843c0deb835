#ifndef UCMPC_SETS_HPP_
#define UCMPC_SETS_HPP_

#include <optional>

#include "ucmpc/linalg.hpp"

namespace ucmpc {

/// Axis-aligned interval box [lower, upper] in R^n.
class HyperRect {
 public:
  HyperRect() = default;
  HyperRect(Vec lower, Vec upper);

  /// Symmetric box [-radius, radius]^n. Throws if radius <= 0.
  static HyperRect inf_ball(double radius, Eigen::Index dim);
  /// Symmetric box with per-coordinate radii (radii >= 0 allowed).
  static HyperRect symmetric(const Vec& radii);
  /// The singleton {point}.
  static HyperRect point(const Vec& p);

  const Vec& lower() const { return lo_; }
  const Vec& upper() const { return hi_; }
  Eigen::Index dim() const { return lo_.size(); }

  bool contains(const Vec& x, double tol = 0.0) const;
  /// Per-coordinate max(|lower_i|, |upper_i|).
  Vec abs_bound() const;
  /// max_i max(|lower_i|, |upper_i|), i.e. max ||x||_inf over the box.
  double max_inf_norm() const;
  /// Per-coordinate half widths.
  Vec half_width() const;

  bool operator==(const HyperRect& o) const {
    return lo_ == o.lo_ && hi_ == o.hi_;
  }

 private:
  Vec lo_, hi_;
};

/// a (+) b, coordinate-wise interval sum.
HyperRect minkowski_sum(const HyperRect& a, const HyperRect& b);

/// Pontryagin difference a (-) b. Empty differences are a result, not an
/// error, hence the optional.
std::optional<HyperRect> pontryagin_diff(const HyperRect& a,
                                         const HyperRect& b);

/// Intersection; nullopt when disjoint.
std::optional<HyperRect> intersect(const HyperRect& a, const HyperRect& b);

/// Interval image {M x : x in b}, a box since b is a box.
HyperRect linear_image_box(const Mat& M, const HyperRect& b);

}  // namespace ucmpc

#endif
