#include "ucmpc/sets.hpp"

#include <stdexcept>

namespace ucmpc {

namespace {
void require_same_dim(const HyperRect& a, const HyperRect& b,
                      const char* who) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
}
}  // namespace

HyperRect::HyperRect(Vec lower, Vec upper)
    : lo_(std::move(lower)), hi_(std::move(upper)) {
  if (lo_.size() != hi_.size()) {
    throw std::invalid_argument("HyperRect: lower/upper size mismatch");
  }
  if ((lo_.array() > hi_.array()).any()) {
    throw std::invalid_argument("HyperRect: lower > upper");
  }
}

HyperRect HyperRect::inf_ball(double radius, Eigen::Index dim) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("inf_ball: radius must be positive");
  }
  return symmetric(Vec::Constant(dim, radius));
}

HyperRect HyperRect::symmetric(const Vec& radii) {
  if ((radii.array() < 0.0).any()) {
    throw std::invalid_argument("symmetric: negative radius");
  }
  return HyperRect(-radii, radii);
}

HyperRect HyperRect::point(const Vec& p) { return HyperRect(p, p); }

bool HyperRect::contains(const Vec& x, double tol) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("contains: dimension mismatch");
  }
  return (x.array() >= lo_.array() - tol).all() &&
         (x.array() <= hi_.array() + tol).all();
}

Vec HyperRect::abs_bound() const { return lo_.cwiseAbs().cwiseMax(hi_.cwiseAbs()); }

double HyperRect::max_inf_norm() const {
  return dim() == 0 ? 0.0 : abs_bound().maxCoeff();
}

Vec HyperRect::half_width() const { return 0.5 * (hi_ - lo_); }

HyperRect minkowski_sum(const HyperRect& a, const HyperRect& b) {
  require_same_dim(a, b, "minkowski_sum");
  return HyperRect(a.lower() + b.lower(), a.upper() + b.upper());
}

std::optional<HyperRect> pontryagin_diff(const HyperRect& a,
                                         const HyperRect& b) {
  require_same_dim(a, b, "pontryagin_diff");
  Vec lo = a.lower() - b.lower();
  Vec hi = a.upper() - b.upper();
  if ((lo.array() > hi.array()).any()) return std::nullopt;
  return HyperRect(std::move(lo), std::move(hi));
}

std::optional<HyperRect> intersect(const HyperRect& a, const HyperRect& b) {
  require_same_dim(a, b, "intersect");
  Vec lo = a.lower().cwiseMax(b.lower());
  Vec hi = a.upper().cwiseMin(b.upper());
  if ((lo.array() > hi.array()).any()) return std::nullopt;
  return HyperRect(std::move(lo), std::move(hi));
}

HyperRect linear_image_box(const Mat& M, const HyperRect& b) {
  if (M.cols() != b.dim()) {
    throw std::invalid_argument("linear_image_box: dimension mismatch");
  }
  Vec c = 0.5 * (b.lower() + b.upper());
  Vec center = M * c;
  Vec radius = M.cwiseAbs() * b.half_width();
  return HyperRect(center - radius, center + radius);
}

}  // namespace ucmpc
