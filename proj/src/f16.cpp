#include "ucmpc/f16.hpp"

#include <cmath>

namespace ucmpc {

PlantSpec f16_plant() {
  PlantSpec p;
  p.A = Mat{{0.0, 0.0067, 1.34},  //
            {0.0, -0.869, 43.2},
            {0.0, 0.993, -1.34}};
  p.B = Mat{{0.169, 0.252},  //
            {-17.3, -1.58},
            {-0.169, -0.252}};
  p.B_u = Mat{{0.1061}, {0.0}, {0.1061}};
  // y = [theta, gamma] with theta = gamma + alpha.
  p.C = Mat{{1.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  p.K_x = Mat{{3.25, 0.891, 7.12}, {-6.10, -0.898, -10.0}};
  p.X = HyperRect(Vec{{-10.0, -100.0, -4.0}}, Vec{{10.0, 100.0, 4.0}});
  p.U = HyperRect(Vec{{-25.0, -22.0}}, Vec{{25.0, 22.0}});
  p.X0 = HyperRect::inf_ball(0.1, 3);
  return p;
}

namespace {
double max_abs_alpha(const HyperRect& Z) {
  return std::max(std::abs(Z.lower()(2)), std::abs(Z.upper()(2)));
}
}  // namespace

UncertaintySpec f16_uncertainty(bool with_unmatched) {
  UncertaintySpec u;
  u.bound = {
      [](const HyperRect& Z) {
        const double a = max_abs_alpha(Z);
        return 1.44 + 0.18 * a * a;
      },
      [](const HyperRect& Z) { return 0.18 + 0.36 * max_abs_alpha(Z); },
  };
  u.lipschitz_x = {
      [](const HyperRect& Z) { return 0.36 * max_abs_alpha(Z); },
      [](const HyperRect&) { return 0.36; },
  };
  u.lipschitz_t = Vec{{1.44 * 0.4 * M_PI, 0.0}};
  u.b_w = with_unmatched ? 1.0 : 0.0;
  u.f = [](double t, const Vec& x) {
    const double a = x(2);
    return Vec{{-1.44 * std::sin(0.4 * M_PI * t) - 0.18 * a * a,
                0.18 - 0.36 * a}};
  };
  if (with_unmatched) {
    u.w = [](double t) { return std::sin(0.6 * M_PI * t); };
  } else {
    u.w = [](double) { return 0.0; };
  }
  return u;
}

UncertaintySpec zero_uncertainty(Eigen::Index channels) {
  UncertaintySpec u;
  for (Eigen::Index j = 0; j < channels; ++j) {
    u.bound.emplace_back([](const HyperRect&) { return 0.0; });
    u.lipschitz_x.emplace_back([](const HyperRect&) { return 0.0; });
  }
  u.lipschitz_t = Vec::Zero(channels);
  u.b_w = 0.0;
  u.f = [channels](double, const Vec&) { return Vec::Zero(channels); };
  u.w = [](double) { return 0.0; };
  return u;
}

}  // namespace ucmpc
