#ifndef UCMPC_SIM_HPP_
#define UCMPC_SIM_HPP_

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ucmpc/l1ac.hpp"
#include "ucmpc/mpc.hpp"
#include "ucmpc/tightening.hpp"

namespace ucmpc {

/// Piecewise-constant reference schedule: value(t) of the segment whose
/// until_s is the first one exceeding t.
struct ReferenceSchedule {
  struct Segment {
    double until_s;
    Vec value;
  };
  std::vector<Segment> segments;

  Vec at(double t) const;
  /// Preview matrix with one column per node at t + (k+1) dt.
  Mat preview(double t, double dt, int nodes) const;
};

struct SimConfig {
  double dt_plant_s = 1e-4;
  double dt_l1_s = 1e-4;
  double dt_ctrl_s = 1e-2;
  double t_end_s = 15.0;
  ReferenceSchedule reference;
  bool disable_unmatched = false;  // force w = 0 in simulation

  void validate() const;
};

/// Classical RK4 step for a generic vector field.
Vec rk4_step(const std::function<Vec(double, const Vec&)>& field, const Vec& x,
             double t, double dt);

/// One record per L1 sample instant.
struct TrajectoryLog {
  Eigen::Index n = 0, m = 0, p = 0;
  std::vector<double> t;
  std::vector<Vec> x, x_n, x_hat, sigma_hat, matched_est;
  std::vector<Vec> u_opt, u_a, u, f, y, r;
  std::vector<double> w;

  std::size_t size() const { return t.size(); }
  /// Fixed column layout:
  /// t, x*, xn*, xhat*, sigma*, uopt*, ua*, u*, f*, w, y*, r*.
  void write_csv(const std::string& path) const;
};

struct BoundCheck {
  std::string name;
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_time = 0.0;
  int violations = 0;
};

struct Verdict {
  std::vector<BoundCheck> checks;
  Vec tracking_rms;  // per output over [2.5, 7.5] U [10, 15]
  bool all_pass() const;
  const BoundCheck* find(const std::string& name) const;
};

/// Full closed-loop simulation of one controller variant.
TrajectoryLog run_closed_loop(const PlantSpec& plant,
                              const UncertaintySpec& unc, Variant variant,
                              const TighteningResult* tightening,
                              const RpiSet* rpi, const L1Config* l1cfg,
                              const MpcConfig& mpccfg, const SimConfig& sim,
                              const Vec& x0);

/// Pointwise bound verification over a log. Checks that do not apply to the
/// variant (adaptive bounds for baselines, tube containment for UC) are
/// omitted.
Verdict make_verdict(const TrajectoryLog& log, Variant variant,
                     const PlantSpec& plant,
                     const TighteningResult* tightening, const RpiSet* rpi,
                     const ReferenceSchedule& ref);

}  // namespace ucmpc

#endif
