#include "ucmpc/sim.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ucmpc {

Vec ReferenceSchedule::at(double t) const {
  if (segments.empty()) {
    throw std::invalid_argument("ReferenceSchedule: empty schedule");
  }
  for (const auto& s : segments) {
    if (t < s.until_s) return s.value;
  }
  return segments.back().value;
}

Mat ReferenceSchedule::preview(double t, double dt, int nodes) const {
  Mat out(at(t).size(), nodes);
  for (int k = 0; k < nodes; ++k) out.col(k) = at(t + (k + 1) * dt);
  return out;
}

void SimConfig::validate() const {
  if (!(dt_plant_s > 0) || !(dt_l1_s > 0) || !(dt_ctrl_s > 0) ||
      !(t_end_s > 0)) {
    throw std::invalid_argument("SimConfig: times must be positive");
  }
  auto divides = [](double small, double big) {
    const double q = big / small;
    return std::abs(q - std::round(q)) < 1e-6;
  };
  if (dt_plant_s > dt_l1_s + 1e-15 || dt_l1_s > dt_ctrl_s + 1e-15) {
    throw std::invalid_argument("SimConfig: need dt_plant <= dt_l1 <= dt_ctrl");
  }
  if (!divides(dt_plant_s, dt_l1_s) || !divides(dt_l1_s, dt_ctrl_s) ||
      !divides(dt_ctrl_s, t_end_s)) {
    throw std::invalid_argument("SimConfig: rates must divide each other");
  }
  if (reference.segments.empty()) {
    throw std::invalid_argument("SimConfig: reference schedule is empty");
  }
}

Vec rk4_step(const std::function<Vec(double, const Vec&)>& field, const Vec& x,
             double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt <= 0");
  const Vec k1 = field(t, x);
  const Vec k2 = field(t + 0.5 * dt, x + 0.5 * dt * k1);
  const Vec k3 = field(t + 0.5 * dt, x + 0.5 * dt * k2);
  const Vec k4 = field(t + dt, x + dt * k3);
  Vec out = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) {
    throw std::runtime_error("rk4_step: non-finite derivative or state");
  }
  return out;
}

void TrajectoryLog::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path);
  os << "t";
  auto head = [&](const char* base, Eigen::Index c) {
    for (Eigen::Index i = 1; i <= c; ++i) os << "," << base << i;
  };
  head("x", n);
  head("xn", n);
  head("xhat", n);
  head("sigma", n);
  head("uopt", m);
  head("ua", m);
  head("u", m);
  head("f", m);
  os << ",w";
  head("y", p);
  head("r", p);
  os << "\n";
  os.precision(17);
  for (std::size_t k = 0; k < size(); ++k) {
    os << t[k];
    auto put = [&](const Vec& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) os << "," << v(i);
    };
    put(x[k]);
    put(x_n[k]);
    put(x_hat[k]);
    put(sigma_hat[k]);
    put(u_opt[k]);
    put(u_a[k]);
    put(u[k]);
    put(f[k]);
    os << "," << w[k];
    put(y[k]);
    put(r[k]);
    os << "\n";
  }
}

bool Verdict::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

const BoundCheck* Verdict::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

TrajectoryLog run_closed_loop(const PlantSpec& plant,
                              const UncertaintySpec& unc, Variant variant,
                              const TighteningResult* tightening,
                              const RpiSet* rpi, const L1Config* l1cfg,
                              const MpcConfig& mpccfg, const SimConfig& sim,
                              const Vec& x0) {
  sim.validate();
  plant.validate();
  const auto n = plant.A.rows();
  const auto m = plant.B.cols();
  if (!plant.X0.contains(x0)) {
    throw std::invalid_argument("run_closed_loop: x0 outside X0");
  }
  const bool is_uc = variant == Variant::UC;
  if (is_uc && !l1cfg) {
    throw std::invalid_argument("run_closed_loop: UC variant needs L1Config");
  }

  MpcController ctrl = make_controller(variant, plant, tightening, rpi, mpccfg);
  // Nominal model matches the controller's prediction model.
  const Mat A_nom = variant == Variant::Vanilla ? plant.A : plant.A_m();

  std::optional<L1State> l1;
  if (is_uc) l1.emplace(*l1cfg, plant.B, x0);

  const double dt = sim.dt_plant_s;
  const auto steps = static_cast<long>(std::llround(sim.t_end_s / dt));
  const long every_l1 = std::lround(sim.dt_l1_s / dt);
  const long every_ctrl = std::lround(sim.dt_ctrl_s / dt);

  auto w_of = [&](double t) {
    return sim.disable_unmatched ? 0.0 : unc.w(t);
  };

  Vec x = x0, x_n = x0;
  Vec u_opt = Vec::Zero(m);

  TrajectoryLog log;
  log.n = n;
  log.m = m;
  log.p = plant.C.rows();
  log.t.reserve(static_cast<std::size_t>(steps / every_l1) + 2);

  auto applied_input = [&](double tau, const Vec& xs, double t_abs) -> Vec {
    switch (variant) {
      case Variant::UC:
        return plant.K_x * xs + u_opt + l1->adaptive_control_at(tau);
      case Variant::Tube:
        return plant.K_x * xs + u_opt;
      case Variant::Vanilla:
        return u_opt;
    }
    (void)t_abs;
    return u_opt;
  };

  auto log_row = [&](double t) {
    log.t.push_back(t);
    log.x.push_back(x);
    log.x_n.push_back(x_n);
    log.x_hat.push_back(is_uc ? l1->xhat() : x_n);
    log.sigma_hat.push_back(is_uc ? l1->sigma_hat() : Vec::Zero(n));
    log.matched_est.push_back(is_uc ? l1->matched_estimate() : Vec::Zero(m));
    log.u_opt.push_back(u_opt);
    const Vec ua = is_uc ? l1->adaptive_control_at(0.0) : Vec::Zero(m);
    log.u_a.push_back(ua);
    log.u.push_back(applied_input(0.0, x, t));
    log.f.push_back(unc.f(t, x));
    log.w.push_back(w_of(t));
    log.y.push_back(plant.C * x);
    log.r.push_back(sim.reference.at(t));
  };

  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    if (k % every_ctrl == 0) {
      const Vec& fb = variant == Variant::Vanilla ? x : x_n;
      u_opt = ctrl.control(
          fb, sim.reference.preview(t, mpccfg.dt_s, ctrl.nodes()));
    }
    if (is_uc && k % every_l1 == 0) {
      l1->estimation_update(l1->xhat(), x);
    }
    if (k % every_l1 == 0) log_row(t);

    // Coupled RK4 over [t, t+dt] on (x, x_n, x_hat); sigma_hat and u_opt are
    // held, u_a follows its exact zero-order-hold trajectory.
    const Vec sig = is_uc ? l1->sigma_hat() : Vec::Zero(n);
    auto field = [&](double tt, const Vec& z) -> Vec {
      const double tau = tt - t;
      const Vec xs = z.head(n);
      const Vec xns = z.segment(n, n);
      Vec dz(z.size());
      const Vec u = applied_input(tau, xs, tt);
      dz.head(n) = plant.A * xs + plant.B * (u + unc.f(tt, xs)) +
                   plant.B_u * w_of(tt);
      dz.segment(n, n) = A_nom * xns + plant.B * u_opt;
      if (is_uc) {
        const Vec xh = z.tail(n);
        dz.tail(n) = plant.A_m() * xs + plant.B * u_opt +
                     plant.B * l1->adaptive_control_at(tau) + sig +
                     l1cfg->A_e * (xh - xs);
      }
      return dz;
    };
    Vec z(is_uc ? 3 * n : 2 * n);
    z.head(n) = x;
    z.segment(n, n) = x_n;
    if (is_uc) z.tail(n) = l1->xhat();
    z = rk4_step(field, z, t, dt);
    x = z.head(n);
    x_n = z.segment(n, n);
    if (is_uc) {
      l1->xhat() = z.tail(n);
      l1->advance_filter(dt);
    }
    if (x.cwiseAbs().maxCoeff() > 1e6) {
      throw std::runtime_error("run_closed_loop: state blow-up at t=" +
                               std::to_string(t));
    }
  }
  log_row(sim.t_end_s);
  return log;
}

namespace {

BoundCheck pointwise_bound(const std::string& name,
                           const TrajectoryLog& log,
                           const std::function<double(std::size_t)>& margin) {
  BoundCheck c;
  c.name = name;
  for (std::size_t k = 0; k < log.size(); ++k) {
    const double mg = margin(k);
    if (mg < c.worst_margin) {
      c.worst_margin = mg;
      c.worst_time = log.t[k];
    }
    if (mg < 0.0) ++c.violations;
  }
  c.pass = c.violations == 0;
  return c;
}

}  // namespace

Verdict make_verdict(const TrajectoryLog& log, Variant variant,
                     const PlantSpec& plant,
                     const TighteningResult* tightening, const RpiSet* rpi,
                     const ReferenceSchedule& ref) {
  Verdict v;
  const auto n = log.n;
  const auto m = log.m;

  v.checks.push_back(pointwise_bound("state constraints x in X", log,
                                     [&](std::size_t k) {
                                       double mg = 1e300;
                                       for (Eigen::Index i = 0; i < n; ++i) {
                                         mg = std::min(
                                             mg, std::min(plant.X.upper()(i) -
                                                              log.x[k](i),
                                                          log.x[k](i) -
                                                              plant.X.lower()(i)));
                                       }
                                       return mg;
                                     }));
  v.checks.push_back(pointwise_bound("input constraints u in U", log,
                                     [&](std::size_t k) {
                                       double mg = 1e300;
                                       for (Eigen::Index j = 0; j < m; ++j) {
                                         mg = std::min(
                                             mg, std::min(plant.U.upper()(j) -
                                                              log.u[k](j),
                                                          log.u[k](j) -
                                                              plant.U.lower()(j)));
                                       }
                                       return mg;
                                     }));

  if (variant == Variant::UC && tightening) {
    for (Eigen::Index i = 0; i < n; ++i) {
      v.checks.push_back(pointwise_bound(
          "|x_" + std::to_string(i + 1) + " - xn_" + std::to_string(i + 1) +
              "| <= rho_tilde",
          log, [&, i](std::size_t k) {
            return tightening->rho_tilde(i) -
                   std::abs(log.x[k](i) - log.x_n[k](i));
          }));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      v.checks.push_back(pointwise_bound(
          "|ua_" + std::to_string(j + 1) + "| <= rho_ua", log,
          [&, j](std::size_t k) {
            return tightening->rho_ua(j) - std::abs(log.u_a[k](j));
          }));
    }
    // Uncertainty-estimation accuracy after a 0.1 s transient.
    BoundCheck est;
    est.name = "matched uncertainty estimation error";
    est.worst_margin = 0.0;
    for (std::size_t k = 0; k < log.size(); ++k) {
      if (log.t[k] < 0.1) continue;
      const double err =
          (log.matched_est[k] - log.f[k]).cwiseAbs().maxCoeff();
      if (err > est.worst_margin) {
        est.worst_margin = err;
        est.worst_time = log.t[k];
      }
    }
    est.pass = true;  // informational; thresholds are the caller's business
    v.checks.push_back(est);
  }

  if (variant == Variant::Tube && rpi) {
    v.checks.push_back(pointwise_bound(
        "tube containment x - xn in Z", log, [&](std::size_t k) {
          double mg = 1e300;
          for (Eigen::Index i = 0; i < n; ++i) {
            mg = std::min(mg, rpi->Z.upper()(i) -
                                  std::abs(log.x[k](i) - log.x_n[k](i)));
          }
          return mg;
        }));
  }

  // RMS tracking error on the settled windows.
  const auto p = log.p;
  v.tracking_rms = Vec::Zero(p);
  std::size_t count = 0;
  for (std::size_t k = 0; k < log.size(); ++k) {
    const double t = log.t[k];
    const bool in_window =
        (t >= 2.5 && t <= 7.5) || (t >= 10.0 && t <= 15.0);
    if (!in_window) continue;
    const Vec e = log.y[k] - ref.at(t);
    v.tracking_rms += e.cwiseProduct(e);
    ++count;
  }
  if (count > 0) {
    v.tracking_rms = (v.tracking_rms / static_cast<double>(count)).cwiseSqrt();
  }
  return v;
}

}  // namespace ucmpc
