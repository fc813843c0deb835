#include "ucmpc/tightening.hpp"

#include <cmath>
#include <sstream>

namespace ucmpc {

namespace {

std::string ineq_text(const char* name, double lhs, double rhs) {
  std::ostringstream os;
  os << name << ": lhs=" << lhs << " rhs=" << rhs;
  return os.str();
}

void push_audit(std::vector<AuditEntry>* audit, std::string name, double lhs,
                double rhs) {
  if (audit) audit->push_back({std::move(name), lhs, rhs, lhs < rhs});
}

}  // namespace

void PlantSpec::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || B_u.rows() != n || C.cols() != n ||
      K_x.rows() != B.cols() || K_x.cols() != n) {
    throw std::invalid_argument("PlantSpec: inconsistent dimensions");
  }
  if (X.dim() != n || U.dim() != B.cols() || X0.dim() != n) {
    throw std::invalid_argument("PlantSpec: constraint set dimension mismatch");
  }
  Eigen::FullPivLU<Mat> luB(B);
  if (luB.rank() != B.cols()) {
    throw std::invalid_argument("PlantSpec: B must have full column rank");
  }
  Mat BBu(n, B.cols() + B_u.cols());
  BBu << B, B_u;
  Eigen::FullPivLU<Mat> luBBu(BBu);
  if (luBBu.rank() != n) {
    throw std::invalid_argument("PlantSpec: [B B_u] must have rank n");
  }
  if ((B_u.transpose() * B).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("PlantSpec: B_u^T B must vanish");
  }
  require_hurwitz(A_m(), "PlantSpec A_m");
}

double UncertaintySpec::bound_max(const HyperRect& Z) const {
  double v = 0.0;
  for (const auto& fn : bound) v = std::max(v, fn(Z));
  return v;
}

double UncertaintySpec::lipschitz_max(const HyperRect& Z) const {
  double v = 0.0;
  for (const auto& fn : lipschitz_x) v = std::max(v, fn(Z));
  return v;
}

Vec UncertaintySpec::bound_vec(const HyperRect& Z) const {
  Vec v(channels());
  for (Eigen::Index j = 0; j < channels(); ++j) v(j) = bound[j](Z);
  return v;
}

StabilityCheck check_stability(const PlantSpec& plant,
                               const UncertaintySpec& unc,
                               const FilterBank& filters, double rho_r_trial,
                               double gamma1, double u_opt_bound,
                               const HyperRect& X_restrict, double tol) {
  const Mat Am = plant.A_m();
  const auto n = Am.rows();
  const double nG =
      l1_norm(series_with_filter(make_hxm(Am, plant.B), filters,
                                 FilterMode::I_minus_C),
              tol)
          .value;
  const double nH = l1_norm(make_hxm(Am, plant.B), tol).value;
  const double nU = l1_norm(make_hxm(Am, plant.B_u), tol).value;
  const double rin = rho_in(Am, plant.X0, tol);

  StabilityCheck out;
  const auto Xr = intersect(HyperRect::inf_ball(rho_r_trial, n), X_restrict);
  const auto Xa =
      intersect(HyperRect::inf_ball(rho_r_trial + gamma1, n), X_restrict);
  if (!Xr || !Xa) return out;  // degenerate restriction: fail both
  out.gain_lhs = nG * unc.bound_max(*Xr);
  out.gain_rhs = rho_r_trial - nH * u_opt_bound - nU * unc.b_w - rin;
  out.gain_condition = out.gain_lhs < out.gain_rhs;
  out.contraction_lhs = nG * unc.lipschitz_max(*Xa);
  out.contraction_condition = out.contraction_lhs < out.contraction_rhs;
  return out;
}

TransformedNorms transform(const PlantSpec& plant, const FilterBank& filters,
                           Eigen::Index i, const Vec& scale, double tol) {
  const Mat Am = plant.A_m();
  const auto n = Am.rows();
  if (scale.size() != n || i < 0 || i >= n) {
    throw std::invalid_argument("transform: bad coordinate or scale size");
  }
  if (scale(i) != 1.0 || (scale.array() <= 0.0).any() ||
      (scale.array() > 1.0).any()) {
    throw std::invalid_argument(
        "transform: scale must satisfy scale[i]=1, 0<scale[k]<=1");
  }
  const Mat T = scale.asDiagonal();
  TransformedNorms out;
  out.hxm = l1_norm(StateSpaceModel(Am, plant.B, T), tol);
  out.hxu = l1_norm(StateSpaceModel(Am, plant.B_u, T), tol);
  out.gxm = l1_norm(
      series_with_filter(StateSpaceModel(Am, plant.B, T), filters,
                         FilterMode::I_minus_C),
      tol);
  out.rho_in_i =
      l1_norm(StateSpaceModel(Am, Mat::Identity(n, n), T * Am, T), tol).value *
      plant.X0.max_inf_norm();
  return out;
}

namespace {

HyperRect trial_box(double rho, const Vec& scale, const HyperRect& X) {
  Vec radii = rho / scale.array();
  auto boxed = intersect(HyperRect::symmetric(radii), X);
  // Omega radii are positive and X contains the origin, so never empty.
  return *boxed;
}

}  // namespace

double solve_rho_check(const TransformedNorms& norms,
                       const UncertaintySpec& unc, double u_opt_bound,
                       double rho_r, const Vec& scale, const HyperRect& X,
                       std::vector<AuditEntry>* audit, Eigen::Index i) {
  const double base = norms.hxm.value * u_opt_bound +
                      norms.hxu.value * unc.b_w + norms.rho_in_i;
  auto margin = [&](double rho) {
    return (rho - base) - norms.gxm.value * unc.bound_max(trial_box(rho, scale, X));
  };
  if (!(margin(rho_r) > 0.0)) {
    throw TighteningError(
        ineq_text("per-coordinate condition infeasible at rho_r",
                  norms.gxm.value *
                          unc.bound_max(trial_box(rho_r, scale, X)) +
                      base,
                  rho_r));
  }
  double lo = 0.0, hi = rho_r;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (margin(mid) > 0.0 ? hi : lo) = mid;
  }
  double rho = std::min(hi * (1.0 + 1e-6) + 1e-12, rho_r);
  push_audit(audit,
             "rho_check[" + std::to_string(i) + "] condition",
             norms.gxm.value * unc.bound_max(trial_box(rho, scale, X)) + base,
             rho);
  return rho;
}

TighteningResult run_algorithm1(const PlantSpec& plant,
                                const UncertaintySpec& unc,
                                const L1Config& l1cfg,
                                const AlgorithmOptions& opt) {
  plant.validate();
  l1cfg.validate();
  const Mat Am = plant.A_m();
  const auto n = Am.rows();
  const auto m = plant.B.cols();
  if (unc.channels() != m) {
    throw std::invalid_argument("run_algorithm1: uncertainty channel count");
  }

  TighteningResult res;
  auto* audit = &res.audit;
  const double g1 = l1cfg.gamma1;

  // Step 1: range of u_opt = u_n - K_x x_n over U x X by interval arithmetic.
  if (opt.u_opt_bound_override) {
    res.u_opt_bound = *opt.u_opt_bound_override;
  } else {
    const Vec kx_range = plant.K_x.cwiseAbs() * plant.X.abs_bound();
    res.u_opt_bound = (plant.U.abs_bound() + kx_range).maxCoeff();
  }

  // Step 2: bandwidth escalation until both stability conditions admit a
  // rho_r. The gain condition saturates over X, so the smallest feasible
  // rho_r is found by doubling then bisection.
  Vec kf = l1cfg.filter_bandwidths;
  double rho_r = 0.0;
  double nG = 0, nH = 0, nU = 0, rin = 0;
  while (true) {
    const FilterBank filters(kf);
    nG = l1_norm(series_with_filter(make_hxm(Am, plant.B), filters,
                                    FilterMode::I_minus_C),
                 opt.norm_tol)
             .value;
    nH = l1_norm(make_hxm(Am, plant.B), opt.norm_tol).value;
    nU = l1_norm(make_hxm(Am, plant.B_u), opt.norm_tol).value;
    rin = rho_in(Am, plant.X0, opt.norm_tol);
    const double base = nH * res.u_opt_bound + nU * unc.b_w + rin;
    auto margin = [&](double r) {
      const auto Xr = intersect(HyperRect::inf_ball(r, n), plant.X);
      return (r - base) - nG * unc.bound_max(*Xr);
    };
    double hi = 1.0;
    while (margin(hi) <= 0.0 && hi < 1e12) hi *= 2.0;
    bool found = hi < 1e12;
    if (found) {
      double lo = 0.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) > 0.0 ? hi : lo) = mid;
      }
      rho_r = hi * (1.0 + 1e-6);
      const auto Xa = intersect(HyperRect::inf_ball(rho_r + g1, n), plant.X);
      const double lf = unc.lipschitz_max(*Xa);
      push_audit(audit, "stability gain condition",
                 nG * unc.bound_max(
                          *intersect(HyperRect::inf_ball(rho_r, n), plant.X)) +
                     base,
                 rho_r);
      push_audit(audit, "stability contraction condition", nG * lf, 1.0);
      if (nG * lf < 1.0) break;
    }
    kf *= 2.0;
    if (kf.maxCoeff() > opt.bandwidth_cap) {
      throw TighteningError(
          "bandwidth escalation exceeded cap 1e6 rad/s without satisfying "
          "the stability conditions");
    }
  }
  res.rho_r = rho_r;
  res.filter_bandwidths_final = kf;
  const FilterBank filters(kf);

  // Steps 3-5: per-coordinate refinement with the b_f fixed point.
  HyperRect Xr = *intersect(HyperRect::inf_ball(rho_r, n), plant.X);
  double b_old = unc.bound_max(Xr);
  res.rho_check = Vec::Zero(n);
  std::vector<TransformedNorms> tn(static_cast<std::size_t>(n));
  for (int pass = 0; pass < 100; ++pass) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec scale = Vec::Constant(n, opt.scale_offdiag);
      scale(i) = 1.0;
      tn[static_cast<std::size_t>(i)] =
          transform(plant, filters, i, scale, opt.norm_tol);
      res.rho_check(i) =
          solve_rho_check(tn[static_cast<std::size_t>(i)], unc,
                          res.u_opt_bound, rho_r, scale, plant.X, audit, i);
    }
    Xr = *intersect(HyperRect::symmetric(res.rho_check), plant.X);
    const double b_new = unc.bound_max(Xr);
    push_audit(audit, "b_f fixed point improvement (pass " +
                          std::to_string(pass) + ")",
               b_old - b_new, opt.tol);
    if (b_old - b_new <= opt.tol) {
      b_old = b_new;
      break;
    }
    b_old = b_new;
  }
  res.X_r = Xr;
  const double b_f_Xr = b_old;

  res.rho = res.rho_check.array() + g1;
  res.X_a = *intersect(HyperRect::symmetric(res.rho), plant.X);
  const double L_f_Xa = unc.lipschitz_max(res.X_a);
  const double b_f_Xa = unc.bound_max(res.X_a);

  res.rho_tilde = Vec::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    res.rho_tilde(i) = tn[static_cast<std::size_t>(i)].gxm.value * b_f_Xr +
                       tn[static_cast<std::size_t>(i)].hxu.value * unc.b_w +
                       g1;
  }

  // Step 6: decrease T until the sample-time condition holds.
  const StateSpaceModel est_path =
      filtered_estimator_path(filters, plant.B, l1cfg.A_e);
  const double n_HC =
      l1_norm(series(make_hxm(Am, plant.B), est_path), opt.norm_tol).value;
  const double n_CB = l1_norm(est_path, opt.norm_tol).value;
  const double denom = 1.0 - nG * L_f_Xa;
  if (denom <= 0.0) {
    throw TighteningError(ineq_text(
        "contraction on X_a violated, sample-time search impossible",
        nG * L_f_Xa, 1.0));
  }
  double T = l1cfg.T_theory_s;
  double g0 = 0.0;
  while (true) {
    g0 = gamma0(alpha_constants(l1cfg.A_e, plant.B, plant.B_u, T), b_f_Xa,
                unc.b_w);
    const double lhs = n_HC / denom * g0;
    if (lhs < g1) {
      push_audit(audit, "sample-time condition", lhs, g1);
      break;
    }
    T *= 0.5;
    if (T < opt.T_floor) {
      throw TighteningError(ineq_text(
          "sample-time search underflow below 1e-12 s", n_HC / denom * g0,
          g1));
    }
  }
  res.T_final = T;
  res.gamma0_val = g0;

  // Step 7: gamma2 and the per-channel input bounds.
  const L1NormResult filter_rows = l1_norm(filters.lowpass(), opt.norm_tol);
  res.gamma2_val =
      gamma2(filter_rows.value, L_f_Xa, g1, n_CB, res.gamma0_val);
  const Vec b_vec = unc.bound_vec(res.X_r);
  res.rho_ua = Vec::Zero(m);
  res.rho_tilde_u = Vec::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    res.rho_ua(j) = filter_rows.rows(j) * b_vec(j) + res.gamma2_val;
    res.rho_tilde_u(j) =
        res.rho_ua(j) + plant.K_x.row(j).cwiseAbs().dot(res.rho_tilde);
  }

  // Step 8: tightened sets.
  res.X_tilde = HyperRect::symmetric(res.rho_tilde);
  res.U_tilde = HyperRect::symmetric(res.rho_tilde_u);
  res.U_a = HyperRect::symmetric(res.rho_ua);
  auto Xn = pontryagin_diff(plant.X, res.X_tilde);
  if (!Xn) {
    throw TighteningError(
        "constraints infeasible after tightening: X_n = X - X_tilde is "
        "empty");
  }
  auto Un = pontryagin_diff(plant.U, res.U_tilde);
  if (!Un) {
    throw TighteningError(
        "constraints infeasible after tightening: U_n = U - U_tilde is "
        "empty");
  }
  res.X_n = *Xn;
  res.U_n = *Un;
  return res;
}

}  // namespace ucmpc
