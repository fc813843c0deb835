#ifndef UCMPC_TIGHTENING_HPP_
#define UCMPC_TIGHTENING_HPP_

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucmpc/l1ac.hpp"
#include "ucmpc/lti.hpp"
#include "ucmpc/sets.hpp"

namespace ucmpc {

/// Constrained uncertain plant x' = Ax + B(u + f(t,x)) + B_u w.
struct PlantSpec {
  Mat A, B, B_u, C;
  Mat K_x;
  HyperRect X, U, X0;

  Mat A_m() const { return A + B * K_x; }
  /// Checks rank/orthogonality assumptions and that A_m is Hurwitz.
  void validate() const;
};

/// Per-channel uncertainty description. bound/lipschitz_x map a state box Z
/// to b_{f_j,Z} and L_{f_j,Z}; they must be monotone under set inclusion.
struct UncertaintySpec {
  using SetFn = std::function<double(const HyperRect&)>;
  std::vector<SetFn> bound;
  std::vector<SetFn> lipschitz_x;
  Vec lipschitz_t;  // time-Lipschitz constants; carried but not consumed
  double b_w = 0.0;
  std::function<Vec(double, const Vec&)> f;
  std::function<double(double)> w;

  Eigen::Index channels() const {
    return static_cast<Eigen::Index>(bound.size());
  }
  double bound_max(const HyperRect& Z) const;
  double lipschitz_max(const HyperRect& Z) const;
  Vec bound_vec(const HyperRect& Z) const;
};

struct AuditEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;  // lhs < rhs at the time of the check
};

struct TighteningResult {
  double rho_r = 0.0;
  double u_opt_bound = 0.0;
  Vec rho_check;      // per-state refined radii
  Vec rho;            // rho_check + gamma1
  Vec rho_tilde;      // per-state actual-vs-nominal bounds
  Vec rho_ua;         // per-input adaptive-control bounds
  Vec rho_tilde_u;    // per-input actual-vs-nominal input bounds
  double gamma0_val = 0.0;
  double gamma2_val = 0.0;
  double T_final = 0.0;
  Vec filter_bandwidths_final;
  HyperRect X_r, X_a, X_tilde, U_tilde, U_a, X_n, U_n;
  std::vector<AuditEntry> audit;
};

class TighteningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StabilityCheck {
  bool gain_condition = false;       // (uncertainty gain) vs budget
  bool contraction_condition = false;  // ||G|| L_f < 1
  double gain_lhs = 0, gain_rhs = 0;
  double contraction_lhs = 0, contraction_rhs = 1.0;
  bool ok() const { return gain_condition && contraction_condition; }
};

/// Evaluates both filter stability conditions at a trial rho_r, with
/// X_r = Omega(rho_r) cap X_restrict and X_a = Omega(rho_r + gamma1) cap
/// X_restrict.
StabilityCheck check_stability(const PlantSpec& plant,
                               const UncertaintySpec& unc,
                               const FilterBank& filters, double rho_r_trial,
                               double gamma1, double u_opt_bound,
                               const HyperRect& X_restrict, double tol = 1e-6);

struct TransformedNorms {
  L1NormResult hxm, hxu, gxm;
  double rho_in_i = 0.0;
};

/// Row-scaled realizations T H_xm, T H_xu, T G_xm and the scaled
/// initial-condition constant, where T = diag(scale), scale[i] = 1,
/// 0 < scale[k] <= 1 elsewhere.
TransformedNorms transform(const PlantSpec& plant, const FilterBank& filters,
                           Eigen::Index i, const Vec& scale, double tol = 1e-6);

/// Smallest refined radius for coordinate i by bisection; the uncertainty
/// bound is evaluated on { |z_k| <= rho/scale_k } cap X at each trial.
double solve_rho_check(const TransformedNorms& norms,
                       const UncertaintySpec& unc, double u_opt_bound,
                       double rho_r, const Vec& scale, const HyperRect& X,
                       std::vector<AuditEntry>* audit, Eigen::Index i);

struct AlgorithmOptions {
  double scale_offdiag = 0.01;   // off-diagonal entries of the scalings
  double tol = 1e-4;             // fixed-point tolerance on b_f
  double norm_tol = 1e-6;        // L1-norm quadrature tolerance
  double bandwidth_cap = 1e6;    // rad/s
  double T_floor = 1e-12;        // s
  std::optional<double> u_opt_bound_override;
};

/// The full design procedure: stability check with bandwidth escalation,
/// per-coordinate refinement with the b_f fixed point, sample-time search,
/// and emission of the tightened nominal constraint sets.
TighteningResult run_algorithm1(const PlantSpec& plant,
                                const UncertaintySpec& unc,
                                const L1Config& l1cfg,
                                const AlgorithmOptions& opt = {});

}  // namespace ucmpc

#endif
