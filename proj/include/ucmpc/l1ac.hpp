#ifndef UCMPC_L1AC_HPP_
#define UCMPC_L1AC_HPP_

#include "ucmpc/lti.hpp"

namespace ucmpc {

/// Parameters of the adaptive loop. T_theory is the sample time used when
/// deriving bounds; T_sim is the one the runtime actually runs at.
struct L1Config {
  Mat A_e;
  double T_theory_s = 1e-7;
  double T_sim_s = 1e-4;
  Vec filter_bandwidths;  // k_f per input channel
  double gamma1 = 0.02;

  FilterBank filters() const { return FilterBank(filter_bandwidths); }
  void validate() const;
};

/// Phi(T) = A_e^{-1} (e^{A_e T} - I). Small arguments go through the series
/// T sum_k (A_e T)^k / (k+1)! to avoid cancellation.
Mat phi(const Mat& A_e, double T);

/// Gain of the piecewise-constant estimation law:
/// sigma_hat(iT) = -Phi(T)^{-1} e^{A_e T} xtilde(iT).
Mat estimation_gain(const Mat& A_e, double T);

/// Runtime state of the adaptive controller.
class L1State {
 public:
  L1State(const L1Config& cfg, const Mat& B, const Vec& x0);

  /// Sample-instant update, x measured, xhat the predictor state.
  void estimation_update(const Vec& xhat, const Vec& x);

  /// Adaptive input at offset tau in [0, dt] since the last filter update
  /// (exact zero-order-hold response of the first-order filter).
  Vec adaptive_control_at(double tau) const;

  /// Commits the filter state at offset dt.
  void advance_filter(double dt);

  const Vec& sigma_hat() const { return sigma_hat_; }
  Vec matched_estimate() const { return b_pinv_ * sigma_hat_; }
  const Vec& xhat() const { return xhat_; }
  Vec& xhat() { return xhat_; }

 private:
  Mat est_gain_;  // -Phi(T)^{-1} e^{A_e T}
  Mat b_pinv_;
  Vec filter_k_;
  Vec sigma_hat_;
  Vec xhat_;
  Vec ua_;      // filter state = adaptive input
  Vec target_;  // -B^+ sigma_hat, the filter's current DC target
};

/// Integral / peak constants of the estimation error recursion over one
/// sample period. Quadrature resolution ~1e-3 relative.
struct AlphaConstants {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
};
AlphaConstants alpha_constants(const Mat& A_e, const Mat& B, const Mat& B_u,
                               double T);

/// gamma0(T) = (b_f a0 + a1 b_w)(a2 + a3 + 1).
double gamma0(const AlphaConstants& a, double b_f_Xa, double b_w);

/// gamma2 = ||C||_L1 L_f gamma1 + ||C B^+ (sI - A_e)||_L1 gamma0.
double gamma2(double filter_l1, double L_f_Xa, double gamma1,
              double cs_bdag_l1, double gamma0_val);

/// Moore-Penrose pseudo-inverse of a full-column-rank B.
Mat pseudo_inverse(const Mat& B);

/// C(s) B^+ (sI - A_e) as a proper state-space system.
StateSpaceModel filtered_estimator_path(const FilterBank& filters,
                                        const Mat& B, const Mat& A_e);

}  // namespace ucmpc

#endif
