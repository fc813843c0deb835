#ifndef UCMPC_LTI_HPP_
#define UCMPC_LTI_HPP_

#include <vector>

#include "ucmpc/linalg.hpp"
#include "ucmpc/parallel.hpp"
#include "ucmpc/sets.hpp"

namespace ucmpc {

/// Continuous-time LTI system x' = Ax + Bu, y = Cx + Du.
struct StateSpaceModel {
  Mat A, B, C, D;

  StateSpaceModel() = default;
  StateSpaceModel(Mat a, Mat b, Mat c, Mat d);
  /// Strictly proper system (D = 0).
  StateSpaceModel(Mat a, Mat b, Mat c);

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
  Eigen::Index outputs() const { return C.rows(); }

  /// Impulse response C e^{At} B at time t (D handled by callers).
  Mat impulse_at(double t) const;

 private:
  void validate() const;
};

/// Diagonal bank of first-order low-pass filters k_f^j / (s + k_f^j).
struct FilterBank {
  Vec bandwidths;

  explicit FilterBank(Vec k);
  Eigen::Index channels() const { return bandwidths.size(); }

  /// C(s) as a state-space system.
  StateSpaceModel lowpass() const;
  /// I - C(s).
  StateSpaceModel complement() const;
};

enum class FilterMode { I_minus_C, C };

/// sys * (I - C(s)) or sys * C(s): the filter acts on the system input.
StateSpaceModel series_with_filter(const StateSpaceModel& sys,
                                   const FilterBank& filters, FilterMode mode);

/// outer(inner(u)): cascade with inner feeding outer.
StateSpaceModel series(const StateSpaceModel& outer,
                       const StateSpaceModel& inner);

/// C(s) (P s + Q), proper whenever C is a first-order low-pass bank.
/// Realizes e.g. C(s) B^+ (s I - A_e) with P = B^+ and Q = -B^+ A_e.
StateSpaceModel filter_times_affine(const FilterBank& filters, const Mat& P,
                                    const Mat& Q);

/// H_xm(s) = (sI - A_m)^{-1} B.
StateSpaceModel make_hxm(const Mat& A_m, const Mat& B);
/// s (sI - A_m)^{-1} = I + A_m (sI - A_m)^{-1}, a proper system.
StateSpaceModel make_s_resolvent(const Mat& A_m);

/// C e^{At} B sampled on t = 0, dt, ..., horizon.
std::vector<Mat> impulse_response(const StateSpaceModel& sys, double dt,
                                  double horizon);

struct L1NormResult {
  Vec rows;      // per-output-row induced gain
  double value;  // max over rows
};

/// Induced L-infinity (peak-to-peak) norm: for each output row i,
/// sum_j ( integral_0^inf |h_ij(t)| dt + |D_ij| ). Adaptive Simpson
/// quadrature on |h| with a certified exponential tail bound; total error
/// per row <= tol.
L1NormResult l1_norm(const StateSpaceModel& sys, double tol = 1e-6,
                     Exec mode = Exec::Parallel);

/// rho_in = ||s (sI - A_m)^{-1}||_L1 * max_{x0 in X0} ||x0||_inf.
double rho_in(const Mat& A_m, const HyperRect& X0, double tol = 1e-6);

}  // namespace ucmpc

#endif
