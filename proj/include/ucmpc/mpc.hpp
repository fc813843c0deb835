#ifndef UCMPC_MPC_HPP_
#define UCMPC_MPC_HPP_

#include <functional>
#include <optional>
#include <string>

#include "ucmpc/qp.hpp"
#include "ucmpc/sets.hpp"
#include "ucmpc/tightening.hpp"

namespace ucmpc {

enum class Variant { UC, Vanilla, Tube };

struct MpcConfig {
  double horizon_s = 0.2;
  double dt_s = 0.01;            // transcription step
  double update_period_s = 0.01; // t_delta: how long u_opt is held
  double weight_tracking = 100.0;
  double weight_effort = 1e-3;
  double weight_rate = 1e-2;
  double soft_penalty = 1e6;     // quadratic penalty on state-constraint slack
  double qp_tol = 1e-7;
  int qp_max_iter = 400000;

  int nodes() const;
  void validate() const;
};

/// Robust positively invariant outer box for e' = (A+BK_x)e + dist.
struct RpiSet {
  HyperRect Z;          // outer box on the error set, valid at all times
  HyperRect KxZ;        // bound on K_x e over the error set (support-based)
  Mat K_x;
  double dt = 0.0;      // sampling step of the underlying recursion
  int iterations = 0;
};

/// Discrete fixed point of h <- |A_d| h + w_half (box recursion core).
/// Throws if the recursion does not contract.
Vec rpi_discrete_fixed_point(const Mat& A_d, const Vec& w_half, double tol);

/// Outer box for the continuous error dynamics driven by the disturbance box
/// dist = B [-b_f, b_f]^m (+) B_u [-b_w, b_w]. Accumulates the reach set as a
/// zonotope (generators A_d^k W_d), reports its interval hull with an
/// intersample envelope, and the exact zonotope support in the K_x rows for
/// input tightening.
RpiSet rpi_outer_box(const PlantSpec& plant, const Vec& b_f, double b_w,
                     double dt, double tol);

/// Direct transcription of the receding-horizon problem. The model is
/// x' = A_model x + B u with constraints x_k in X_c and K_con x_k + u_k in
/// U_c; zero-order hold at cfg.dt_s; cost
///   sum_k dt ( w_t ||C x_k - r_k||^2 + w_u ||u_k||^2 + w_r ||du_k/dt||^2 ).
/// Soft mode adds per-node state slacks with a quadratic penalty.
class MpcController {
 public:
  MpcController(const Mat& A_model, const Mat& B, const Mat& C_out,
                const Mat& K_con, const HyperRect& X_c, const HyperRect& U_c,
                const MpcConfig& cfg, bool soft_states);

  /// Builds the QP for the given initial state and reference preview
  /// (r_preview has nodes() columns).
  QpProblem transcribe(const Vec& x_now, const Mat& r_preview,
                       const Vec& u_prev) const;

  /// Solves and returns the first control sample; warm-started with the
  /// previous solution (shift-and-repeat). Throws on hard infeasibility,
  /// naming the worst-violated node.
  Vec control(const Vec& x_now, const Mat& r_preview);

  /// Worst slack magnitude from the last soft solve (0 for hard problems).
  double last_slack() const { return last_slack_; }
  const Vec& last_u() const { return u_prev_; }
  void reset();

  int nodes() const { return cfg_.nodes(); }

 private:
  Mat A_model_, B_, C_out_, K_con_;
  HyperRect X_c_, U_c_;
  MpcConfig cfg_;
  bool soft_;
  Eigen::Index n_, m_, nz_;
  Mat Ad_, Bd_;
  Mat phi_;        // stacked state prediction matrix
  Mat track_map_;  // output prediction from inputs
  Mat rate_map_;   // first-difference operator
  std::vector<Mat> a_pow_;
  Mat P_, G_;
  std::optional<QpWorkspace> ws_;
  Vec warm_x_, warm_y_;
  Vec u_prev_;
  double last_slack_ = 0.0;

  void build_static();
};

/// Variant factory following the published control laws:
///  UC      : model A_m, sets (X_n, U_n), feedback = nominal state,
///            applied input K_x x + u_opt + u_a
///  Vanilla : model A (open loop), sets (X soft, U), feedback = plant state,
///            applied input u_opt
///  Tube    : model A_m, sets (X - Z, U - KxZ), feedback = nominal state,
///            applied input K_x x + u_opt
MpcController make_controller(Variant v, const PlantSpec& plant,
                              const TighteningResult* tightening,
                              const RpiSet* rpi, const MpcConfig& cfg);

/// Plain-text dump of a QP for offline inspection.
std::string debug_dump(const QpProblem& p);

}  // namespace ucmpc

#endif
