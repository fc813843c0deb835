#ifndef UCMPC_QP_HPP_
#define UCMPC_QP_HPP_

#include <memory>

#include "ucmpc/linalg.hpp"

namespace ucmpc {

/// min 1/2 x'Px + q'x  s.t.  l <= Ax <= u. Equality rows set l = u; one-sided
/// rows use +-kQpInf.
inline constexpr double kQpInf = 1e20;

struct QpProblem {
  Mat P;
  Vec q;
  Mat A;
  Vec l, u;

  Eigen::Index vars() const { return P.rows(); }
  Eigen::Index cons() const { return A.rows(); }
  /// Dimension consistency plus PSD check (eigenvalues >= -1e-9).
  void validate() const;
};

enum class QpStatus { Optimal, MaxIterations, PrimalInfeasible };

struct QpSolution {
  QpStatus status = QpStatus::MaxIterations;
  Vec x;
  Vec y;  // dual for l <= Ax <= u
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

struct QpSettings {
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  double tol = 1e-8;
  int max_iter = 200000;
  int check_every = 25;
};

/// Dense ADMM solver. The factorization of (P + sigma I + rho A'A) is cached
/// by QpWorkspace, so repeated solves with the same P/A pay only the
/// back-substitutions. Deterministic for identical inputs.
class QpWorkspace {
 public:
  QpWorkspace(Mat P, Mat A, QpSettings settings = {});

  /// Solves with the cached structure; q/l/u may change between calls.
  QpSolution solve(const Vec& q, const Vec& l, const Vec& u,
                   const Vec* warm_x = nullptr, const Vec* warm_y = nullptr) const;

  const QpSettings& settings() const { return settings_; }

 private:
  Mat P_, A_;
  QpSettings settings_;
  Eigen::LLT<Mat> kkt_;
};

/// One-shot interface.
QpSolution solve_qp(const QpProblem& p, double tol = 1e-8,
                    int max_iter = 200000);

}  // namespace ucmpc

#endif
