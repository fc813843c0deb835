#include "ucmpc/qp.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ucmpc {

void QpProblem::validate() const {
  if (P.rows() != P.cols() || q.size() != P.rows() || A.cols() != P.rows() ||
      l.size() != A.rows() || u.size() != A.rows()) {
    throw std::invalid_argument("QpProblem: inconsistent dimensions");
  }
  if ((l.array() > u.array()).any()) {
    throw std::invalid_argument("QpProblem: l > u");
  }
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + inf_norm(P))) {
    throw std::invalid_argument("QpProblem: P must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (P + P.transpose()),
                                        Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9 * (1.0 + inf_norm(P))) {
    throw std::invalid_argument("QpProblem: P must be PSD (to 1e-9)");
  }
}

QpWorkspace::QpWorkspace(Mat P, Mat A, QpSettings settings)
    : P_(std::move(P)), A_(std::move(A)), settings_(settings) {
  if (A_.cols() != P_.rows()) {
    throw std::invalid_argument("QpWorkspace: dimension mismatch");
  }
  Mat K = P_ + settings_.sigma * Mat::Identity(P_.rows(), P_.cols()) +
          settings_.rho * A_.transpose() * A_;
  kkt_.compute(K);
  if (kkt_.info() != Eigen::Success) {
    throw std::runtime_error("QpWorkspace: KKT factorization failed");
  }
}

QpSolution QpWorkspace::solve(const Vec& q, const Vec& l, const Vec& u,
                              const Vec* warm_x, const Vec* warm_y) const {
  const auto n = P_.rows();
  const auto mc = A_.rows();
  const double sigma = settings_.sigma, alpha = settings_.alpha;
  double rho = settings_.rho;

  Vec x = warm_x ? *warm_x : Vec::Zero(n);
  Vec y = warm_y ? *warm_y : Vec::Zero(mc);
  Vec z = (A_ * x).cwiseMax(l).cwiseMin(u);

  const Eigen::LLT<Mat>* kkt = &kkt_;
  Eigen::LLT<Mat> kkt_local;  // holds refactorizations after rho adaptation

  QpSolution sol;
  for (int k = 1; k <= settings_.max_iter; ++k) {
    const Vec rhs = sigma * x - q + A_.transpose() * (rho * z - y);
    const Vec xt = kkt->solve(rhs);
    const Vec zt = A_ * xt;
    x = alpha * xt + (1.0 - alpha) * x;
    const Vec z_relaxed = alpha * zt + (1.0 - alpha) * z;
    Vec z_new = (z_relaxed + y / rho).cwiseMax(l).cwiseMin(u);
    y += rho * (z_relaxed - z_new);
    z = std::move(z_new);

    if (k % settings_.check_every == 0 || k == settings_.max_iter) {
      const Vec Ax = A_ * x;
      sol.primal_residual = mc == 0 ? 0.0 : (Ax - z).cwiseAbs().maxCoeff();
      sol.dual_residual =
          (P_ * x + q + A_.transpose() * y).cwiseAbs().maxCoeff();
      sol.iterations = k;
      if (sol.primal_residual <= settings_.tol &&
          sol.dual_residual <= settings_.tol) {
        sol.status = QpStatus::Optimal;
        sol.x = x;
        sol.y = y;
        return sol;
      }
      // Residual-balancing rho adaptation with refactorization; the rule is
      // deterministic, so identical inputs still give identical solutions.
      const double sp = std::max({mc == 0 ? 0.0 : Ax.cwiseAbs().maxCoeff(),
                                  mc == 0 ? 0.0 : z.cwiseAbs().maxCoeff(),
                                  1e-12});
      const double sd = std::max({(P_ * x).cwiseAbs().maxCoeff(),
                                  (A_.transpose() * y).cwiseAbs().maxCoeff(),
                                  q.cwiseAbs().maxCoeff(), 1e-12});
      const double ratio = (sol.primal_residual / sp) /
                           std::max(sol.dual_residual / sd, 1e-16);
      const double rho_cand =
          std::clamp(rho * std::sqrt(ratio), 1e-6, 1e6);
      if (rho_cand > 5.0 * rho || rho_cand < rho / 5.0) {
        rho = rho_cand;
        kkt_local.compute(P_ + sigma * Mat::Identity(n, n) +
                          rho * A_.transpose() * A_);
        kkt = &kkt_local;
      }
    }
  }
  sol.status = QpStatus::MaxIterations;
  // A stalled primal residual with a converged dual is the practical
  // infeasibility signal for this embedded use.
  if (sol.primal_residual > 1e-3 && sol.dual_residual <= 1e-4) {
    sol.status = QpStatus::PrimalInfeasible;
  }
  sol.x = x;
  sol.y = y;
  return sol;
}

QpSolution solve_qp(const QpProblem& p, double tol, int max_iter) {
  p.validate();
  QpSettings s;
  s.tol = tol;
  s.max_iter = max_iter;
  QpWorkspace ws(p.P, p.A, s);
  return ws.solve(p.q, p.l, p.u);
}

}  // namespace ucmpc
