#include "ucmpc/lti.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace ucmpc {

StateSpaceModel::StateSpaceModel(Mat a, Mat b, Mat c, Mat d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  validate();
}

StateSpaceModel::StateSpaceModel(Mat a, Mat b, Mat c)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
  D = Mat::Zero(C.rows(), B.cols());
  validate();
}

void StateSpaceModel::validate() const {
  if (A.rows() != A.cols() || B.rows() != A.rows() || C.cols() != A.rows() ||
      D.rows() != C.rows() || D.cols() != B.cols()) {
    throw std::invalid_argument("StateSpaceModel: inconsistent dimensions");
  }
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
    throw std::invalid_argument("StateSpaceModel: non-finite entries");
  }
}

Mat StateSpaceModel::impulse_at(double t) const {
  return C * expm(A, t) * B;
}

FilterBank::FilterBank(Vec k) : bandwidths(std::move(k)) {
  if ((bandwidths.array() <= 0.0).any()) {
    throw std::invalid_argument("FilterBank: bandwidths must be positive");
  }
}

StateSpaceModel FilterBank::lowpass() const {
  const Eigen::Index m = channels();
  Mat K = bandwidths.asDiagonal();
  return StateSpaceModel(-K, K, Mat::Identity(m, m), Mat::Zero(m, m));
}

StateSpaceModel FilterBank::complement() const {
  const Eigen::Index m = channels();
  Mat K = bandwidths.asDiagonal();
  return StateSpaceModel(-K, K, -Mat::Identity(m, m), Mat::Identity(m, m));
}

StateSpaceModel series(const StateSpaceModel& outer,
                       const StateSpaceModel& inner) {
  if (inner.outputs() != outer.inputs()) {
    throw std::invalid_argument("series: dimension mismatch");
  }
  const Eigen::Index n2 = outer.states(), n1 = inner.states();
  Mat A = Mat::Zero(n2 + n1, n2 + n1);
  A.topLeftCorner(n2, n2) = outer.A;
  A.topRightCorner(n2, n1) = outer.B * inner.C;
  A.bottomRightCorner(n1, n1) = inner.A;
  Mat B(n2 + n1, inner.inputs());
  B.topRows(n2) = outer.B * inner.D;
  B.bottomRows(n1) = inner.B;
  Mat C(outer.outputs(), n2 + n1);
  C.leftCols(n2) = outer.C;
  C.rightCols(n1) = outer.D * inner.C;
  return StateSpaceModel(A, B, C, outer.D * inner.D);
}

StateSpaceModel series_with_filter(const StateSpaceModel& sys,
                                   const FilterBank& filters,
                                   FilterMode mode) {
  if (filters.channels() != sys.inputs()) {
    throw std::invalid_argument(
        "series_with_filter: filter count must equal system input count");
  }
  return series(sys, mode == FilterMode::C ? filters.lowpass()
                                           : filters.complement());
}

StateSpaceModel filter_times_affine(const FilterBank& filters, const Mat& P,
                                    const Mat& Q) {
  const Eigen::Index m = filters.channels();
  if (P.rows() != m || Q.rows() != m || P.cols() != Q.cols()) {
    throw std::invalid_argument("filter_times_affine: dimension mismatch");
  }
  // C(s)(Ps + Q) = K P + K (sI + K)^{-1} (Q - K P), K = diag(bandwidths).
  Mat K = filters.bandwidths.asDiagonal();
  return StateSpaceModel(-K, Q - K * P, K, K * P);
}

StateSpaceModel make_hxm(const Mat& A_m, const Mat& B) {
  return StateSpaceModel(A_m, B, Mat::Identity(A_m.rows(), A_m.rows()));
}

StateSpaceModel make_s_resolvent(const Mat& A_m) {
  const Eigen::Index n = A_m.rows();
  return StateSpaceModel(A_m, Mat::Identity(n, n), A_m, Mat::Identity(n, n));
}

std::vector<Mat> impulse_response(const StateSpaceModel& sys, double dt,
                                  double horizon) {
  if (!(dt > 0.0)) throw std::invalid_argument("impulse_response: dt <= 0");
  require_hurwitz(sys.A, "impulse_response");
  const auto steps = static_cast<std::size_t>(std::floor(horizon / dt));
  std::vector<Mat> out;
  out.reserve(steps + 1);
  const Mat E = expm(sys.A, dt);
  Mat M = Mat::Identity(sys.states(), sys.states());
  out.push_back(sys.C * M * sys.B);
  for (std::size_t k = 0; k < steps; ++k) {
    M = E * M;
    out.push_back(sys.C * M * sys.B);
  }
  return out;
}

namespace {

// Adaptive Simpson with the usual Richardson acceptance test. |h| has kinks
// at zero crossings; the error estimate blows up there, which forces the
// subdivision the quadrature needs.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb,
                        double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double integrate_panel(const std::function<double(double)>& f, double a,
                       double b, double eps) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 44);
}

// Impulse responses can start at zero and spike well inside the horizon, so
// a single adaptive interval may sample past the transient and accept zero.
// Geometric panels from below the fastest time constant up to the horizon
// make every time scale visible before refinement starts.
double integrate_abs(const std::function<double(double)>& f, double horizon,
                     double fastest_scale, double eps) {
  const int panels = 48;
  const double t_min =
      std::max(std::min(0.01 * fastest_scale, horizon / 1e6), 1e-300);
  const double ratio = std::pow(horizon / t_min, 1.0 / (panels - 1));
  double total = 0.0;
  double left = 0.0;
  double right = t_min;
  const double eps_panel = eps / (panels + 1);
  for (int k = 0; k <= panels; ++k) {
    total += integrate_panel(f, left, right, eps_panel);
    left = right;
    right = (k == panels - 1) ? horizon : right * ratio;
    if (left >= horizon) break;
  }
  return total;
}

}  // namespace

L1NormResult l1_norm(const StateSpaceModel& sys, double tol, Exec mode) {
  if (!(tol > 0.0)) throw std::invalid_argument("l1_norm: tol <= 0");
  require_hurwitz(sys.A, "l1_norm");
  const Eigen::Index p = sys.outputs(), m = sys.inputs();

  // Certified tail: |h_ij(t)| <= ||C_i||_2 ||B_j||_2 sqrt(kappa(P)) e^{-l t},
  // truncate where the tail integral of every entry is below its budget.
  const DecayEnvelope env = decay_envelope(sys.A);
  const double eps_entry = 0.5 * tol / static_cast<double>(m);
  double horizon = 1.0;
  double amp_max = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      amp_max = std::max(amp_max, sys.C.row(i).norm() * env.m * sys.B.col(j).norm());
    }
  }
  if (amp_max > 0.0) {
    horizon = std::log(std::max(amp_max / (env.lambda * eps_entry), 2.0)) /
              env.lambda;
  }

  const double fastest = 1.0 / std::max(inf_norm(sys.A), 1e-12);
  std::vector<double> entry(static_cast<std::size_t>(p * m), 0.0);
  parallel_for(entry.size(), mode, [&](std::size_t idx) {
    const Eigen::Index i = static_cast<Eigen::Index>(idx) / m;
    const Eigen::Index j = static_cast<Eigen::Index>(idx) % m;
    const Vec ci = sys.C.row(i).transpose();
    const Vec bj = sys.B.col(j);
    auto h_abs = [&](double t) {
      return std::abs(ci.dot(expm(sys.A, t) * bj));
    };
    entry[idx] = integrate_abs(h_abs, horizon, fastest, eps_entry);
  });

  L1NormResult res;
  res.rows = Vec::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      s += entry[static_cast<std::size_t>(i * m + j)] + std::abs(sys.D(i, j));
    }
    res.rows(i) = s;
  }
  res.value = p == 0 ? 0.0 : res.rows.maxCoeff();
  return res;
}

double rho_in(const Mat& A_m, const HyperRect& X0, double tol) {
  if (X0.dim() != A_m.rows()) {
    throw std::invalid_argument("rho_in: dimension mismatch");
  }
  return l1_norm(make_s_resolvent(A_m), tol).value * X0.max_inf_norm();
}

}  // namespace ucmpc
