#include "ucmpc/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace ucmpc {

double inf_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

namespace {

// Pade-13 coefficients (Higham 2005).
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

Mat expm_pade13(const Mat& A) {
  const Eigen::Index n = A.rows();
  const Mat I = Mat::Identity(n, n);
  const Mat A2 = A * A;
  const Mat A4 = A2 * A2;
  const Mat A6 = A4 * A2;
  const auto& b = kPade13;
  Mat u = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
               b[5] * A4 + b[3] * A2 + b[1] * I);
  Mat v = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 +
          b[2] * A2 + b[0] * I;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Mat expm(const Mat& A, double t) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("expm: matrix must be square");
  }
  if (!A.allFinite() || !std::isfinite(t)) {
    throw std::invalid_argument("expm: non-finite input");
  }
  const Eigen::Index n = A.rows();
  if (n == 0) return Mat(0, 0);
  Mat At = A * t;
  const double norm1 = At.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    At /= std::pow(2.0, squarings);
  }
  Mat E = expm_pade13(At);
  for (int i = 0; i < squarings; ++i) E = E * E;
  return E;
}

double spectral_abscissa(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Mat& A, double margin) {
  return A.rows() == A.cols() && A.allFinite() &&
         spectral_abscissa(A) < -margin;
}

void require_hurwitz(const Mat& A, const char* who, double margin) {
  if (!is_hurwitz(A, margin)) {
    throw std::invalid_argument(std::string(who) +
                                ": matrix is not Hurwitz (margin 1e-9)");
  }
}

DecayEnvelope decay_envelope(const Mat& A) {
  require_hurwitz(A, "decay_envelope");
  const Eigen::Index n = A.rows();
  // Vectorized Lyapunov solve: (I (x) A^T + A^T (x) I) vec(P) = -vec(I).
  Mat K = Mat::Zero(n * n, n * n);
  const Mat At = A.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    K.block(i * n, i * n, n, n) += At;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        K(i * n + j, k * n + j) += At(i, k);
      }
    }
  }
  Vec rhs = Vec::Zero(n * n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i * n + i) = -1.0;
  Vec p = K.partialPivLu().solve(rhs);
  Mat P = Eigen::Map<Mat>(p.data(), n, n);
  P = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) {
    throw std::runtime_error("decay_envelope: Lyapunov solution not PD");
  }
  return DecayEnvelope{std::sqrt(hi / lo), 1.0 / (2.0 * hi)};
}

}  // namespace ucmpc
