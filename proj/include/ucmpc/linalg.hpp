#ifndef UCMPC_LINALG_HPP_
#define UCMPC_LINALG_HPP_

#include <Eigen/Dense>

namespace ucmpc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Matrix exponential e^{A t} by Pade-13 approximation with scaling and
/// squaring. Relative accuracy close to machine precision for any square A.
Mat expm(const Mat& A, double t = 1.0);

/// Induced infinity norm (max absolute row sum).
double inf_norm(const Mat& A);

/// Largest real part over the spectrum of A.
double spectral_abscissa(const Mat& A);

/// True if all eigenvalues have real part < -margin.
bool is_hurwitz(const Mat& A, double margin = 1e-9);

/// Throws std::invalid_argument if A is not Hurwitz.
void require_hurwitz(const Mat& A, const char* who, double margin = 1e-9);

struct DecayEnvelope {
  double m = 0.0;       // amplitude, ||e^{At}||_2 <= m e^{-lambda t}
  double lambda = 0.0;  // certified decay rate
};

/// Certified exponential envelope for a Hurwitz matrix, from the Lyapunov
/// equation A^T P + P A = -I.
DecayEnvelope decay_envelope(const Mat& A);

}  // namespace ucmpc

#endif
