#include "ucmpc/mpc.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ucmpc {

int MpcConfig::nodes() const {
  return static_cast<int>(std::round(horizon_s / dt_s));
}

void MpcConfig::validate() const {
  if (!(horizon_s > 0.0) || !(dt_s > 0.0) || !(update_period_s > 0.0)) {
    throw std::invalid_argument("MpcConfig: times must be positive");
  }
  if (nodes() < 1 || std::abs(horizon_s - nodes() * dt_s) > 1e-9) {
    throw std::invalid_argument("MpcConfig: dt must divide the horizon");
  }
  if (update_period_s > horizon_s + 1e-12) {
    throw std::invalid_argument("MpcConfig: update period exceeds horizon");
  }
  if (weight_tracking < 0 || weight_effort < 0 || weight_rate < 0 ||
      soft_penalty < 0) {
    throw std::invalid_argument("MpcConfig: negative weight");
  }
}

MpcController::MpcController(const Mat& A_model, const Mat& B,
                             const Mat& C_out, const Mat& K_con,
                             const HyperRect& X_c, const HyperRect& U_c,
                             const MpcConfig& cfg, bool soft_states)
    : A_model_(A_model),
      B_(B),
      C_out_(C_out),
      K_con_(K_con),
      X_c_(X_c),
      U_c_(U_c),
      cfg_(cfg),
      soft_(soft_states),
      n_(A_model.rows()),
      m_(B.cols()) {
  cfg_.validate();
  if (X_c_.dim() != n_ || U_c_.dim() != m_ || K_con_.rows() != m_ ||
      K_con_.cols() != n_) {
    throw std::invalid_argument("MpcController: set/gain dimension mismatch");
  }
  u_prev_ = Vec::Zero(m_);
  build_static();
}

void MpcController::build_static() {
  const int N = cfg_.nodes();
  const double dt = cfg_.dt_s;

  Mat aug = Mat::Zero(n_ + m_, n_ + m_);
  aug.topLeftCorner(n_, n_) = A_model_;
  aug.topRightCorner(n_, m_) = B_;
  const Mat E = expm(aug, dt);
  Ad_ = E.topLeftCorner(n_, n_);
  Bd_ = E.topRightCorner(n_, m_);

  a_pow_.assign(static_cast<std::size_t>(N) + 1, Mat());
  a_pow_[0] = Mat::Identity(n_, n_);
  for (int k = 1; k <= N; ++k) a_pow_[k] = Ad_ * a_pow_[k - 1];

  phi_ = Mat::Zero(N * n_, N * m_);
  for (int k = 1; k <= N; ++k) {
    for (int j = 0; j < k; ++j) {
      phi_.block((k - 1) * n_, j * m_, n_, m_) = a_pow_[k - 1 - j] * Bd_;
    }
  }

  nz_ = N * m_ + (soft_ ? N * n_ : 0);

  Mat CC = Mat::Zero(N * C_out_.rows(), N * n_);
  for (int k = 0; k < N; ++k) {
    CC.block(k * C_out_.rows(), k * n_, C_out_.rows(), n_) = C_out_;
  }
  track_map_ = CC * phi_;  // output prediction from inputs

  rate_map_ = Mat::Zero(N * m_, N * m_);
  for (int k = 0; k < N; ++k) {
    rate_map_.block(k * m_, k * m_, m_, m_) = Mat::Identity(m_, m_);
    if (k > 0) {
      rate_map_.block(k * m_, (k - 1) * m_, m_, m_) = -Mat::Identity(m_, m_);
    }
  }

  P_ = Mat::Zero(nz_, nz_);
  P_.topLeftCorner(N * m_, N * m_) =
      2.0 * cfg_.weight_tracking * dt * track_map_.transpose() * track_map_ +
      2.0 * cfg_.weight_effort * dt * Mat::Identity(N * m_, N * m_) +
      2.0 * cfg_.weight_rate / dt * rate_map_.transpose() * rate_map_;
  if (soft_) {
    P_.bottomRightCorner(N * n_, N * n_) =
        2.0 * cfg_.soft_penalty * Mat::Identity(N * n_, N * n_);
  }

  // Rows: inputs | states (hard: two-sided; soft: upper then lower with
  // slack columns) | slack positivity.
  const Eigen::Index rows = N * m_ + (soft_ ? 3 * N * n_ : N * n_);
  G_ = Mat::Zero(rows, nz_);
  Eigen::Index r = 0;
  for (int k = 0; k < N; ++k) {
    G_.block(r, k * m_, m_, m_) = Mat::Identity(m_, m_);
    if (k > 0) {
      G_.block(r, 0, m_, N * m_) += K_con_ * phi_.middleRows((k - 1) * n_, n_);
    }
    r += m_;
  }
  if (!soft_) {
    for (int k = 1; k <= N; ++k) {
      G_.block(r, 0, n_, N * m_) = phi_.middleRows((k - 1) * n_, n_);
      r += n_;
    }
  } else {
    for (int k = 1; k <= N; ++k) {  // x_k - s_k <= hi - free
      G_.block(r, 0, n_, N * m_) = phi_.middleRows((k - 1) * n_, n_);
      G_.block(r, N * m_ + (k - 1) * n_, n_, n_) = -Mat::Identity(n_, n_);
      r += n_;
    }
    for (int k = 1; k <= N; ++k) {  // x_k + s_k >= lo - free
      G_.block(r, 0, n_, N * m_) = phi_.middleRows((k - 1) * n_, n_);
      G_.block(r, N * m_ + (k - 1) * n_, n_, n_) = Mat::Identity(n_, n_);
      r += n_;
    }
    for (int k = 0; k < N; ++k) {  // s_k >= 0
      G_.block(r, N * m_ + k * n_, n_, n_) = Mat::Identity(n_, n_);
      r += n_;
    }
  }

  QpSettings s;
  s.tol = cfg_.qp_tol;
  s.max_iter = cfg_.qp_max_iter;
  ws_.emplace(P_, G_, s);
  warm_x_ = Vec::Zero(nz_);
  warm_y_ = Vec::Zero(rows);
}

QpProblem MpcController::transcribe(const Vec& x_now, const Mat& r_preview,
                                    const Vec& u_prev) const {
  const int N = cfg_.nodes();
  if (x_now.size() != n_ || r_preview.rows() != C_out_.rows() ||
      r_preview.cols() != N) {
    throw std::invalid_argument("transcribe: bad state/preview dimensions");
  }
  const double dt = cfg_.dt_s;
  QpProblem qp;
  qp.P = P_;
  qp.A = G_;

  Vec free(N * n_);
  for (int k = 1; k <= N; ++k) {
    free.segment((k - 1) * n_, n_) = a_pow_[k] * x_now;
  }
  Vec y_free(N * C_out_.rows());
  Vec rstack(N * C_out_.rows());
  for (int k = 0; k < N; ++k) {
    y_free.segment(k * C_out_.rows(), C_out_.rows()) =
        C_out_ * free.segment(k * n_, n_);
    rstack.segment(k * C_out_.rows(), C_out_.rows()) = r_preview.col(k);
  }

  qp.q = Vec::Zero(nz_);
  qp.q.head(N * m_) = 2.0 * cfg_.weight_tracking * dt *
                      track_map_.transpose() * (y_free - rstack);
  Vec uprev_stack = Vec::Zero(N * m_);
  uprev_stack.head(m_) = u_prev;
  qp.q.head(N * m_) -=
      2.0 * cfg_.weight_rate / dt * rate_map_.transpose() * uprev_stack;

  qp.l = Vec::Constant(G_.rows(), -kQpInf);
  qp.u = Vec::Constant(G_.rows(), kQpInf);
  Eigen::Index r = 0;
  for (int k = 0; k < N; ++k) {
    const Vec shift = K_con_ * (k > 0 ? Vec(free.segment((k - 1) * n_, n_))
                                      : x_now);
    qp.l.segment(r, m_) = U_c_.lower() - shift;
    qp.u.segment(r, m_) = U_c_.upper() - shift;
    r += m_;
  }
  if (!soft_) {
    for (int k = 1; k <= N; ++k) {
      qp.l.segment(r, n_) = X_c_.lower() - free.segment((k - 1) * n_, n_);
      qp.u.segment(r, n_) = X_c_.upper() - free.segment((k - 1) * n_, n_);
      r += n_;
    }
  } else {
    for (int k = 1; k <= N; ++k) {
      qp.u.segment(r, n_) = X_c_.upper() - free.segment((k - 1) * n_, n_);
      r += n_;
    }
    for (int k = 1; k <= N; ++k) {
      qp.l.segment(r, n_) = X_c_.lower() - free.segment((k - 1) * n_, n_);
      r += n_;
    }
    for (int k = 0; k < N; ++k) {
      qp.l.segment(r, n_) = Vec::Zero(n_);
      r += n_;
    }
  }
  return qp;
}

Vec MpcController::control(const Vec& x_now, const Mat& r_preview) {
  const int N = cfg_.nodes();
  QpProblem qp = transcribe(x_now, r_preview, u_prev_);
  auto sol = ws_->solve(qp.q, qp.l, qp.u, &warm_x_, &warm_y_);
  if (sol.status != QpStatus::Optimal) {
    if (soft_ && sol.primal_residual <= 1e-5) {
      // soft problems remain usable at slightly relaxed residuals
    } else {
      const Vec Ax = G_ * sol.x;
      Eigen::Index worst = 0;
      double v = 0.0;
      for (Eigen::Index i = 0; i < Ax.size(); ++i) {
        const double vi = std::max(qp.l(i) - Ax(i), Ax(i) - qp.u(i));
        if (vi > v) {
          v = vi;
          worst = i;
        }
      }
      std::ostringstream os;
      os << "MPC solve failed ("
         << (sol.status == QpStatus::PrimalInfeasible ? "infeasible"
                                                      : "iteration limit")
         << "), worst row " << worst;
      if (worst < N * m_) {
        os << " = input node " << worst / m_;
      } else {
        os << " = state node " << 1 + ((worst - N * m_) / n_) % N;
      }
      os << ", violation " << v;
      throw std::runtime_error(os.str());
    }
  }
  warm_x_ = sol.x;
  warm_y_ = sol.y;
  last_slack_ =
      soft_ ? sol.x.tail(N * n_).cwiseAbs().maxCoeff() : 0.0;
  u_prev_ = sol.x.head(m_);
  return u_prev_;
}

void MpcController::reset() {
  warm_x_.setZero();
  warm_y_.setZero();
  u_prev_.setZero();
  last_slack_ = 0.0;
}

Vec rpi_discrete_fixed_point(const Mat& A_d, const Vec& w_half, double tol) {
  const Mat Aa = A_d.cwiseAbs();
  // For a nonnegative matrix the Perron root is real, so the largest real
  // part is the spectral radius.
  if (spectral_abscissa(Aa) >= 1.0) {
    throw std::runtime_error(
        "rpi_discrete_fixed_point: |A_d| is not contractive (gamma >= 1)");
  }
  Vec h = w_half;
  double gamma = 0.0;
  for (int k = 0; k < 200000; ++k) {
    const Vec next = Aa * h + w_half;
    const double delta = (next - h).cwiseAbs().maxCoeff();
    gamma = h.cwiseAbs().maxCoeff() > 0.0
                ? std::min(1.0 - 1e-12, delta / std::max(1e-300, h.maxCoeff()))
                : 0.0;
    h = next;
    if (delta < tol) return h * (1.0 + tol / std::max(1e-12, 1.0 - gamma));
  }
  throw std::runtime_error("rpi_discrete_fixed_point: no convergence");
}

RpiSet rpi_outer_box(const PlantSpec& plant, const Vec& b_f, double b_w,
                     double dt, double tol) {
  if (!(dt > 0.0) || !(tol > 0.0)) {
    throw std::invalid_argument("rpi_outer_box: dt and tol must be positive");
  }
  const Mat Am = plant.A_m();
  require_hurwitz(Am, "rpi_outer_box");
  const auto n = Am.rows();
  const auto m = plant.B.cols();
  if (b_f.size() != m) {
    throw std::invalid_argument("rpi_outer_box: b_f channel count");
  }

  // Generator directions scaled so the driving signals live in unit boxes.
  Mat W(n, m + plant.B_u.cols());
  W.leftCols(m) = plant.B * b_f.asDiagonal();
  W.rightCols(plant.B_u.cols()) = plant.B_u * b_w;

  // One-step reach generators Wd = int_0^dt |e^{Am s} W| ds (entrywise).
  const int grid = 256;
  Mat Wd = Mat::Zero(n, W.cols());
  Mat prev = W.cwiseAbs();
  for (int i = 1; i <= grid; ++i) {
    const Mat cur = (expm(Am, dt * i / grid) * W).cwiseAbs();
    Wd += 0.5 * (prev + cur) * (dt / grid);
    prev = cur;
  }
  Wd *= 1.0 + 1e-6;

  // The reach set at sample instants is the zonotope sum of A_d^k Wd.
  // e^{Am s} commutes with A_d^k, so the intersample state e(t0+s) =
  // e^{Am s} e(t0) + (partial reach) has exact zonotope support accumulated
  // in the same pass, both for the coordinate boxes and for the K_x rows.
  const Mat Ad = expm(Am, dt);
  const int sgrid = 32;
  std::vector<Mat> Es(sgrid);
  std::vector<Mat> KEs(sgrid);
  for (int i = 0; i < sgrid; ++i) {
    Es[static_cast<std::size_t>(i)] = expm(Am, dt * (i + 1) / sgrid);
    KEs[static_cast<std::size_t>(i)] =
        plant.K_x * Es[static_cast<std::size_t>(i)];
  }
  // Partial reach box int_0^s |e^{Am r} W| dr on the coarse grid (entries
  // grow with s, so rounding the index up stays conservative).
  std::vector<Vec> wpart(sgrid, Vec::Zero(n));
  std::vector<Vec> kwpart(sgrid, Vec::Zero(plant.K_x.rows()));
  {
    Mat Wacc = Mat::Zero(n, W.cols());
    Mat prev2 = W.cwiseAbs();
    int coarse = 0;
    for (int i = 1; i <= grid; ++i) {
      const double s = dt * i / grid;
      const Mat cur = (expm(Am, s) * W).cwiseAbs();
      Wacc += 0.5 * (prev2 + cur) * (dt / grid);
      prev2 = cur;
      while (coarse < sgrid && dt * (coarse + 1) / sgrid <= s + 1e-15) {
        wpart[static_cast<std::size_t>(coarse)] = Wacc.rowwise().sum();
        kwpart[static_cast<std::size_t>(coarse)] =
            plant.K_x.cwiseAbs() * wpart[static_cast<std::size_t>(coarse)];
        ++coarse;
      }
    }
    for (; coarse < sgrid; ++coarse) {
      wpart[static_cast<std::size_t>(coarse)] = Wacc.rowwise().sum();
      kwpart[static_cast<std::size_t>(coarse)] =
          plant.K_x.cwiseAbs() * wpart[static_cast<std::size_t>(coarse)];
    }
  }

  Vec h = Vec::Zero(n);
  Vec kx_sup = Vec::Zero(plant.K_x.rows());
  std::vector<Vec> h_s(sgrid, Vec::Zero(n));
  std::vector<Vec> kx_s(sgrid, Vec::Zero(plant.K_x.rows()));
  Mat Mk = Mat::Identity(n, n);
  int iters = 0;
  const double stop = tol * 1e-3;
  double delta = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200000; ++k) {
    const Mat Gk = Mk * Wd;
    const Vec add = Gk.cwiseAbs().rowwise().sum();
    h += add;
    kx_sup += (plant.K_x * Gk).cwiseAbs().rowwise().sum();
    for (int i = 0; i < sgrid; ++i) {
      h_s[static_cast<std::size_t>(i)] +=
          (Es[static_cast<std::size_t>(i)] * Gk).cwiseAbs().rowwise().sum();
      kx_s[static_cast<std::size_t>(i)] +=
          (KEs[static_cast<std::size_t>(i)] * Gk).cwiseAbs().rowwise().sum();
    }
    Mk = Ad * Mk;
    delta = add.maxCoeff();
    iters = k + 1;
    if (delta < stop && k > 4) break;
  }
  if (!(delta < stop)) {
    throw std::runtime_error(
        "rpi_outer_box: reach accumulation did not contract (gamma >= 1)");
  }
  // Tail: for any direction d, sup over the full set is at most the K-term
  // support divided by (1 - gamma) with gamma = ||A_d^K||_inf < 1.
  const double gk = inf_norm(Mk);
  if (gk >= 1.0) {
    throw std::runtime_error("rpi_outer_box: sampled map not contractive");
  }
  const double inflate = 1.0 / (1.0 - gk);

  Vec h_cont = h;
  Vec kx_cont = kx_sup;
  for (int i = 0; i < sgrid; ++i) {
    h_cont = h_cont.cwiseMax(h_s[static_cast<std::size_t>(i)] +
                             wpart[static_cast<std::size_t>(i)] / inflate);
    kx_cont = kx_cont.cwiseMax(kx_s[static_cast<std::size_t>(i)] +
                               kwpart[static_cast<std::size_t>(i)] / inflate);
  }
  h_cont *= inflate;
  kx_cont *= inflate;

  RpiSet out;
  out.Z = HyperRect::symmetric(h_cont);
  out.KxZ = HyperRect::symmetric(kx_cont);
  out.K_x = plant.K_x;
  out.dt = dt;
  out.iterations = iters;
  return out;
}

MpcController make_controller(Variant v, const PlantSpec& plant,
                              const TighteningResult* tightening,
                              const RpiSet* rpi, const MpcConfig& cfg) {
  switch (v) {
    case Variant::UC: {
      if (!tightening) {
        throw std::invalid_argument("UC controller needs a TighteningResult");
      }
      return MpcController(plant.A_m(), plant.B, plant.C, plant.K_x,
                           tightening->X_n, tightening->U_n, cfg,
                           /*soft_states=*/false);
    }
    case Variant::Tube: {
      if (!rpi) throw std::invalid_argument("Tube controller needs an RpiSet");
      auto Xt = pontryagin_diff(plant.X, rpi->Z);
      auto Ut = pontryagin_diff(plant.U, rpi->KxZ);
      if (!Xt || !Ut) {
        throw std::runtime_error(
            "tube tightening empty: X-Z or U-KxZ has no interior");
      }
      return MpcController(plant.A_m(), plant.B, plant.C, plant.K_x, *Xt, *Ut,
                           cfg, /*soft_states=*/false);
    }
    case Variant::Vanilla:
      return MpcController(plant.A, plant.B, plant.C,
                           Mat::Zero(plant.B.cols(), plant.A.rows()), plant.X,
                           plant.U, cfg, /*soft_states=*/true);
  }
  throw std::logic_error("unknown variant");
}

std::string debug_dump(const QpProblem& p) {
  std::ostringstream os;
  os << "qp vars=" << p.vars() << " cons=" << p.cons() << "\nP=\n"
     << p.P << "\nq=\n"
     << p.q.transpose() << "\nA=\n"
     << p.A << "\nl=\n"
     << p.l.transpose() << "\nu=\n"
     << p.u.transpose() << "\n";
  return os.str();
}

}  // namespace ucmpc
