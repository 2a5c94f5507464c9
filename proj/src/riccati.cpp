#include "structsynth/riccati.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "structsynth/specfun.hpp"

namespace structsynth {

namespace {

/// Minimizer of (A x + B u)^T M (A x + B u) over u = K x, i.e.
/// K = -(B^T M B)^+ B^T M A. Sets `pinv` when B^T M B is rank deficient.
Matrix minimizing_gain(const Matrix& A, const Matrix& B, const Matrix& M, bool& pinv) {
  const Matrix H = B.transpose() * M * B;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(H);
  if (cod.rank() < H.rows()) pinv = true;
  return -cod.solve(B.transpose() * M * A);
}

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

bool positive_definite_margin(const Matrix& W, double margin) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(W, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0) > margin;
}

}  // namespace

LqrResult lqr_h2_opt(const SystemModel& sys) {
  const int n = sys.state_dim();
  const int N = sys.horizon();
  LqrResult out;
  std::vector<Matrix> K(static_cast<std::size_t>(N - 1));
  Matrix V = Matrix::Identity(n, n);
  for (int t = N - 1; t >= 1; --t) {
    Matrix Kt = minimizing_gain(sys.A(t), sys.B(t), V, out.used_pseudo_inverse);
    const Matrix closed = sys.A(t) + sys.B(t) * Kt;
    V = symmetrize(Matrix::Identity(n, n) + closed.transpose() * V * closed);
    K[static_cast<std::size_t>(t - 1)] = std::move(Kt);
  }
  out.gains = GainSchedule(std::move(K));
  out.h2_value = h2_norm(sys, out.gains);
  return out;
}

GameCertificate lq_game_feasible(const SystemModel& sys, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("lq_game_feasible: gamma must be positive");
  const int n = sys.state_dim();
  const int N = sys.horizon();
  const double g2 = gamma * gamma;
  const double margin = 1e-10 * g2;

  GameCertificate cert;
  cert.gamma = gamma;
  cert.value_matrices.assign(static_cast<std::size_t>(N), Matrix());
  std::vector<Matrix> K(static_cast<std::size_t>(N - 1),
                        Matrix::Zero(sys.input_dim(), n));

  Matrix V = Matrix::Identity(n, n);
  cert.value_matrices[static_cast<std::size_t>(N - 1)] = V;
  for (int t = N - 1; t >= 1; --t) {
    const Matrix& D = sys.D(t);
    const Matrix W = symmetrize(g2 * Matrix::Identity(n, n) - D.transpose() * V * D);
    if (!positive_definite_margin(W, margin)) {
      cert.failed_stage = t;
      cert.gains = GainSchedule(std::move(K));
      return cert;
    }
    // Adversary's best response folded in: z^T M z = max_w (z + D w)^T V (z + D w) - g2 w^T w.
    const Matrix VD = V * D;
    const Matrix M = symmetrize(V + VD * W.llt().solve(VD.transpose()));
    Matrix Kt = minimizing_gain(sys.A(t), sys.B(t), M, cert.used_pseudo_inverse);
    const Matrix closed = sys.A(t) + sys.B(t) * Kt;
    V = symmetrize(Matrix::Identity(n, n) + closed.transpose() * M * closed);
    cert.value_matrices[static_cast<std::size_t>(t - 1)] = V;
    K[static_cast<std::size_t>(t - 1)] = std::move(Kt);
  }
  cert.gains = GainSchedule(std::move(K));

  const Matrix& D0 = sys.D(0);
  const Matrix W0 = symmetrize(g2 * Matrix::Identity(n, n) - D0.transpose() * V * D0);
  if (!positive_definite_margin(W0, margin)) {
    cert.failed_stage = 0;
    return cert;
  }
  cert.feasible = true;
  return cert;
}

HinfOptResult hinf_opt(const SystemModel& sys, double bisection_tolerance) {
  if (!(bisection_tolerance > 0.0))
    throw std::invalid_argument("hinf_opt: tolerance must be positive");
  HinfOptResult out;
  double lo = 0.0;
  double hi = 1.0;
  const double cap = std::ldexp(1.0, 60);
  while (!lq_game_feasible(sys, hi).feasible) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) throw std::runtime_error("hinf_opt: no feasible gamma below 2^60");
  }
  while (hi - lo > bisection_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (lq_game_feasible(sys, mid).feasible)
      hi = mid;
    else
      lo = mid;
    ++out.bisection_steps;
  }
  out.critical_gamma = hi;
  out.gains = lq_game_feasible(sys, (1.0 + bisection_tolerance) * hi).gains;
  return out;
}

}  // namespace structsynth
