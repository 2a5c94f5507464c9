#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here reuses the library's SVD, lifted-map builders or gradients.

#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "structsynth/lifted.hpp"
#include "structsynth/sysmodel.hpp"

namespace oracle {

using structsynth::GainSchedule;
using structsynth::Matrix;
using structsynth::SystemModel;
using structsynth::Vector;

inline Matrix gaussian(std::mt19937_64& rng, int rows, int cols, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

/// Well-conditioned D: identity plus a small perturbation.
inline SystemModel random_system(std::mt19937_64& rng, int n, int nu, int N, double a_sd = 0.7) {
  std::vector<Matrix> A, B, D;
  for (int t = 1; t < N; ++t) {
    A.push_back(gaussian(rng, n, n, a_sd));
    B.push_back(gaussian(rng, n, nu));
  }
  for (int t = 0; t < N; ++t) D.push_back(Matrix::Identity(n, n) + gaussian(rng, n, n, 0.25));
  return SystemModel(n, nu, A, B, D);
}

inline GainSchedule random_gains(std::mt19937_64& rng, const SystemModel& sys, double sd = 0.5) {
  std::vector<Matrix> K;
  for (int t = 1; t < sys.horizon(); ++t) K.push_back(gaussian(rng, sys.input_dim(), sys.state_dim(), sd));
  return GainSchedule(K);
}

/// Disturbance-to-state map assembled column by column from impulse responses
/// of the closed-loop recursion.
inline Matrix forward_by_simulation(const SystemModel& sys, const GainSchedule& gains) {
  const int n = sys.state_dim();
  const int N = sys.horizon();
  Matrix out = Matrix::Zero(n * N, n * N);
  for (int col = 0; col < n * N; ++col) {
    const int s = col / n;  // disturbance time
    Vector w = Vector::Zero(n);
    w(col % n) = 1.0;
    Vector x = Vector::Zero(n);
    for (int t = 0; t < N; ++t) {
      // x_{t+1} = (A_t + B_t K_t) x_t + D_t w_t, with x_1 = D_0 w_0.
      Vector next = Vector::Zero(n);
      if (t >= 1) next = (sys.A(t) + sys.B(t) * gains.K(t)) * x;
      if (t == s) next += sys.D(t) * w;
      x = next;
      out.block(t * n, col, n, 1) = x;
    }
  }
  return out;
}

inline Vector jacobi_singular_values(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline double sigma_max(const Matrix& m) { return jacobi_singular_values(m)(0); }

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double rel_error(const Matrix& a, const Matrix& b) {
  const double denom = std::max(a.norm(), b.norm());
  return denom == 0.0 ? 0.0 : (a - b).norm() / denom;
}

/// Central differences with step h in every gain entry.
inline std::vector<Matrix> fd_gradient(const std::function<double(const GainSchedule&)>& f,
                                       const GainSchedule& at, double h) {
  std::vector<Matrix> g;
  for (int t = 1; t <= at.size(); ++t) {
    Matrix gt = Matrix::Zero(at.K(t).rows(), at.K(t).cols());
    for (Eigen::Index i = 0; i < gt.rows(); ++i)
      for (Eigen::Index j = 0; j < gt.cols(); ++j) {
        GainSchedule plus = at, minus = at;
        plus.K(t)(i, j) += h;
        minus.K(t)(i, j) -= h;
        gt(i, j) = (f(plus) - f(minus)) / (2.0 * h);
      }
    g.push_back(gt);
  }
  return g;
}

inline double stacked_rel_error(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double num = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    num += (a[t] - b[t]).squaredNorm();
    na += a[t].squaredNorm();
    nb += b[t].squaredNorm();
  }
  const double denom = std::sqrt(std::max(na, nb));
  return denom == 0.0 ? 0.0 : std::sqrt(num) / denom;
}

/// Scalar systems x_{t+1} = a_t x_t + b_t u_t + d_t w_t with a time-invariant
/// gain k: the value of f over a uniform grid, plus the best point.
struct GridOptimum {
  double k = 0.0;
  double value = 0.0;
};

inline GridOptimum grid_minimize(const std::function<double(double)>& f, double lo, double hi,
                                 int points) {
  GridOptimum best{lo, f(lo)};
  for (int i = 1; i < points; ++i) {
    const double k = lo + (hi - lo) * i / (points - 1);
    const double v = f(k);
    if (v < best.value) best = {k, v};
  }
  return best;
}

/// Golden-section refinement of a 1-D minimizer bracketed by [lo, hi].
inline GridOptimum golden_refine(const std::function<double(double)>& f, double lo, double hi,
                                 int iterations = 200) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double k = (a + b) / 2.0;
  return {k, f(k)};
}

inline GridOptimum scalar_minimize(const std::function<double(double)>& f, double lo, double hi,
                                   int points) {
  const GridOptimum coarse = grid_minimize(f, lo, hi, points);
  const double step = (hi - lo) / (points - 1);
  GridOptimum fine = golden_refine(f, coarse.k - step, coarse.k + step);
  return fine.value < coarse.value ? fine : coarse;
}

}  // namespace oracle
