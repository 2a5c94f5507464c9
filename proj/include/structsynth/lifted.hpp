#pragma once

#include <vector>

#include "structsynth/sysmodel.hpp"

namespace structsynth {

/// F = A(K)^{-1}, stored by blocks. Block row r corresponds to w_r and block
/// column c to x_{c+1}:
///
///   F(0,0)   = D_0^{-1}
///   F(t,t)   = D_t^{-1}
///   F(t,t-1) = -D_t^{-1} (A_t + B_t K_t)      t = 1..N-1
///
/// Every other block is zero, and F is affine in K.
class InverseLiftedMap {
 public:
  InverseLiftedMap(std::vector<Matrix> diagonal, std::vector<Matrix> subdiagonal);

  int horizon() const { return static_cast<int>(diagonal_.size()); }
  int block_dim() const { return static_cast<int>(diagonal_.front().rows()); }
  int dim() const { return horizon() * block_dim(); }

  const Matrix& diagonal(int t) const { return diagonal_.at(static_cast<std::size_t>(t)); }
  /// Block (t, t-1), t = 1..N-1.
  const Matrix& subdiagonal(int t) const {
    return subdiagonal_.at(static_cast<std::size_t>(t - 1));
  }

  Matrix dense() const;
  /// w = F x on stacked vectors.
  Vector apply(const Vector& x) const;

 private:
  std::vector<Matrix> diagonal_;
  std::vector<Matrix> subdiagonal_;
};

/// A(K), lower block triangular: block (i, j) = A~_i ... A~_{j+1} D_j for
/// i > j and D_i on the diagonal (0-based block indices, row i is x_{i+1}).
class LiftedMap {
 public:
  explicit LiftedMap(Matrix dense, int block_dim) : dense_(std::move(dense)), block_(block_dim) {}

  int dim() const { return static_cast<int>(dense_.rows()); }
  int block_dim() const { return block_; }
  const Matrix& dense() const { return dense_; }
  auto block(int i, int j) const { return dense_.block(i * block_, j * block_, block_, block_); }
  Vector apply(const Vector& w) const { return dense_ * w; }

 private:
  Matrix dense_;
  int block_;
};

InverseLiftedMap build_inverse(const SystemModel& sys, const GainSchedule& gains);
LiftedMap build_forward(const SystemModel& sys, const GainSchedule& gains);

/// prod_t det(D_t^{-1}); equal to det F and independent of K.
double determinant_invariant(const InverseLiftedMap& F);

/// Runs the closed-loop recursion x_1 = D_0 w_0, x_{t+1} = A~_t x_t + D_t w_t.
Trajectory simulate(const SystemModel& sys, const GainSchedule& gains,
                    const std::vector<Vector>& disturbances);

}  // namespace structsynth
