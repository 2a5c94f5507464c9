#include "structsynth/lifted.hpp"

#include <Eigen/LU>

namespace structsynth {

InverseLiftedMap::InverseLiftedMap(std::vector<Matrix> diagonal,
                                   std::vector<Matrix> subdiagonal)
    : diagonal_(std::move(diagonal)), subdiagonal_(std::move(subdiagonal)) {
  if (diagonal_.empty()) throw ModelError("inverse lifted map needs at least one block");
  if (subdiagonal_.size() + 1 != diagonal_.size())
    throw ModelError("inverse lifted map needs N-1 subdiagonal blocks");
}

Matrix InverseLiftedMap::dense() const {
  const int n = block_dim();
  Matrix out = Matrix::Zero(dim(), dim());
  for (int t = 0; t < horizon(); ++t) {
    out.block(t * n, t * n, n, n) = diagonal(t);
    if (t > 0) out.block(t * n, (t - 1) * n, n, n) = subdiagonal(t);
  }
  return out;
}

Vector InverseLiftedMap::apply(const Vector& x) const {
  const int n = block_dim();
  Vector w(dim());
  for (int t = 0; t < horizon(); ++t) {
    w.segment(t * n, n) = diagonal(t) * x.segment(t * n, n);
    if (t > 0) w.segment(t * n, n) += subdiagonal(t) * x.segment((t - 1) * n, n);
  }
  return w;
}

InverseLiftedMap build_inverse(const SystemModel& sys, const GainSchedule& gains) {
  gains.validate(sys);
  std::vector<Matrix> diagonal;
  std::vector<Matrix> subdiagonal;
  diagonal.reserve(static_cast<std::size_t>(sys.horizon()));
  for (int t = 0; t < sys.horizon(); ++t) {
    diagonal.push_back(sys.D_inverse(t));
    if (t > 0) subdiagonal.push_back(-sys.D_inverse(t) * closed_loop(sys, gains, t));
  }
  return InverseLiftedMap(std::move(diagonal), std::move(subdiagonal));
}

LiftedMap build_forward(const SystemModel& sys, const GainSchedule& gains) {
  gains.validate(sys);
  const int n = sys.state_dim();
  const int N = sys.horizon();
  Matrix out = Matrix::Zero(n * N, n * N);
  // Column block j is the response to w_j: D_j at row j, then propagate.
  for (int j = 0; j < N; ++j) {
    Matrix block = sys.D(j);
    out.block(j * n, j * n, n, n) = block;
    for (int i = j + 1; i < N; ++i) {
      block = closed_loop(sys, gains, i) * block;
      out.block(i * n, j * n, n, n) = block;
    }
  }
  return LiftedMap(std::move(out), n);
}

double determinant_invariant(const InverseLiftedMap& F) {
  double det = 1.0;
  for (int t = 0; t < F.horizon(); ++t) det *= F.diagonal(t).determinant();
  return det;
}

Trajectory simulate(const SystemModel& sys, const GainSchedule& gains,
                    const std::vector<Vector>& disturbances) {
  if (static_cast<int>(disturbances.size()) != sys.horizon())
    throw ModelError("simulate: need N disturbance vectors");
  for (const auto& w : disturbances)
    if (w.size() != sys.state_dim()) throw ModelError("simulate: disturbance has wrong size");
  gains.validate(sys);

  std::vector<Vector> x;
  x.reserve(disturbances.size());
  x.push_back(sys.D(0) * disturbances[0]);
  for (int t = 1; t < sys.horizon(); ++t)
    x.push_back(closed_loop(sys, gains, t) * x.back() +
                sys.D(t) * disturbances[static_cast<std::size_t>(t)]);
  return Trajectory(std::move(x), disturbances);
}

}  // namespace structsynth
