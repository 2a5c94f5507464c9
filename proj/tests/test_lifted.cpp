#include <Eigen/LU>

#include "doctest.h"
#include "oracles.hpp"
#include "structsynth/lifted.hpp"

using namespace structsynth;

TEST_SUITE("lifted") {

TEST_CASE("scalar unit closed loop gives the all-ones lower triangle") {
  const SystemModel sys = SystemModel::time_invariant(Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                                      Matrix::Ones(1, 1), 3);
  const LiftedMap A = build_forward(sys, GainSchedule::zeros(sys));
  Matrix expected = Matrix::Zero(3, 3);
  expected.triangularView<Eigen::Lower>().setOnes();
  CHECK((A.dense() - expected).norm() == 0.0);
  Matrix F(3, 3);
  F << 1, 0, 0, -1, 1, 0, 0, -1, 1;
  CHECK((build_inverse(sys, GainSchedule::zeros(sys)).dense() - F).norm() == 0.0);
}

TEST_CASE("forward map matches impulse simulation and inverts F") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4, nu = 1 + trial % 3, N = 1 + trial % 7;
    const SystemModel sys = oracle::random_system(rng, n, nu, N);
    const GainSchedule K = oracle::random_gains(rng, sys);
    const Matrix A = build_forward(sys, K).dense();
    const Matrix sim = oracle::forward_by_simulation(sys, K);
    CHECK(oracle::rel_error(A, sim) < 1e-12);
    const Matrix F = build_inverse(sys, K).dense();
    const Matrix I = Matrix::Identity(n * N, n * N);
    CHECK((F * A - I).norm() / I.norm() < 1e-10);
    CHECK((A * F - I).norm() / I.norm() < 1e-10);
  }
}

TEST_CASE("inverse map is block bidiagonal and affine in the gains") {
  std::mt19937_64 rng(12);
  const SystemModel sys = oracle::random_system(rng, 3, 2, 5);
  const GainSchedule K1 = oracle::random_gains(rng, sys);
  const GainSchedule K2 = oracle::random_gains(rng, sys);
  const InverseLiftedMap F = build_inverse(sys, K1);
  const Matrix dense = F.dense();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (j != i && j != i - 1) CHECK(dense.block(i * 3, j * 3, 3, 3).norm() == 0.0);
  for (int t = 0; t < 5; ++t) CHECK((F.diagonal(t) - sys.D(t).inverse()).norm() < 1e-12);
  for (int t = 1; t < 5; ++t) {
    const Matrix expected = -sys.D(t).inverse() * sys.A(t) - sys.D(t).inverse() * sys.B(t) * K1.K(t);
    CHECK((F.subdiagonal(t) - expected).norm() < 1e-12);
  }
  const double a = 0.3;
  const Matrix mix = build_inverse(sys, a * K1 + (1.0 - a) * K2).dense();
  const Matrix affine = a * dense + (1.0 - a) * build_inverse(sys, K2).dense();
  CHECK((mix - affine).norm() < 1e-12);
}

TEST_CASE("apply agrees with dense products") {
  std::mt19937_64 rng(13);
  const SystemModel sys = oracle::random_system(rng, 2, 2, 6);
  const GainSchedule K = oracle::random_gains(rng, sys);
  const InverseLiftedMap F = build_inverse(sys, K);
  const Vector x = oracle::gaussian(rng, 12, 1);
  CHECK((F.apply(x) - F.dense() * x).norm() < 1e-12);
  const LiftedMap A = build_forward(sys, K);
  CHECK((F.apply(A.apply(x)) - x).norm() < 1e-10 * x.norm());
}

TEST_CASE("simulation equals the lifted map applied to stacked disturbances") {
  std::mt19937_64 rng(14);
  const SystemModel sys = oracle::random_system(rng, 3, 1, 4);
  const GainSchedule K = oracle::random_gains(rng, sys);
  std::vector<Vector> w;
  for (int t = 0; t < 4; ++t) w.push_back(oracle::gaussian(rng, 3, 1));
  const Trajectory traj = simulate(sys, K, w);
  CHECK((traj.stacked_states() - build_forward(sys, K).apply(traj.stacked_disturbances())).norm() < 1e-12);
  CHECK(Trajectory::unstack(traj.stacked_states(), 3).size() == 4);
  CHECK_THROWS_AS(simulate(sys, K, {w[0]}), ModelError);
}

TEST_CASE("determinant is independent of the gains") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const SystemModel sys = oracle::random_system(rng, 1 + trial % 3, 2, 2 + trial % 4);
    double expected = 1.0;
    for (int t = 0; t < sys.horizon(); ++t) expected /= sys.D(t).determinant();
    for (int k = 0; k < 5; ++k) {
      const InverseLiftedMap F = build_inverse(sys, oracle::random_gains(rng, sys, 2.0));
      CHECK(oracle::rel_error(determinant_invariant(F), expected) < 1e-12);
      CHECK(oracle::rel_error(F.dense().partialPivLu().determinant(), expected) < 1e-9);
    }
  }
}

TEST_CASE("horizon one has no gains and F = D0^-1") {
  const Matrix D = 2.0 * Matrix::Identity(2, 2);
  const SystemModel sys(2, 1, {}, {}, {D});
  const GainSchedule K = GainSchedule::zeros(sys);
  CHECK(K.size() == 0);
  CHECK((build_inverse(sys, K).dense() - 0.5 * Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK((build_forward(sys, K).dense() - D).norm() == 0.0);
}

}  // TEST_SUITE
