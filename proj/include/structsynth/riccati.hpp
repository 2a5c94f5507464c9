#pragma once

#include <vector>

#include "structsynth/sysmodel.hpp"

namespace structsynth {

struct LqrResult {
  GainSchedule gains;
  double h2_value = 0.0;
  /// Set when some B^T V B was singular and a pseudo-inverse was used.
  bool used_pseudo_inverse = false;
};

/// Finite-horizon LQR with stage cost x^T x and no control penalty.
LqrResult lqr_h2_opt(const SystemModel& sys);

/// Result of the soft-constrained LQ game with cost
/// sum_t x_t^T x_t - gamma^2 sum_t w_t^T w_t.
struct GameCertificate {
  double gamma = 0.0;
  /// V_1..V_N; entries after a failed stage are left empty.
  std::vector<Matrix> value_matrices;
  bool feasible = false;
  /// Stage at which gamma^2 I - D_t^T V_{t+1} D_t failed to be positive
  /// definite, or -1.
  int failed_stage = -1;
  GainSchedule gains;
  bool used_pseudo_inverse = false;
};

/// Backward minimax Riccati recursion at a fixed gamma. The w_0 stage
/// (x_1 = D_0 w_0, no control) is the last step checked.
GameCertificate lq_game_feasible(const SystemModel& sys, double gamma);

struct HinfOptResult {
  GainSchedule gains;
  double critical_gamma = 0.0;
  int bisection_steps = 0;
};

/// Bisection on gamma for the smallest feasible attenuation level; the gains
/// are taken from the game at (1 + tolerance) * critical gamma.
HinfOptResult hinf_opt(const SystemModel& sys, double bisection_tolerance = 1e-6);

}  // namespace structsynth
