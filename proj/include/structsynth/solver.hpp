#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "structsynth/specfun.hpp"
#include "structsynth/sysmodel.hpp"

namespace structsynth {

/// Raised when the objective or gradient is non-finite at an iterate.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, GainSchedule iterate)
      : std::runtime_error(what), iterate_(std::move(iterate)) {}
  const GainSchedule& iterate() const { return iterate_; }

 private:
  GainSchedule iterate_;
};

struct SolveOptions {
  int max_iterations = 500;
  /// Stop when the infinity norm of the gradient over free coordinates drops below this.
  double gradient_tolerance = 1e-6;
  /// Stop when an accepted step lowers the objective by less than this fraction.
  double progress_tolerance = 1e-14;
  int memory = 10;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
  /// Defaults to K = 0.
  std::optional<GainSchedule> init;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  /// Optional map back onto a convex feasible set, applied after every
  /// accepted step. Heuristic for nonsmooth objectives.
  std::function<GainSchedule(const GainSchedule&)> projection;

  void validate() const;
};

enum class Termination {
  Converged,
  MaxIterations,
  LineSearchFailed,
  NoProgress,
  NoFreeVariables,
  TimeLimit,
};

std::string to_string(Termination t);

struct SolveReport {
  ObjectiveSpec objective;
  GainSchedule gains;
  /// Objective at the initial point followed by one entry per accepted step.
  std::vector<double> trace;
  int iterations = 0;
  double seconds = 0.0;
  Termination termination = Termination::MaxIterations;
  int nonsmooth_count = 0;
  double final_value = 0.0;
  SpectrumReport spectrum;  // of F at the returned gains
};

/// Mapping between gain schedules and the vector of free coordinates: masked
/// entries are dropped and every tie group contributes one block.
class FreeParameterization {
 public:
  FreeParameterization(const SystemModel& sys, const ConstraintSet& constraints);

  int size() const { return static_cast<int>(entries_.size()); }
  Vector to_vector(const GainSchedule& gains) const;
  GainSchedule to_gains(const Vector& theta) const;
  /// Sums per-stage gradients over each tie group's free entries.
  Vector reduce_gradient(const std::vector<Matrix>& per_stage) const;

 private:
  struct Entry {
    int group;
    int row;
    int col;
  };
  std::vector<std::vector<int>> groups_;
  std::vector<Entry> entries_;
  int stages_;
  int rows_;
  int cols_;
};

/// L-BFGS with Armijo backtracking over the free coordinates of `constraints`.
SolveReport minimize(const SystemModel& sys, const ObjectiveSpec& obj,
                     const ConstraintSet& constraints, const SolveOptions& opts = {});

/// Convex surrogate synthesis: spectral norm of F for H2, Ky-Fan(nN-1) for
/// H-infinity, both scaled by 1/(nN).
ObjectiveSpec con_objective(const SystemModel& sys, ExactNorm target);
SolveReport synthesize_con(const SystemModel& sys, const ConstraintSet& constraints,
                           ExactNorm target, const SolveOptions& opts = {});

/// Direct minimization of the exact finite-horizon norm.
SolveReport synthesize_ncon(const SystemModel& sys, const ConstraintSet& constraints,
                            ExactNorm target, const SolveOptions& opts = {});

}  // namespace structsynth
