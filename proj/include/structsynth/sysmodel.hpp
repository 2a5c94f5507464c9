#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace structsynth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a model, gain schedule or constraint set violates its invariants.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Finite-horizon discrete-time linear system
///
///   x_1     = D_0 w_0
///   x_{t+1} = A_t x_t + B_t u_t + D_t w_t,   t = 1..N-1
///
/// All accessors take the physical time index: A(t), B(t) for t in [1, N-1]
/// and D(t) for t in [0, N-1]. Every D_t must be square and invertible; the
/// LU factors of each D_t are computed once at construction.
class SystemModel {
 public:
  SystemModel(int state_dim, int input_dim, std::vector<Matrix> A,
              std::vector<Matrix> B, std::vector<Matrix> D);

  /// Same (A, B, D) at every stage.
  static SystemModel time_invariant(const Matrix& A, const Matrix& B,
                                    const Matrix& D, int horizon);

  int horizon() const { return horizon_; }
  int state_dim() const { return state_dim_; }
  int input_dim() const { return input_dim_; }
  /// Size nN of the stacked trajectory.
  int lifted_dim() const { return state_dim_ * horizon_; }

  const Matrix& A(int t) const;
  const Matrix& B(int t) const;
  const Matrix& D(int t) const;
  const Matrix& D_inverse(int t) const;
  double D_determinant(int t) const;

  /// Sum over t of log|det D_t|.
  double log_abs_det_D() const;

  const std::vector<Matrix>& A_sequence() const { return A_; }
  const std::vector<Matrix>& B_sequence() const { return B_; }
  const std::vector<Matrix>& D_sequence() const { return D_; }

 private:
  int horizon_;
  int state_dim_;
  int input_dim_;
  std::vector<Matrix> A_;
  std::vector<Matrix> B_;
  std::vector<Matrix> D_;
  std::vector<Matrix> D_inv_;
  std::vector<double> D_det_;
};

/// Feedback gains K_1..K_{N-1}, u_t = K_t x_t.
class GainSchedule {
 public:
  GainSchedule() = default;
  explicit GainSchedule(std::vector<Matrix> K) : K_(std::move(K)) {}

  static GainSchedule zeros(const SystemModel& sys);
  /// K_t = K for every t.
  static GainSchedule constant(const SystemModel& sys, const Matrix& K);

  /// Number of stages N-1.
  int size() const { return static_cast<int>(K_.size()); }
  const Matrix& K(int t) const;
  Matrix& K(int t);
  const std::vector<Matrix>& sequence() const { return K_; }

  /// Throws ModelError unless shapes conform to sys and all entries are finite.
  void validate(const SystemModel& sys) const;

  double squared_norm() const;

  GainSchedule operator+(const GainSchedule& other) const;
  GainSchedule operator-(const GainSchedule& other) const;
  GainSchedule operator*(double s) const;

 private:
  std::vector<Matrix> K_;
};

inline GainSchedule operator*(double s, const GainSchedule& g) { return g * s; }

/// Sparsity masks (true = free entry) and an optional partition of the time
/// indices 1..N-1 into groups that share one gain matrix.
struct ConstraintSet {
  std::vector<BoolMatrix> masks;
  std::optional<std::vector<std::vector<int>>> tie_schedule;

  /// All entries free; tied = one shared gain across time.
  static ConstraintSet unconstrained(const SystemModel& sys, bool tied = false);
  static ConstraintSet from_mask(const SystemModel& sys, const BoolMatrix& mask,
                                 bool tied);

  void validate(const SystemModel& sys) const;

  /// The tie groups, or singleton groups when no tie schedule is set.
  std::vector<std::vector<int>> groups(int num_stages) const;

  /// Zeroes pinned entries and averages gains across each tie group.
  GainSchedule project(const GainSchedule& gains) const;

  /// True when every pinned entry is exactly zero and tied stages agree.
  bool is_feasible(const GainSchedule& gains) const;
};

/// States x_1..x_N and disturbances w_0..w_{N-1}.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<Vector> x, std::vector<Vector> w)
      : x_(std::move(x)), w_(std::move(w)) {}

  const Vector& x(int t) const { return x_.at(static_cast<std::size_t>(t - 1)); }
  const Vector& w(int t) const { return w_.at(static_cast<std::size_t>(t)); }
  const std::vector<Vector>& states() const { return x_; }
  const std::vector<Vector>& disturbances() const { return w_; }

  Vector stacked_states() const;
  Vector stacked_disturbances() const;

  static std::vector<Vector> unstack(const Vector& stacked, int block);

 private:
  std::vector<Vector> x_;
  std::vector<Vector> w_;
};

/// A_t + B_t K_t.
Matrix closed_loop(const SystemModel& sys, const GainSchedule& gains, int t);

/// State augmentation that turns a control penalty sum ||R_t u_t||^2 into
/// part of the trajectory energy. The augmented state is (x_t, x~_t) with
/// x~_{t+1} = R_t u_t + gamma w~_t, so D-bar stays invertible for gamma > 0.
SystemModel augment_control_cost(const SystemModel& sys,
                                 const std::vector<Matrix>& R, double gamma);

/// Lifts a gain on the original state to the control-cost augmented state
/// (zero gain on the auxiliary block).
GainSchedule lift_gains_control_cost(const GainSchedule& gains, int aux_dim);

/// Output-feedback composition K~_t = K_t blockdiag(C_t, ..., C_{t-k+1}).
/// Measurement indices before t = 1 reuse C_1.
class OutputFeedbackMap {
 public:
  OutputFeedbackMap(std::vector<Matrix> C, int window, int input_dim);

  int window() const { return window_; }
  int measurement_dim() const { return measurement_dim_; }
  int state_dim() const { return state_dim_; }

  /// blockdiag(C_t, ..., C_{t-k+1}), size (k m) x (k n).
  Matrix stacked_measurement(int t) const;

  /// Maps output gains (n_u x k m each) to augmented state gains (n_u x k n).
  GainSchedule compose(const GainSchedule& output_gains) const;

  /// Matrix M_t with vec(K~_t) = M_t vec(K_t) (column-major vec).
  Matrix linear_operator(int t) const;

 private:
  std::vector<Matrix> C_;
  int window_;
  int input_dim_;
  int measurement_dim_;
  int state_dim_;
};

std::pair<SystemModel, OutputFeedbackMap> augment_output_feedback(
    const SystemModel& sys, const std::vector<Matrix>& C, int window,
    double gamma);

/// Scalar: block (i, j) of A is eta_ij * I for i != j. Dense: every entry of
/// every block is drawn independently.
enum class CouplingForm { Scalar, Dense };

struct EnsembleParams {
  std::uint64_t seed = 0;
  int num_subsystems = 5;
  int subsystem_dim = 2;
  double coupling_variance = 10.0;
  double mask_fraction = 0.2;
  int horizon = 10;
  bool tied = true;
  CouplingForm coupling = CouplingForm::Scalar;
};

/// Randomly coupled subsystems with B = I, D = I and a time-invariant A. The
/// subsystem blocks A^i and the couplings eta_ij are i.i.d. N(0,
/// coupling_variance). The masks pin a uniformly random
/// mask_fraction of the off-diagonal gain entries; the diagonal stays free.
std::pair<SystemModel, ConstraintSet> generate_coupled_ensemble(
    const EnsembleParams& params);

}  // namespace structsynth
