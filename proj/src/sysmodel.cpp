#include "structsynth/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace structsynth {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ModelError(message);
}

}  // namespace

SystemModel::SystemModel(int state_dim, int input_dim, std::vector<Matrix> A,
                         std::vector<Matrix> B, std::vector<Matrix> D)
    : horizon_(static_cast<int>(D.size())),
      state_dim_(state_dim),
      input_dim_(input_dim),
      A_(std::move(A)),
      B_(std::move(B)),
      D_(std::move(D)) {
  require(state_dim_ >= 1, "state dimension must be positive");
  require(input_dim_ >= 1, "input dimension must be positive");
  require(horizon_ >= 1, "horizon must be positive (need at least D_0)");
  require(static_cast<int>(A_.size()) == horizon_ - 1,
          "expected N-1 = " + std::to_string(horizon_ - 1) + " A matrices, got " +
              std::to_string(A_.size()));
  require(static_cast<int>(B_.size()) == horizon_ - 1,
          "expected N-1 = " + std::to_string(horizon_ - 1) + " B matrices, got " +
              std::to_string(B_.size()));

  const int n = state_dim_;
  for (std::size_t i = 0; i < A_.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    require(A_[i].rows() == n && A_[i].cols() == n,
            "A_" + std::to_string(t) + " has shape " + shape_of(A_[i]));
    require(B_[i].rows() == n && B_[i].cols() == input_dim_,
            "B_" + std::to_string(t) + " has shape " + shape_of(B_[i]));
    require(A_[i].allFinite() && B_[i].allFinite(),
            "non-finite entry at stage " + std::to_string(t));
  }

  D_inv_.reserve(D_.size());
  D_det_.reserve(D_.size());
  for (std::size_t t = 0; t < D_.size(); ++t) {
    const Matrix& Dt = D_[t];
    const std::string name = "D_" + std::to_string(t);
    require(Dt.rows() == n && Dt.cols() == n,
            name + " must be " + std::to_string(n) + "x" + std::to_string(n) +
                ", got " + shape_of(Dt));
    require(Dt.allFinite(), name + " has non-finite entries");
    Eigen::PartialPivLU<Matrix> lu(Dt);
    const double det = lu.determinant();
    const double scale = std::pow(Dt.norm(), n);
    require(std::abs(det) >= 1e-12 * scale && scale > 0.0, name + " is singular");
    require(lu.rcond() >= 1e-12, name + " is too ill-conditioned (rcond < 1e-12)");
    D_inv_.push_back(lu.inverse());
    D_det_.push_back(det);
  }
}

SystemModel SystemModel::time_invariant(const Matrix& A, const Matrix& B,
                                        const Matrix& D, int horizon) {
  require(horizon >= 1, "horizon must be positive");
  std::vector<Matrix> As(static_cast<std::size_t>(horizon - 1), A);
  std::vector<Matrix> Bs(static_cast<std::size_t>(horizon - 1), B);
  std::vector<Matrix> Ds(static_cast<std::size_t>(horizon), D);
  return SystemModel(static_cast<int>(A.rows()), static_cast<int>(B.cols()),
                     std::move(As), std::move(Bs), std::move(Ds));
}

const Matrix& SystemModel::A(int t) const {
  if (t < 1 || t > horizon_ - 1) throw std::out_of_range("A index out of range");
  return A_[static_cast<std::size_t>(t - 1)];
}

const Matrix& SystemModel::B(int t) const {
  if (t < 1 || t > horizon_ - 1) throw std::out_of_range("B index out of range");
  return B_[static_cast<std::size_t>(t - 1)];
}

const Matrix& SystemModel::D(int t) const {
  if (t < 0 || t > horizon_ - 1) throw std::out_of_range("D index out of range");
  return D_[static_cast<std::size_t>(t)];
}

const Matrix& SystemModel::D_inverse(int t) const {
  if (t < 0 || t > horizon_ - 1) throw std::out_of_range("D index out of range");
  return D_inv_[static_cast<std::size_t>(t)];
}

double SystemModel::D_determinant(int t) const {
  if (t < 0 || t > horizon_ - 1) throw std::out_of_range("D index out of range");
  return D_det_[static_cast<std::size_t>(t)];
}

double SystemModel::log_abs_det_D() const {
  double s = 0.0;
  for (double d : D_det_) s += std::log(std::abs(d));
  return s;
}

// ---------------------------------------------------------------------------

GainSchedule GainSchedule::zeros(const SystemModel& sys) {
  return constant(sys, Matrix::Zero(sys.input_dim(), sys.state_dim()));
}

GainSchedule GainSchedule::constant(const SystemModel& sys, const Matrix& K) {
  return GainSchedule(
      std::vector<Matrix>(static_cast<std::size_t>(sys.horizon() - 1), K));
}

const Matrix& GainSchedule::K(int t) const {
  if (t < 1 || t > size()) throw std::out_of_range("gain index out of range");
  return K_[static_cast<std::size_t>(t - 1)];
}

Matrix& GainSchedule::K(int t) {
  if (t < 1 || t > size()) throw std::out_of_range("gain index out of range");
  return K_[static_cast<std::size_t>(t - 1)];
}

void GainSchedule::validate(const SystemModel& sys) const {
  require(size() == sys.horizon() - 1,
          "expected " + std::to_string(sys.horizon() - 1) + " gain matrices, got " +
              std::to_string(size()));
  for (int t = 1; t <= size(); ++t) {
    const Matrix& k = K(t);
    require(k.rows() == sys.input_dim() && k.cols() == sys.state_dim(),
            "K_" + std::to_string(t) + " has shape " + shape_of(k));
    require(k.allFinite(), "K_" + std::to_string(t) + " has non-finite entries");
  }
}

double GainSchedule::squared_norm() const {
  double s = 0.0;
  for (const auto& k : K_) s += k.squaredNorm();
  return s;
}

GainSchedule GainSchedule::operator+(const GainSchedule& other) const {
  std::vector<Matrix> out(K_.size());
  for (std::size_t i = 0; i < K_.size(); ++i) out[i] = K_[i] + other.K_.at(i);
  return GainSchedule(std::move(out));
}

GainSchedule GainSchedule::operator-(const GainSchedule& other) const {
  std::vector<Matrix> out(K_.size());
  for (std::size_t i = 0; i < K_.size(); ++i) out[i] = K_[i] - other.K_.at(i);
  return GainSchedule(std::move(out));
}

GainSchedule GainSchedule::operator*(double s) const {
  std::vector<Matrix> out(K_.size());
  for (std::size_t i = 0; i < K_.size(); ++i) out[i] = s * K_[i];
  return GainSchedule(std::move(out));
}

// ---------------------------------------------------------------------------

ConstraintSet ConstraintSet::unconstrained(const SystemModel& sys, bool tied) {
  return from_mask(sys, BoolMatrix::Constant(sys.input_dim(), sys.state_dim(), true),
                   tied);
}

ConstraintSet ConstraintSet::from_mask(const SystemModel& sys, const BoolMatrix& mask,
                                       bool tied) {
  ConstraintSet c;
  c.masks.assign(static_cast<std::size_t>(sys.horizon() - 1), mask);
  if (tied && sys.horizon() > 1) {
    std::vector<int> all(static_cast<std::size_t>(sys.horizon() - 1));
    std::iota(all.begin(), all.end(), 1);
    c.tie_schedule = std::vector<std::vector<int>>{all};
  }
  return c;
}

void ConstraintSet::validate(const SystemModel& sys) const {
  const int stages = sys.horizon() - 1;
  require(static_cast<int>(masks.size()) == stages,
          "expected " + std::to_string(stages) + " masks, got " +
              std::to_string(masks.size()));
  for (std::size_t i = 0; i < masks.size(); ++i) {
    require(masks[i].rows() == sys.input_dim() && masks[i].cols() == sys.state_dim(),
            "mask " + std::to_string(i + 1) + " has wrong shape");
  }
  if (!tie_schedule) return;
  std::set<int> seen;
  for (const auto& group : *tie_schedule) {
    require(!group.empty(), "empty tie group");
    for (int t : group) {
      require(t >= 1 && t <= stages, "tie index " + std::to_string(t) + " out of range");
      require(seen.insert(t).second, "tie index " + std::to_string(t) + " repeated");
      require(masks[static_cast<std::size_t>(t - 1)] ==
                  masks[static_cast<std::size_t>(group.front() - 1)],
              "tied stages must share one mask");
    }
  }
  require(static_cast<int>(seen.size()) == stages,
          "tie schedule must partition all stages");
}

std::vector<std::vector<int>> ConstraintSet::groups(int num_stages) const {
  if (tie_schedule) return *tie_schedule;
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(num_stages));
  for (int t = 1; t <= num_stages; ++t) out.push_back({t});
  return out;
}

GainSchedule ConstraintSet::project(const GainSchedule& gains) const {
  GainSchedule out = gains;
  for (const auto& group : groups(gains.size())) {
    Matrix mean = Matrix::Zero(gains.K(group.front()).rows(),
                               gains.K(group.front()).cols());
    for (int t : group) mean += gains.K(t);
    mean /= static_cast<double>(group.size());
    const BoolMatrix& mask = masks.at(static_cast<std::size_t>(group.front() - 1));
    mean = mask.select(mean, Matrix::Zero(mean.rows(), mean.cols()));
    for (int t : group) out.K(t) = mean;
  }
  return out;
}

bool ConstraintSet::is_feasible(const GainSchedule& gains) const {
  for (const auto& group : groups(gains.size())) {
    for (int t : group) {
      const Matrix& k = gains.K(t);
      const BoolMatrix& mask = masks.at(static_cast<std::size_t>(t - 1));
      for (Eigen::Index j = 0; j < k.cols(); ++j)
        for (Eigen::Index i = 0; i < k.rows(); ++i)
          if (!mask(i, j) && k(i, j) != 0.0) return false;
      if (k != gains.K(group.front())) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

Vector Trajectory::stacked_states() const {
  if (x_.empty()) return {};
  const auto n = x_.front().size();
  Vector out(n * static_cast<Eigen::Index>(x_.size()));
  for (std::size_t t = 0; t < x_.size(); ++t)
    out.segment(static_cast<Eigen::Index>(t) * n, n) = x_[t];
  return out;
}

Vector Trajectory::stacked_disturbances() const {
  if (w_.empty()) return {};
  const auto n = w_.front().size();
  Vector out(n * static_cast<Eigen::Index>(w_.size()));
  for (std::size_t t = 0; t < w_.size(); ++t)
    out.segment(static_cast<Eigen::Index>(t) * n, n) = w_[t];
  return out;
}

std::vector<Vector> Trajectory::unstack(const Vector& stacked, int block) {
  require(block > 0 && stacked.size() % block == 0, "stacked length not a multiple of block");
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < stacked.size(); i += block)
    out.emplace_back(stacked.segment(i, block));
  return out;
}

// ---------------------------------------------------------------------------

Matrix closed_loop(const SystemModel& sys, const GainSchedule& gains, int t) {
  if (t < 1 || t > sys.horizon() - 1)
    throw std::out_of_range("closed_loop: stage " + std::to_string(t) +
                            " outside [1, N-1]");
  return sys.A(t) + sys.B(t) * gains.K(t);
}

SystemModel augment_control_cost(const SystemModel& sys, const std::vector<Matrix>& R,
                                 double gamma) {
  require(gamma > 0.0, "gamma must be positive (gamma = 0 makes D-bar singular)");
  const int stages = sys.horizon() - 1;
  require(static_cast<int>(R.size()) == stages,
          "expected " + std::to_string(stages) + " R matrices");
  const int n = sys.state_dim();
  const int nu = sys.input_dim();
  const int aux = stages > 0 ? static_cast<int>(R.front().rows()) : 1;
  require(aux >= 1, "R must have at least one row");
  for (const auto& r : R)
    require(r.rows() == aux && r.cols() == nu, "R_t has shape " + shape_of(r));

  const int m = n + aux;
  std::vector<Matrix> A, B, D;
  for (int t = 1; t <= stages; ++t) {
    Matrix a = Matrix::Zero(m, m);
    a.topLeftCorner(n, n) = sys.A(t);
    Matrix b(m, nu);
    b << sys.B(t), R[static_cast<std::size_t>(t - 1)];
    A.push_back(std::move(a));
    B.push_back(std::move(b));
  }
  for (int t = 0; t < sys.horizon(); ++t) {
    Matrix d = Matrix::Zero(m, m);
    d.topLeftCorner(n, n) = sys.D(t);
    d.bottomRightCorner(aux, aux) = gamma * Matrix::Identity(aux, aux);
    D.push_back(std::move(d));
  }
  return SystemModel(m, nu, std::move(A), std::move(B), std::move(D));
}

GainSchedule lift_gains_control_cost(const GainSchedule& gains, int aux_dim) {
  std::vector<Matrix> out;
  for (const auto& k : gains.sequence()) {
    Matrix lifted = Matrix::Zero(k.rows(), k.cols() + aux_dim);
    lifted.leftCols(k.cols()) = k;
    out.push_back(std::move(lifted));
  }
  return GainSchedule(std::move(out));
}

// ---------------------------------------------------------------------------

OutputFeedbackMap::OutputFeedbackMap(std::vector<Matrix> C, int window, int input_dim)
    : C_(std::move(C)), window_(window), input_dim_(input_dim) {
  require(window_ >= 1, "window length must be at least 1");
  require(!C_.empty(), "need at least one measurement matrix");
  measurement_dim_ = static_cast<int>(C_.front().rows());
  state_dim_ = static_cast<int>(C_.front().cols());
  for (const auto& c : C_)
    require(c.rows() == measurement_dim_ && c.cols() == state_dim_,
            "measurement matrices must share one shape");
}

Matrix OutputFeedbackMap::stacked_measurement(int t) const {
  const int stages = static_cast<int>(C_.size());
  if (t < 1 || t > stages) throw std::out_of_range("measurement index out of range");
  const int m = measurement_dim_;
  const int n = state_dim_;
  Matrix out = Matrix::Zero(window_ * m, window_ * n);
  for (int lag = 0; lag < window_; ++lag) {
    const int s = std::max(1, t - lag);
    out.block(lag * m, lag * n, m, n) = C_[static_cast<std::size_t>(s - 1)];
  }
  return out;
}

GainSchedule OutputFeedbackMap::compose(const GainSchedule& output_gains) const {
  require(output_gains.size() == static_cast<int>(C_.size()),
          "output gain count must match measurement count");
  std::vector<Matrix> out;
  for (int t = 1; t <= output_gains.size(); ++t) {
    const Matrix& k = output_gains.K(t);
    require(k.rows() == input_dim_ && k.cols() == window_ * measurement_dim_,
            "output gain K_" + std::to_string(t) + " has shape " + shape_of(k) +
                ", expected " + std::to_string(input_dim_) + "x" +
                std::to_string(window_ * measurement_dim_));
    out.push_back(k * stacked_measurement(t));
  }
  return GainSchedule(std::move(out));
}

Matrix OutputFeedbackMap::linear_operator(int t) const {
  // vec(K C) = (C^T kron I) vec(K)
  const Matrix C = stacked_measurement(t);
  const Eigen::Index p = input_dim_;
  Matrix op = Matrix::Zero(p * C.cols(), p * C.rows());
  for (Eigen::Index j = 0; j < C.cols(); ++j)
    for (Eigen::Index i = 0; i < C.rows(); ++i)
      op.block(j * p, i * p, p, p) = C(i, j) * Matrix::Identity(p, p);
  return op;
}

std::pair<SystemModel, OutputFeedbackMap> augment_output_feedback(
    const SystemModel& sys, const std::vector<Matrix>& C, int window, double gamma) {
  require(gamma > 0.0, "gamma must be positive");
  require(window >= 1, "window length must be at least 1");
  const int stages = sys.horizon() - 1;
  require(static_cast<int>(C.size()) == stages,
          "expected " + std::to_string(stages) + " measurement matrices");
  const int n = sys.state_dim();
  for (const auto& c : C)
    require(c.cols() == n, "measurement matrix has shape " + shape_of(c));

  const int m = window * n;
  std::vector<Matrix> A, B, D;
  for (int t = 1; t <= stages; ++t) {
    Matrix a = Matrix::Zero(m, m);
    a.topLeftCorner(n, n) = sys.A(t);
    for (int lag = 1; lag < window; ++lag)
      a.block(lag * n, (lag - 1) * n, n, n) = Matrix::Identity(n, n);
    Matrix b = Matrix::Zero(m, sys.input_dim());
    b.topRows(n) = sys.B(t);
    A.push_back(std::move(a));
    B.push_back(std::move(b));
  }
  for (int t = 0; t < sys.horizon(); ++t) {
    Matrix d = gamma * Matrix::Identity(m, m);
    d.topLeftCorner(n, n) = sys.D(t);
    D.push_back(std::move(d));
  }
  return {SystemModel(m, sys.input_dim(), std::move(A), std::move(B), std::move(D)),
          OutputFeedbackMap(C, window, sys.input_dim())};
}

// ---------------------------------------------------------------------------

std::pair<SystemModel, ConstraintSet> generate_coupled_ensemble(
    const EnsembleParams& params) {
  require(params.num_subsystems >= 1 && params.subsystem_dim >= 1 && params.horizon >= 1,
          "ensemble counts must be positive");
  require(params.mask_fraction >= 0.0 && params.mask_fraction <= 1.0,
          "mask_fraction must lie in [0, 1]");
  require(params.coupling_variance >= 0.0, "coupling variance must be nonnegative");

  const int n = params.num_subsystems * params.subsystem_dim;
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(params.coupling_variance));

  const int d = params.subsystem_dim;
  Matrix A = Matrix::Zero(n, n);
  for (int bi = 0; bi < params.num_subsystems; ++bi) {
    for (int bj = 0; bj < params.num_subsystems; ++bj) {
      auto block = A.block(bi * d, bj * d, d, d);
      if (bi == bj || params.coupling == CouplingForm::Dense) {
        for (int c = 0; c < d; ++c)
          for (int r = 0; r < d; ++r) block(r, c) = gauss(rng);
      } else {
        block.diagonal().setConstant(gauss(rng));
      }
    }
  }

  std::vector<std::pair<int, int>> off_diagonal;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) off_diagonal.emplace_back(i, j);
  const auto pinned = static_cast<std::size_t>(
      std::llround(params.mask_fraction * static_cast<double>(off_diagonal.size())));
  std::shuffle(off_diagonal.begin(), off_diagonal.end(), rng);

  BoolMatrix mask = BoolMatrix::Constant(n, n, true);
  for (std::size_t k = 0; k < pinned; ++k)
    mask(off_diagonal[k].first, off_diagonal[k].second) = false;

  SystemModel sys = SystemModel::time_invariant(A, Matrix::Identity(n, n),
                                                Matrix::Identity(n, n), params.horizon);
  ConstraintSet constraints = ConstraintSet::from_mask(sys, mask, params.tied);
  return {std::move(sys), std::move(constraints)};
}

}  // namespace structsynth
