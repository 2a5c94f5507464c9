#include "structsynth/solver.hpp"

#include <chrono>
#include <cmath>
#include <deque>

namespace structsynth {

void SolveOptions::validate() const {
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be nonnegative");
  if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("gradient_tolerance must be positive");
  if (memory < 1) throw std::invalid_argument("memory must be positive");
  if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("armijo constant must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("shrink factor must lie in (0, 1)");
  if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be positive");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::LineSearchFailed: return "line_search_failed";
    case Termination::NoProgress: return "no_progress";
    case Termination::NoFreeVariables: return "no_free_variables";
    case Termination::TimeLimit: return "time_limit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

FreeParameterization::FreeParameterization(const SystemModel& sys,
                                           const ConstraintSet& constraints)
    : stages_(sys.horizon() - 1), rows_(sys.input_dim()), cols_(sys.state_dim()) {
  constraints.validate(sys);
  groups_ = constraints.groups(stages_);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const BoolMatrix& mask = constraints.masks[static_cast<std::size_t>(groups_[g].front() - 1)];
    for (int j = 0; j < cols_; ++j)
      for (int i = 0; i < rows_; ++i)
        if (mask(i, j)) entries_.push_back({static_cast<int>(g), i, j});
  }
}

Vector FreeParameterization::to_vector(const GainSchedule& gains) const {
  Vector theta(size());
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const Entry& e = entries_[k];
    const auto& group = groups_[static_cast<std::size_t>(e.group)];
    double s = 0.0;
    for (int t : group) s += gains.K(t)(e.row, e.col);
    theta(static_cast<Eigen::Index>(k)) = s / static_cast<double>(group.size());
  }
  return theta;
}

GainSchedule FreeParameterization::to_gains(const Vector& theta) const {
  std::vector<Matrix> K(static_cast<std::size_t>(stages_), Matrix::Zero(rows_, cols_));
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const Entry& e = entries_[k];
    for (int t : groups_[static_cast<std::size_t>(e.group)])
      K[static_cast<std::size_t>(t - 1)](e.row, e.col) = theta(static_cast<Eigen::Index>(k));
  }
  return GainSchedule(std::move(K));
}

Vector FreeParameterization::reduce_gradient(const std::vector<Matrix>& per_stage) const {
  Vector g(size());
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const Entry& e = entries_[k];
    double s = 0.0;
    for (int t : groups_[static_cast<std::size_t>(e.group)])
      s += per_stage[static_cast<std::size_t>(t - 1)](e.row, e.col);
    g(static_cast<Eigen::Index>(k)) = s;
  }
  return g;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

struct Point {
  Vector theta;
  double value = 0.0;
  Vector grad;
  bool nonsmooth = false;
};

class LbfgsMemory {
 public:
  explicit LbfgsMemory(int capacity) : capacity_(static_cast<std::size_t>(capacity)) {}

  bool empty() const { return s_.empty(); }
  void clear() {
    s_.clear();
    y_.clear();
  }

  void push(Vector s, Vector y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-10 * s.norm() * y.norm())) return;  // curvature pair rejected
    if (s_.size() == capacity_) {
      s_.pop_front();
      y_.pop_front();
    }
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
  }

  /// Two-loop recursion: returns -H g.
  Vector direction(const Vector& g) const {
    Vector q = g;
    const std::size_t k = s_.size();
    std::vector<double> alpha(k), rho(k);
    for (std::size_t i = k; i-- > 0;) {
      rho[i] = 1.0 / s_[i].dot(y_[i]);
      alpha[i] = rho[i] * s_[i].dot(q);
      q -= alpha[i] * y_[i];
    }
    const double gamma = s_.back().dot(y_.back()) / y_.back().squaredNorm();
    Vector r = gamma * q;
    for (std::size_t i = 0; i < k; ++i) {
      const double beta = rho[i] * y_[i].dot(r);
      r += (alpha[i] - beta) * s_[i];
    }
    return -r;
  }

 private:
  std::size_t capacity_;
  std::deque<Vector> s_;
  std::deque<Vector> y_;
};

Vector steepest(const Vector& g) {
  const double norm = g.norm();
  return norm > 1.0 ? Vector(-g / norm) : Vector(-g);
}

}  // namespace

SolveReport minimize(const SystemModel& sys, const ObjectiveSpec& obj,
                     const ConstraintSet& constraints, const SolveOptions& opts) {
  opts.validate();
  obj.validate(sys.lifted_dim());
  const auto start = Clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  const FreeParameterization param(sys, constraints);
  GainSchedule init = opts.init ? *opts.init : GainSchedule::zeros(sys);
  init.validate(sys);
  init = constraints.project(init);

  const auto eval = [&](const Vector& theta) {
    Point p;
    p.theta = theta;
    const Evaluation e = evaluate(sys, param.to_gains(theta), obj, true);
    p.value = e.value;
    p.grad = param.reduce_gradient(e.gradient.per_stage);
    p.nonsmooth = e.gradient.nonsmooth;
    return p;
  };
  const auto finite = [](const Point& p) { return std::isfinite(p.value) && p.grad.allFinite(); };

  SolveReport report;
  report.objective = obj;

  const auto finish = [&](const Point& p, Termination why) {
    report.gains = param.to_gains(p.theta);
    report.final_value = p.value;
    report.termination = why;
    report.spectrum = spectrum_report(sys, report.gains, obj);
    report.seconds = elapsed();
    return report;
  };

  Point current = eval(param.to_vector(init));
  if (!finite(current))
    throw SolverError("non-finite objective or gradient at the initial point",
                      param.to_gains(current.theta));
  report.trace.push_back(current.value);
  if (current.nonsmooth) ++report.nonsmooth_count;
  if (param.size() == 0) return finish(current, Termination::NoFreeVariables);

  LbfgsMemory memory(opts.memory);
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (current.grad.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance)
      return finish(current, Termination::Converged);
    if (elapsed() > opts.time_limit_seconds) return finish(current, Termination::TimeLimit);

    std::optional<Point> accepted;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Vector direction = memory.empty() ? steepest(current.grad) : memory.direction(current.grad);
      double slope = current.grad.dot(direction);
      if (!(slope < 0.0)) {
        memory.clear();
        direction = steepest(current.grad);
        slope = current.grad.dot(direction);
      }
      double step = 1.0;
      for (int k = 0; k < opts.max_backtracks; ++k, step *= opts.shrink) {
        Point trial;
        try {
          trial = eval(current.theta + step * direction);
        } catch (const ModelError&) {
          continue;
        }
        if (finite(trial) && trial.value <= current.value + opts.armijo * step * slope) {
          accepted = std::move(trial);
          break;
        }
      }
      if (!accepted) {
        if (memory.empty()) break;
        memory.clear();
      }
    }
    if (!accepted) return finish(current, Termination::LineSearchFailed);

    Point next = std::move(*accepted);
    if (opts.projection) {
      const GainSchedule projected = constraints.project(opts.projection(param.to_gains(next.theta)));
      next = eval(param.to_vector(projected));
      if (!finite(next))
        throw SolverError("non-finite objective or gradient after projection",
                          param.to_gains(next.theta));
      memory.clear();
    } else {
      memory.push(next.theta - current.theta, next.grad - current.grad);
    }
    if (next.nonsmooth) {
      ++report.nonsmooth_count;
      memory.clear();
    }

    const double decrease = current.value - next.value;
    current = std::move(next);
    report.trace.push_back(current.value);
    report.iterations = iter + 1;
    if (decrease <= opts.progress_tolerance * std::abs(current.value) && !opts.projection)
      return finish(current, Termination::NoProgress);
  }
  if (current.grad.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance)
    return finish(current, Termination::Converged);
  return finish(current, Termination::MaxIterations);
}

ObjectiveSpec con_objective(const SystemModel& sys, ExactNorm target) {
  const int dim = sys.lifted_dim();
  const double scale = 1.0 / static_cast<double>(dim);
  if (target == ExactNorm::H2) return ObjectiveSpec::spectral(scale);
  if (dim < 2) throw std::invalid_argument("Ky-Fan(nN-1) surrogate needs nN >= 2");
  return ObjectiveSpec::kyfan(dim - 1, scale);
}

SolveReport synthesize_con(const SystemModel& sys, const ConstraintSet& constraints,
                           ExactNorm target, const SolveOptions& opts) {
  return minimize(sys, con_objective(sys, target), constraints, opts);
}

SolveReport synthesize_ncon(const SystemModel& sys, const ConstraintSet& constraints,
                            ExactNorm target, const SolveOptions& opts) {
  return minimize(sys, ObjectiveSpec::exact(target), constraints, opts);
}

}  // namespace structsynth
