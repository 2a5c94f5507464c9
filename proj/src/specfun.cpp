#include "structsynth/specfun.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace structsynth {

ObjectiveSpec ObjectiveSpec::spectral(double scale) {
  return {ObjectiveKind::SpectralOfInverse, 0, 0.0, scale};
}

ObjectiveSpec ObjectiveSpec::nuclear(double scale) {
  return {ObjectiveKind::NuclearOfInverse, 0, 0.0, scale};
}

ObjectiveSpec ObjectiveSpec::kyfan(int order, double scale) {
  return {ObjectiveKind::KyFanOfInverse, order, 0.0, scale};
}

ObjectiveSpec ObjectiveSpec::exact(ExactNorm which, double scale) {
  return {which == ExactNorm::H2 ? ObjectiveKind::ExactH2 : ObjectiveKind::ExactHinf, 0, 0.0,
          scale};
}

ObjectiveSpec ObjectiveSpec::parse(const std::string& selector) {
  if (selector == "spectral") return spectral();
  if (selector == "nuclear") return nuclear();
  if (selector == "h2") return exact(ExactNorm::H2);
  if (selector == "hinf") return exact(ExactNorm::Hinf);
  const std::string prefix = "kyfan:";
  if (selector.rfind(prefix, 0) == 0) {
    const std::string digits = selector.substr(prefix.size());
    std::size_t used = 0;
    int m = 0;
    try {
      m = std::stoi(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != digits.size() || m < 1)
      throw std::invalid_argument("bad Ky-Fan order in objective '" + selector + "'");
    return kyfan(m);
  }
  throw std::invalid_argument("unknown objective '" + selector +
                              "' (expected spectral, nuclear, kyfan:m, h2 or hinf)");
}

std::string ObjectiveSpec::name() const {
  switch (kind) {
    case ObjectiveKind::SpectralOfInverse: return "spectral";
    case ObjectiveKind::NuclearOfInverse: return "nuclear";
    case ObjectiveKind::KyFanOfInverse: return "kyfan:" + std::to_string(kyfan_order);
    case ObjectiveKind::ExactH2: return "h2";
    case ObjectiveKind::ExactHinf: return "hinf";
  }
  return "unknown";
}

int ObjectiveSpec::summed_count(int lifted_dim) const {
  switch (kind) {
    case ObjectiveKind::SpectralOfInverse: return 1;
    case ObjectiveKind::NuclearOfInverse: return lifted_dim;
    case ObjectiveKind::KyFanOfInverse: return kyfan_order;
    default: throw std::invalid_argument("summed_count: not a surrogate objective");
  }
}

void ObjectiveSpec::validate(int lifted_dim) const {
  if (!(reg_weight >= 0.0)) throw std::invalid_argument("reg_weight must be nonnegative");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  if (kind == ObjectiveKind::KyFanOfInverse && (kyfan_order < 1 || kyfan_order > lifted_dim))
    throw std::invalid_argument("Ky-Fan order " + std::to_string(kyfan_order) +
                                " outside [1, " + std::to_string(lifted_dim) + "]");
}

// ---------------------------------------------------------------------------

SpectrumReport spectrum(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV(), 0.0};
}

SpectrumReport spectrum(const InverseLiftedMap& F) { return spectrum(F.dense()); }

namespace {

double regularizer(const GainSchedule& gains, double weight) {
  return weight > 0.0 ? weight * gains.squared_norm() : 0.0;
}

void add_regularizer_gradient(const GainSchedule& gains, double weight,
                              std::vector<Matrix>& grad) {
  if (weight <= 0.0) return;
  for (int t = 1; t <= gains.size(); ++t)
    grad[static_cast<std::size_t>(t - 1)] += 2.0 * weight * gains.K(t);
}

/// Gradient of sum_{i<m} sigma_i with respect to the matrix, as
/// sum_{i<m} u_i v_i^T. When sigma_m ties with sigma_{m+1} the tied group is
/// weighted uniformly (a convex combination, hence a subgradient).
Matrix top_sum_gradient(const SpectrumReport& s, int m, bool& nonsmooth) {
  const Vector& sv = s.singular_values;
  const auto dim = sv.size();
  nonsmooth = false;
  if (m >= dim) return s.U * s.V.transpose();

  const double threshold = kSmoothnessGap * sv(0);
  if (sv(m - 1) - sv(m) > threshold)
    return s.U.leftCols(m) * s.V.leftCols(m).transpose();

  nonsmooth = true;
  const double pivot = sv(m - 1);
  Eigen::Index lo = m - 1;
  while (lo > 0 && std::abs(sv(lo - 1) - pivot) <= threshold) --lo;
  Eigen::Index hi = m;
  while (hi < dim && std::abs(sv(hi) - pivot) <= threshold) ++hi;

  Matrix G = s.U.leftCols(lo) * s.V.leftCols(lo).transpose();
  const double weight = static_cast<double>(m - lo) / static_cast<double>(hi - lo);
  G += weight * s.U.middleCols(lo, hi - lo) * s.V.middleCols(lo, hi - lo).transpose();
  return G;
}

double top_sum(const Vector& sv, int m) { return sv.head(m).sum(); }

Evaluation evaluate_surrogate(const SystemModel& sys, const GainSchedule& gains,
                              const ObjectiveSpec& obj, bool with_gradient) {
  const InverseLiftedMap F = build_inverse(sys, gains);
  const int m = obj.summed_count(F.dim());
  Evaluation out;
  if (!with_gradient) {
    Eigen::BDCSVD<Matrix> svd(F.dense());
    out.value = obj.scale * top_sum(svd.singularValues(), m) + regularizer(gains, obj.reg_weight);
    return out;
  }
  const SpectrumReport s = spectrum(F);
  out.value = obj.scale * top_sum(s.singular_values, m) + regularizer(gains, obj.reg_weight);
  bool nonsmooth = false;
  const Matrix G = top_sum_gradient(s, m, nonsmooth);
  out.gradient.per_stage = pull_back_inverse_gradient(sys, obj.scale * G);
  out.gradient.nonsmooth = nonsmooth;
  add_regularizer_gradient(gains, obj.reg_weight, out.gradient.per_stage);
  return out;
}

Evaluation evaluate_h2(const SystemModel& sys, const GainSchedule& gains,
                       const ObjectiveSpec& obj, bool with_gradient) {
  gains.validate(sys);
  const int N = sys.horizon();
  const int n = sys.state_dim();

  // P_t is the state covariance at time t (t = 1..N) under unit disturbances.
  std::vector<Matrix> P(static_cast<std::size_t>(N));
  std::vector<Matrix> closed(static_cast<std::size_t>(N));
  P[0] = sys.D(0) * sys.D(0).transpose();
  double value = P[0].trace();
  for (int t = 1; t < N; ++t) {
    closed[static_cast<std::size_t>(t)] = closed_loop(sys, gains, t);
    const Matrix& At = closed[static_cast<std::size_t>(t)];
    P[static_cast<std::size_t>(t)] =
        At * P[static_cast<std::size_t>(t - 1)] * At.transpose() + sys.D(t) * sys.D(t).transpose();
    value += P[static_cast<std::size_t>(t)].trace();
  }

  Evaluation out;
  out.value = obj.scale * value + regularizer(gains, obj.reg_weight);
  if (!with_gradient) return out;

  out.gradient.per_stage.assign(static_cast<std::size_t>(N - 1), Matrix());
  // Cost-to-go weight: S_N = I, S_t = I + A~_t^T S_{t+1} A~_t.
  Matrix S = Matrix::Identity(n, n);
  for (int t = N - 1; t >= 1; --t) {
    const Matrix& At = closed[static_cast<std::size_t>(t)];
    const Matrix SA = S * At;
    out.gradient.per_stage[static_cast<std::size_t>(t - 1)] =
        2.0 * obj.scale * sys.B(t).transpose() * SA * P[static_cast<std::size_t>(t - 1)];
    S = Matrix::Identity(n, n) + At.transpose() * SA;
    S = 0.5 * (S + S.transpose()).eval();
  }
  add_regularizer_gradient(gains, obj.reg_weight, out.gradient.per_stage);
  return out;
}

Evaluation evaluate_hinf(const SystemModel& sys, const GainSchedule& gains,
                         const ObjectiveSpec& obj, bool with_gradient) {
  const LiftedMap A = build_forward(sys, gains);
  Evaluation out;
  if (!with_gradient) {
    Eigen::BDCSVD<Matrix> svd(A.dense());
    out.value = obj.scale * svd.singularValues()(0) + regularizer(gains, obj.reg_weight);
    return out;
  }
  const SpectrumReport s = spectrum(A.dense());
  const double sigma = s.singular_values(0);
  out.value = obj.scale * sigma + regularizer(gains, obj.reg_weight);

  bool nonsmooth = false;
  const Matrix GA = top_sum_gradient(s, 1, nonsmooth);
  // A = F^{-1}: d sigma = <G_A, dA> = -<A^T G_A A^T, dF>.
  const Matrix GF = -(A.dense().transpose() * GA * A.dense().transpose());
  out.gradient.per_stage = pull_back_inverse_gradient(sys, obj.scale * GF);
  out.gradient.nonsmooth = nonsmooth;
  add_regularizer_gradient(gains, obj.reg_weight, out.gradient.per_stage);
  return out;
}

}  // namespace

std::vector<Matrix> pull_back_inverse_gradient(const SystemModel& sys, const Matrix& G) {
  const int n = sys.state_dim();
  std::vector<Matrix> grad;
  grad.reserve(static_cast<std::size_t>(sys.horizon() - 1));
  for (int t = 1; t < sys.horizon(); ++t) {
    const Matrix block = G.block(t * n, (t - 1) * n, n, n);
    grad.push_back(-sys.B(t).transpose() * sys.D_inverse(t).transpose() * block);
  }
  return grad;
}

Evaluation evaluate(const SystemModel& sys, const GainSchedule& gains,
                    const ObjectiveSpec& obj, bool with_gradient) {
  obj.validate(sys.lifted_dim());
  switch (obj.kind) {
    case ObjectiveKind::ExactH2: return evaluate_h2(sys, gains, obj, with_gradient);
    case ObjectiveKind::ExactHinf: return evaluate_hinf(sys, gains, obj, with_gradient);
    default: return evaluate_surrogate(sys, gains, obj, with_gradient);
  }
}

SpectrumReport spectrum_report(const SystemModel& sys, const GainSchedule& gains,
                               const ObjectiveSpec& obj) {
  SpectrumReport s = spectrum(build_inverse(sys, gains));
  s.value = evaluate(sys, gains, obj, false).value;
  return s;
}

double h2_norm(const SystemModel& sys, const GainSchedule& gains) {
  return build_forward(sys, gains).dense().squaredNorm();
}

double h2_norm_recursive(const SystemModel& sys, const GainSchedule& gains) {
  return evaluate_h2(sys, gains, ObjectiveSpec::exact(ExactNorm::H2), false).value;
}

double hinf_norm(const SystemModel& sys, const GainSchedule& gains) {
  Eigen::BDCSVD<Matrix> svd(build_forward(sys, gains).dense());
  return svd.singularValues()(0);
}

double surrogate_value(const SystemModel& sys, const GainSchedule& gains,
                       const ObjectiveSpec& obj) {
  if (!obj.is_surrogate()) throw std::invalid_argument("surrogate_value: exact objective given");
  return evaluate(sys, gains, obj, false).value;
}

StageGradient surrogate_gradient(const SystemModel& sys, const GainSchedule& gains,
                                 const ObjectiveSpec& obj) {
  if (!obj.is_surrogate())
    throw std::invalid_argument("surrogate_gradient: exact objective given");
  return evaluate(sys, gains, obj, true).gradient;
}

StageGradient exact_gradient(const SystemModel& sys, const GainSchedule& gains,
                             ExactNorm which) {
  return evaluate(sys, gains, ObjectiveSpec::exact(which), true).gradient;
}

// ---------------------------------------------------------------------------

double variance(const Vector& z) {
  if (z.size() == 0) return 0.0;
  const double mean = z.mean();
  return (z.array() - mean).square().mean();
}

std::pair<double, double> holder_defect_bounds(const Vector& a) {
  if (a.size() == 0) throw std::invalid_argument("holder_defect_bounds: empty input");
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!(a(i) > 0.0)) throw std::invalid_argument("holder_defect_bounds: entries must be positive");
    if (i > 0 && a(i) > a(i - 1))
      throw std::invalid_argument("holder_defect_bounds: entries must be sorted descending");
  }
  const double am = a.mean();
  const double lower = am * std::exp(-variance(a / a(0)) / 2.0);
  const double upper = am * std::exp(-variance(a / a(a.size() - 1)) / 2.0);
  return {lower, upper};
}

}  // namespace structsynth
