#pragma once

#include <string>
#include <utility>
#include <vector>

#include "structsynth/lifted.hpp"
#include "structsynth/sysmodel.hpp"

namespace structsynth {

enum class ObjectiveKind {
  SpectralOfInverse,  // sigma_max(F)
  NuclearOfInverse,   // sum of all sigma_i(F)
  KyFanOfInverse,     // sum of the m largest sigma_i(F)
  ExactH2,            // ||A(K)||_F^2
  ExactHinf,          // sigma_max(A(K))
};

enum class ExactNorm { H2, Hinf };

/// scale * f(K) + reg_weight * sum_t ||K_t||_F^2.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::NuclearOfInverse;
  int kyfan_order = 0;  // only read for KyFanOfInverse
  double reg_weight = 0.0;
  double scale = 1.0;

  static ObjectiveSpec spectral(double scale = 1.0);
  static ObjectiveSpec nuclear(double scale = 1.0);
  static ObjectiveSpec kyfan(int order, double scale = 1.0);
  static ObjectiveSpec exact(ExactNorm which, double scale = 1.0);

  /// Parses "spectral", "nuclear", "kyfan:<m>", "h2" or "hinf".
  static ObjectiveSpec parse(const std::string& selector);
  std::string name() const;

  bool is_surrogate() const {
    return kind == ObjectiveKind::SpectralOfInverse || kind == ObjectiveKind::NuclearOfInverse ||
           kind == ObjectiveKind::KyFanOfInverse;
  }
  /// Number of leading singular values summed by a surrogate.
  int summed_count(int lifted_dim) const;
  void validate(int lifted_dim) const;
};

/// Singular values of F (descending) with the full U and V factors.
struct SpectrumReport {
  Vector singular_values;
  Matrix U;
  Matrix V;
  double value = 0.0;
};

SpectrumReport spectrum(const Matrix& M);
SpectrumReport spectrum(const InverseLiftedMap& F);
/// Spectrum of F(K) with `value` set to obj evaluated at K.
SpectrumReport spectrum_report(const SystemModel& sys, const GainSchedule& gains,
                               const ObjectiveSpec& obj);

/// Per-stage gradient dJ/dK_t, t = 1..N-1. `nonsmooth` marks a point where the
/// relevant singular value group is tied and the result is a subgradient.
struct StageGradient {
  std::vector<Matrix> per_stage;
  bool nonsmooth = false;
  GainSchedule as_schedule() const { return GainSchedule(per_stage); }
};

struct Evaluation {
  double value = 0.0;
  StageGradient gradient;
};

/// Relative singular value gap below which a point is treated as nonsmooth.
inline constexpr double kSmoothnessGap = 1e-9;

/// Value and (sub)gradient of any objective in one pass.
Evaluation evaluate(const SystemModel& sys, const GainSchedule& gains,
                    const ObjectiveSpec& obj, bool with_gradient = true);

/// sum_i sigma_i(A)^2 from the dense lifted map.
double h2_norm(const SystemModel& sys, const GainSchedule& gains);
/// Same value from the covariance recursion sum_t tr P_t.
double h2_norm_recursive(const SystemModel& sys, const GainSchedule& gains);
double hinf_norm(const SystemModel& sys, const GainSchedule& gains);

double surrogate_value(const SystemModel& sys, const GainSchedule& gains,
                       const ObjectiveSpec& obj);
StageGradient surrogate_gradient(const SystemModel& sys, const GainSchedule& gains,
                                 const ObjectiveSpec& obj);
StageGradient exact_gradient(const SystemModel& sys, const GainSchedule& gains,
                             ExactNorm which);

/// Pulls a gradient with respect to dense F back to the gains:
/// dJ/dK_t = -B_t^T D_t^{-T} G(t, t-1).
std::vector<Matrix> pull_back_inverse_gradient(const SystemModel& sys, const Matrix& G);

/// Population variance (1/n normalization).
double variance(const Vector& z);

/// For a descending positive vector a, returns (AM exp(-Var(a/a_1)/2),
/// AM exp(-Var(a/a_m)/2)), which bracket the geometric mean from above and below.
std::pair<double, double> holder_defect_bounds(const Vector& a);

}  // namespace structsynth
