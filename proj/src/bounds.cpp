#include "structsynth/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/SVD>

#include "structsynth/lifted.hpp"
#include "structsynth/specfun.hpp"

namespace structsynth {

namespace {

/// Copy sorted descending, so s(0) = s_1 and s(dim-1) = s_nN. Only the
/// leading `positive` entries (all by default) must be strictly positive.
Vector checked_descending(const Vector& sv, const char* who, Eigen::Index min_size = 2,
                          Eigen::Index positive = -1) {
  if (sv.size() < min_size)
    throw std::invalid_argument(std::string(who) + ": spectrum too short");
  Vector s = sv;
  std::sort(s.data(), s.data() + s.size(), std::greater<>());
  if (positive < 0) positive = s.size();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (std::isnan(s(i)) || s(i) < 0.0 || (i < positive && !(s(i) > 0.0)))
      throw std::invalid_argument(std::string(who) + ": singular values must be positive");
  }
  return s;
}

SpreadVector make_spread(Vector entries) {
  SpreadVector out;
  out.variance = variance(entries);
  out.entries = std::move(entries);
  return out;
}

Vector singular_values_of_F(const SystemModel& sys, const GainSchedule& gains) {
  Eigen::BDCSVD<Matrix> svd(build_inverse(sys, gains).dense());
  return svd.singularValues();
}

double dim_ratio(Eigen::Index dim) {
  return static_cast<double>(dim) / static_cast<double>(dim - 1);
}

}  // namespace

SpreadVector spread_h2_convex(const Vector& singular_values) {
  const Vector s = checked_descending(singular_values, "spread_h2_convex");
  const Eigen::Index dim = s.size();
  Vector e(dim - 1);
  for (Eigen::Index k = 0; k < dim - 1; ++k) {
    const double ratio = s(1) / s(dim - 1 - k);  // i = nN - k
    e(k) = ratio * ratio;
  }
  return make_spread(std::move(e));
}

SpreadVector spread_h2_optimal(const Vector& singular_values) {
  const Vector s = checked_descending(singular_values, "spread_h2_optimal");
  const Eigen::Index dim = s.size();
  Vector e(dim - 1);
  for (Eigen::Index k = 0; k < dim - 1; ++k) {
    const double ratio = s(dim - 1) / s(dim - 1 - k);
    e(k) = ratio * ratio;
  }
  return make_spread(std::move(e));
}

SpreadVector spread_hinf_convex(const Vector& singular_values) {
  const Vector s = checked_descending(singular_values, "spread_hinf_convex");
  const Eigen::Index dim = s.size();
  Vector e(dim - 1);
  for (Eigen::Index k = 0; k < dim - 1; ++k) e(k) = s(dim - 2 - k) / s(0);
  return make_spread(std::move(e));
}

SpreadVector spread_hinf_optimal(const Vector& singular_values) {
  const Vector s = checked_descending(singular_values, "spread_hinf_optimal");
  const Eigen::Index dim = s.size();
  Vector e(dim - 1);
  for (Eigen::Index k = 0; k < dim - 1; ++k) e(k) = s(dim - 2 - k) / s(dim - 2);
  return make_spread(std::move(e));
}

double log_ub_hinf(const Vector& singular_values_of_F, double log_abs_det_D) {
  // sigma_nN does not enter and may have underflowed to zero.
  const Vector s = checked_descending(singular_values_of_F, "ub_hinf", 1,
                                      std::max<Eigen::Index>(singular_values_of_F.size() - 1, 1));
  const Eigen::Index dim = s.size();
  if (dim == 1) return log_abs_det_D;
  const double mean = s.head(dim - 1).mean();
  return log_abs_det_D + static_cast<double>(dim - 1) * std::log(mean);
}

double log_ub_h2(const Vector& singular_values_of_F, double log_abs_det_D) {
  const Vector s = checked_descending(singular_values_of_F, "ub_h2", 1, 1);
  const Eigen::Index dim = s.size();
  return std::log(static_cast<double>(dim)) + 2.0 * log_abs_det_D +
         2.0 * static_cast<double>(dim - 1) * std::log(s(0));
}

double ub_hinf(const SystemModel& sys, const GainSchedule& gains) {
  return std::exp(log_ub_hinf(singular_values_of_F(sys, gains), sys.log_abs_det_D()));
}

double ub_h2(const SystemModel& sys, const GainSchedule& gains) {
  return std::exp(log_ub_h2(singular_values_of_F(sys, gains), sys.log_abs_det_D()));
}

double subopt_ratio_h2(const Vector& sv_convex, const Vector& sv_optimal) {
  if (sv_convex.size() != sv_optimal.size())
    throw std::invalid_argument("subopt_ratio_h2: spectra differ in length");
  const double v_convex = spread_h2_convex(sv_convex).variance;
  const double v_optimal = spread_h2_optimal(sv_optimal).variance;
  return dim_ratio(sv_convex.size()) * std::exp((v_convex - v_optimal) / 2.0);
}

double subopt_ratio_hinf(const Vector& sv_convex, const Vector& sv_optimal) {
  if (sv_convex.size() != sv_optimal.size())
    throw std::invalid_argument("subopt_ratio_hinf: spectra differ in length");
  const double v_convex = spread_hinf_convex(sv_convex).variance;
  const double v_optimal = spread_hinf_optimal(sv_optimal).variance;
  const double m = static_cast<double>(sv_convex.size() - 1);
  return std::exp(m * (v_optimal - v_convex) / 2.0);
}

double aposteriori_bound_h2(const Vector& sv_convex) {
  const double v_convex = spread_h2_convex(sv_convex).variance;
  return dim_ratio(sv_convex.size()) * std::exp(v_convex / 2.0);
}

}  // namespace structsynth
