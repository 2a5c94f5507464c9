#pragma once

#include "structsynth/sysmodel.hpp"

namespace structsynth {

/// Normalized singular value ratios whose variance drives the
/// suboptimality estimates.
struct SpreadVector {
  Vector entries;
  double variance = 0.0;
};

// Spread vectors. All take the singular values of F in any order, must be
// strictly positive, and return nN-1 entries listed from the smallest
// singular value upwards.
//
//   h2_convex    : (s_2 / s_i)^2,        i = nN..2
//   h2_optimal   : (s_nN / s_i)^2,       i = nN..2
//   hinf_convex  : s_i / s_1,            i = nN-1..1
//   hinf_optimal : s_i / s_{nN-1},       i = nN-1..1
//
// The H2 pair skips s_1 and normalizes the convex spread by s_2.
SpreadVector spread_h2_convex(const Vector& singular_values);
SpreadVector spread_h2_optimal(const Vector& singular_values);
SpreadVector spread_hinf_convex(const Vector& singular_values);
SpreadVector spread_hinf_optimal(const Vector& singular_values);

/// log of prod|det D_t| * (mean of the nN-1 largest s_i(F))^(nN-1).
double log_ub_hinf(const Vector& singular_values_of_F, double log_abs_det_D);
/// log of nN * (prod|det D_t|)^2 * s_max(F)^(2(nN-1)).
double log_ub_h2(const Vector& singular_values_of_F, double log_abs_det_D);

/// Upper bound on the H-infinity norm from the spectrum of F.
double ub_hinf(const SystemModel& sys, const GainSchedule& gains);
/// Upper bound on the H2 norm from the spectral norm of F.
double ub_h2(const SystemModel& sys, const GainSchedule& gains);

/// Bound on H2(K~) / H2(K*) given the spectra of F at the surrogate optimum
/// K~ and the true optimum K*.
double subopt_ratio_h2(const Vector& sv_convex, const Vector& sv_optimal);
/// Bound on Hinf(K~) / Hinf(K*).
double subopt_ratio_hinf(const Vector& sv_convex, const Vector& sv_optimal);

/// H2 ratio bound with the unknown optimum's spread dropped; only needs the
/// surrogate solution.
double aposteriori_bound_h2(const Vector& sv_convex);

}  // namespace structsynth
