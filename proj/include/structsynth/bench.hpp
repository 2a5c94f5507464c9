#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "structsynth/solver.hpp"
#include "structsynth/specfun.hpp"
#include "structsynth/sysmodel.hpp"

namespace structsynth {

struct BenchConfig {
  /// `ensemble.seed` is the base seed; trial i uses base + i.
  EnsembleParams ensemble;
  SolveOptions solve;
  double hinf_tolerance = 1e-8;
  double trial_timeout_seconds = 60.0;
  /// 0 = STRUCTSYNTH_THREADS or hardware concurrency.
  int threads = 0;
};

/// One CON / NCON / OPT comparison under the target norm.
struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  ExactNorm target = ExactNorm::H2;
  double con = 0.0;
  double ncon = 0.0;
  double opt = 0.0;
  double seconds_con = 0.0;
  double seconds_ncon = 0.0;
  double log_con_ncon = 0.0;
  double log_con_opt = 0.0;
  /// A-posteriori H2 ratio bound at the CON solution (H2 target only, NaN otherwise).
  double aposteriori_bound = 0.0;
  int iterations_con = 0;
  int iterations_ncon = 0;
  /// "ok", "timeout" or "error: <message>".
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

int resolve_thread_count(int requested);

TrialRecord run_trial(const BenchConfig& config, int index, ExactNorm target);
std::vector<TrialRecord> run_benchmark(const BenchConfig& config, int trials, ExactNorm target);

/// Fixed column order; see docs/formats.md. Without timing the two seconds
/// columns are written as 0, which makes the output byte-reproducible.
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records,
                      bool include_timing = true);
std::string trials_csv_header();

struct CurveRow {
  double k = 0.0;
  double h2 = 0.0;
  double hinf = 0.0;
  double ub_h2 = 0.0;
  double ub_hinf = 0.0;
  double log_ub_h2 = 0.0;
  double log_ub_hinf = 0.0;
};

/// k = -2, -1.99, ..., 2 (401 points).
std::vector<double> default_k_grid();

/// Norms and upper bounds of x_{t+1} = u_t + w_t, u_t = k x_t over the grid,
/// before rescaling.
std::vector<CurveRow> scalar_curves(const std::vector<double>& k_grid, int horizon);

/// Min-max rescales each of the four columns to [0, 1]. A bound column that
/// overflowed is rescaled from its logarithm instead.
std::vector<CurveRow> rescale_curves(const std::vector<CurveRow>& rows);

void write_curves_csv(std::ostream& out, const std::vector<CurveRow>& raw);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<int> counts;
};

/// Equal-width bins over [min, max] of the finite values.
Histogram histogram(const std::vector<double>& values, int bins);

enum class TrialField { LogConNcon, LogConOpt, LogTimeRatio };
Histogram histogram(const std::vector<TrialRecord>& records, TrialField field, int bins);

}  // namespace structsynth
