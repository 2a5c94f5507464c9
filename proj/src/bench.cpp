#include "structsynth/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "structsynth/bounds.hpp"
#include "structsynth/riccati.hpp"

namespace structsynth {

int resolve_thread_count(int requested) {
  int threads = requested;
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("STRUCTSYNTH_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) threads = std::min(std::max(threads, 1), cap);
    }
  }
  return std::max(threads, 1);
}

TrialRecord run_trial(const BenchConfig& config, int index, ExactNorm target) {
  TrialRecord rec;
  rec.index = index;
  rec.seed = config.ensemble.seed + static_cast<std::uint64_t>(index);
  rec.target = target;
  rec.aposteriori_bound = std::numeric_limits<double>::quiet_NaN();

  EnsembleParams params = config.ensemble;
  params.seed = rec.seed;
  try {
    const auto [sys, constraints] = generate_coupled_ensemble(params);
    const auto norm = [&](const GainSchedule& K) {
      return target == ExactNorm::H2 ? h2_norm(sys, K) : hinf_norm(sys, K);
    };

    SolveOptions opts = config.solve;
    opts.time_limit_seconds = config.trial_timeout_seconds;
    const SolveReport con = synthesize_con(sys, constraints, target, opts);
    opts.time_limit_seconds = std::max(0.0, config.trial_timeout_seconds - con.seconds);
    const SolveReport ncon = synthesize_ncon(sys, constraints, target, opts);

    rec.con = norm(con.gains);
    rec.ncon = norm(ncon.gains);
    rec.opt = target == ExactNorm::H2 ? lqr_h2_opt(sys).h2_value
                                      : norm(hinf_opt(sys, config.hinf_tolerance).gains);
    rec.seconds_con = con.seconds;
    rec.seconds_ncon = ncon.seconds;
    rec.iterations_con = con.iterations;
    rec.iterations_ncon = ncon.iterations;
    rec.log_con_ncon = std::log(rec.con / rec.ncon);
    rec.log_con_opt = std::log(rec.con / rec.opt);
    if (target == ExactNorm::H2)
      rec.aposteriori_bound = aposteriori_bound_h2(con.spectrum.singular_values);
    if (con.termination == Termination::TimeLimit || ncon.termination == Termination::TimeLimit)
      rec.status = "timeout";
  } catch (const std::exception& e) {
    rec.status = std::string("error: ") + e.what();
  }
  return rec;
}

std::vector<TrialRecord> run_benchmark(const BenchConfig& config, int trials, ExactNorm target) {
  if (trials < 1) throw std::invalid_argument("run_benchmark: trials must be at least 1");
  std::vector<TrialRecord> records(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < trials; i = next++)
      records[static_cast<std::size_t>(i)] = run_trial(config, i, target);
  };
  const int threads = std::min(resolve_thread_count(config.threads), trials);
  if (threads == 1) {
    worker();
    return records;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return records;
}

std::string trials_csv_header() {
  return "index,seed,target,con,ncon,opt,seconds_con,seconds_ncon,log_con_ncon,"
         "log_con_opt,aposteriori_bound,iterations_con,iterations_ncon,status";
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records,
                      bool include_timing) {
  out << trials_csv_header() << '\n';
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& r : records) {
    line.str("");
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    line << r.index << ',' << r.seed << ',' << (r.target == ExactNorm::H2 ? "h2" : "hinf") << ','
         << r.con << ',' << r.ncon << ',' << r.opt << ',' << (include_timing ? r.seconds_con : 0.0)
         << ',' << (include_timing ? r.seconds_ncon : 0.0) << ',' << r.log_con_ncon << ',' << r.log_con_opt << ','
         << r.aposteriori_bound << ',' << r.iterations_con << ',' << r.iterations_ncon << ','
         << status;
    out << line.str() << '\n';
  }
}

// ---------------------------------------------------------------------------

std::vector<double> default_k_grid() {
  std::vector<double> grid;
  grid.reserve(401);
  for (int i = 0; i <= 400; ++i) grid.push_back(-2.0 + 0.01 * i);
  return grid;
}

std::vector<CurveRow> scalar_curves(const std::vector<double>& k_grid, int horizon) {
  if (k_grid.empty()) throw std::invalid_argument("scalar_curves: empty grid");
  if (horizon < 1) throw std::invalid_argument("scalar_curves: horizon must be positive");
  const Matrix zero = Matrix::Zero(1, 1);
  const Matrix one = Matrix::Identity(1, 1);
  const SystemModel sys = SystemModel::time_invariant(zero, one, one, horizon);

  std::vector<CurveRow> rows;
  rows.reserve(k_grid.size());
  for (double k : k_grid) {
    const GainSchedule gains = GainSchedule::constant(sys, Matrix::Constant(1, 1, k));
    CurveRow row;
    row.k = k;
    row.h2 = h2_norm(sys, gains);
    row.hinf = hinf_norm(sys, gains);
    const Vector sv = spectrum(build_inverse(sys, gains)).singular_values;
    row.log_ub_h2 = log_ub_h2(sv, sys.log_abs_det_D());
    row.log_ub_hinf = log_ub_hinf(sv, sys.log_abs_det_D());
    row.ub_h2 = std::exp(row.log_ub_h2);
    row.ub_hinf = std::exp(row.log_ub_hinf);
    rows.push_back(row);
  }
  return rows;
}

namespace {

template <typename Get, typename Set>
void min_max_column(std::vector<CurveRow>& rows, Get get, Set set) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : rows) {
    lo = std::min(lo, get(r));
    hi = std::max(hi, get(r));
  }
  const double span = hi - lo;
  for (auto& r : rows) set(r, span > 0.0 ? (get(r) - lo) / span : 0.0);
}

}  // namespace

std::vector<CurveRow> rescale_curves(const std::vector<CurveRow>& rows) {
  std::vector<CurveRow> out = rows;
  const auto all_finite = [&](auto get) {
    return std::all_of(rows.begin(), rows.end(), [&](const CurveRow& r) { return std::isfinite(get(r)); });
  };
  min_max_column(out, [](const CurveRow& r) { return r.h2; }, [](CurveRow& r, double v) { r.h2 = v; });
  min_max_column(out, [](const CurveRow& r) { return r.hinf; }, [](CurveRow& r, double v) { r.hinf = v; });
  if (all_finite([](const CurveRow& r) { return r.ub_h2; }))
    min_max_column(out, [](const CurveRow& r) { return r.ub_h2; }, [](CurveRow& r, double v) { r.ub_h2 = v; });
  else
    min_max_column(out, [](const CurveRow& r) { return r.log_ub_h2; }, [](CurveRow& r, double v) { r.ub_h2 = v; });
  if (all_finite([](const CurveRow& r) { return r.ub_hinf; }))
    min_max_column(out, [](const CurveRow& r) { return r.ub_hinf; }, [](CurveRow& r, double v) { r.ub_hinf = v; });
  else
    min_max_column(out, [](const CurveRow& r) { return r.log_ub_hinf; }, [](CurveRow& r, double v) { r.ub_hinf = v; });
  return out;
}

void write_curves_csv(std::ostream& out, const std::vector<CurveRow>& raw) {
  const std::vector<CurveRow> scaled = rescale_curves(raw);
  out << "k,h2,hinf,ub_h2,ub_hinf,h2_raw,hinf_raw,ub_h2_raw,ub_hinf_raw\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    line.str("");
    const CurveRow& s = scaled[i];
    const CurveRow& r = raw[i];
    line << r.k << ',' << s.h2 << ',' << s.hinf << ',' << s.ub_h2 << ',' << s.ub_hinf << ','
         << r.h2 << ',' << r.hinf << ',' << r.ub_h2 << ',' << r.ub_hinf;
    out << line.str() << '\n';
  }
}

// ---------------------------------------------------------------------------

Histogram histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be positive");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  std::vector<double> finite;
  for (double v : values)
    if (std::isfinite(v)) finite.push_back(v);
  if (finite.empty()) return h;
  const auto [lo, hi] = std::minmax_element(finite.begin(), finite.end());
  h.lo = *lo;
  h.hi = *hi;
  const double width = (h.hi - h.lo) / bins;
  for (double v : finite) {
    int b = width > 0.0 ? static_cast<int>((v - h.lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

Histogram histogram(const std::vector<TrialRecord>& records, TrialField field, int bins) {
  std::vector<double> values;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    switch (field) {
      case TrialField::LogConNcon: values.push_back(r.log_con_ncon); break;
      case TrialField::LogConOpt: values.push_back(r.log_con_opt); break;
      case TrialField::LogTimeRatio: values.push_back(std::log(r.seconds_con / r.seconds_ncon)); break;
    }
  }
  return histogram(values, bins);
}

}  // namespace structsynth
