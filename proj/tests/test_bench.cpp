#include <algorithm>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "structsynth/bench.hpp"

using namespace structsynth;

namespace {

BenchConfig small_config(std::uint64_t seed) {
  BenchConfig c;
  c.ensemble.seed = seed;
  c.ensemble.horizon = 3;
  c.solve.max_iterations = 150;
  c.threads = 1;
  return c;
}

std::string csv_of(const std::vector<TrialRecord>& r) {
  std::ostringstream out;
  write_trials_csv(out, r, false);
  return out.str();
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("single trial is deterministic and respects OPT dominance") {
  const BenchConfig c = small_config(100);
  for (ExactNorm target : {ExactNorm::H2, ExactNorm::Hinf}) {
    const TrialRecord a = run_trial(c, 0, target);
    const TrialRecord b = run_trial(c, 0, target);
    CHECK(a.ok());
    CHECK(a.con == b.con);
    CHECK(a.ncon == b.ncon);
    CHECK(a.opt <= std::min(a.con, a.ncon) * (1.0 + 1e-6));
    CHECK(a.log_con_ncon == doctest::Approx(std::log(a.con / a.ncon)));
    CHECK(std::isnan(a.aposteriori_bound) == (target == ExactNorm::Hinf));
  }
}

TEST_CASE("without masking every method reaches the deadbeat optimum") {
  BenchConfig c = small_config(7);
  c.ensemble.mask_fraction = 0.0;
  const TrialRecord r = run_trial(c, 0, ExactNorm::H2);
  const double nN = 30.0;
  CHECK(r.opt == doctest::Approx(nN).epsilon(1e-2));
  CHECK(r.con == doctest::Approx(nN).epsilon(1e-2));
  CHECK(r.ncon == doctest::Approx(nN).epsilon(1e-2));
}

TEST_CASE("benchmark output is ordered and byte-reproducible across pool sizes") {
  BenchConfig c = small_config(11);
  c.solve.max_iterations = 40;
  const auto seq = run_benchmark(c, 3, ExactNorm::H2);
  c.threads = 3;
  const auto par = run_benchmark(c, 3, ExactNorm::H2);
  for (int i = 0; i < 3; ++i) {
    CHECK(seq[static_cast<std::size_t>(i)].index == i);
    CHECK(seq[static_cast<std::size_t>(i)].seed == 11u + static_cast<std::uint64_t>(i));
  }
  CHECK(csv_of(seq) == csv_of(par));
  CHECK_THROWS_AS(run_benchmark(c, 0, ExactNorm::H2), std::invalid_argument);
}

TEST_CASE("trial CSV layout") {
  TrialRecord r;
  r.index = 2;
  r.seed = 9;
  r.status = "error: bad, worse";
  std::ostringstream out;
  write_trials_csv(out, {r});
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == trials_csv_header());
  CHECK(std::count(header.begin(), header.end(), ',') == 13);
  CHECK(std::count(row.begin(), row.end(), ',') == 13);
  CHECK(row.rfind("2,9,h2,", 0) == 0);
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_thread_count(3) == 3);
  CHECK(resolve_thread_count(0) >= 1);
}

TEST_CASE("scalar curves: closed forms, dominance and rescaling") {
  const auto grid = default_k_grid();
  CHECK(grid.size() == 401);
  CHECK(grid.front() == doctest::Approx(-2.0));
  CHECK(grid.back() == doctest::Approx(2.0));
  const auto rows = scalar_curves(grid, 100);
  REQUIRE(rows.size() == 401);
  const CurveRow& mid = rows[200];
  CHECK(mid.k == doctest::Approx(0.0));
  CHECK(mid.hinf == doctest::Approx(1.0));
  CHECK(mid.ub_hinf == doctest::Approx(1.0));
  CHECK(mid.h2 == doctest::Approx(100.0));
  for (const auto& r : rows) {
    CHECK(r.log_ub_hinf >= std::log(r.hinf) - 1e-9);
    CHECK(r.log_ub_h2 >= std::log(r.h2) - 1e-9);
  }
  const auto scaled = rescale_curves(rows);
  for (const auto& r : scaled) {
    for (double v : {r.h2, r.hinf, r.ub_h2, r.ub_hinf}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  std::ostringstream csv;
  write_curves_csv(csv, rows);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 402);
  CHECK_THROWS_AS(scalar_curves({}, 10), std::invalid_argument);
}

TEST_CASE("histogram edge cases") {
  const std::vector<double> v = {0.1, 0.2, 0.3, std::nan(""), 0.9};
  const Histogram one = histogram(v, 1);
  CHECK(one.counts.size() == 1);
  CHECK(one.counts[0] == 4);
  const Histogram flat = histogram(std::vector<double>{2.0, 2.0, 2.0}, 5);
  CHECK(flat.counts[0] == 3);
  const Histogram h = histogram(v, 4);
  CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0) == 4);
  CHECK(h.counts.back() == 1);
  CHECK(h.lo == doctest::Approx(0.1));
  CHECK(h.hi == doctest::Approx(0.9));
  CHECK_THROWS_AS(histogram(v, 0), std::invalid_argument);

  std::vector<TrialRecord> recs(3);
  recs[0].log_con_ncon = -1.0;
  recs[1].log_con_ncon = 1.0;
  recs[2].status = "timeout";
  const Histogram hr = histogram(recs, TrialField::LogConNcon, 2);
  CHECK(hr.counts[0] + hr.counts[1] == 2);
}

}  // TEST_SUITE
