#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "structsynth/bench.hpp"
#include "structsynth/solver.hpp"
#include "structsynth/sysmodel.hpp"

namespace structsynth {

/// Malformed or unreadable input file. The message is prefixed with
/// "<path>:<line>:<column>:" when a position is known.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

Json read_json_file(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& source);
void write_text_file(const std::string& path, const std::string& contents);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& where);

/// {"n", "n_u", "N", "A": [N-1 matrices], "B": [N-1], "D": [N]}, row-major.
Json system_to_json(const SystemModel& sys);
SystemModel system_from_json(const Json& j);

/// Either a bare array of N-1 0/1 matrices or {"masks": [...], "tie": [[t...]...]}
/// with an optional "tied": true shorthand for one shared gain.
Json constraints_to_json(const ConstraintSet& c);
ConstraintSet constraints_from_json(const Json& j, const SystemModel& sys);

/// Accepts {"K": [...]}, a solve report with a "gains" member, or a bare array.
Json gains_to_json(const GainSchedule& g);
GainSchedule gains_from_json(const Json& j);

Json solve_report_to_json(const SolveReport& report, const SystemModel& sys);

BenchConfig bench_config_from_json(const Json& j);

}  // namespace structsynth
