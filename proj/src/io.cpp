#include "structsynth/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "structsynth/bounds.hpp"
#include "structsynth/specfun.hpp"

namespace structsynth {

namespace {

[[noreturn]] void fail(const std::string& message) { throw InputError(message); }

const Json& member(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where + ": missing field '" + key + "'");
  return j.at(key);
}

int positive_int(const Json& j, const char* key) {
  const Json& v = member(j, key, "system");
  if (!v.is_number_integer() || v.get<long long>() < 1)
    fail(std::string("system: field '") + key + "' must be a positive integer");
  return v.get<int>();
}

std::vector<Matrix> matrix_list(const Json& j, const char* key, std::size_t expected, int rows,
                                int cols) {
  const Json& arr = member(j, key, "system");
  if (!arr.is_array() || arr.size() != expected)
    fail(std::string("system: '") + key + "' must hold " + std::to_string(expected) + " matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    Matrix m = matrix_from_json(arr[i], where);
    if (m.rows() != rows || m.cols() != cols)
      fail(where + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
           std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": malformed JSON (" +
         e.what() + ")");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str(), path);
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) fail(path + ": cannot open file for writing");
  out << contents;
  if (!out) fail(path + ": write failed");
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty())
    fail(where + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      fail(where + ": row " + std::to_string(i) + " has the wrong length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) fail(where + ": entry (" + std::to_string(i) + "," + std::to_string(c) +
                               ") is not a number");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

Json system_to_json(const SystemModel& sys) {
  Json j;
  j["n"] = sys.state_dim();
  j["n_u"] = sys.input_dim();
  j["N"] = sys.horizon();
  Json A = Json::array(), B = Json::array(), D = Json::array();
  for (const auto& m : sys.A_sequence()) A.push_back(matrix_to_json(m));
  for (const auto& m : sys.B_sequence()) B.push_back(matrix_to_json(m));
  for (const auto& m : sys.D_sequence()) D.push_back(matrix_to_json(m));
  j["A"] = std::move(A);
  j["B"] = std::move(B);
  j["D"] = std::move(D);
  return j;
}

SystemModel system_from_json(const Json& j) {
  if (!j.is_object()) fail("system: expected a JSON object");
  const int n = positive_int(j, "n");
  const int nu = positive_int(j, "n_u");
  const int N = positive_int(j, "N");
  auto A = matrix_list(j, "A", static_cast<std::size_t>(N - 1), n, n);
  auto B = matrix_list(j, "B", static_cast<std::size_t>(N - 1), n, nu);
  auto D = matrix_list(j, "D", static_cast<std::size_t>(N), n, n);
  return SystemModel(n, nu, std::move(A), std::move(B), std::move(D));
}

Json constraints_to_json(const ConstraintSet& c) {
  Json masks = Json::array();
  for (const auto& m : c.masks) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k) ? 1 : 0);
      rows.push_back(std::move(row));
    }
    masks.push_back(std::move(rows));
  }
  Json j;
  j["masks"] = std::move(masks);
  if (c.tie_schedule) j["tie"] = *c.tie_schedule;
  return j;
}

ConstraintSet constraints_from_json(const Json& j, const SystemModel& sys) {
  const Json* masks = &j;
  ConstraintSet c;
  if (j.is_object()) {
    masks = &member(j, "masks", "mask");
    if (j.contains("tie")) {
      try {
        c.tie_schedule = j.at("tie").get<std::vector<std::vector<int>>>();
      } catch (const Json::exception&) {
        fail("mask: 'tie' must be an array of integer arrays");
      }
    } else if (j.value("tied", false) && sys.horizon() > 1) {
      std::vector<int> all;
      for (int t = 1; t < sys.horizon(); ++t) all.push_back(t);
      c.tie_schedule = std::vector<std::vector<int>>{all};
    }
  }
  if (!masks->is_array() || static_cast<int>(masks->size()) != sys.horizon() - 1)
    fail("mask: expected " + std::to_string(sys.horizon() - 1) + " mask matrices");
  for (std::size_t i = 0; i < masks->size(); ++i) {
    const std::string where = "mask[" + std::to_string(i) + "]";
    const Matrix m = matrix_from_json((*masks)[i], where);
    if (m.rows() != sys.input_dim() || m.cols() != sys.state_dim())
      fail(where + ": shape must be n_u x n");
    if (((m.array() != 0.0) && (m.array() != 1.0)).any()) fail(where + ": entries must be 0 or 1");
    c.masks.emplace_back(m.array() != 0.0);
  }
  try {
    c.validate(sys);
  } catch (const ModelError& e) {
    fail(std::string("mask: ") + e.what());
  }
  return c;
}

Json gains_to_json(const GainSchedule& g) {
  Json K = Json::array();
  for (const auto& m : g.sequence()) K.push_back(matrix_to_json(m));
  Json j;
  j["K"] = std::move(K);
  return j;
}

GainSchedule gains_from_json(const Json& j) {
  const Json* arr = &j;
  if (j.is_object()) {
    if (j.contains("gains"))
      arr = &member(j.at("gains"), "K", "gains");
    else
      arr = &member(j, "K", "gains");
  }
  if (!arr->is_array()) fail("gains: expected an array of matrices");
  std::vector<Matrix> K;
  for (std::size_t i = 0; i < arr->size(); ++i)
    K.push_back(matrix_from_json((*arr)[i], "K[" + std::to_string(i) + "]"));
  return GainSchedule(std::move(K));
}

Json solve_report_to_json(const SolveReport& report, const SystemModel& sys) {
  Json j;
  j["objective"] = report.objective.name();
  j["scale"] = report.objective.scale;
  j["reg_weight"] = report.objective.reg_weight;
  j["value"] = report.final_value;
  j["gains"] = gains_to_json(report.gains);
  j["trace"] = report.trace;
  j["iterations"] = report.iterations;
  j["seconds"] = report.seconds;
  j["termination"] = to_string(report.termination);
  j["nonsmooth_count"] = report.nonsmooth_count;
  const Vector& sv = report.spectrum.singular_values;
  j["singular_values"] = std::vector<double>(sv.data(), sv.data() + sv.size());
  j["h2"] = h2_norm(sys, report.gains);
  j["hinf"] = hinf_norm(sys, report.gains);
  if (sv.size() >= 2) j["aposteriori_bound_h2"] = aposteriori_bound_h2(sv);
  return j;
}

BenchConfig bench_config_from_json(const Json& j) {
  if (!j.is_object()) fail("bench config: expected a JSON object");
  BenchConfig c;
  try {
    EnsembleParams& e = c.ensemble;
    e.seed = j.value("seed", e.seed);
    e.num_subsystems = j.value("num_subsystems", e.num_subsystems);
    e.subsystem_dim = j.value("subsystem_dim", e.subsystem_dim);
    e.coupling_variance = j.value("coupling_variance", e.coupling_variance);
    e.mask_fraction = j.value("mask_fraction", e.mask_fraction);
    e.horizon = j.value("horizon", e.horizon);
    e.tied = j.value("tied", e.tied);
    const std::string coupling = j.value("coupling", std::string("scalar"));
    if (coupling == "scalar")
      e.coupling = CouplingForm::Scalar;
    else if (coupling == "dense")
      e.coupling = CouplingForm::Dense;
    else
      fail("bench config: coupling must be \"scalar\" or \"dense\"");
    SolveOptions& s = c.solve;
    s.max_iterations = j.value("max_iterations", s.max_iterations);
    s.gradient_tolerance = j.value("gradient_tolerance", s.gradient_tolerance);
    s.memory = j.value("memory", s.memory);
    c.hinf_tolerance = j.value("hinf_tolerance", c.hinf_tolerance);
    c.trial_timeout_seconds = j.value("trial_timeout_seconds", c.trial_timeout_seconds);
    c.threads = j.value("threads", c.threads);
  } catch (const Json::exception& e) {
    fail(std::string("bench config: ") + e.what());
  }
  return c;
}

}  // namespace structsynth
