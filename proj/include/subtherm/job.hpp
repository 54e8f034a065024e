#pragma once

// JSON jobs: parsing with field-path diagnostics, canonical serialization,
// and dispatch of each command to a JSON report.

#include <chrono>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "subtherm/additive.hpp"
#include "subtherm/gibbs.hpp"
#include "subtherm/gl2.hpp"
#include "subtherm/pressure.hpp"
#include "subtherm/typicality.hpp"

namespace subtherm {

using json = nlohmann::json;

inline constexpr const char* kToolName = "subtherm";
inline constexpr const char* kToolVersion = "1.0.0";

inline const std::vector<std::string>& job_commands() {
  static const std::vector<std::string> names{"pressure",    "gibbs",       "mixing",     "product-check",
                                              "power-check", "classify2x2", "typicality", "additive"};
  return names;
}

struct CocycleData {
  int d = 0;
  double s = 1.0;
  std::vector<Matrix> generators;
  bool operator==(const CocycleData& o) const {
    if (d != o.d || s != o.s || generators.size() != o.generators.size()) return false;
    for (std::size_t i = 0; i < generators.size(); ++i)
      if (generators[i] != o.generators[i]) return false;
    return true;
  }
};

struct JobSpec {
  Subshift subshift;
  std::optional<CocycleData> cocycle;
  std::string command;
  json params = json::object();
  long long budget = 1000000;
  std::map<std::string, double> tolerances;
  bool operator==(const JobSpec&) const = default;

  Cocycle make_cocycle() const {
    if (!cocycle) fail(ErrorKind::SchemaError, "/cocycle: required for command '" + command + "'");
    return Cocycle(cocycle->generators, cocycle->s);
  }
  double tolerance(const std::string& key, double fallback) const {
    const auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }
};

struct RunOptions {
  int threads = 1;
  std::optional<double> rank_tol;
  bool chain_sum = false;
  bool allow_nonprimitive = false;
};

namespace detail {

[[noreturn]] inline void schema(const std::string& path, const std::string& msg) {
  fail(ErrorKind::SchemaError, path + ": " + msg);
}

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema(path + "/" + key, "missing required field");
  return *it;
}

inline long long as_int(const json& v, const std::string& path) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::floor(x) == x && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  schema(path, "expected an integer");
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema(path, "expected a number");
  return v.get<double>();
}

inline Matrix as_matrix(const json& v, int d, const std::string& path) {
  if (!v.is_array() || static_cast<int>(v.size()) != d) schema(path, "expected " + std::to_string(d) + " rows");
  Matrix m(d, d);
  for (int r = 0; r < d; ++r) {
    const auto rp = path + "/" + std::to_string(r);
    const auto& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      schema(rp, "row length must equal d = " + std::to_string(d));
    for (int c = 0; c < d; ++c) m(r, c) = as_number(row[static_cast<std::size_t>(c)], rp + "/" + std::to_string(c));
  }
  return m;
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Word as_word(const json& v, int q, const std::string& path) {
  if (!v.is_string()) schema(path, "expected a word string");
  Word w;
  try {
    w = word_from_string(v.get<std::string>());
  } catch (const Error& e) {
    schema(path, e.what());
  }
  for (Symbol s : w)
    if (s < 0 || s >= q) schema(path, "symbol outside 1.." + std::to_string(q));
  return w;
}

inline int param_int(const JobSpec& job, const std::string& key, int fallback) {
  const auto it = job.params.find(key);
  if (it == job.params.end()) return fallback;
  return static_cast<int>(as_int(*it, "/params/" + key));
}

inline double param_number(const JobSpec& job, const std::string& key, double fallback) {
  const auto it = job.params.find(key);
  if (it == job.params.end()) return fallback;
  return as_number(*it, "/params/" + key);
}

inline bool param_bool(const JobSpec& job, const std::string& key, bool fallback) {
  const auto it = job.params.find(key);
  if (it == job.params.end()) return fallback;
  if (!it->is_boolean()) schema("/params/" + key, "expected a boolean");
  return it->get<bool>();
}

}  // namespace detail

/// Text to validated job. Non-primitive adjacency is an error unless
/// `allow_nonprimitive`, in which case a warning is appended.
inline JobSpec parse_job(const json& doc, bool allow_nonprimitive = false, std::vector<std::string>* warnings = nullptr) {
  using namespace detail;
  if (!doc.is_object()) schema("", "job must be a JSON object");
  JobSpec job;

  const auto& sub = field(doc, "subshift", "");
  const auto q = static_cast<int>(as_int(field(sub, "q", "/subshift"), "/subshift/q"));
  if (q < 1) schema("/subshift/q", "must be positive");
  const auto& adj = field(sub, "adjacency", "/subshift");
  if (!adj.is_array() || static_cast<int>(adj.size()) != q) schema("/subshift/adjacency", "expected q rows");
  std::vector<std::uint8_t> flat;
  for (int r = 0; r < q; ++r) {
    const auto rp = "/subshift/adjacency/" + std::to_string(r);
    const auto& row = adj[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != q) schema(rp, "row length must equal q");
    for (int c = 0; c < q; ++c) {
      const auto v = as_int(row[static_cast<std::size_t>(c)], rp + "/" + std::to_string(c));
      if (v != 0 && v != 1) schema(rp + "/" + std::to_string(c), "entries must be 0 or 1");
      flat.push_back(static_cast<std::uint8_t>(v));
    }
  }
  job.subshift = Subshift(q, std::move(flat));
  if (!is_primitive(job.subshift).primitive) {
    if (!allow_nonprimitive) fail(ErrorKind::NotPrimitive, "/subshift/adjacency: matrix is not primitive");
    if (warnings) warnings->push_back("adjacency is not primitive; results are diagnostic only");
  }

  const auto& command = field(doc, "command", "");
  if (!command.is_string()) schema("/command", "expected a string");
  job.command = command.get<std::string>();
  const auto& names = job_commands();
  if (std::find(names.begin(), names.end(), job.command) == names.end())
    schema("/command", "unknown command '" + job.command + "'");

  if (doc.contains("cocycle")) {
    const auto& co = doc["cocycle"];
    CocycleData data;
    data.d = static_cast<int>(as_int(field(co, "d", "/cocycle"), "/cocycle/d"));
    if (data.d < 1) schema("/cocycle/d", "must be positive");
    data.s = as_number(field(co, "s", "/cocycle"), "/cocycle/s");
    if (data.s < 0.0) schema("/cocycle/s", "must be nonnegative");
    const auto& gens = field(co, "generators", "/cocycle");
    if (!gens.is_object()) schema("/cocycle/generators", "expected an object keyed by symbol");
    if (static_cast<int>(gens.size()) != q) schema("/cocycle/generators", "expected one generator per symbol 1..q");
    for (int i = 1; i <= q; ++i) {
      const auto key = std::to_string(i);
      data.generators.push_back(as_matrix(field(gens, key, "/cocycle/generators"), data.d, "/cocycle/generators/" + key));
    }
    (void)Cocycle(data.generators, data.s);  // invertibility and shape
    job.cocycle = std::move(data);
  } else if (job.command != "additive") {
    schema("/cocycle", "missing required field");
  }

  if (doc.contains("params")) {
    if (!doc["params"].is_object()) schema("/params", "expected an object");
    job.params = doc["params"];
  }
  if (doc.contains("budget")) {
    job.budget = as_int(doc["budget"], "/budget");
    if (job.budget < 1) schema("/budget", "must be >= 1");
  }
  if (doc.contains("tolerances")) {
    const auto& tol = doc["tolerances"];
    if (!tol.is_object()) schema("/tolerances", "expected an object");
    for (const auto& [k, v] : tol.items()) {
      const double x = as_number(v, "/tolerances/" + k);
      if (!(x > 0.0)) schema("/tolerances/" + k, "must be positive");
      job.tolerances[k] = x;
    }
  }
  if (job.command == "additive" && !job.params.contains("potential")) schema("/params/potential", "missing required field");
  return job;
}

inline JobSpec parse_job(const std::string& text, bool allow_nonprimitive = false,
                         std::vector<std::string>* warnings = nullptr) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::SchemaError, e.what());
  }
  return parse_job(doc, allow_nonprimitive, warnings);
}

inline json serialize_job(const JobSpec& job) {
  json doc;
  const int q = job.subshift.q();
  json adj = json::array();
  for (int r = 0; r < q; ++r) {
    json row = json::array();
    for (int c = 0; c < q; ++c) row.push_back(job.subshift.allows(r, c) ? 1 : 0);
    adj.push_back(std::move(row));
  }
  doc["subshift"] = {{"q", q}, {"adjacency", adj}};
  if (job.cocycle) {
    json gens = json::object();
    for (std::size_t i = 0; i < job.cocycle->generators.size(); ++i)
      gens[std::to_string(i + 1)] = detail::matrix_json(job.cocycle->generators[i]);
    doc["cocycle"] = {{"d", job.cocycle->d}, {"s", job.cocycle->s}, {"generators", gens}};
  }
  doc["command"] = job.command;
  doc["params"] = job.params;
  doc["budget"] = job.budget;
  json tol = json::object();
  for (const auto& [k, v] : job.tolerances) tol[k] = v;
  doc["tolerances"] = tol;
  return doc;
}

// ---------------------------------------------------------------------------
// Result payloads

namespace detail {

inline json word_json(const Word& w, int q) { return word_to_string(w, q); }

inline json estimate_json(const PressureEstimate& e, int q) {
  json per = json::array();
  for (const auto& [n, v] : e.upper_detail.per_length) per.push_back(json::array({n, v}));
  json out = {{"lower", e.lower},
              {"upper", e.upper},
              {"n_upper", e.n_upper},
              {"witness", e.witness},
              {"s", e.s},
              {"lower_source", e.source == LowerSource::Chained ? "chained" : "periodic"},
              {"rigorous_modulo_certificate", e.rigorous_modulo_certificate},
              {"upper_by_n", per},
              {"period_bound", e.period_bound_used},
              {"periodic_lower", e.periodic.value},
              {"periodic_witness", word_json(e.periodic.witness, q)}};
  if (e.qm) {
    out["qm"] = {{"c", e.qm->c},
                 {"k", e.qm->k},
                 {"n_max", e.qm->n_max},
                 {"k_max", e.qm->k_max},
                 {"worst_pair", json::array({word_json(e.qm->worst_i, q), word_json(e.qm->worst_j, q)})},
                 {"worst_connector", word_json(e.qm->worst_connector, q)},
                 {"status", "empirical: valid for tested lengths only"}};
  } else {
    out["qm"] = nullptr;
    out["qm_failure"] = e.qm_failure;
  }
  if (e.chained) out["chained_lower"] = e.chained->value;
  if (!e.note.empty()) out["note"] = e.note;
  return out;
}

inline json additive_pressure_json(const AdditivePressure& p) {
  return {{"value", p.value}, {"lo", p.lo}, {"hi", p.hi}};
}

inline json comparison_json(const PressureComparison& c) {
  return {{"first", additive_pressure_json(c.first)},
          {"second", additive_pressure_json(c.second)},
          {"relation", to_string(c.relation)},
          {"difference", c.difference}};
}

inline json cohomology_json(const CohomologyVerdict& v, int q) {
  json out = {{"verdict", v.not_cohomologous ? "NotCohomologous" : "ConsistentUpTo"},
              {"bound", v.bound},
              {"orbits_checked", v.orbits_checked}};
  if (v.not_cohomologous) {
    out["witness"] = word_json(v.witness, q);
    out["sums"] = json::array({v.sum1, v.sum2});
  }
  return out;
}

inline json markov_json(const MarkovMeasure& m) {
  return {{"stationary", vector_json(m.stationary)}, {"transition", matrix_json(m.transition)}};
}

inline json lemma_json(const LemmaCheck& c, int q, int q_system) {
  return {{"predicted", json::array({c.predicted.lo, c.predicted.hi})},
          {"measured", json::array({c.measured.lo, c.measured.hi})},
          {"pass", c.pass},
          {"single", estimate_json(c.single, q)},
          {"system", estimate_json(c.system, q_system)}};
}

inline json trace_json(const HolonomyTrace& t, int q) {
  json f = json::array();
  for (const auto& x : t.factors) f.push_back(std::to_string(x.symbol + 1) + (x.inverse ? "^-1" : ""));
  (void)q;
  return {{"shift", t.shift}, {"factors", f}};
}

inline json point_json(const SymbolicPoint& p, int q) {
  return {{"past", word_json(p.past, q)}, {"core", word_json(p.core, q)}, {"future", word_json(p.future, q)},
          {"phase", p.phase}};
}

inline json certificate_json(const TypicalityCertificate& c, int q) {
  json eig = json::array();
  for (double e : c.pinching.eigenvalues) eig.push_back(e);
  json per_t = json::array();
  for (const auto& v : c.per_t)
    per_t.push_back({{"t", v.t},
                     {"products_distinct", v.products_distinct},
                     {"product_gap", v.min_relative_gap},
                     {"coefficients", matrix_json(v.twisting.coefficients)},
                     {"min_abs_coefficient", v.twisting.min_abs},
                     {"min_relative_coefficient", v.twisting.min_relative}});
  return {{"p", word_json(c.p_word, q)},
          {"z", point_json(c.z, q)},
          {"periodic_matrix", matrix_json(c.periodic_matrix)},
          {"eigenvalues", eig},
          {"eigenvectors", matrix_json(c.pinching.eigenvectors)},
          {"pinching_gap", c.pinching.min_gap},
          {"pinching_relative_gap", c.pinching.min_relative_gap},
          {"loop", matrix_json(c.loop.matrix)},
          {"stable_trace", trace_json(c.loop.stable.trace, q)},
          {"unstable_trace", trace_json(c.loop.unstable.trace, q)},
          {"per_t", per_t},
          {"fiber_bunching_margin", c.fiber_bunching_margin},
          {"scope", to_string(c.scope)}};
}

inline std::vector<double> potential_values(const JobSpec& job, const json& pot, int depth, const std::string& path) {
  const auto& sub = job.subshift;
  const int q = sub.q();
  const auto& values = field(pot, "values", path);
  if (!values.is_object()) schema(path + "/values", "expected an object keyed by word");
  std::vector<double> out(static_cast<std::size_t>(depth == 1 ? q : q * q), 0.0);
  for (const auto& [key, v] : values.items()) {
    const Word w = as_word(json(key), q, path + "/values/" + key);
    if (static_cast<int>(w.size()) != depth || !sub.is_admissible(w))
      schema(path + "/values/" + key, "key must be an admissible word of length " + std::to_string(depth));
    out[depth == 1 ? static_cast<std::size_t>(w[0]) : static_cast<std::size_t>(w[0] * q + w[1])] =
        as_number(v, path + "/values/" + key);
  }
  const std::size_t expected = depth == 1 ? static_cast<std::size_t>(q) : static_cast<std::size_t>(count_words(sub, 2));
  if (values.size() != expected) schema(path + "/values", "a value is required for every admissible argument");
  return out;
}

inline AdditivePotential parse_potential(const JobSpec& job, const std::string& key) {
  const std::string path = "/params/" + key;
  const auto& pot = field(job.params, key, "/params");
  const int depth = static_cast<int>(as_int(field(pot, "depth", path), path + "/depth"));
  if (depth != 1 && depth != 2) schema(path + "/depth", "must be 1 or 2");
  return {depth, potential_values(job, pot, depth, path)};
}

}  // namespace detail

struct JobOutcome {
  json result;
  int exit_code = 0;
  std::vector<std::vector<std::string>> csv;  ///< header first
};

inline PressureOptions pressure_options(const JobSpec& job, const RunOptions& run) {
  PressureOptions opt;
  opt.budget = static_cast<double>(job.budget);
  opt.period_bound = detail::param_int(job, "period_bound", opt.period_bound);
  opt.qm_n_max = detail::param_int(job, "qm_n_max", opt.qm_n_max);
  opt.qm_k_max = detail::param_int(job, "qm_k_max", opt.qm_k_max);
  opt.chain_sum = run.chain_sum || detail::param_bool(job, "chain_sum", false);
  opt.threads = run.threads;
  return opt;
}

/// Dispatches one job. Errors propagate as exceptions.
inline JobOutcome execute_job(const JobSpec& job, const RunOptions& run) {
  using namespace detail;
  JobOutcome out;
  const auto& sub = job.subshift;
  const int q = sub.q();
  const double rank_tol = run.rank_tol.value_or(job.tolerance("rank", 1e-8));
  const auto csv_num = [](double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
  };

  if (job.command == "pressure") {
    const auto est = pressure_estimate(sub, job.make_cocycle(), pressure_options(job, run));
    out.result = estimate_json(est, q);
  } else if (job.command == "gibbs") {
    const Cocycle co = job.make_cocycle();
    const SingularValuePotential pot(co);
    const int n_max = param_int(job, "n", 4);
    if (n_max < 1) schema("/params/n", "must be positive");
    double words = 0.0;
    for (int n = 1; n <= n_max; ++n) words += count_words(sub, n);
    if (words > static_cast<double>(job.budget)) fail(ErrorKind::BudgetExceeded, "tables exceed the word budget");
    std::optional<PressureEstimate> est;
    double p_hat = 0.0;
    if (job.params.contains("p_hat")) {
      p_hat = as_number(job.params["p_hat"], "/params/p_hat");
    } else {
      est = pressure_estimate(sub, pot, pressure_options(job, run));
      p_hat = est->midpoint();
    }
    const auto tables = gibbs_tables(sub, pot, n_max, p_hat);
    const auto scan = gibbs_ratio_scan(pot, tables, p_hat);
    json tj = json::array();
    out.csv.push_back({"n", "word", "weight", "gibbs_ratio"});
    for (const auto& t : tables) {
      json weights = json::object();
      for (const auto& [w, v] : t.weights) {
        weights[word_to_string(w, q)] = v;
        const double ratio = std::exp(std::log(v) + t.n * p_hat - log_potential(pot, w));
        out.csv.push_back({std::to_string(t.n), word_to_string(w, q), csv_num(v), csv_num(ratio)});
      }
      json row = {{"n", t.n}, {"log_z", t.log_z}, {"weights", weights}};
      row["invariance_defect"] = t.n >= 2 ? json(shift_invariance_defect(t)) : json(nullptr);
      tj.push_back(std::move(row));
    }
    const auto dist = bounded_distortion_constant(co, n_max);
    out.result = {{"p_hat", p_hat},
                  {"tables", tj},
                  {"scan",
                   {{"min_ratio", scan.min_ratio},
                    {"max_ratio", scan.max_ratio},
                    {"c_hat", scan.c_hat},
                    {"drift_slope", scan.drift_slope}}},
                  {"bounded_distortion", {{"constant", dist.constant}, {"justification", dist.justification}}}};
    if (est) out.result["bracket"] = json::array({est->lower, est->upper});
  } else if (job.command == "mixing") {
    const Cocycle co = job.make_cocycle();
    const SingularValuePotential pot(co);
    std::vector<std::pair<Word, Word>> pairs;
    if (job.params.contains("pairs")) {
      const auto& arr = job.params["pairs"];
      if (!arr.is_array()) schema("/params/pairs", "expected an array of [I, J]");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto p = "/params/pairs/" + std::to_string(i);
        if (!arr[i].is_array() || arr[i].size() != 2) schema(p, "expected [I, J]");
        pairs.emplace_back(as_word(arr[i][0], q, p + "/0"), as_word(arr[i][1], q, p + "/1"));
      }
    } else {
      pairs = all_pairs(sub, param_int(job, "max_len", 2));
    }
    std::vector<int> ks;
    if (job.params.contains("ks")) {
      const auto& arr = job.params["ks"];
      if (!arr.is_array()) schema("/params/ks", "expected an array of gaps");
      for (std::size_t i = 0; i < arr.size(); ++i)
        ks.push_back(static_cast<int>(as_int(arr[i], "/params/ks/" + std::to_string(i))));
    } else {
      for (int k = 1; k <= param_int(job, "k_max", 6); ++k) ks.push_back(k);
    }
    const auto est = pressure_estimate(sub, pot, pressure_options(job, run));
    const auto rep = mixing_report(sub, pot, pairs, ks, est.midpoint(), static_cast<double>(job.budget),
                                   job.tolerance("mixing", 1e-6));
    json rows = json::array();
    out.csv.push_back({"I", "J", "k", "correlation", "product", "defect", "ratio", "violation"});
    for (const auto& r : rep.rows) {
      rows.push_back({{"I", word_to_string(r.i, q)},
                      {"J", word_to_string(r.j, q)},
                      {"k", r.k},
                      {"correlation", r.correlation},
                      {"product", r.product},
                      {"defect", r.defect},
                      {"ratio", r.ratio},
                      {"violation", r.violation}});
      out.csv.push_back({word_to_string(r.i, q), word_to_string(r.j, q), std::to_string(r.k), csv_num(r.correlation),
                         csv_num(r.product), csv_num(r.defect), csv_num(r.ratio), r.violation ? "1" : "0"});
    }
    out.result = {{"p_hat", est.midpoint()},
                  {"c_hat", rep.c_hat},
                  {"bound", rep.bound},
                  {"any_violation", rep.any_violation},
                  {"rows", rows}};
  } else if (job.command == "product-check") {
    const auto chk = product_pressure_check(sub, job.make_cocycle(), pressure_options(job, run));
    out.result = lemma_json(chk, q, q * q);
  } else if (job.command == "power-check") {
    const int n = param_int(job, "n", 2);
    const auto chk = power_pressure_check(sub, job.make_cocycle(), n, pressure_options(job, run));
    out.result = lemma_json(chk, q, static_cast<int>(count_words(sub, n)));
    out.result["n"] = n;
  } else if (job.command == "classify2x2") {
    const auto cls = classify(sub, job.make_cocycle(), rank_tol, param_int(job, "cohomology_bound", 12));
    json r = {{"tag", to_string(cls.tag)},
              {"reason", cls.reason},
              {"hypotheses", cls.hypotheses},
              {"reducible", cls.reducible},
              {"scalar_family", cls.scalar_family},
              {"potential", "norm (s = 1)"}};
    if (cls.reduced) {
      const auto& d = *cls.reduced;
      json tri = json::array();
      for (const auto& b : d.tri.triangular.generators()) tri.push_back(matrix_json(b));
      r["line"] = vector_json(d.line);
      r["conjugator"] = matrix_json(d.tri.conjugator);
      r["triangular"] = tri;
      r["log_a"] = d.tri.log_a.values;
      r["log_c"] = d.tri.log_c.values;
      r["pressures"] = comparison_json(d.pressures);
      r["cohomology"] = d.cohomology ? cohomology_json(*d.cohomology, q) : json(nullptr);
      r["mu_a"] = markov_json(d.mu_a);
      r["mu_c"] = markov_json(d.mu_c);
    }
    if (cls.square) {
      const auto& s = *cls.square;
      json sq = {{"line_field_found", s.line_field_found}};
      if (s.line_field_found) {
        json field = json::array(), lam = json::object(), conj = json::object();
        for (const auto& v : s.line_field) field.push_back(vector_json(v));
        for (const auto& [w, x] : s.lambda) lam[word_to_string(w, q)] = x;
        for (const auto& [w, c] : s.conjugators) conj[word_to_string(w, q)] = matrix_json(c);
        const int qb = s.blocks.sub.q();
        sq["line_field"] = field;
        sq["conjugators"] = conj;
        sq["a"] = lam;
        sq["b"] = 1.0;
        sq["antidiagonal_residual"] = s.antidiagonal_residual;
        sq["blocks"] = json::array();
        for (const auto& b : s.blocks.blocks) sq["blocks"].push_back(word_to_string(b, q));
        sq["pressures"] = comparison_json(*s.pressures);
        json coh = cohomology_json(*s.cohomology, qb);
        if (s.cohomology->not_cohomologous) {
          json spelled = json::array();
          for (Symbol b : s.cohomology->witness) spelled.push_back(word_to_string(s.blocks.blocks[static_cast<std::size_t>(b)], q));
          coh["witness_blocks"] = spelled;
          coh["witness_period"] = 2 * s.cohomology->witness.size();
        }
        sq["cohomology"] = coh;
        sq["average_invariance_defect"] = s.average_invariance_defect;
        sq["isomorphism_note"] = "the K-times-rotation isomorphism itself is not computed";
      }
      r["square"] = sq;
    }
    out.result = std::move(r);
    if (cls.tag == Tag::Inconclusive) out.exit_code = 2;
  } else if (job.command == "typicality") {
    const Cocycle co = job.make_cocycle();
    const double tol = job.tolerance("typicality", 1e-6);
    const auto search = typicality_certificate(sub, co, param_int(job, "period_bound", 3),
                                               param_int(job, "insertion_bound", 3), tol);
    json misses = json::array();
    for (const auto& m : search.near_misses)
      misses.push_back({{"p", word_to_string(m.p_word, q)},
                        {"insertion", word_to_string(m.insertion, q)},
                        {"stage", m.stage},
                        {"margin", m.margin}});
    json r = {{"certified", search.certificate.has_value()},
              {"candidates_tried", search.candidates_tried},
              {"fiber_bunching_margin", search.fiber_bunching_margin},
              {"near_misses", misses}};
    if (search.certificate) {
      r["certificate"] = certificate_json(*search.certificate, q);
      const int power = param_int(job, "power", 0);
      if (power >= 2) {
        const auto lifted = certify_power(sub, co, *search.certificate, power, tol);
        r["power_check"] = {{"n", power}, {"certified", lifted.has_value()}};
      }
    }
    out.result = std::move(r);
  } else if (job.command == "additive") {
    const auto pot = parse_potential(job, "potential");
    const auto p = additive_pressure(sub, pot);
    const auto mu = markov_equilibrium(sub, pot);
    json r = {{"pressure", additive_pressure_json(p)}, {"markov", markov_json(mu)}};
    if (job.params.contains("compare")) {
      const auto other = parse_potential(job, "compare");
      r["compare_pressure"] = additive_pressure_json(additive_pressure(sub, other));
      r["cohomology"] = cohomology_json(cohomology_test(sub, pot, other, param_int(job, "period_bound", 12)), q);
    }
    out.result = std::move(r);
  }
  return out;
}

struct Report {
  json document;
  int exit_code = 0;
  std::vector<std::vector<std::string>> csv;
};

/// Full report: tool, version, input echo, wall time and result or error.
inline Report run_job(const JobSpec& job, const RunOptions& run, const std::vector<std::string>& warnings = {}) {
  Report rep;
  rep.document = {{"tool", kToolName}, {"version", kToolVersion}, {"input", serialize_job(job)}};
  if (!warnings.empty()) rep.document["warnings"] = warnings;
  const auto start = std::chrono::steady_clock::now();
  try {
    auto outcome = execute_job(job, run);
    rep.document["result"] = std::move(outcome.result);
    rep.exit_code = outcome.exit_code;
    rep.csv = std::move(outcome.csv);
  } catch (const Error& e) {
    rep.document["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
    rep.exit_code = e.kind() == ErrorKind::InconclusiveNumerics ? 2 : 1;
  }
  rep.document["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

/// Report for unparseable input.
inline Report error_report(const Error& e) {
  Report rep;
  rep.document = {{"tool", kToolName},
                  {"version", kToolVersion},
                  {"input", nullptr},
                  {"error", {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}},
                  {"wall_time", 0.0}};
  rep.exit_code = e.kind() == ErrorKind::InconclusiveNumerics ? 2 : 1;
  return rep;
}

inline int default_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

}  // namespace subtherm
