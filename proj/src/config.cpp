#include "esig/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace esig {

using nlohmann::json;

int PartitionSpec::level_for(std::size_t N) const {
  if (scheme == "mesh-rule") {
    // |pi| = 2^{-floor(N/10)+1}
    const long lvl = static_cast<long>(N / 10) - 1;
    return static_cast<int>(std::clamp<long>(lvl, 0, max_level));
  }
  return level;
}

namespace {

json defaults() {
  return json{
      {"experiment", ""},
      {"T", 1.0},
      {"words", json::array({"1"})},
      {"K", 4},
      {"partition", {{"scheme", "dyadic"}, {"level", 8}, {"max_level", 12}}},
      {"sampling", "ind"},
      {"transform", "none"},
      {"N", 1000},
      {"replications", 1},
      {"estimator", {{"c_mode", "c1"}, {"c", 0.0}, {"upsilon", 0.5}, {"kernel", "truncation"}}},
      {"infill",
       {{"level_min", 3}, {"level_max", 8}, {"reference_level", 12}, {"expected_slope", -0.5}, {"tolerance", 0.15}}},
      {"reference", {{"multiplier", 10}, {"N", 0}, {"refine", 2}}},
      {"consistency", {{"n_min", 64}, {"n_max", 4096}}},
      {"payoff", {{"terms", json::object()}, {"discount", 1.0}}},
      {"hedge", {{"K", 2}, {"p0", nullptr}, {"out_of_sample", 2000}, {"correction", false}, {"ridge", 1e-8}}},
      {"colreg",
       {{"sigma", json::array({10.0})},
        {"rho", json::array({0.0, 0.25, 0.5, 0.75})},
        {"f", json::array({"linear"})},
        {"N", 1000},
        {"reps", 10000}}},
  };
}

json process_defaults(const std::string& kind) {
  if (kind == "bm") return {{"kind", "bm"}, {"d", 1}};
  if (kind == "fbm") return {{"kind", "fbm"}, {"d", 1}, {"H", 0.75}};
  if (kind == "ou") return {{"kind", "ou"}, {"A", json::array({json::array({1.0})})}, {"Sigma", json::array({json::array({1.0})})}};
  if (kind == "car2")
    return {{"kind", "car2"},
            {"A1", json::array({json::array({3.0, 0.0}), json::array({0.0, 3.0})})},
            {"A2", json::array({json::array({2.0, 0.0}), json::array({0.0, 2.0})})}};
  if (kind == "heston")
    return {{"kind", "heston"}, {"s0", 1.0},  {"v0", 0.1},  {"kappa", 0.6},
            {"theta", 0.1},     {"xi", 0.2},  {"rho", -0.15}, {"substeps", 16}};
  throw ConfigError("process.kind", "unknown process '" + kind + "' (bm, fbm, ou, car2, heston)");
}

void reject_unknown(const json& given, const json& reference, const std::string& path) {
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string field = path.empty() ? it.key() : path + "." + it.key();
    if (!reference.contains(it.key())) throw ConfigError(field, "unknown field");
    const json& ref = reference.at(it.key());
    if (ref.is_object() && !ref.empty() && it.value().is_object()) reject_unknown(it.value(), ref, field);
  }
}

const json& at(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + key, "missing");
  return j.at(key);
}

double get_double(const json& j, const std::string& key, const std::string& path) {
  const json& v = at(j, key, path);
  if (!v.is_number()) throw ConfigError(path + key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + key, "must be finite");
  return x;
}

long long get_int(const json& j, const std::string& key, const std::string& path) {
  const json& v = at(j, key, path);
  if (!v.is_number_integer()) throw ConfigError(path + key, "expected an integer");
  return v.get<long long>();
}

std::size_t get_count(const json& j, const std::string& key, const std::string& path, long long min = 1) {
  const long long v = get_int(j, key, path);
  if (v < min) throw ConfigError(path + key, "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

std::string get_string(const json& j, const std::string& key, const std::string& path) {
  const json& v = at(j, key, path);
  if (!v.is_string()) throw ConfigError(path + key, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& j, const std::string& key, const std::string& path) {
  const json& v = at(j, key, path);
  if (!v.is_boolean()) throw ConfigError(path + key, "expected true or false");
  return v.get<bool>();
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& key, const std::string& path) {
  const json& v = at(j, key, path);
  const std::string field = path + key;
  if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw ConfigError(field, "matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw ConfigError(field, "entries must be numbers");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

std::vector<double> get_doubles(const json& j, const std::string& key, const std::string& path) {
  const json& v = at(j, key, path);
  if (!v.is_array() || v.empty()) throw ConfigError(path + key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(path + key, "expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::string> get_strings(const json& j, const std::string& key, const std::string& path) {
  const json& v = at(j, key, path);
  if (!v.is_array() || v.empty()) throw ConfigError(path + key, "expected a non-empty array of strings");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) throw ConfigError(path + key, "expected strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

ProcessSpec parse_process(const json& p) {
  const std::string kind = get_string(p, "kind", "process.");
  const std::string pre = "process.";
  if (kind == "bm") {
    const long long d = get_int(p, "d", pre);
    if (d < 1) throw ConfigError(pre + "d", "must be >= 1");
    return BmParams{static_cast<int>(d)};
  }
  if (kind == "fbm") {
    FbmParams f;
    f.H = get_double(p, "H", pre);
    f.d = static_cast<int>(get_int(p, "d", pre));
    if (!(f.H > 0.0 && f.H < 1.0)) throw ConfigError(pre + "H", "must lie in (0,1)");
    if (f.d < 1) throw ConfigError(pre + "d", "must be >= 1");
    return f;
  }
  if (kind == "ou") {
    OUParams o;
    o.A = get_matrix(p, "A", pre);
    o.Sigma = get_matrix(p, "Sigma", pre);
    try {
      o.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(pre + "A", e.what());
    }
    return o;
  }
  if (kind == "car2") {
    CAR2Params c;
    const Eigen::MatrixXd a1 = get_matrix(p, "A1", pre), a2 = get_matrix(p, "A2", pre);
    if (a1.rows() != 2) throw ConfigError(pre + "A1", "must be 2x2");
    if (a2.rows() != 2) throw ConfigError(pre + "A2", "must be 2x2");
    c.A1 = a1;
    c.A2 = a2;
    Eigen::EigenSolver<Eigen::Matrix4d> es(c.drift());
    if (es.eigenvalues().real().minCoeff() <= 0.0)
      throw ConfigError(pre + "A1", "state drift must have eigenvalues with positive real part");
    return c;
  }
  HestonProcess h;
  h.params.s0 = get_double(p, "s0", pre);
  h.params.v0 = get_double(p, "v0", pre);
  h.params.kappa = get_double(p, "kappa", pre);
  h.params.theta = get_double(p, "theta", pre);
  h.params.xi = get_double(p, "xi", pre);
  h.params.rho = get_double(p, "rho", pre);
  h.substeps = static_cast<int>(get_count(p, "substeps", pre));
  try {
    h.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("process", e.what());
  }
  return h;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

json process_to_json(const ProcessSpec& spec) {
  if (auto* b = std::get_if<BmParams>(&spec)) return {{"kind", "bm"}, {"d", b->d}};
  if (auto* f = std::get_if<FbmParams>(&spec)) return {{"kind", "fbm"}, {"d", f->d}, {"H", f->H}};
  if (auto* o = std::get_if<OUParams>(&spec)) return {{"kind", "ou"}, {"A", matrix_json(o->A)}, {"Sigma", matrix_json(o->Sigma)}};
  if (auto* c = std::get_if<CAR2Params>(&spec)) return {{"kind", "car2"}, {"A1", matrix_json(c->A1)}, {"A2", matrix_json(c->A2)}};
  const auto& h = std::get<HestonProcess>(spec);
  return {{"kind", "heston"}, {"s0", h.params.s0}, {"v0", h.params.v0}, {"kappa", h.params.kappa},
          {"theta", h.params.theta}, {"xi", h.params.xi}, {"rho", h.params.rho}, {"substeps", h.substeps}};
}

int ExperimentConfig::estimator_dim() const {
  if (transform == "time-lead-lag") return 4;
  return process_dim(process);
}

std::vector<Word> ExperimentConfig::parsed_words() const {
  std::vector<Word> out;
  for (const auto& w : words) out.push_back(Word::parse(w, estimator_dim()));
  return out;
}

ExperimentConfig parse_config(const json& input) {
  if (!input.is_object()) throw ConfigError("config", "top level must be an object");
  json base = defaults();
  json ref = base;
  ref["seed"] = 0;
  ref["process"] = json::object();
  reject_unknown(input, ref, "");
  if (!input.contains("seed")) throw ConfigError("seed", "missing (a seed is required for reproducibility)");
  const json& seed = input.at("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    throw ConfigError("seed", "expected a non-negative integer");

  json eff = base;
  eff.merge_patch(input);
  // merge_patch drops explicit nulls; keep hedge.p0 semantics by reading it from the input
  if (!eff["hedge"].contains("p0")) eff["hedge"]["p0"] = nullptr;
  std::string kind = "bm";
  if (input.contains("process")) {
    if (!input["process"].is_object()) throw ConfigError("process", "expected an object");
    if (input["process"].contains("kind")) kind = get_string(input["process"], "kind", "process.");
  }
  json proc = process_defaults(kind);
  if (input.contains("process")) {
    reject_unknown(input["process"], proc, "process");
    proc.merge_patch(input["process"]);
  }
  eff["process"] = proc;

  ExperimentConfig c;
  c.experiment = get_string(eff, "experiment", "");
  if (std::find(kExperimentKinds.begin(), kExperimentKinds.end(), c.experiment) == kExperimentKinds.end())
    throw ConfigError("experiment", "unknown experiment kind '" + c.experiment + "'");
  c.seed = eff["seed"].get<std::uint64_t>();
  c.T = get_double(eff, "T", "");
  if (!(c.T > 0.0)) throw ConfigError("T", "must be > 0");
  c.process = parse_process(eff["process"]);
  c.K = static_cast<int>(get_int(eff, "K", ""));
  if (c.K < 0 || c.K > 8) throw ConfigError("K", "must lie in [0, 8]");
  c.sampling = get_string(eff, "sampling", "");
  if (c.sampling != "ind" && c.sampling != "chop") throw ConfigError("sampling", "must be 'ind' or 'chop'");
  c.transform = get_string(eff, "transform", "");
  if (c.transform != "none" && c.transform != "time-lead-lag")
    throw ConfigError("transform", "must be 'none' or 'time-lead-lag'");
  if (c.transform == "time-lead-lag" && c.experiment != "colreg" && c.experiment != "selftest") {
    const int pd = process_dim(c.process);
    if (pd != 1 && !std::holds_alternative<HestonProcess>(c.process))
      throw ConfigError("transform", "time-lead-lag needs a 1-d price (or heston)");
  }
  c.words = get_strings(eff, "words", "");
  for (std::size_t i = 0; i < c.words.size(); ++i) {
    try {
      const Word w = Word::parse(c.words[i], c.estimator_dim());
      if (static_cast<int>(w.size()) > c.K) throw std::invalid_argument("longer than K");
    } catch (const std::exception& e) {
      throw ConfigError("words[" + std::to_string(i) + "]", std::string("invalid word '") + c.words[i] + "': " + e.what());
    }
  }
  const json& part = eff["partition"];
  c.partition.scheme = get_string(part, "scheme", "partition.");
  if (c.partition.scheme != "dyadic" && c.partition.scheme != "mesh-rule")
    throw ConfigError("partition.scheme", "must be 'dyadic' or 'mesh-rule'");
  c.partition.level = static_cast<int>(get_int(part, "level", "partition."));
  c.partition.max_level = static_cast<int>(get_int(part, "max_level", "partition."));
  if (c.partition.level < 0 || c.partition.level > 16) throw ConfigError("partition.level", "must lie in [0, 16]");
  if (c.partition.max_level < 0 || c.partition.max_level > 16)
    throw ConfigError("partition.max_level", "must lie in [0, 16]");
  c.N = get_count(eff, "N", "");
  c.replications = get_count(eff, "replications", "");
  const json& est = eff["estimator"];
  try {
    c.estimator.mode = parse_c_mode(get_string(est, "c_mode", "estimator."));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("estimator.c_mode", e.what());
  }
  c.estimator.c = get_double(est, "c", "estimator.");
  c.hac.upsilon = get_double(est, "upsilon", "estimator.");
  if (!(c.hac.upsilon > 0.0 && c.hac.upsilon < 1.0)) throw ConfigError("estimator.upsilon", "must lie in (0,1)");
  const std::string kernel = get_string(est, "kernel", "estimator.");
  if (kernel == "truncation")
    c.hac.kernel = HacKernel::truncation;
  else if (kernel == "bartlett")
    c.hac.kernel = HacKernel::bartlett;
  else
    throw ConfigError("estimator.kernel", "must be 'truncation' or 'bartlett'");
  const json& inf = eff["infill"];
  c.infill.level_min = static_cast<int>(get_int(inf, "level_min", "infill."));
  c.infill.level_max = static_cast<int>(get_int(inf, "level_max", "infill."));
  c.infill.reference_level = static_cast<int>(get_int(inf, "reference_level", "infill."));
  c.infill.expected_slope = get_double(inf, "expected_slope", "infill.");
  c.infill.tolerance = get_double(inf, "tolerance", "infill.");
  if (c.infill.level_min < 0 || c.infill.level_min >= c.infill.level_max)
    throw ConfigError("infill.level_min", "must satisfy 0 <= level_min < level_max");
  if (c.infill.reference_level < c.infill.level_max || c.infill.reference_level > 16)
    throw ConfigError("infill.reference_level", "reference grid must refine every level (level_max <= reference <= 16)");
  const json& refj = eff["reference"];
  c.reference.multiplier = get_count(refj, "multiplier", "reference.");
  c.reference.N = get_count(refj, "N", "reference.", 0);
  c.reference.refine = static_cast<int>(get_int(refj, "refine", "reference."));
  if (c.reference.refine < 0 || c.reference.refine > 6) throw ConfigError("reference.refine", "must lie in [0, 6]");
  const json& cons = eff["consistency"];
  c.consistency.n_min = get_count(cons, "n_min", "consistency.");
  c.consistency.n_max = get_count(cons, "n_max", "consistency.");
  if (c.consistency.n_max < c.consistency.n_min) throw ConfigError("consistency.n_max", "must be >= n_min");
  const json& pay = eff["payoff"];
  if (!pay["terms"].is_object()) throw ConfigError("payoff.terms", "expected an object of word -> coefficient");
  for (auto it = pay["terms"].begin(); it != pay["terms"].end(); ++it) {
    if (!it.value().is_number()) throw ConfigError("payoff.terms." + it.key(), "expected a number");
    try {
      Word::parse(it.key(), 4);
    } catch (const std::exception& e) {
      throw ConfigError("payoff.terms." + it.key(), e.what());
    }
    c.payoff.terms[it.key()] = it.value().get<double>();
  }
  c.payoff.discount = get_double(pay, "discount", "payoff.");
  if (!(c.payoff.discount > 0.0)) throw ConfigError("payoff.discount", "must be > 0");
  const json& hj = eff["hedge"];
  c.hedge.K = static_cast<int>(get_int(hj, "K", "hedge."));
  if (c.hedge.K < 0 || c.hedge.K > 4) throw ConfigError("hedge.K", "must lie in [0, 4]");
  if (!hj["p0"].is_null()) c.hedge.p0 = get_double(hj, "p0", "hedge.");
  c.hedge.out_of_sample = get_count(hj, "out_of_sample", "hedge.");
  c.hedge.correction = get_bool(hj, "correction", "hedge.");
  c.hedge.ridge = get_double(hj, "ridge", "hedge.");
  if (c.hedge.ridge < 0.0) throw ConfigError("hedge.ridge", "must be >= 0");
  const json& cr = eff["colreg"];
  c.colreg.sigma = get_doubles(cr, "sigma", "colreg.");
  c.colreg.rho = get_doubles(cr, "rho", "colreg.");
  for (double r : c.colreg.rho)
    if (!(r >= -1.0 && r <= 1.0)) throw ConfigError("colreg.rho", "entries must lie in [-1, 1]");
  c.colreg.f = get_strings(cr, "f", "colreg.");
  for (const auto& f : c.colreg.f) {
    try {
      parse_dependence(f);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("colreg.f", e.what());
    }
  }
  c.colreg.N = get_count(cr, "N", "colreg.", 4);
  c.colreg.reps = get_count(cr, "reps", "colreg.", 2);
  c.effective = eff;
  return c;
}

ExperimentConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("--config", "cannot open '" + file + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

std::string config_hash(const json& effective) {
  const std::string s = effective.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace esig
