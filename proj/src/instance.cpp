#include "capalloc/instance.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "capalloc/rng.hpp"
#include "capalloc/util.hpp"

namespace capalloc {

using nlohmann::json;

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path dir = path.parent_path();
  if (dir.empty()) dir = fs::current_path();
  fs::path tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(cat("cannot open ", tmp.string(), " for writing"));
    out << content;
    if (!out) throw std::runtime_error(cat("write failed: ", tmp.string()));
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(cat("cannot open ", path.string()));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

bool prob_ok(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void check_vector(std::vector<std::string>& report, const std::string& where,
                  const char* field, const std::vector<double>& vec, int n,
                  bool is_prob) {
  if (static_cast<int>(vec.size()) != n) {
    report.push_back(cat(where, ".", field, ": length ", vec.size(),
                         " does not match n = ", n));
    return;
  }
  for (std::size_t i = 0; i < vec.size(); ++i) {
    double v = vec[i];
    if (is_prob ? !prob_ok(v) : !(std::isfinite(v) && v >= 0.0)) {
      report.push_back(cat(where, ".", field, "[", i, "] = ", v,
                           is_prob ? " outside [0, 1]" : " must be a finite nonnegative real"));
    }
  }
}

void check_realization_fields(std::vector<std::string>& report, const std::string& where,
                              double p, int c, const std::vector<double>& values,
                              const std::vector<double>& q, int n) {
  if (!prob_ok(p)) report.push_back(cat(where, ".p = ", p, " outside [0, 1]"));
  if (c < 0) report.push_back(cat(where, ".c = ", c, " must be a nonnegative integer"));
  check_vector(report, where, "values", values, n, /*is_prob=*/false);
  check_vector(report, where, "q", q, n, /*is_prob=*/true);
}

}  // namespace

std::vector<std::string> validate(const BernoulliInstance& inst) {
  std::vector<std::string> report;
  if (inst.n < 1) report.push_back(cat("n = ", inst.n, " must be >= 1"));
  for (int t = 0; t < inst.num_rounds(); ++t) {
    const RoundSpec& r = inst.rounds[t];
    check_realization_fields(report, cat("rounds[", t, "]"), r.p, r.c, r.values, r.q, inst.n);
  }
  return report;
}

std::vector<std::string> validate(const GeneralInstance& inst) {
  std::vector<std::string> report;
  if (inst.n < 1) report.push_back(cat("n = ", inst.n, " must be >= 1"));
  for (int t = 0; t < inst.num_rounds(); ++t) {
    const GeneralRound& round = inst.rounds[t];
    if (round.realizations.empty()) {
      report.push_back(cat("rounds[", t, "]: no realizations"));
      continue;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < round.realizations.size(); ++j) {
      const Realization& r = round.realizations[j];
      check_realization_fields(report, cat("rounds[", t, "].realizations[", j, "]"),
                               r.p, r.c, r.values, r.q, inst.n);
      total += r.p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      report.push_back(cat("rounds[", t, "]: realization probabilities sum to ", total,
                           ", expected 1 within 1e-9"));
    }
  }
  return report;
}

BernoulliInstance gen_lp_gap() {
  BernoulliInstance inst;
  inst.n = 2;
  inst.rounds.push_back({0.5, 2, {1.0, 1.0}, {1.0, 1.0}});
  inst.rounds.push_back({1.0, 1, {1.0, 1.0}, {1.0, 1.0}});
  return inst;
}

BernoulliInstance gen_bdm_counterexample(int n) {
  if (n < 2) throw std::invalid_argument(cat("gen_bdm_counterexample: n = ", n, " must be >= 2"));
  BernoulliInstance inst;
  inst.n = n;
  double big = static_cast<double>(n) * n;
  inst.rounds.push_back({1.0 - 1.0 / n, n, std::vector<double>(n, 1.0), std::vector<double>(n, 1.0)});
  inst.rounds.push_back({1.0, 1, std::vector<double>(n, big), std::vector<double>(n, 1.0)});
  return inst;
}

BernoulliInstance gen_positive_correlation(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument(cat("gen_positive_correlation: eps = ", eps, " outside (0, 1)"));
  }
  BernoulliInstance inst;
  inst.n = 2;
  inst.rounds.push_back({eps, 2, {1.0, 1.0}, {1.0, 1.0}});
  // Sentinel round: availability after round 1 becomes availability *at*
  // round 2, which the exact engine reports directly.
  inst.rounds.push_back({1.0, 2, {0.0, 0.0}, {1.0, 1.0}});
  return inst;
}

BernoulliInstance gen_random(const RandomInstanceParams& params, std::uint64_t seed) {
  if (params.n < 1) throw std::invalid_argument("gen_random: n must be >= 1");
  if (params.T < 1) throw std::invalid_argument("gen_random: T must be >= 1");
  auto bad_range = [](double lo, double hi) { return !(lo <= hi); };
  if (params.c_min < 0 || params.c_min > params.c_max)
    throw std::invalid_argument("gen_random: empty or negative capacity range");
  if (bad_range(params.v_min, params.v_max) || params.v_min < 0.0)
    throw std::invalid_argument("gen_random: empty or negative value range");
  if (bad_range(params.q_min, params.q_max) || params.q_min < 0.0 || params.q_max > 1.0)
    throw std::invalid_argument("gen_random: q range outside [0, 1]");
  if (bad_range(params.p_min, params.p_max) || params.p_min < 0.0 || params.p_max > 1.0)
    throw std::invalid_argument("gen_random: p range outside [0, 1]");

  RngStream rng(derive_seed(seed, {stream::generator}));
  BernoulliInstance inst;
  inst.n = params.n;
  inst.rounds.resize(params.T);
  for (RoundSpec& r : inst.rounds) {
    r.p = rng.uniform_real(params.p_min, params.p_max);
    r.c = rng.uniform_int(params.c_min, params.c_max);
    r.values.resize(params.n);
    r.q.resize(params.n);
    for (int i = 0; i < params.n; ++i) r.values[i] = rng.uniform_real(params.v_min, params.v_max);
    for (int i = 0; i < params.n; ++i) r.q[i] = rng.uniform_real(params.q_min, params.q_max);
  }
  return inst;
}

GeneralInstance to_general(const BernoulliInstance& inst) {
  GeneralInstance out;
  out.n = inst.n;
  out.rounds.resize(inst.rounds.size());
  const std::vector<double> zeros(inst.n, 0.0);
  for (int t = 0; t < inst.num_rounds(); ++t) {
    const RoundSpec& r = inst.rounds[t];
    GeneralRound& g = out.rounds[t];
    if (r.p > 0.0) g.realizations.push_back({r.p, r.c, r.values, r.q});
    if (r.p < 1.0) g.realizations.push_back({1.0 - r.p, 0, zeros, zeros});
  }
  return out;
}

namespace {

// --- JSON serialization -----------------------------------------------------

json round_to_json(double p, int c, const std::vector<double>& values,
                   const std::vector<double>& q) {
  return json{{"p", p}, {"c", c}, {"values", values}, {"q", q}};
}

double get_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw SchemaError(cat(where, ": missing required field \"", key, "\""));
  const json& v = obj.at(key);
  if (!v.is_number()) throw SchemaError(cat(where, ".", key, ": expected a number"));
  return v.get<double>();
}

int get_int(const json& obj, const char* key, const std::string& where) {
  double v = get_number(obj, key, where);
  double rounded = std::nearbyint(v);
  if (std::abs(v - rounded) > 0.0) {
    throw SchemaError(cat(where, ".", key, ": expected an integer, got ", v));
  }
  return static_cast<int>(rounded);
}

std::vector<double> get_vector(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw SchemaError(cat(where, ": missing required field \"", key, "\""));
  const json& v = obj.at(key);
  if (!v.is_array()) throw SchemaError(cat(where, ".", key, ": expected an array"));
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number()) throw SchemaError(cat(where, ".", key, ": expected numeric entries"));
    out.push_back(e.get<double>());
  }
  return out;
}

void warn_unknown(const json& obj, const std::set<std::string>& known,
                  const std::string& where, std::vector<std::string>& warnings) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      warnings.push_back(cat(where, ": unknown field \"", it.key(), "\" ignored"));
    }
  }
}

json parse_document(const std::filesystem::path& path) {
  json doc = json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw SchemaError(cat(path.string(), ": not valid JSON"));
  if (!doc.is_object()) throw SchemaError(cat(path.string(), ": expected a JSON object"));
  return doc;
}

}  // namespace

InstanceFile read_instance(const std::filesystem::path& path) {
  json doc = parse_document(path);
  if (!doc.contains("schema") || !doc.at("schema").is_string()) {
    throw SchemaError(cat(path.string(), ": missing \"schema\" field"));
  }
  const std::string schema = doc.at("schema").get<std::string>();

  InstanceFile out;
  warn_unknown(doc, {"schema", "n", "rounds"}, path.filename().string(), out.warnings);
  if (!doc.contains("rounds")) throw SchemaError(cat(path.string(), ": missing required field \"rounds\""));
  if (!doc.at("rounds").is_array()) throw SchemaError(cat(path.string(), ": \"rounds\" must be an array"));
  const int n = get_int(doc, "n", path.filename().string());

  if (schema == kBernoulliSchema) {
    BernoulliInstance inst;
    inst.n = n;
    int t = 0;
    for (const json& r : doc.at("rounds")) {
      std::string where = cat("rounds[", t, "]");
      if (!r.is_object()) throw SchemaError(cat(where, ": expected an object"));
      warn_unknown(r, {"p", "c", "values", "q"}, where, out.warnings);
      RoundSpec spec;
      spec.p = get_number(r, "p", where);
      spec.c = get_int(r, "c", where);
      spec.values = get_vector(r, "values", where);
      spec.q = get_vector(r, "q", where);
      inst.rounds.push_back(std::move(spec));
      ++t;
    }
    out.value = std::move(inst);
  } else if (schema == kGeneralSchema) {
    GeneralInstance inst;
    inst.n = n;
    int t = 0;
    for (const json& r : doc.at("rounds")) {
      std::string where = cat("rounds[", t, "]");
      if (!r.is_object()) throw SchemaError(cat(where, ": expected an object"));
      warn_unknown(r, {"realizations"}, where, out.warnings);
      if (!r.contains("realizations") || !r.at("realizations").is_array()) {
        throw SchemaError(cat(where, ": missing \"realizations\" array"));
      }
      GeneralRound round;
      int j = 0;
      for (const json& e : r.at("realizations")) {
        std::string rwhere = cat(where, ".realizations[", j, "]");
        if (!e.is_object()) throw SchemaError(cat(rwhere, ": expected an object"));
        warn_unknown(e, {"p", "c", "values", "q"}, rwhere, out.warnings);
        Realization real;
        real.p = get_number(e, "p", rwhere);
        real.c = get_int(e, "c", rwhere);
        real.values = get_vector(e, "values", rwhere);
        real.q = get_vector(e, "q", rwhere);
        round.realizations.push_back(std::move(real));
        ++j;
      }
      inst.rounds.push_back(std::move(round));
      ++t;
    }
    out.value = std::move(inst);
  } else {
    throw SchemaError(cat(path.string(), ": unsupported schema \"", schema, "\""));
  }

  auto report = out.is_general() ? validate(out.general()) : validate(out.bernoulli());
  if (!report.empty()) {
    throw SchemaError(cat(path.string(), ": invalid instance: ", report.front()));
  }
  return out;
}

void write_instance(const BernoulliInstance& inst, const std::filesystem::path& path) {
  json doc;
  doc["schema"] = kBernoulliSchema;
  doc["n"] = inst.n;
  json rounds = json::array();
  for (const RoundSpec& r : inst.rounds) rounds.push_back(round_to_json(r.p, r.c, r.values, r.q));
  doc["rounds"] = std::move(rounds);
  write_file_atomic(path, doc.dump(2) + "\n");
}

void write_instance(const GeneralInstance& inst, const std::filesystem::path& path) {
  json doc;
  doc["schema"] = kGeneralSchema;
  doc["n"] = inst.n;
  json rounds = json::array();
  for (const GeneralRound& round : inst.rounds) {
    json reals = json::array();
    for (const Realization& r : round.realizations) {
      reals.push_back(round_to_json(r.p, r.c, r.values, r.q));
    }
    rounds.push_back(json{{"realizations", std::move(reals)}});
  }
  doc["rounds"] = std::move(rounds);
  write_file_atomic(path, doc.dump(2) + "\n");
}

}  // namespace capalloc
