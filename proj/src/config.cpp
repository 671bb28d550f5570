#include "dogsgd/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "dogsgd/errors.hpp"
#include "json.hpp"

namespace dogsgd {

using nlohmann::json;

const char* to_string(ProblemSpec::Kind kind) {
  switch (kind) {
    case ProblemSpec::Kind::Quadratic:
      return "quadratic";
    case ProblemSpec::Kind::LeastSquares:
      return "least_squares";
    case ProblemSpec::Kind::Logistic:
      return "logistic";
    case ProblemSpec::Kind::Nemirovski:
      return "nemirovski";
  }
  return "?";
}

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.contains(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

const json& object_at(const json& parent, const char* key, const std::string& where) {
  const json& v = parent.at(key);
  if (!v.is_object()) throw ConfigError(where, "must be an object");
  return v;
}

double get_double(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + key, "must be a number");
  return v.get<double>();
}

double get_positive(const json& obj, const char* key, const std::string& where, double fallback) {
  const double v = get_double(obj, key, where, fallback);
  if (!(std::isfinite(v) && v > 0.0)) throw ConfigError(where + key, "must be positive");
  return v;
}

std::size_t get_count(const json& obj, const char* key, const std::string& where, std::size_t fallback,
                      bool allow_zero = false) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0 || (!allow_zero && v.get<long long>() == 0)) {
    throw ConfigError(where + key, allow_zero ? "must be a non-negative integer" : "must be a positive integer");
  }
  return v.get<std::size_t>();
}

std::optional<std::uint64_t> get_seed(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + key, "must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> get_axis(const json& obj, const char* key, bool positive) {
  const std::string where = std::string("sweep.") + key;
  if (!obj.contains(key)) return {};
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(where, "must be a non-empty array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) throw ConfigError(where, "must be a non-empty array of numbers");
    const double x = e.get<double>();
    if (positive && !(std::isfinite(x) && x > 0.0)) throw ConfigError(where, "entries must be positive");
    out.push_back(x);
  }
  return out;
}

ProblemSpec parse_problem(const json& p) {
  const std::string w = "problem.";
  ProblemSpec spec;
  if (!p.contains("kind") || !p.at("kind").is_string()) throw ConfigError("problem.kind", "missing or not a string");
  const std::string kind = p.at("kind").get<std::string>();
  if (kind == "quadratic") {
    reject_unknown(p, "problem", {"kind", "dim", "condition"});
    spec.kind = ProblemSpec::Kind::Quadratic;
    spec.dim = get_count(p, "dim", w, spec.dim);
    spec.condition = get_positive(p, "condition", w, spec.condition);
    if (spec.condition < 1.0) throw ConfigError("problem.condition", "must be at least 1");
  } else if (kind == "least_squares") {
    reject_unknown(p, "problem", {"kind", "dim", "A", "B", "noise_fraction", "noiseless", "instance_seed"});
    spec.kind = ProblemSpec::Kind::LeastSquares;
    spec.dim = get_count(p, "dim", w, spec.dim);
    spec.a_bound = get_positive(p, "A", w, spec.a_bound);
    spec.b_bound = get_positive(p, "B", w, spec.b_bound);
    spec.noise_fraction = get_double(p, "noise_fraction", w, spec.noise_fraction);
    if (!(spec.noise_fraction >= 0.0 && spec.noise_fraction < 1.0)) {
      throw ConfigError("problem.noise_fraction", "must lie in [0, 1)");
    }
    if (p.contains("noiseless")) {
      if (!p.at("noiseless").is_boolean()) throw ConfigError("problem.noiseless", "must be a boolean");
      spec.noiseless = p.at("noiseless").get<bool>();
    }
    spec.instance_seed = get_seed(p, "instance_seed", w);
  } else if (kind == "logistic") {
    reject_unknown(p, "problem", {"kind", "dataset", "label_column", "delimiter", "n", "d", "classes", "weight_scale",
                                  "data_seed", "batch_size"});
    spec.kind = ProblemSpec::Kind::Logistic;
    if (p.contains("dataset")) {
      if (!p.at("dataset").is_string()) throw ConfigError("problem.dataset", "must be a path string");
      spec.dataset = p.at("dataset").get<std::string>();
    }
    if (p.contains("label_column")) {
      if (!p.at("label_column").is_string()) throw ConfigError("problem.label_column", "must be a string");
      spec.label_column = p.at("label_column").get<std::string>();
    }
    if (p.contains("delimiter")) {
      const json& dl = p.at("delimiter");
      if (!dl.is_string() || dl.get<std::string>().size() != 1) {
        throw ConfigError("problem.delimiter", "must be a single character");
      }
      spec.delimiter = dl.get<std::string>()[0];
    }
    spec.n = get_count(p, "n", w, spec.n);
    spec.d = get_count(p, "d", w, spec.d);
    spec.classes = get_count(p, "classes", w, spec.classes);
    if (spec.classes < 2) throw ConfigError("problem.classes", "must be at least 2");
    spec.weight_scale = get_positive(p, "weight_scale", w, spec.weight_scale);
    spec.data_seed = get_seed(p, "data_seed", w);
    spec.batch_size = get_count(p, "batch_size", w, spec.batch_size);
    if (!spec.dataset && spec.batch_size > spec.n) throw ConfigError("problem.batch_size", "must not exceed n");
  } else if (kind == "nemirovski") {
    reject_unknown(p, "problem", {"kind", "dim", "r_eps"});
    spec.kind = ProblemSpec::Kind::Nemirovski;
    spec.dim = get_count(p, "dim", w, spec.dim);
    spec.r_eps = get_positive(p, "r_eps", w, spec.r_eps);
  } else {
    throw ConfigError("problem.kind", "unknown problem kind '" + kind + "'");
  }
  return spec;
}

Schedule parse_schedule(const json& s, std::size_t steps) {
  const std::string w = "schedule.";
  if (!s.contains("kind") || !s.at("kind").is_string()) throw ConfigError("schedule.kind", "missing or not a string");
  const std::string kind = s.at("kind").get<std::string>();
  if (kind == "dog") {
    reject_unknown(s, "schedule", {"kind"});
    return DoG{};
  }
  if (kind == "scaled_dog") {
    reject_unknown(s, "schedule", {"kind", "c"});
    return ScaledDoG{get_positive(s, "c", w, 1.0)};
  }
  if (kind == "tdog") {
    reject_unknown(s, "schedule", {"kind", "T", "delta", "drop_theta"});
    TDoG t;
    t.horizon = get_count(s, "T", w, steps == 0 ? 1 : steps);
    t.delta = get_double(s, "delta", w, t.delta);
    if (!(t.delta > 0.0 && t.delta < 1.0)) throw ConfigError("schedule.delta", "must lie in (0, 1)");
    if (s.contains("drop_theta")) {
      if (!s.at("drop_theta").is_boolean()) throw ConfigError("schedule.drop_theta", "must be a boolean");
      t.drop_theta = s.at("drop_theta").get<bool>();
    }
    return t;
  }
  if (kind == "ldog") {
    reject_unknown(s, "schedule", {"kind", "eps"});
    const double eps = get_double(s, "eps", w, 1e-8);
    if (!(std::isfinite(eps) && eps >= 0.0)) throw ConfigError("schedule.eps", "must be non-negative");
    return LDoG{eps};
  }
  if (kind == "sgd") {
    reject_unknown(s, "schedule", {"kind", "eta"});
    return ConstantSGD{get_positive(s, "eta", w, 0.1)};
  }
  if (kind == "cosine") {
    reject_unknown(s, "schedule", {"kind", "peak", "T"});
    return CosineSGD{get_positive(s, "peak", w, 0.1), get_count(s, "T", w, steps == 0 ? 1 : steps)};
  }
  if (kind == "adagrad_norm") {
    reject_unknown(s, "schedule", {"kind", "rho"});
    return AdaGradNorm{get_positive(s, "rho", w, 1.0)};
  }
  throw ConfigError("schedule.kind", "unknown schedule kind '" + kind + "'");
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<config>", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<config>", "top level must be an object");
  reject_unknown(root, "", {"problem", "schedule", "steps", "seeds", "alpha", "r_eps", "eval_every", "gamma",
                            "domain_radius", "output", "sweep"});

  ExperimentConfig cfg;
  cfg.steps = get_count(root, "steps", "", cfg.steps, true);
  if (!root.contains("problem")) throw ConfigError("problem", "missing");
  cfg.problem = parse_problem(object_at(root, "problem", "problem"));
  if (!root.contains("schedule")) throw ConfigError("schedule", "missing");
  cfg.schedule = parse_schedule(object_at(root, "schedule", "schedule"), cfg.steps);

  if (root.contains("seeds")) {
    const json& s = root.at("seeds");
    if (!s.is_array() || s.empty()) throw ConfigError("seeds", "must be a non-empty array of integers");
    cfg.seeds.clear();
    for (const json& e : s) {
      if (!e.is_number_integer() || e.get<long long>() < 0) throw ConfigError("seeds", "entries must be non-negative integers");
      cfg.seeds.push_back(e.get<std::uint64_t>());
    }
  }
  cfg.alpha = get_positive(root, "alpha", "", cfg.alpha);
  if (root.contains("r_eps")) cfg.r_eps = get_positive(root, "r_eps", "", 1.0);
  cfg.eval_every = get_count(root, "eval_every", "", cfg.eval_every);
  cfg.gamma = get_positive(root, "gamma", "", cfg.gamma);
  if (root.contains("domain_radius")) cfg.domain_radius = get_positive(root, "domain_radius", "", 1.0);
  if (root.contains("output")) {
    if (!root.at("output").is_string()) throw ConfigError("output", "must be a path string");
    cfg.output = root.at("output").get<std::string>();
  }
  if (root.contains("sweep")) {
    const json& s = object_at(root, "sweep", "sweep");
    reject_unknown(s, "sweep", {"alpha", "c", "lr"});
    cfg.sweep.alpha = get_axis(s, "alpha", true);
    cfg.sweep.c = get_axis(s, "c", true);
    cfg.sweep.lr = get_axis(s, "lr", true);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<config>", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

json schedule_json(const Schedule& schedule) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DoG>) {
          return {{"kind", "dog"}};
        } else if constexpr (std::is_same_v<T, ScaledDoG>) {
          return {{"kind", "scaled_dog"}, {"c", s.c}};
        } else if constexpr (std::is_same_v<T, TDoG>) {
          return {{"kind", "tdog"}, {"T", s.horizon}, {"delta", s.delta}, {"drop_theta", s.drop_theta}};
        } else if constexpr (std::is_same_v<T, LDoG>) {
          return {{"kind", "ldog"}, {"eps", s.eps_denom}};
        } else if constexpr (std::is_same_v<T, ConstantSGD>) {
          return {{"kind", "sgd"}, {"eta", s.eta}};
        } else if constexpr (std::is_same_v<T, CosineSGD>) {
          return {{"kind", "cosine"}, {"peak", s.peak}, {"T", s.horizon}};
        } else {
          return {{"kind", "adagrad_norm"}, {"rho", s.rho}};
        }
      },
      schedule);
}

json problem_json(const ProblemSpec& p) {
  json j{{"kind", to_string(p.kind)}};
  switch (p.kind) {
    case ProblemSpec::Kind::Quadratic:
      j["dim"] = p.dim;
      j["condition"] = p.condition;
      break;
    case ProblemSpec::Kind::LeastSquares:
      j["dim"] = p.dim;
      j["A"] = p.a_bound;
      j["B"] = p.b_bound;
      j["noise_fraction"] = p.noise_fraction;
      j["noiseless"] = p.noiseless;
      if (p.instance_seed) j["instance_seed"] = *p.instance_seed;
      break;
    case ProblemSpec::Kind::Logistic:
      if (p.dataset) {
        j["dataset"] = *p.dataset;
        j["label_column"] = p.label_column;
        j["delimiter"] = std::string(1, p.delimiter);
      } else {
        j["n"] = p.n;
        j["d"] = p.d;
        j["classes"] = p.classes;
        j["weight_scale"] = p.weight_scale;
        if (p.data_seed) j["data_seed"] = *p.data_seed;
      }
      j["batch_size"] = p.batch_size;
      break;
    case ProblemSpec::Kind::Nemirovski:
      j["dim"] = p.dim;
      j["r_eps"] = p.r_eps;
      break;
  }
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) {
  json j;
  j["problem"] = problem_json(config.problem);
  j["schedule"] = schedule_json(config.schedule);
  j["steps"] = config.steps;
  j["seeds"] = config.seeds;
  j["alpha"] = config.alpha;
  if (config.r_eps) j["r_eps"] = *config.r_eps;
  j["eval_every"] = config.eval_every;
  j["gamma"] = config.gamma;
  if (config.domain_radius) j["domain_radius"] = *config.domain_radius;
  j["output"] = config.output;
  if (!config.sweep.empty()) {
    json s = json::object();
    if (!config.sweep.alpha.empty()) s["alpha"] = config.sweep.alpha;
    if (!config.sweep.c.empty()) s["c"] = config.sweep.c;
    if (!config.sweep.lr.empty()) s["lr"] = config.sweep.lr;
    j["sweep"] = s;
  }
  return j.dump(2);
}

}  // namespace dogsgd
