#include "dogsgd/emit.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dogsgd/errors.hpp"
#include "json.hpp"

namespace dogsgd {

using nlohmann::json;

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw ConfigError("format", "expected csv or json, got '" + std::string(name) + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// JSON has no literal for inf or nan; those travel as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double read_number(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan" || s == "-nan") return std::nan("");
  }
  throw InputError(std::string("summary field '") + key + "' is not a number");
}

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

std::optional<double> read_optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return read_number(j, key);
}

void put_optional(std::string& line, const std::optional<double>& v) {
  line += ',';
  if (v) line += format_double(*v);
}

json row_json(const RunRecord& r) {
  return {{"t", r.t},
          {"eta", number(r.eta)},
          {"r_bar", number(r.r_bar)},
          {"G", number(r.grad_sq_sum)},
          {"G_prime", number(r.grad_sq_sum_prime)},
          {"train_loss", number(r.train_loss)},
          {"eval_loss", number(r.eval_loss)},
          {"d_t", optional_number(r.d_t)},
          {"regret_lhs", optional_number(r.regret_lhs)},
          {"regret_rhs", optional_number(r.regret_rhs)},
          {"flag", flags_to_string(r.flags)}};
}

json summary_to_json(const RunSummary& s) {
  json j{{"problem", s.problem},
         {"schedule", s.schedule},
         {"seed", s.seed},
         {"steps_requested", s.steps_requested},
         {"steps_completed", s.steps_completed},
         {"r_eps", number(s.r_eps)},
         {"initial_loss", number(s.initial_loss)},
         {"final_loss", number(s.final_loss)},
         {"weighted_average_loss", number(s.weighted_average_loss)},
         {"poly_average_loss", number(s.poly_average_loss)},
         {"best_loss", number(s.best_loss)},
         {"best_candidate", s.best_candidate},
         {"best_step", s.best_step},
         {"r_bar_final", number(s.r_bar_final)},
         {"tau", s.tau},
         {"tau_score", number(s.tau_score)},
         {"max_ratio_bound", number(s.max_ratio_bound)},
         {"max_ratio_ok", s.max_ratio_ok},
         {"d0", optional_number(s.d0)},
         {"d_final", optional_number(s.d_final)},
         {"diverged", s.diverged},
         {"divergence_step", s.divergence_step ? json(*s.divergence_step) : json(nullptr)},
         {"divergence_message", s.divergence_message},
         {"regret_ok", s.regret_ok ? json(*s.regret_ok) : json(nullptr)},
         {"regret_first_violation", s.regret_first_violation ? json(*s.regret_first_violation) : json(nullptr)},
         {"lipschitz_surrogate", s.lipschitz_surrogate},
         {"flags", flags_to_string(s.flags)},
         {"flag_bits", s.flags}};
  if (s.standardization) {
    json mean = json::array();
    json scale = json::array();
    for (const double v : s.standardization->mean) mean.push_back(number(v));
    for (const double v : s.standardization->scale) scale.push_back(number(v));
    j["standardization"] = {{"mean", mean}, {"scale", scale}};
  } else {
    j["standardization"] = nullptr;
  }
  return j;
}

json sweep_row_json(const SweepRow& r) {
  return {{"alpha", optional_number(r.alpha)},
          {"c", optional_number(r.c)},
          {"lr", optional_number(r.lr)},
          {"seed", r.seed},
          {"error", r.error},
          {"summary", summary_to_json(r.summary)}};
}

}  // namespace

void write_run_csv(std::ostream& out, const std::vector<RunRecord>& rows) {
  out << kRunCsvHeader << '\n';
  std::string line;
  for (const RunRecord& r : rows) {
    line = std::to_string(r.t);
    for (const double v : {r.eta, r.r_bar, r.grad_sq_sum, r.grad_sq_sum_prime, r.train_loss, r.eval_loss}) {
      line += ',';
      line += format_double(v);
    }
    put_optional(line, r.d_t);
    put_optional(line, r.regret_lhs);
    put_optional(line, r.regret_rhs);
    line += ',';
    line += flags_to_string(r.flags);
    out << line << '\n';
  }
}

std::string run_csv(const std::vector<RunRecord>& rows) {
  std::ostringstream out;
  write_run_csv(out, rows);
  return out.str();
}

std::string run_json(const RunResult& result) {
  json rows = json::array();
  for (const RunRecord& r : result.rows) rows.push_back(row_json(r));
  json j{{"rows", rows}, {"summary", summary_to_json(result.summary)}};
  return j.dump(2) + "\n";
}

std::string summary_json(const RunSummary& summary) { return summary_to_json(summary).dump(2) + "\n"; }

RunSummary parse_summary_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("summary: ") + e.what());
  }
  try {
    RunSummary s;
    s.problem = j.at("problem").get<std::string>();
    s.schedule = j.at("schedule").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.steps_requested = j.at("steps_requested").get<std::size_t>();
    s.steps_completed = j.at("steps_completed").get<std::size_t>();
    s.r_eps = read_number(j, "r_eps");
    s.initial_loss = read_number(j, "initial_loss");
    s.final_loss = read_number(j, "final_loss");
    s.weighted_average_loss = read_number(j, "weighted_average_loss");
    s.poly_average_loss = read_number(j, "poly_average_loss");
    s.best_loss = read_number(j, "best_loss");
    s.best_candidate = j.at("best_candidate").get<std::string>();
    s.best_step = j.at("best_step").get<std::size_t>();
    s.r_bar_final = read_number(j, "r_bar_final");
    s.tau = j.at("tau").get<std::size_t>();
    s.tau_score = read_number(j, "tau_score");
    s.max_ratio_bound = read_number(j, "max_ratio_bound");
    s.max_ratio_ok = j.at("max_ratio_ok").get<bool>();
    s.d0 = read_optional_number(j, "d0");
    s.d_final = read_optional_number(j, "d_final");
    s.diverged = j.at("diverged").get<bool>();
    if (!j.at("divergence_step").is_null()) s.divergence_step = j.at("divergence_step").get<std::size_t>();
    s.divergence_message = j.at("divergence_message").get<std::string>();
    if (!j.at("regret_ok").is_null()) s.regret_ok = j.at("regret_ok").get<bool>();
    if (!j.at("regret_first_violation").is_null()) {
      s.regret_first_violation = j.at("regret_first_violation").get<std::size_t>();
    }
    s.lipschitz_surrogate = j.at("lipschitz_surrogate").get<bool>();
    s.flags = j.at("flag_bits").get<std::uint32_t>();
    if (!j.at("standardization").is_null()) {
      Standardization st;
      const json& sj = j.at("standardization");
      for (std::size_t i = 0; i < sj.at("mean").size(); ++i) {
        st.mean.push_back(read_number(json{{"v", sj.at("mean")[i]}}, "v"));
      }
      for (std::size_t i = 0; i < sj.at("scale").size(); ++i) {
        st.scale.push_back(read_number(json{{"v", sj.at("scale")[i]}}, "v"));
      }
      s.standardization = std::move(st);
    }
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("summary: ") + e.what());
  }
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "alpha,c,lr,seed,problem,schedule,r_eps,initial_loss,final_loss,best_loss,best_candidate,r_bar_final,tau,"
      "diverged,divergence_step,error\n";
  for (const SweepRow& r : rows) {
    std::string line;
    if (r.alpha) line += format_double(*r.alpha);
    line += ',';
    if (r.c) line += format_double(*r.c);
    line += ',';
    if (r.lr) line += format_double(*r.lr);
    line += ',' + std::to_string(r.seed);
    const RunSummary& s = r.summary;
    line += ',' + s.problem + ',' + s.schedule;
    for (const double v : {s.r_eps, s.initial_loss, s.final_loss, s.best_loss}) line += ',' + format_double(v);
    line += ',' + s.best_candidate;
    line += ',' + format_double(s.r_bar_final);
    line += ',' + std::to_string(s.tau);
    line += s.diverged ? ",1," : ",0,";
    if (s.divergence_step) line += std::to_string(*s.divergence_step);
    line += ',';
    // Keep the error in one field.
    std::string err = r.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    }
    line += err;
    out += line + '\n';
  }
  return out;
}

std::string sweep_json(const std::vector<SweepRow>& rows) {
  json j = json::array();
  for (const SweepRow& r : rows) j.push_back(sweep_row_json(r));
  return j.dump(2) + "\n";
}

std::string resolve_output_path(const std::string& path) {
  const char* dir = std::getenv("DOGSGD_OUTPUT_DIR");
  const std::filesystem::path p(path);
  if (dir == nullptr || *dir == '\0' || p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

void write_file(const std::string& path, std::string_view text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error("failed writing '" + path + "'");
}

void emit(const RunResult& result, const std::string& path, Format format) {
  if (format == Format::Json) {
    write_file(path, run_json(result));
    return;
  }
  write_file(path, run_csv(result.rows));
  write_file(path + ".summary.json", summary_json(result.summary));
}

void emit(const std::vector<SweepRow>& rows, const std::string& path, Format format) {
  if (rows.empty()) throw InputError("emit: empty sweep table");
  write_file(path, format == Format::Json ? sweep_json(rows) : sweep_csv(rows));
}

}  // namespace dogsgd
