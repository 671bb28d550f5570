// Command-line front end: run, sweep, verify, red.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dogsgd/analysis.hpp"
#include "dogsgd/config.hpp"
#include "dogsgd/emit.hpp"
#include "dogsgd/errors.hpp"
#include "dogsgd/harness.hpp"
#include "dogsgd/problems.hpp"
#include "dogsgd/red.hpp"

namespace {

using namespace dogsgd;

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::string> out,
            const std::string& format_name) {
  const ExperimentConfig cfg = load_config(config_path);
  const Format format = parse_format(format_name);
  const std::uint64_t s = seed.value_or(cfg.seeds.front());
  const RunResult result = run(cfg, s);
  const std::string path = resolve_output_path(out.value_or(cfg.output));
  emit(result, path, format);
  const RunSummary& sum = result.summary;
  std::printf("%s/%s seed=%llu steps=%zu final_loss=%s best_loss=%s (%s @ %zu) r_bar_T=%s tau=%zu%s\n",
              sum.problem.c_str(), sum.schedule.c_str(), static_cast<unsigned long long>(s), sum.steps_completed,
              format_double(sum.final_loss).c_str(), format_double(sum.best_loss).c_str(),
              sum.best_candidate.c_str(), sum.best_step, format_double(sum.r_bar_final).c_str(), sum.tau,
              sum.diverged ? " DIVERGED" : "");
  std::printf("wrote %s\n", path.c_str());
  return sum.diverged ? 2 : 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig cfg = load_config(config_path);
  const auto rows = sweep(cfg);
  const std::string dir = resolve_output_path(out_dir);
  emit(rows, (std::filesystem::path(dir) / "sweep.csv").string(), Format::Csv);
  emit(rows, (std::filesystem::path(dir) / "sweep.json").string(), Format::Json);
  write_file((std::filesystem::path(dir) / "config.json").string(), config_to_json(cfg) + "\n");
  std::size_t failed = 0;
  for (const auto& r : rows) failed += (r.summary.diverged || !r.error.empty()) ? 1 : 0;
  std::printf("%zu runs, %zu diverged or failed\n", rows.size(), failed);
  if (const auto best = select_best(rows)) {
    const SweepRow& b = rows[*best];
    std::printf("best: seed=%llu alpha=%s c=%s lr=%s best_loss=%s\n", static_cast<unsigned long long>(b.seed),
                b.alpha ? format_double(*b.alpha).c_str() : "-", b.c ? format_double(*b.c).c_str() : "-",
                b.lr ? format_double(*b.lr).c_str() : "-", format_double(b.summary.best_loss).c_str());
  }
  std::printf("wrote %s/sweep.csv\n", dir.c_str());
  return 0;
}

int cmd_verify(std::size_t cases, std::uint64_t seed) {
  bool ok = true;
  const LemmaSuiteReport report = run_lemma_suites(cases, seed);
  for (const auto& e : report.entries) {
    std::printf("%-28s %6zu cases  %zu failures\n", e.lemma.c_str(), e.cases, e.failures);
  }
  ok = ok && report.all_passed();

  // Regret and stability certificates on small DoG and T-DoG runs.
  const auto check = [&](const std::string& label, const ProblemOracle& p, const Schedule& sch, double r_eps,
                         std::size_t steps, std::uint64_t run_seed) {
    const Trace tr = record_trace(p, sch, r_eps, steps, run_seed);
    const Certificate c = regret_certificate(tr, *p.optimum());
    std::printf("%-28s %s\n", label.c_str(), c.satisfied ? "ok" : "VIOLATED");
    ok = ok && c.satisfied;
  };
  const auto quad = make_quadratic(20, 100.0);
  check("regret quadratic dog", *quad, DoG{}, 1e-4, 500, 0);
  const auto nem = nemirovski_instance(200, 0x1.0p-10);
  check("regret nemirovski dog", *nem, DoG{}, 0x1.0p-10, 200, 0);
  check("regret nemirovski tdog", *nem, TDoG{200, 0.1, true}, 0x1.0p-10, 200, 0);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto ls = least_squares_oracle(1.0, 1.0, 10, s);
    check("regret least_squares dog #" + std::to_string(s), *ls, DoG{}, 1e-4, 1000, s);
    check("regret least_squares tdog #" + std::to_string(s), *ls, TDoG{1000, 0.1, false}, 1e-4, 1000, s);
  }
  std::printf("%s\n", ok ? "all checks passed" : "FAILED");
  return ok ? 0 : 1;
}

int cmd_red(const std::string& baseline, const std::string& dog, std::optional<std::string> out) {
  const auto rows = red_table(load_task_errors(baseline), load_task_errors(dog));
  const std::string text = red_csv(rows);
  if (out) {
    write_file(resolve_output_path(*out), text);
  } else {
    std::cout << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-over-gradients SGD experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string format = "csv";
  auto* run_cmd = app.add_subcommand("run", "Run one seed and write per-step rows and a summary");
  run_cmd->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "Seed (default: first seed in the config)");
  run_cmd->add_option("--out", out, "Output path (default: config output)");
  run_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string sweep_config;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every axis point and seed of the config");
  sweep_cmd->add_option("--config", sweep_config, "JSON config with a sweep section")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", sweep_out, "Output directory")->required();

  std::size_t cases = 1000;
  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Run the lemma property suites and certificate checks");
  verify_cmd->add_option("--cases", cases, "Random cases per lemma");
  verify_cmd->add_option("--seed", verify_seed, "Generator seed");

  std::string baseline;
  std::string dog;
  std::optional<std::string> red_out;
  auto* red_cmd = app.add_subcommand("red", "Relative error difference table from two result CSVs");
  red_cmd->add_option("--baseline", baseline, "CSV with task,error columns")->required()->check(CLI::ExistingFile);
  red_cmd->add_option("--dog", dog, "CSV with task,error columns")->required()->check(CLI::ExistingFile);
  red_cmd->add_option("--out", red_out, "Write the table here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(config_path, seed, out, format);
    if (*sweep_cmd) return cmd_sweep(sweep_config, sweep_out);
    if (*verify_cmd) return cmd_verify(cases, verify_seed);
    if (*red_cmd) return cmd_red(baseline, dog, red_out);
  } catch (const dogsgd::ConfigError& e) {
    std::fprintf(stderr, "config error in '%s': %s\n", e.field().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
