#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dogsgd/config.hpp"
#include "dogsgd/emit.hpp"
#include "dogsgd/errors.hpp"
#include "dogsgd/harness.hpp"
#include "dogsgd/red.hpp"

using namespace dogsgd;

namespace {

ExperimentConfig logistic_config(std::size_t steps) {
  ExperimentConfig c;
  c.problem.kind = ProblemSpec::Kind::Logistic;
  c.problem.n = 300;
  c.problem.d = 5;
  c.problem.classes = 3;
  c.problem.batch_size = 16;
  c.steps = steps;
  c.eval_every = 10;
  return c;
}

std::string config_error_field(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config parsing fills defaults and reads every section") {
    const ExperimentConfig c = parse_config(R"({
      "problem": {"kind": "logistic", "n": 500, "batch_size": 20},
      "schedule": {"kind": "tdog", "delta": 0.2},
      "steps": 300, "seeds": [3, 1], "alpha": 1e-6, "eval_every": 25,
      "sweep": {"alpha": [1e-8, 1e-6]}
    })");
    CHECK(c.problem.kind == ProblemSpec::Kind::Logistic);
    CHECK(c.problem.n == 500);
    CHECK(c.problem.batch_size == 20);
    CHECK(c.problem.classes == 5);
    const auto& t = std::get<TDoG>(c.schedule);
    CHECK(t.horizon == 300);
    CHECK(t.delta == 0.2);
    CHECK(c.seeds == std::vector<std::uint64_t>{3, 1});
    CHECK(c.alpha == 1e-6);
    CHECK(c.eval_every == 25);
    CHECK(c.sweep.alpha.size() == 2);
    CHECK(c.gamma == 8.0);

    // Canonical JSON parses back to the same config.
    const ExperimentConfig again = parse_config(config_to_json(c));
    CHECK(config_to_json(again) == config_to_json(c));
  }

  TEST_CASE("config errors name the offending field") {
    CHECK(config_error_field(R"({"problem": {"kind": "quadratic"}, "schedule": {"kind": "dog"}, "stepz": 3})") ==
          "stepz");
    CHECK(config_error_field(R"({"problem": {"kind": "quadratic", "dim": -1}, "schedule": {"kind": "dog"}})") ==
          "problem.dim");
    CHECK(config_error_field(R"({"problem": {"kind": "quadratic"}, "schedule": {"kind": "sgd", "eta": 0}})") ==
          "schedule.eta");
    CHECK(config_error_field(R"({"problem": {"kind": "quadratic"}, "schedule": {"kind": "magic"}})") ==
          "schedule.kind");
    CHECK(config_error_field(R"({"schedule": {"kind": "dog"}})") == "problem");
    CHECK(config_error_field(R"({"problem": {"kind": "quadratic"}, "schedule": {"kind": "dog"}, "alpha": "x"})") ==
          "alpha");
    CHECK(config_error_field(
              R"({"problem": {"kind": "quadratic"}, "schedule": {"kind": "dog"}, "sweep": {"c": []}})") ==
          "sweep.c");
    CHECK(config_error_field(R"({"problem": {"kind": "quadratic"}, "schedule": {"kind": "tdog", "delta": 1}})") ==
          "schedule.delta");
    CHECK(config_error_field("not json") == "<config>");
  }

  TEST_CASE("zero steps returns the initial state and no rows") {
    ExperimentConfig c = logistic_config(0);
    const RunResult r = run(c, 0);
    CHECK(r.rows.empty());
    CHECK(r.summary.steps_completed == 0);
    CHECK(r.summary.final_loss == r.summary.initial_loss);
    CHECK(r.summary.best_loss == r.summary.initial_loss);
    CHECK(r.summary.r_bar_final == r.summary.r_eps);
    CHECK(r.summary.r_eps == c.alpha);
    CHECK(r.summary.initial_loss == doctest::Approx(std::log(3.0)));
    CHECK_FALSE(r.summary.diverged);
  }

  TEST_CASE("nemirovski run: r_bar after T = 100 steps") {
    ExperimentConfig c;
    c.problem.kind = ProblemSpec::Kind::Nemirovski;
    c.problem.dim = 100;
    c.steps = 100;
    const RunResult r = run(c, 0);
    const double re = c.problem.r_eps;
    CHECK(r.summary.r_eps == re);
    // G_t = t + 1 from t = 1 on, so r̄_T = r_eps sqrt((T + 1) / 2).
    CHECK(r.summary.r_bar_final == doctest::Approx(re * std::sqrt(101.0 / 2.0)).epsilon(1e-12));
    CHECK_FALSE(r.summary.diverged);
  }

  TEST_CASE("row cadence and columns") {
    const RunResult r = run(logistic_config(200), 1);
    REQUIRE(r.rows.size() == 20);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      CHECK(r.rows[i].t == 10 * i);
      CHECK(r.rows[i].eval_loss <= r.rows[i].train_loss);
      CHECK_FALSE(r.rows[i].d_t.has_value());
    }
    CHECK(r.summary.steps_completed == 200);
    CHECK(r.summary.final_loss < r.summary.initial_loss);
    CHECK(r.summary.best_loss <= r.summary.final_loss);
    CHECK(r.summary.max_ratio_ok);
    CHECK(r.summary.lipschitz_surrogate);
    REQUIRE(r.summary.standardization.has_value());
    const std::string csv = run_csv(r.rows);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
    CHECK(csv.rfind(std::string(kRunCsvHeader) + "\n", 0) == 0);
  }

  TEST_CASE("regret columns on a problem with a known optimum") {
    ExperimentConfig c;
    c.problem.kind = ProblemSpec::Kind::LeastSquares;
    c.problem.dim = 5;
    c.steps = 500;
    c.eval_every = 50;
    const RunResult r = run(c, 2);
    CHECK(r.summary.regret_ok == true);
    CHECK(r.summary.d0.has_value());
    for (const auto& row : r.rows) {
      REQUIRE(row.regret_lhs.has_value());
      CHECK(*row.regret_lhs <= *row.regret_rhs * (1.0 + 1e-9));
      CHECK(row.d_t.has_value());
    }
  }

  TEST_CASE("summary matches an offline trace of the same run") {
    ExperimentConfig c;
    c.problem.kind = ProblemSpec::Kind::LeastSquares;
    c.problem.dim = 4;
    c.steps = 300;
    Trace tr;
    const RunResult r = run(c, 9, RunOptions{std::nullopt, &tr});
    CHECK(tr.steps() == 300);
    CHECK(tr.r_bar.back() == r.summary.r_bar_final);
    CHECK(tr.iterates.back() == r.final_iterate);
    const auto p = make_problem(c.problem, 9);
    const Certificate cert = regret_certificate(tr, *p->optimum());
    CHECK(cert.satisfied);
    const Trace again = record_trace(*p, c.schedule, r.summary.r_eps, 300, 9);
    CHECK(again.iterates.back() == r.final_iterate);
  }

  TEST_CASE("scaled DoG with a large multiplier stops cleanly when it diverges") {
    ExperimentConfig c;
    c.problem.kind = ProblemSpec::Kind::Quadratic;
    c.problem.dim = 20;
    c.problem.condition = 1e4;
    c.schedule = ScaledDoG{4.0};
    c.steps = 3000;
    RunResult r;
    CHECK_NOTHROW(r = run(c, 0));
    if (r.summary.diverged) {
      CHECK(r.summary.divergence_step.has_value());
      CHECK(r.summary.steps_completed == *r.summary.divergence_step);
      CHECK((r.summary.flags & kFlagDiverged) != 0);
      CHECK(std::isfinite(r.summary.best_loss));
    } else {
      CHECK(r.summary.steps_completed == 3000);
    }
  }

  TEST_CASE("divergence is reported, not thrown") {
    ExperimentConfig c;
    c.problem.kind = ProblemSpec::Kind::Quadratic;
    c.schedule = ConstantSGD{10.0};  // far above 2 / h_max
    c.steps = 2000;
    const RunResult r = run(c, 0);
    CHECK(r.summary.diverged);
    CHECK(r.summary.divergence_step.has_value());
    CHECK(r.final_iterate.all_finite());
  }

  TEST_CASE("runs are reproducible and independent of the thread count") {
    const ExperimentConfig c = logistic_config(300);
    const std::string a = run_csv(run(c, 4).rows);
    const std::string b = run_csv(run(c, 4).rows);
    CHECK(a == b);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(8);
    const std::string p8 = run_csv(run(c, 4).rows);
    omp_set_num_threads(1);
    const std::string p1 = run_csv(run(c, 4).rows);
    omp_set_num_threads(saved);
    CHECK(a == p8);
    CHECK(a == p1);
    CHECK(a != run_csv(run(c, 5).rows));
  }

  TEST_CASE("sweep cardinality, order and best selection") {
    ExperimentConfig c = logistic_config(100);
    c.seeds = {2, 0};
    c.sweep.alpha = {1e-4, 1e-8, 1e-6};
    const auto rows = sweep(c);
    REQUIRE(rows.size() == 6);
    CHECK(*rows[0].alpha == 1e-8);
    CHECK(rows[0].seed == 0);
    CHECK(rows[1].seed == 2);
    CHECK(*rows[5].alpha == 1e-4);
    for (const auto& r : rows) {
      CHECK(r.error.empty());
      CHECK(r.summary.r_eps == *r.alpha);
      CHECK(r.summary.steps_completed == 100);
    }
    // Same rows when run one at a time.
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto serial_rows = sweep(c);
    omp_set_num_threads(saved);
    CHECK(sweep_csv(rows) == sweep_csv(serial_rows));

    auto copy = rows;
    const auto best = select_best(copy);
    REQUIRE(best.has_value());
    copy[*best].summary.diverged = true;
    const auto next = select_best(copy);
    REQUIRE(next.has_value());
    CHECK(*next != *best);
    for (auto& r : copy) r.error = "x";
    CHECK_FALSE(select_best(copy).has_value());
  }

  TEST_CASE("sweep records failures as rows") {
    ExperimentConfig c;
    c.problem.kind = ProblemSpec::Kind::Quadratic;
    c.schedule = ConstantSGD{0.01};
    c.steps = 200;
    c.sweep.lr = {0.005, 10.0};
    const auto rows = sweep(c);
    REQUIRE(rows.size() == 2);
    CHECK_FALSE(rows[0].summary.diverged);
    CHECK(rows[1].summary.diverged);
    CHECK(select_best(rows) == 0);

    ExperimentConfig bad = c;
    bad.sweep = {};
    bad.sweep.c = {0.5};
    const auto failed = sweep(bad);
    REQUIRE(failed.size() == 1);
    CHECK_FALSE(failed[0].error.empty());
    CHECK_THROWS_AS(sweep(ExperimentConfig{}), ConfigError);
  }

  TEST_CASE("sweep over c and baseline learning rates") {
    ExperimentConfig c = logistic_config(100);
    c.sweep.c = {0.5, 1.0};
    const auto rows = sweep(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].summary.schedule.find("scaled_dog") == 0);

    ExperimentConfig s = logistic_config(100);
    s.schedule = ConstantSGD{0.1};
    for (int k = 0; k < 10; ++k) s.sweep.lr.push_back(std::pow(10.0, -3.0 + 4.0 * k / 9.0));
    CHECK(sweep(s).size() == 10);
  }

  TEST_CASE("emission is byte-identical and round-trips") {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "dogsgd_emit_test";
    std::filesystem::remove_all(dir);
    const RunResult r = run(logistic_config(100), 3);
    const std::string p1 = (dir / "a.csv").string();
    const std::string p2 = (dir / "b.csv").string();
    emit(r, p1, Format::Csv);
    emit(r, p2, Format::Csv);
    CHECK(read_file(p1) == read_file(p2));
    CHECK(read_file(p1 + ".summary.json") == read_file(p2 + ".summary.json"));

    const RunSummary back = parse_summary_json(read_file(p1 + ".summary.json"));
    CHECK(summary_json(back) == summary_json(r.summary));
    CHECK(back.final_loss == r.summary.final_loss);
    CHECK(back.r_bar_final == r.summary.r_bar_final);
    CHECK(back.tau == r.summary.tau);

    // Every CSV float parses back to the same double.
    std::istringstream csv(read_file(p1));
    std::string line;
    std::getline(csv, line);
    std::size_t i = 0;
    while (std::getline(csv, line)) {
      std::istringstream fields(line);
      std::string f;
      std::getline(fields, f, ',');
      std::getline(fields, f, ',');
      CHECK(std::stod(f) == r.rows[i].eta);
      for (int k = 0; k < 4; ++k) std::getline(fields, f, ',');
      CHECK(std::stod(f) == r.rows[i].train_loss);
      ++i;
    }
    CHECK(i == r.rows.size());

    emit(r, (dir / "run.json").string(), Format::Json);
    CHECK(read_file((dir / "run.json").string()).find("\"rows\"") != std::string::npos);
    CHECK_THROWS(emit(r, "/proc/nonexistent/dir/x.csv", Format::Csv));
    CHECK_THROWS_AS(emit(std::vector<SweepRow>{}, (dir / "s.csv").string(), Format::Csv), InputError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("non-finite summary values survive the JSON round trip") {
    RunSummary s;
    s.final_loss = INFINITY;
    s.best_loss = 1.0;
    const RunSummary back = parse_summary_json(summary_json(s));
    CHECK(std::isinf(back.final_loss));
  }

  TEST_CASE("output directory override") {
    ::setenv("DOGSGD_OUTPUT_DIR", "/tmp/outdir", 1);
    CHECK(resolve_output_path("run.csv") == "/tmp/outdir/run.csv");
    CHECK(resolve_output_path("/abs/run.csv") == "/abs/run.csv");
    ::unsetenv("DOGSGD_OUTPUT_DIR");
    CHECK(resolve_output_path("run.csv") == "run.csv");
  }

  TEST_CASE("RED table") {
    std::istringstream base("task,error\na,0.10\na,0.12\nb,0.3\n");
    std::istringstream dog("task,seed,error\na,0,0.10\nb,0,0.25\nc,0,0.5\n");
    const auto rows = red_table(read_task_errors(base), read_task_errors(dog));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].task == "a");
    CHECK(rows[0].pairs == 2);
    CHECK(rows[0].max == doctest::Approx(0.0));
    CHECK(rows[0].min == doctest::Approx(-0.2));
    CHECK(rows[0].median == doctest::Approx(-0.1));
    CHECK(rows[1].mean == doctest::Approx(-0.2));
    CHECK(red_csv(rows).rfind("task,pairs,mean,median,min,max\n", 0) == 0);

    std::istringstream no_error("task,err\na,1\n");
    CHECK_THROWS_AS(read_task_errors(no_error), ParseError);
    std::istringstream bad("error\nabc\n");
    CHECK_THROWS_AS(read_task_errors(bad), ParseError);
  }
}
