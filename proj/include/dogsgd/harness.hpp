#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dogsgd/analysis.hpp"
#include "dogsgd/config.hpp"
#include "dogsgd/dataset.hpp"
#include "dogsgd/param_vector.hpp"
#include "dogsgd/problems.hpp"

namespace dogsgd {

/// One logged step. Rows are written every eval_every steps; step-size
/// quantities are those used at step t, losses are evaluated at x_t.
/// eval_loss is the best loss among the checkpoint candidates at t (raw
/// iterate, weighted average, polynomial average).
struct RunRecord {
  std::size_t t = 0;
  double eta = 0.0;
  double r_bar = 0.0;
  double grad_sq_sum = 0.0;
  double grad_sq_sum_prime = 0.0;
  double train_loss = 0.0;
  double eval_loss = 0.0;
  std::optional<double> d_t;  // when x* is known
  std::optional<double> regret_lhs;  // DoG-like schedules with a reference point
  std::optional<double> regret_rhs;
  std::uint32_t flags = kFlagNone;
};

struct RunSummary {
  std::string problem;
  std::string schedule;
  std::uint64_t seed = 0;
  std::size_t steps_requested = 0;
  std::size_t steps_completed = 0;
  double r_eps = 0.0;

  double initial_loss = 0.0;
  double final_loss = 0.0;  // raw iterate at the end of the run
  double weighted_average_loss = 0.0;
  double poly_average_loss = 0.0;
  double best_loss = 0.0;
  std::string best_candidate = "iterate";  // iterate | weighted | poly
  std::size_t best_step = 0;

  double r_bar_final = 0.0;  // r̄_T
  std::size_t tau = 0;
  double tau_score = 0.0;
  double max_ratio_bound = 0.0;
  bool max_ratio_ok = true;

  std::optional<double> d0;
  std::optional<double> d_final;

  bool diverged = false;
  std::optional<std::size_t> divergence_step;
  std::string divergence_message;

  std::optional<bool> regret_ok;
  std::optional<std::size_t> regret_first_violation;

  bool lipschitz_surrogate = false;
  std::uint32_t flags = kFlagNone;  // union of all step flags

  std::optional<Standardization> standardization;
};

struct RunResult {
  std::vector<RunRecord> rows;
  RunSummary summary;
  ParamVector final_iterate;
  ParamVector best_point;
};

struct RunOptions {
  /// Reference point for the regret columns; defaults to the problem's optimum.
  std::optional<ParamVector> reference_point;
  /// When set, receives the full trajectory (memory grows as steps x dim).
  Trace* trace = nullptr;
};

/// Builds the problem described by spec for a given run seed.
std::unique_ptr<ProblemOracle> make_problem(const ProblemSpec& spec, std::uint64_t seed);

/// r_eps for a run: explicit override, then the problem's own value, then
/// alpha (1 + ||x_0||).
double resolve_r_eps(const ExperimentConfig& config, const ProblemOracle& problem);

/// Executes config.steps steps for one seed. Divergence does not throw: the
/// run stops and the summary carries the flag and the step index.
RunResult run(const ExperimentConfig& config, std::uint64_t seed, const RunOptions& options = {});

/// Same, on a prebuilt problem (config.problem is ignored).
RunResult run(const ExperimentConfig& config, const ProblemOracle& problem, std::uint64_t seed,
              const RunOptions& options = {});

struct SweepRow {
  std::optional<double> alpha;
  std::optional<double> c;
  std::optional<double> lr;
  std::uint64_t seed = 0;
  RunSummary summary;
  std::string error;  // non-empty when the run could not be set up
};

/// Cartesian product of the axes times the seeds, each an independent run,
/// executed in parallel. Rows are ordered by (alpha, c, lr, seed).
std::vector<SweepRow> sweep(const ExperimentConfig& config);

/// The config used for one sweep point.
ExperimentConfig sweep_point(const ExperimentConfig& config, std::optional<double> alpha, std::optional<double> c,
                             std::optional<double> lr);

/// Index of the row with the lowest best_loss among rows that neither
/// diverged nor failed; nullopt if there is none.
std::optional<std::size_t> select_best(const std::vector<SweepRow>& rows);

}  // namespace dogsgd
