#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dogsgd/harness.hpp"

namespace dogsgd {

enum class Format { Csv, Json };

/// "csv" or "json"; throws ConfigError otherwise.
Format parse_format(std::string_view name);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Run rows, one per logged step. Header order is fixed:
///   t,eta,r_bar,G,G_prime,train_loss,eval_loss,d_t,regret_lhs,regret_rhs,flag
/// Missing optional values are empty fields; flag is '|'-joined names.
inline constexpr std::string_view kRunCsvHeader =
    "t,eta,r_bar,G,G_prime,train_loss,eval_loss,d_t,regret_lhs,regret_rhs,flag";
void write_run_csv(std::ostream& out, const std::vector<RunRecord>& rows);
std::string run_csv(const std::vector<RunRecord>& rows);

/// {"rows": [...], "summary": {...}} with the CSV column names as keys.
std::string run_json(const RunResult& result);
std::string summary_json(const RunSummary& summary);
RunSummary parse_summary_json(std::string_view text);

/// Sweep table: alpha,c,lr,seed,problem,schedule,r_eps,initial_loss,
/// final_loss,best_loss,best_candidate,r_bar_final,tau,diverged,
/// divergence_step,error.
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_json(const std::vector<SweepRow>& rows);

/// Relative paths are placed under $DOGSGD_OUTPUT_DIR when it is set.
std::string resolve_output_path(const std::string& path);

/// Writes text to path; throws Error when the file cannot be written.
void write_file(const std::string& path, std::string_view text);

/// Run rows to path in the given format. CSV output also writes the summary
/// next to it as <path>.summary.json.
void emit(const RunResult& result, const std::string& path, Format format);

/// Throws InputError for an empty table.
void emit(const std::vector<SweepRow>& rows, const std::string& path, Format format);

}  // namespace dogsgd
