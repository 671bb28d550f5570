#pragma once

#include <cstddef>
#include <limits>

#include "dogsgd/param_vector.hpp"

namespace dogsgd {

inline constexpr double kDefaultPolyGamma = 8.0;

/// Output points of a run, maintained online in O(dim) memory:
///
///  - the r̄-weighted average x̄_t = sum_{k<t} r̄_k x_k / sum_{k<t} r̄_k,
///    snapshotted at the step tau maximizing S_t = sum_{i<t} r̄_i / r̄_t
///    (ties go to the larger t);
///  - the uniform average of x_0 .. x_{t-1};
///  - the polynomial-decay average with parameter gamma.
struct AverageState {
  ParamVector weighted_sum;
  double weight_total = 0.0;
  ParamVector uniform_sum;
  std::size_t count = 0;  // iterates recorded so far

  ParamVector poly_avg;
  double gamma = kDefaultPolyGamma;

  double best_score = -std::numeric_limits<double>::infinity();
  ParamVector best_snapshot;
  std::size_t tau = 0;

  /// All sums empty; poly_avg starts at x0.
  static AverageState start(const ParamVector& x0, double gamma = kDefaultPolyGamma);

  bool has_snapshot() const noexcept { return !best_snapshot.empty(); }
};

/// Scores step t (t = avg.count) against the running best and then adds x_t
/// with weight r_bar_t. prefix_weight is sum_{i<t} r̄_i, i.e. weight_total
/// before this call. At t = 0 there is nothing to average and no score.
void record(AverageState& avg, const ParamVector& x_t, double r_bar_t, double prefix_weight);

/// Scores the terminal step T = avg.count without adding x_T, so that tau
/// ranges over t <= T.
void finalize(AverageState& avg, double r_bar_T, double prefix_weight);

/// Current weighted average of the recorded iterates.
ParamVector weighted_average(const AverageState& avg);

/// x̄_t = (1 - c) x̄_{t-1} + c x_t with c = (1 + gamma) / (t + gamma).
/// Throws ParameterError for t = 0.
void poly_update(AverageState& avg, const ParamVector& x_t, std::size_t t);

/// (1 / t) sum_{k<t} x_k. t must equal the number of recorded iterates.
ParamVector uniform_average(const AverageState& avg, std::size_t t);

}  // namespace dogsgd
