#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dogsgd/param_vector.hpp"
#include "dogsgd/schedules.hpp"
#include "dogsgd/state.hpp"

namespace dogsgd {

/// Euclidean projection onto the feasible set: either all of R^d or a closed
/// ball around a center.
class Projection {
 public:
  static Projection unconstrained() { return Projection(); }
  static Projection ball(ParamVector center, double radius);

  bool is_unconstrained() const noexcept { return !radius_.has_value(); }
  std::optional<double> radius() const noexcept { return radius_; }
  const ParamVector& center() const noexcept { return center_; }

  void apply(std::span<double> x) const;
  ParamVector operator()(const ParamVector& x) const {
    ParamVector y = x;
    apply(y.span());
    return y;
  }

 private:
  Projection() = default;
  ParamVector center_;
  std::optional<double> radius_;
};

/// Step sizes above this multiple of eta_0 * (1 + ||x_0||) / r_eps are treated
/// as divergence. The rescaling keeps the guard independent of alpha: DoG's
/// step size legitimately grows by about r̄_t / r_eps.
inline constexpr double kDivergenceRatio = 1e6;

/// What one call to step() did.
struct StepInfo {
  std::size_t t = 0;
  double eta = 0.0;  // for per-group DoG, the largest group step size
  double r_bar = 0.0;
  double grad_sq_sum = 0.0;
  double grad_sq_sum_prime = 0.0;
  double lbar = 0.0;
  double grad_norm_sq = 0.0;
  std::uint32_t flags = kFlagNone;
  std::vector<double> group_etas;  // per-group DoG only
};

/// Fresh state at x0. Throws InputError on non-finite x0 and ParameterError
/// unless r_eps > 0.
RunState init_state(const ParamVector& x0, double r_eps);

/// Splits the coordinates into groups for per-group DoG. The ranges must
/// partition [0, dim); each group gets r_eps = alpha * (1 + ||x0ˡ||).
void init_groups(RunState& state, std::span<const IndexRange> ranges, double alpha);

/// One projected-SGD step with gradient g observed at state.iterate:
///   1. r̄_t = max(r̄_{t-1}, ||x_t - x_0||)
///   2. G_t = G_{t-1} + ||g_t||^2, L̄_t updated from local_bound
///      (or from ||g_t|| when the problem provides no bound)
///   3. eta_t from the schedule
///   4. x_{t+1} = projection(x_t - eta_t g_t)
///   5. t <- t + 1
/// Throws InputError for a bad gradient and DivergenceError (carrying t) for
/// a non-finite or runaway step size or iterate.
StepInfo step(RunState& state, std::span<const double> g, const Schedule& schedule, const Projection& projection,
              std::optional<double> local_bound = std::nullopt);

}  // namespace dogsgd
