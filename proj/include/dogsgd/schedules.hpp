#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include "dogsgd/state.hpp"

namespace dogsgd {

// Step-size rules. DoG and its relatives are "DoG-like":
// eta_t = r̄_t / sqrt(G'_t) with G'_t nondecreasing and G'_t >= G_t.

struct DoG {};

/// eta_t = c * r̄_t / sqrt(G_t). c = 1 reproduces DoG bit for bit.
struct ScaledDoG {
  double c = 1.0;
};

/// Tamed DoG with an inflated denominator; needs the horizon and a failure
/// probability. drop_theta replaces the log factor by 1, which suffices for
/// noiseless gradients.
struct TDoG {
  std::size_t horizon = 1;
  double delta = 0.1;
  bool drop_theta = false;
};

/// DoG applied per parameter group with eps_denom added under the root.
struct LDoG {
  double eps_denom = 1e-8;
};

struct ConstantSGD {
  double eta = 0.1;
};

/// peak * (1 + cos(pi t / T)) / 2, no warmup.
struct CosineSGD {
  double peak = 0.1;
  std::size_t horizon = 1;
};

/// rho / sqrt(G_t)
struct AdaGradNorm {
  double rho = 1.0;
};

using Schedule = std::variant<DoG, ScaledDoG, TDoG, LDoG, ConstantSGD, CosineSGD, AdaGradNorm>;

/// Throws ParameterError when a schedule parameter is out of range.
void validate(const Schedule& schedule);

std::string schedule_name(const Schedule& schedule);

/// True when the rule satisfies G'_t >= G_t (DoG, T-DoG, ScaledDoG with c <= 1),
/// i.e. when the weighted regret bound applies to its runs.
bool is_dog_like(const Schedule& schedule);

/// r̄_t / sqrt(G_t), or 0 when G_t = 0.
double dog_eta(const RunState& state);

/// log(60 log(6 t) / delta). Requires t >= 1 and delta in (0, 1].
double theta(std::size_t t, double delta);

/// G'_t of the tamed schedule:
///   8^4 theta_{T,delta}^2 log+^2(1 + t L̄_t^2 / L̄_0^2) (G_{t-1} + 16 L̄_t^2)
/// with log+(z) = 1 + log z. Reads t, G_{t-1}, L̄_t and L̄_0 from state.
double tdog_gprime(const RunState& state, std::size_t horizon, double delta, bool drop_theta = false);

/// r̄ˡ / sqrt(Gˡ + eps_denom) for group group_index (0 when the radicand is 0).
double ldog_eta(const GroupState& groups, std::size_t group_index, double eps_denom);

/// Step size of a non-DoG rule at state.step. Sets kFlagCosineClamped in
/// flags when a cosine schedule is queried beyond its horizon.
double baseline_eta(const Schedule& schedule, const RunState& state, std::uint32_t& flags);

}  // namespace dogsgd
