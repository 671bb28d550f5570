#include "dogsgd/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dogsgd/errors.hpp"
#include "dogsgd/kernels.hpp"

namespace dogsgd {

std::string flags_to_string(std::uint32_t flags) {
  static constexpr std::pair<std::uint32_t, const char*> kNames[] = {
      {kFlagZeroGradient, "zero_gradient"},
      {kFlagLipschitzSurrogate, "lipschitz_surrogate"},
      {kFlagCosineClamped, "cosine_clamped"},
      {kFlagDiverged, "diverged"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if ((flags & bit) == 0) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

Projection Projection::ball(ParamVector center, double radius) {
  if (!(std::isfinite(radius) && radius > 0.0)) throw ParameterError("ball projection: radius must be positive");
  if (!center.all_finite()) throw InputError("ball projection: center must be finite");
  Projection p;
  p.center_ = std::move(center);
  p.radius_ = radius;
  return p;
}

void Projection::apply(std::span<double> x) const {
  if (!radius_) return;
  if (x.size() != center_.dim()) throw InputError("projection: dimension mismatch");
  const double dist = kernels::distance(x, center_);
  if (dist <= *radius_) return;
  const double scale = *radius_ / dist;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = center_[i] + (x[i] - center_[i]) * scale;
}

RunState init_state(const ParamVector& x0, double r_eps) {
  if (x0.dim() == 0) throw InputError("init_state: x0 has dimension 0");
  if (!x0.all_finite()) throw InputError("init_state: x0 has a non-finite entry");
  if (!(std::isfinite(r_eps) && r_eps > 0.0)) throw ParameterError("init_state: r_eps must be positive");
  RunState s;
  s.iterate = x0;
  s.anchor = x0;
  s.r_eps = r_eps;
  s.r_bar = r_eps;
  return s;
}

void init_groups(RunState& state, std::span<const IndexRange> ranges, double alpha) {
  if (!(std::isfinite(alpha) && alpha > 0.0)) throw ParameterError("init_groups: alpha must be positive");
  if (ranges.empty()) throw InputError("init_groups: no groups");
  std::vector<IndexRange> sorted(ranges.begin(), ranges.end());
  std::sort(sorted.begin(), sorted.end(), [](const IndexRange& a, const IndexRange& b) { return a.begin < b.begin; });
  std::size_t next = 0;
  for (const IndexRange& r : sorted) {
    if (r.begin != next || r.end <= r.begin) {
      throw InputError("init_groups: ranges must partition [0, dim) into non-empty pieces");
    }
    next = r.end;
  }
  if (next != state.dim()) throw InputError("init_groups: ranges must cover [0, dim)");

  state.groups.groups.clear();
  for (const IndexRange& r : ranges) {
    ParamGroup g;
    g.range = r;
    const auto x0 = state.anchor.span().subspan(r.begin, r.size());
    g.r_eps = alpha * (1.0 + kernels::norm(x0));
    g.r_bar = g.r_eps;
    state.groups.groups.push_back(g);
  }
}

namespace {

void check_eta(RunState& state, double eta) {
  if (!std::isfinite(eta)) throw DivergenceError(state.step, "non-finite step size");
  if (eta > 0.0 && state.eta_reference == 0.0) {
    state.eta_reference = eta * (1.0 + kernels::norm(state.anchor)) / state.r_eps;
  }
  if (state.eta_reference > 0.0 && eta > kDivergenceRatio * state.eta_reference) {
    throw DivergenceError(state.step, "step size exceeded the divergence threshold");
  }
}

// Per-group DoG: accumulators and update, group by group.
void step_groups(RunState& state, std::span<const double> g, const LDoG& rule, StepInfo& info) {
  if (state.groups.empty()) {
    ParamGroup whole;
    whole.range = {0, state.dim()};
    whole.r_eps = state.r_eps;
    whole.r_bar = state.r_eps;
    state.groups.groups.push_back(whole);
  }
  auto x = state.iterate.span();
  const auto x0 = state.anchor.span();
  for (ParamGroup& grp : state.groups.groups) {
    const auto lo = grp.range.begin;
    const auto len = grp.range.size();
    grp.r_bar = std::max(grp.r_bar, kernels::distance(x.subspan(lo, len), x0.subspan(lo, len)));
    grp.grad_sq.add(kernels::norm_sq(g.subspan(lo, len)));
  }
  info.group_etas.resize(state.groups.size());
  double largest = 0.0;
  for (std::size_t l = 0; l < state.groups.size(); ++l) {
    const double eta = ldog_eta(state.groups, l, rule.eps_denom);
    check_eta(state, eta);
    state.groups.groups[l].eta = eta;
    info.group_etas[l] = eta;
    largest = std::max(largest, eta);
  }
  for (const ParamGroup& grp : state.groups.groups) {
    for (std::size_t i = grp.range.begin; i < grp.range.end; ++i) x[i] -= grp.eta * g[i];
  }
  info.eta = largest;
}

}  // namespace

StepInfo step(RunState& state, std::span<const double> g, const Schedule& schedule, const Projection& projection,
              std::optional<double> local_bound) {
  if (g.size() != state.dim()) {
    throw InputError("step: gradient has dimension " + std::to_string(g.size()) + ", state has " +
                     std::to_string(state.dim()));
  }
  for (const double v : g) {
    if (!std::isfinite(v)) throw InputError("step: non-finite gradient entry at step " + std::to_string(state.step));
  }

  StepInfo info;
  info.t = state.step;

  // 1. distance from the anchor
  state.r_bar = std::max(state.r_bar, kernels::distance(state.iterate, state.anchor));

  // 2. gradient accumulators
  info.grad_norm_sq = kernels::norm_sq(g);
  state.grad_sq_sum_prev = state.grad_sq_sum;
  state.grad_sq_acc.add(info.grad_norm_sq);
  state.grad_sq_sum = state.grad_sq_acc.value();

  double bound = 0.0;
  if (local_bound) {
    if (!(std::isfinite(*local_bound) && *local_bound >= 0.0)) throw InputError("step: invalid local gradient bound");
    bound = *local_bound;
  } else {
    bound = std::sqrt(info.grad_norm_sq);
    state.lipschitz_surrogate = true;
  }
  state.lbar = std::max(state.lbar, bound);
  if (state.step == 0) state.lbar_initial = state.lbar;
  if (state.lipschitz_surrogate) info.flags |= kFlagLipschitzSurrogate;

  // 3. step size
  const double prev_prime = state.grad_sq_sum_prime;
  if (const auto* rule = std::get_if<LDoG>(&schedule)) {
    state.grad_sq_sum_prime = state.grad_sq_sum;
    step_groups(state, g, *rule, info);
  } else {
    double eta = 0.0;
    if (std::holds_alternative<DoG>(schedule)) {
      state.grad_sq_sum_prime = state.grad_sq_sum;
      eta = dog_eta(state);
    } else if (const auto* s = std::get_if<ScaledDoG>(&schedule)) {
      state.grad_sq_sum_prime = state.grad_sq_sum / (s->c * s->c);
      eta = s->c * dog_eta(state);
    } else if (const auto* s = std::get_if<TDoG>(&schedule)) {
      const double gp = tdog_gprime(state, s->horizon, s->delta, s->drop_theta);
      if (gp < state.grad_sq_sum) {
        throw InputError("T-DoG: G'_t < G_t at step " + std::to_string(state.step) +
                         "; the gradient exceeded the problem's local bound");
      }
      if (gp < prev_prime) throw InputError("T-DoG: G'_t decreased at step " + std::to_string(state.step));
      state.grad_sq_sum_prime = gp;
      eta = state.r_bar / std::sqrt(gp);
    } else {
      state.grad_sq_sum_prime = state.grad_sq_sum;
      eta = baseline_eta(schedule, state, info.flags);
    }
    check_eta(state, eta);
    info.eta = eta;
    // 4. projected update
    kernels::axpy(-eta, g, state.iterate.span());
  }
  if (state.grad_sq_sum == 0.0 && !std::holds_alternative<ConstantSGD>(schedule) &&
      !std::holds_alternative<CosineSGD>(schedule)) {
    info.flags |= kFlagZeroGradient;
  }

  projection.apply(state.iterate.span());
  if (!state.iterate.all_finite()) throw DivergenceError(state.step, "non-finite iterate");

  info.r_bar = state.r_bar;
  info.grad_sq_sum = state.grad_sq_sum;
  info.grad_sq_sum_prime = state.grad_sq_sum_prime;
  info.lbar = state.lbar;

  // 5.
  ++state.step;
  return info;
}

}  // namespace dogsgd
