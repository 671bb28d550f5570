#include "dogsgd/schedules.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dogsgd/errors.hpp"

namespace dogsgd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void validate(const Schedule& schedule) {
  std::visit(overloaded{
                 [](const DoG&) {},
                 [](const ScaledDoG& s) {
                   if (!positive_finite(s.c)) throw ParameterError("scaled DoG: c must be positive");
                 },
                 [](const TDoG& s) {
                   if (s.horizon == 0) throw ParameterError("T-DoG: horizon must be positive");
                   if (!(s.delta > 0.0 && s.delta < 1.0)) throw ParameterError("T-DoG: delta must lie in (0, 1)");
                 },
                 [](const LDoG& s) {
                   if (!(std::isfinite(s.eps_denom) && s.eps_denom >= 0.0))
                     throw ParameterError("L-DoG: eps_denom must be non-negative");
                 },
                 [](const ConstantSGD& s) {
                   if (!positive_finite(s.eta)) throw ParameterError("SGD: eta must be positive");
                 },
                 [](const CosineSGD& s) {
                   if (!positive_finite(s.peak)) throw ParameterError("cosine SGD: peak must be positive");
                   if (s.horizon == 0) throw ParameterError("cosine SGD: horizon must be positive");
                 },
                 [](const AdaGradNorm& s) {
                   if (!positive_finite(s.rho)) throw ParameterError("AdaGrad-norm: rho must be positive");
                 },
             },
             schedule);
}

std::string schedule_name(const Schedule& schedule) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const DoG&) { os << "dog"; },
                 [&](const ScaledDoG& s) { os << "scaled_dog(c=" << s.c << ")"; },
                 [&](const TDoG& s) {
                   os << "tdog(T=" << s.horizon << ",delta=" << s.delta << (s.drop_theta ? ",theta=1" : "") << ")";
                 },
                 [&](const LDoG& s) { os << "ldog(eps=" << s.eps_denom << ")"; },
                 [&](const ConstantSGD& s) { os << "sgd(eta=" << s.eta << ")"; },
                 [&](const CosineSGD& s) { os << "cosine(peak=" << s.peak << ",T=" << s.horizon << ")"; },
                 [&](const AdaGradNorm& s) { os << "adagrad_norm(rho=" << s.rho << ")"; },
             },
             schedule);
  return os.str();
}

bool is_dog_like(const Schedule& schedule) {
  if (std::holds_alternative<DoG>(schedule) || std::holds_alternative<TDoG>(schedule)) return true;
  if (const auto* s = std::get_if<ScaledDoG>(&schedule)) return s->c <= 1.0;
  return false;
}

double dog_eta(const RunState& state) {
  if (state.grad_sq_sum <= 0.0) return 0.0;
  return state.r_bar / std::sqrt(state.grad_sq_sum);
}

double theta(std::size_t t, double delta) {
  if (t == 0) throw ParameterError("theta: t must be at least 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw ParameterError("theta: delta must lie in (0, 1]");
  return std::log(60.0 * std::log(6.0 * static_cast<double>(t)) / delta);
}

double tdog_gprime(const RunState& state, std::size_t horizon, double delta, bool drop_theta) {
  if (!(state.lbar_initial > 0.0)) {
    throw ParameterError("T-DoG: L̄_0 = 0, the run starts at a stationary point");
  }
  const double th = drop_theta ? 1.0 : theta(horizon, delta);
  const double ratio = state.lbar / state.lbar_initial;
  const double log_plus = 1.0 + std::log(1.0 + static_cast<double>(state.step) * ratio * ratio);
  constexpr double k8pow4 = 8.0 * 8.0 * 8.0 * 8.0;
  return k8pow4 * th * th * log_plus * log_plus * (state.grad_sq_sum_prev + 16.0 * state.lbar * state.lbar);
}

double ldog_eta(const GroupState& groups, std::size_t group_index, double eps_denom) {
  if (group_index >= groups.size()) {
    throw InputError("ldog_eta: group index " + std::to_string(group_index) + " out of range");
  }
  const ParamGroup& g = groups.groups[group_index];
  const double denom = g.grad_sq_sum() + eps_denom;
  if (denom <= 0.0) return 0.0;
  return g.r_bar / std::sqrt(denom);
}

double baseline_eta(const Schedule& schedule, const RunState& state, std::uint32_t& flags) {
  return std::visit(
      overloaded{
          [](const ConstantSGD& s) { return s.eta; },
          [&](const CosineSGD& s) {
            std::size_t t = state.step;
            if (t > s.horizon) {
              flags |= kFlagCosineClamped;
              t = s.horizon;
            }
            const double frac = static_cast<double>(t) / static_cast<double>(s.horizon);
            return s.peak * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
          },
          [&](const AdaGradNorm& s) {
            if (state.grad_sq_sum <= 0.0) return 0.0;
            return s.rho / std::sqrt(state.grad_sq_sum);
          },
          [](const auto&) -> double { throw ParameterError("baseline_eta: not a baseline schedule"); },
      },
      schedule);
}

}  // namespace dogsgd
