#include "dogsgd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dogsgd/errors.hpp"
#include "dogsgd/kernels.hpp"
#include "dogsgd/rng.hpp"

namespace dogsgd {

Certificate Certificate::evaluate(std::string name, std::vector<double> lhs, std::vector<double> rhs) {
  if (lhs.size() != rhs.size()) throw InputError("certificate '" + name + "': side lengths differ");
  Certificate c;
  c.name = std::move(name);
  for (std::size_t t = 0; t < lhs.size(); ++t) {
    if (!(lhs[t] <= rhs[t] + kCertificateTolerance * std::abs(rhs[t]))) {
      c.satisfied = false;
      c.first_violation = t;
      break;
    }
  }
  c.lhs = std::move(lhs);
  c.rhs = std::move(rhs);
  return c;
}

void Trace::validate() const {
  const std::size_t t = steps();
  if (iterates.size() != t + 1) throw InputError("trace: need T + 1 iterates");
  if (r_bar.size() != t + 1) throw InputError("trace: need T + 1 values of r_bar");
  if (grad_sq_sum_prime.size() != t) throw InputError("trace: need T values of G'");
  if (!eta.empty() && eta.size() != t) throw InputError("trace: need T step sizes");
  if (!(r_eps > 0.0)) throw InputError("trace: r_eps missing");
}

Trace record_trace(const ProblemOracle& problem, const Schedule& schedule, double r_eps, std::size_t steps,
                   std::uint64_t seed, const Projection& projection) {
  validate(schedule);
  RunState state = init_state(problem.initial_point(), r_eps);
  Trace trace;
  trace.r_eps = r_eps;
  trace.iterates.reserve(steps + 1);
  trace.gradients.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    trace.iterates.push_back(state.iterate);
    ParamVector g = problem.sample_grad(state.iterate, RngKey{seed, t});
    const StepInfo info = step(state, g, schedule, projection, problem.lipschitz_at(state.iterate));
    trace.gradients.push_back(std::move(g));
    trace.r_bar.push_back(info.r_bar);
    trace.grad_sq_sum_prime.push_back(info.grad_sq_sum_prime);
    trace.eta.push_back(info.eta);
  }
  trace.iterates.push_back(state.iterate);
  trace.r_bar.push_back(std::max(state.r_bar, kernels::distance(state.iterate, state.anchor)));
  return trace;
}

Certificate regret_certificate(const Trace& trace, const ParamVector& x_star) {
  trace.validate();
  if (x_star.dim() != trace.iterates.front().dim()) throw InputError("regret certificate: x* has the wrong dimension");
  const std::size_t steps = trace.steps();
  std::vector<double> lhs(steps + 1, 0.0);
  std::vector<double> rhs(steps + 1, 0.0);
  double sum = 0.0;
  double dbar = kernels::distance(trace.iterates[0], x_star);
  std::vector<double> diff(x_star.dim());
  for (std::size_t k = 0; k < steps; ++k) {
    const ParamVector& x = trace.iterates[k];
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x[i] - x_star[i];
    sum += trace.r_bar[k] * kernels::dot(trace.gradients[k], diff);
    const std::size_t t = k + 1;
    dbar = std::max(dbar, kernels::distance(trace.iterates[t], x_star));
    const double rb = trace.r_bar[t];
    lhs[t] = sum;
    rhs[t] = rb * (2.0 * dbar + rb) * std::sqrt(trace.grad_sq_sum_prime[k]);
  }
  return Certificate::evaluate("weighted_regret", std::move(lhs), std::move(rhs));
}

std::vector<double> noise_term(const Trace& trace, const ParamVector& x_star, std::span<const ParamVector> full_grads) {
  trace.validate();
  const std::size_t steps = trace.steps();
  if (full_grads.size() != steps) throw InputError("noise term: need one full gradient per step");
  std::vector<double> out(steps + 1, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const ParamVector& x = trace.iterates[k];
    const ParamVector& g = trace.gradients[k];
    const ParamVector& f = full_grads[k];
    if (f.dim() != x.dim()) throw InputError("noise term: full gradient has the wrong dimension");
    double inner = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) inner += (g[i] - f[i]) * (x[i] - x_star[i]);
    sum += trace.r_bar[k] * inner;
    out[k + 1] = sum;
  }
  return out;
}

StabilityReport stability_check(const Trace& trace, double d0, const std::optional<ParamVector>& x_star,
                                bool noiseless) {
  trace.validate();
  if (!(std::isfinite(d0) && d0 > 0.0)) throw ParameterError("stability check: d0 must be positive");
  StabilityReport report;
  report.precondition_ok = trace.r_eps <= 3.0 * d0;
  report.radius = Certificate::evaluate("r_bar_within_3d0", trace.r_bar, std::vector<double>(trace.r_bar.size(), 3.0 * d0));
  if (noiseless && x_star) {
    std::vector<double> dist;
    dist.reserve(trace.iterates.size());
    for (const ParamVector& x : trace.iterates) dist.push_back(kernels::distance(x, *x_star));
    std::vector<double> bound(dist.size(), 2.0 * d0);
    report.distance = Certificate::evaluate("d_within_2d0", std::move(dist), std::move(bound));
  }
  return report;
}

// ------------------------------------------------------------------ lemmas

namespace {

bool le_with_slack(double lhs, double rhs, double scale) { return lhs <= rhs + kLemmaTolerance * scale; }

void require_nondecreasing(std::span<const double> a, bool positive, const char* who) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || (positive ? !(a[i] > 0.0) : !(a[i] >= 0.0))) {
      throw InputError(std::string(who) + ": entries must be " + (positive ? "positive" : "non-negative"));
    }
    if (i > 0 && a[i] < a[i - 1]) throw InputError(std::string(who) + ": sequence must be nondecreasing");
  }
}

double log_plus(double z) { return 1.0 + std::log(z); }

}  // namespace

double max_ratio_lower_bound(std::size_t horizon, double s0, double s_last) {
  return (static_cast<double>(horizon) / log_plus(s_last / s0) - 1.0) / std::numbers::e;
}

bool verify_max_ratio_lemma(std::span<const double> s) {
  if (s.size() < 2) throw InputError("max-ratio lemma: need at least two terms");
  require_nondecreasing(s, true, "max-ratio lemma");
  const std::size_t horizon = s.size() - 1;
  double prefix = 0.0;
  double best = 0.0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    best = std::max(best, prefix / s[t]);
    prefix += s[t];
  }
  const double bound = max_ratio_lower_bound(horizon, s.front(), s.back());
  return le_with_slack(bound, best, std::max(std::abs(bound), best));
}

bool verify_adagrad_algebra(std::span<const double> a) {
  if (a.empty()) throw InputError("adagrad algebra: empty sequence");
  require_nondecreasing(a, false, "adagrad algebra");
  double lhs = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    if (a[k] > 0.0) lhs += (a[k] - a[k - 1]) / std::sqrt(a[k]);
    const double rhs = 2.0 * (std::sqrt(a[k]) - std::sqrt(a[0]));
    if (!le_with_slack(lhs, rhs, std::max(lhs, std::sqrt(a[k])))) return false;
  }
  return true;
}

bool verify_sequence_product_bound(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("sequence product bound: lengths differ");
  if (a.empty()) throw InputError("sequence product bound: empty sequences");
  require_nondecreasing(a, false, "sequence product bound");
  double weighted = 0.0;
  double magnitude = 0.0;
  double partial = 0.0;
  double max_partial = 0.0;
  double b_mass = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (!std::isfinite(b[t])) throw InputError("sequence product bound: non-finite b");
    weighted += a[t] * b[t];
    magnitude += std::abs(a[t] * b[t]);
    partial += b[t];
    b_mass += std::abs(b[t]);
    max_partial = std::max(max_partial, std::abs(partial));
    if (!le_with_slack(std::abs(weighted), 2.0 * a[t] * max_partial, magnitude + a[t] * b_mass)) return false;
  }
  return true;
}

bool verify_log_sum_bound(double a_minus1, std::span<const double> a) {
  if (!(std::isfinite(a_minus1) && a_minus1 > 0.0)) throw InputError("log-sum bound: a_{-1} must be positive");
  if (a.empty()) throw InputError("log-sum bound: empty sequence");
  if (a.front() < a_minus1) throw InputError("log-sum bound: sequence must be nondecreasing");
  require_nondecreasing(a, true, "log-sum bound");
  double sum = 0.0;
  double prev = a_minus1;
  for (const double ak : a) {
    const double lp = log_plus(ak / a_minus1);
    sum += (ak - prev) / (ak * lp * lp);
    prev = ak;
    if (!le_with_slack(sum, 1.0, 1.0)) return false;
  }
  return true;
}

double red_score(double err_x, double err_dog) {
  if (!(err_dog > 0.0)) throw ParameterError("RED: undefined for err_dog = 0");
  if (!(err_dog <= 1.0)) throw ParameterError("RED: err_dog must lie in (0, 1]");
  if (!(err_x >= 0.0 && err_x <= 1.0)) throw ParameterError("RED: err_x must lie in [0, 1]");
  return (err_dog - err_x) / err_dog;
}

// ---------------------------------------------------------- lemma suites

bool LemmaSuiteReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.failures == 0; });
}

namespace {

// Nondecreasing sequence with a mix of flat stretches, small drifts and
// occasional large jumps; starts at `start`.
std::vector<double> random_monotone(CounterRng& rng, std::size_t len, double start) {
  std::vector<double> s(len);
  double v = start;
  for (std::size_t i = 0; i < len; ++i) {
    if (i > 0) {
      const double u = rng.uniform();
      if (u < 0.3) {
        // flat
      } else if (u < 0.85) {
        v += v * rng.uniform() * 0.5 + rng.uniform() * 1e-3;
      } else if (v < 1e100) {
        v *= std::pow(10.0, rng.uniform(0.0, 6.0));
        v += rng.uniform();
      }
    }
    s[i] = v;
  }
  return s;
}

double log_uniform(CounterRng& rng, double lo_exp, double hi_exp) { return std::pow(10.0, rng.uniform(lo_exp, hi_exp)); }

std::vector<std::vector<double>> adversarial_positive() {
  std::vector<std::vector<double>> out;
  out.push_back(std::vector<double>(11, 1.0));
  out.push_back({1.0, 1e9});
  std::vector<double> jump(50, 1.0);
  std::fill(jump.begin() + 25, jump.end(), 1e6);
  out.push_back(jump);
  std::vector<double> geo(21);
  for (std::size_t i = 0; i < geo.size(); ++i) geo[i] = std::ldexp(1.0, static_cast<int>(i));
  out.push_back(geo);
  std::vector<double> sq(200);
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::sqrt(static_cast<double>(i + 1));
  out.push_back(sq);
  return out;
}

}  // namespace

LemmaSuiteReport run_lemma_suites(std::size_t cases, std::uint64_t seed) {
  LemmaSuiteReport report;
  const auto adversarial = adversarial_positive();

  auto run = [&](const std::string& lemma, std::uint64_t stream, auto&& check_random, auto&& check_fixed) {
    LemmaSuiteReport::Entry e{lemma, 0, 0};
    for (std::size_t c = 0; c < cases; ++c) {
      CounterRng rng(RngKey{seed, c}, stream);
      ++e.cases;
      if (!check_random(rng)) ++e.failures;
    }
    for (const auto& s : adversarial) {
      ++e.cases;
      if (!check_fixed(s)) ++e.failures;
    }
    report.entries.push_back(e);
  };

  run(
      "max_ratio", 11,
      [](CounterRng& rng) {
        const auto len = 2 + static_cast<std::size_t>(rng.below(300));
        return verify_max_ratio_lemma(random_monotone(rng, len, log_uniform(rng, -6, 3)));
      },
      [](const std::vector<double>& s) { return verify_max_ratio_lemma(s); });

  run(
      "adagrad_algebra", 12,
      [](CounterRng& rng) {
        const auto len = 1 + static_cast<std::size_t>(rng.below(300));
        const double start = rng.uniform() < 0.2 ? 0.0 : log_uniform(rng, -6, 3);
        return verify_adagrad_algebra(random_monotone(rng, len, start));
      },
      [](const std::vector<double>& s) {
        std::vector<double> with_zero(s);
        with_zero.insert(with_zero.begin(), 0.0);
        return verify_adagrad_algebra(s) && verify_adagrad_algebra(with_zero);
      });

  run(
      "sequence_product", 13,
      [](CounterRng& rng) {
        const auto len = 1 + static_cast<std::size_t>(rng.below(300));
        const double start = rng.uniform() < 0.2 ? 0.0 : log_uniform(rng, -6, 3);
        const auto a = random_monotone(rng, len, start);
        std::vector<double> b(len);
        const double scale = log_uniform(rng, -3, 3);
        for (double& v : b) v = scale * rng.normal();
        return verify_sequence_product_bound(a, b);
      },
      [](const std::vector<double>& a) {
        std::vector<double> alternating(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) alternating[i] = (i % 2 == 0) ? 1.0 : -1.0;
        std::vector<double> zeros(a.size(), 0.0);
        return verify_sequence_product_bound(a, alternating) && verify_sequence_product_bound(a, zeros);
      });

  run(
      "log_sum", 14,
      [](CounterRng& rng) {
        const auto len = 1 + static_cast<std::size_t>(rng.below(300));
        const double a_minus1 = log_uniform(rng, -6, 3);
        const double start = rng.uniform() < 0.3 ? a_minus1 : a_minus1 * log_uniform(rng, 0, 4);
        return verify_log_sum_bound(a_minus1, random_monotone(rng, len, start));
      },
      [](const std::vector<double>& s) { return verify_log_sum_bound(s.front(), s); });

  return report;
}

}  // namespace dogsgd
