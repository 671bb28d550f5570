#include "dogsgd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

#include "dogsgd/averaging.hpp"
#include "dogsgd/errors.hpp"
#include "dogsgd/kernels.hpp"

namespace dogsgd {

std::unique_ptr<ProblemOracle> make_problem(const ProblemSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ProblemSpec::Kind::Quadratic:
      return make_quadratic(spec.dim, spec.condition);
    case ProblemSpec::Kind::LeastSquares:
      return least_squares_oracle(spec.a_bound, spec.b_bound, spec.dim, spec.instance_seed.value_or(seed),
                                  LeastSquaresOptions{spec.noise_fraction, spec.noiseless});
    case ProblemSpec::Kind::Logistic: {
      Dataset data = spec.dataset ? load_dataset(*spec.dataset, spec.label_column, spec.delimiter)
                                  : make_synthetic_classification(spec.n, spec.d, spec.classes,
                                                                  spec.data_seed.value_or(seed), spec.weight_scale);
      if (spec.batch_size == 0 || spec.batch_size > data.n) {
        throw ConfigError("problem.batch_size", "must lie in [1, n]");
      }
      return logistic_oracle(std::move(data), spec.batch_size);
    }
    case ProblemSpec::Kind::Nemirovski:
      return nemirovski_instance(spec.dim, spec.r_eps);
  }
  throw ConfigError("problem.kind", "unsupported");
}

double resolve_r_eps(const ExperimentConfig& config, const ProblemOracle& problem) {
  if (config.r_eps) return *config.r_eps;
  if (const auto preferred = problem.preferred_r_eps()) return *preferred;
  return config.alpha * (1.0 + kernels::norm(problem.initial_point()));
}

RunResult run(const ExperimentConfig& config, std::uint64_t seed, const RunOptions& options) {
  const auto problem = make_problem(config.problem, seed);
  return run(config, *problem, seed, options);
}

namespace {

// Online form of the weighted regret bound, checked as the run goes.
class RegretTracker {
 public:
  explicit RegretTracker(ParamVector reference, const ParamVector& x0)
      : u_(std::move(reference)), diff_(u_.dim()), dbar_(kernels::distance(x0, u_)) {}

  // Adds step t (iterate x_t, gradient g_t) and evaluates the bound at t + 1.
  void add(const ParamVector& x_t, std::span<const double> g, double r_bar_t, const ParamVector& x_next,
           double r_bar_next, double gprime_t) {
    for (std::size_t i = 0; i < diff_.size(); ++i) diff_[i] = x_t[i] - u_[i];
    sum_ += r_bar_t * kernels::dot(g, diff_);
    dbar_ = std::max(dbar_, kernels::distance(x_next, u_));
    lhs_ = sum_;
    rhs_ = r_bar_next * (2.0 * dbar_ + r_bar_next) * std::sqrt(gprime_t);
    ++t_;
    if (!(lhs_ <= rhs_ * (1.0 + kCertificateTolerance)) && !first_violation_) first_violation_ = t_;
  }

  double lhs() const noexcept { return lhs_; }
  double rhs() const noexcept { return rhs_; }
  std::optional<std::size_t> first_violation() const noexcept { return first_violation_; }

 private:
  ParamVector u_;
  std::vector<double> diff_;
  double dbar_;
  double sum_ = 0.0;
  double lhs_ = 0.0;
  double rhs_ = 0.0;
  std::size_t t_ = 0;
  std::optional<std::size_t> first_violation_;
};

struct Candidate {
  const char* name;
  double loss;
  const ParamVector* point;
};

}  // namespace

RunResult run(const ExperimentConfig& config, const ProblemOracle& problem, std::uint64_t seed,
              const RunOptions& options) {
  validate(config.schedule);
  if (config.eval_every == 0) throw ConfigError("eval_every", "must be positive");
  if (!(std::isfinite(config.gamma) && config.gamma > 0.0)) throw ConfigError("gamma", "must be positive");

  const double r_eps = resolve_r_eps(config, problem);
  const ParamVector x0 = problem.initial_point();
  RunState state = init_state(x0, r_eps);
  if (std::holds_alternative<LDoG>(config.schedule)) {
    const auto groups = problem.parameter_groups();
    init_groups(state, groups, config.alpha);
  }
  const Projection projection =
      config.domain_radius ? ball_projection(x0, *config.domain_radius) : problem.domain();

  const std::optional<ParamVector> x_star = problem.optimum();
  std::optional<RegretTracker> regret;
  if (is_dog_like(config.schedule)) {
    if (options.reference_point) {
      if (options.reference_point->dim() != x0.dim()) throw InputError("run: reference point has the wrong dimension");
      regret.emplace(*options.reference_point, x0);
    } else if (x_star) {
      regret.emplace(*x_star, x0);
    }
  }

  RunResult result;
  RunSummary& s = result.summary;
  s.problem = problem.name();
  s.schedule = schedule_name(config.schedule);
  s.seed = seed;
  s.steps_requested = config.steps;
  s.r_eps = r_eps;
  s.initial_loss = problem.loss(x0);
  s.final_loss = s.initial_loss;
  s.weighted_average_loss = s.initial_loss;
  s.poly_average_loss = s.initial_loss;
  s.best_loss = s.initial_loss;
  s.r_bar_final = r_eps;
  if (x_star) {
    s.d0 = kernels::distance(x0, *x_star);
    s.d_final = s.d0;
  }
  result.final_iterate = x0;
  result.best_point = x0;
  if (const auto* lp = dynamic_cast<const LogisticProblem*>(&problem)) s.standardization = lp->data().standardization;

  if (Trace* tr = options.trace) {
    *tr = Trace{};
    tr->r_eps = r_eps;
    tr->iterates.push_back(x0);
  }

  if (config.steps == 0) {
    if (Trace* tr = options.trace) tr->r_bar.push_back(r_eps);
    return result;
  }

  AverageState avg = AverageState::start(x0, config.gamma);
  ParamVector g(x0.dim());
  const auto consider = [&](std::size_t t, std::initializer_list<Candidate> candidates) {
    double best = std::numeric_limits<double>::infinity();
    for (const Candidate& c : candidates) {
      best = std::min(best, c.loss);
      // Strict comparison keeps the earliest candidate on ties.
      if (c.loss < s.best_loss) {
        s.best_loss = c.loss;
        s.best_candidate = c.name;
        s.best_step = t;
        result.best_point = *c.point;
      }
    }
    return best;
  };

  double regret_lhs = 0.0;  // bound at the current t
  double regret_rhs = 0.0;
  ParamVector x_last = x0;
  std::size_t t = 0;
  for (; t < config.steps; ++t) {
    const ParamVector x_t = state.iterate;
    x_last = x_t;
    problem.sample_grad(x_t.span(), RngKey{seed, t}, g.span());
    if (!g.all_finite()) {
      s.diverged = true;
      s.divergence_step = t;
      s.divergence_message = "non-finite gradient at step " + std::to_string(t);
      break;
    }
    const std::optional<double> bound = problem.lipschitz_at(x_t.span());
    if (bound && !std::isfinite(*bound)) {
      s.diverged = true;
      s.divergence_step = t;
      s.divergence_message = "non-finite gradient bound at step " + std::to_string(t);
      break;
    }

    StepInfo info;
    try {
      info = step(state, g, config.schedule, projection, bound);
    } catch (const DivergenceError& e) {
      s.diverged = true;
      s.divergence_step = e.step();
      s.divergence_message = e.what();
      break;
    }
    s.flags |= info.flags;

    record(avg, x_t, info.r_bar, avg.weight_total);

    if (Trace* tr = options.trace) {
      tr->gradients.push_back(g);
      tr->iterates.push_back(state.iterate);
      tr->r_bar.push_back(info.r_bar);
      tr->grad_sq_sum_prime.push_back(info.grad_sq_sum_prime);
      tr->eta.push_back(info.eta);
    }

    if (t % config.eval_every == 0) {
      RunRecord row;
      row.t = t;
      row.eta = info.eta;
      row.r_bar = info.r_bar;
      row.grad_sq_sum = info.grad_sq_sum;
      row.grad_sq_sum_prime = info.grad_sq_sum_prime;
      row.flags = info.flags;
      row.train_loss = problem.loss(x_t.span());
      const double poly_loss = problem.loss(avg.poly_avg.span());
      if (avg.has_snapshot()) {
        row.eval_loss = consider(t, {{"iterate", row.train_loss, &x_t},
                                     {"weighted", problem.loss(avg.best_snapshot.span()), &avg.best_snapshot},
                                     {"poly", poly_loss, &avg.poly_avg}});
      } else {
        row.eval_loss = consider(t, {{"iterate", row.train_loss, &x_t}, {"poly", poly_loss, &avg.poly_avg}});
      }
      if (x_star) row.d_t = kernels::distance(x_t, *x_star);
      if (regret) {
        row.regret_lhs = regret_lhs;
        row.regret_rhs = regret_rhs;
      }
      result.rows.push_back(std::move(row));
    }

    if (regret) {
      const double r_bar_next = std::max(state.r_bar, kernels::distance(state.iterate, x0));
      regret->add(x_t, g.span(), info.r_bar, state.iterate, r_bar_next, info.grad_sq_sum_prime);
      regret_lhs = regret->lhs();
      regret_rhs = regret->rhs();
    }
    poly_update(avg, state.iterate, t + 1);
  }
  s.steps_completed = t;
  if (!s.diverged) x_last = state.iterate;
  if (s.diverged) s.flags |= kFlagDiverged;
  s.lipschitz_surrogate = state.lipschitz_surrogate;

  // After a divergence the iterate in state may be the failed update; r_bar
  // there is still finite since it was computed from x_last.
  const double r_bar_last = std::max(state.r_bar, kernels::distance(x_last, x0));
  s.r_bar_final = r_bar_last;
  if (Trace* tr = options.trace) tr->r_bar.push_back(r_bar_last);

  if (avg.count > 0) {
    finalize(avg, r_bar_last, avg.weight_total);
    s.tau = avg.tau;
    s.tau_score = avg.best_score;
    s.max_ratio_bound = max_ratio_lower_bound(avg.count, r_eps, r_bar_last);
    s.max_ratio_ok = s.tau_score >= s.max_ratio_bound - kLemmaTolerance * std::abs(s.max_ratio_bound);
  }

  s.final_loss = problem.loss(x_last.span());
  s.poly_average_loss = problem.loss(avg.poly_avg.span());
  if (avg.has_snapshot()) {
    s.weighted_average_loss = problem.loss(avg.best_snapshot.span());
    consider(t, {{"iterate", s.final_loss, &x_last},
                 {"weighted", s.weighted_average_loss, &avg.best_snapshot},
                 {"poly", s.poly_average_loss, &avg.poly_avg}});
  } else {
    s.weighted_average_loss = s.initial_loss;
    consider(t, {{"iterate", s.final_loss, &x_last}, {"poly", s.poly_average_loss, &avg.poly_avg}});
  }
  if (x_star) s.d_final = kernels::distance(x_last, *x_star);
  if (regret) {
    s.regret_ok = !regret->first_violation().has_value();
    s.regret_first_violation = regret->first_violation();
  }
  result.final_iterate = std::move(x_last);
  return result;
}

ExperimentConfig sweep_point(const ExperimentConfig& config, std::optional<double> alpha, std::optional<double> c,
                             std::optional<double> lr) {
  ExperimentConfig out = config;
  out.sweep = {};
  if (alpha) {
    out.alpha = *alpha;
    out.r_eps.reset();
  }
  if (c) {
    if (std::holds_alternative<DoG>(out.schedule) || std::holds_alternative<ScaledDoG>(out.schedule)) {
      out.schedule = ScaledDoG{*c};
    } else {
      throw ConfigError("sweep.c", "the c axis needs a dog or scaled_dog schedule");
    }
  }
  if (lr) {
    if (auto* s = std::get_if<ConstantSGD>(&out.schedule)) {
      s->eta = *lr;
    } else if (auto* s = std::get_if<CosineSGD>(&out.schedule)) {
      s->peak = *lr;
    } else if (auto* s = std::get_if<AdaGradNorm>(&out.schedule)) {
      s->rho = *lr;
    } else {
      throw ConfigError("sweep.lr", "the lr axis needs an sgd, cosine or adagrad_norm schedule");
    }
  }
  return out;
}

std::vector<SweepRow> sweep(const ExperimentConfig& config) {
  if (config.sweep.empty()) throw ConfigError("sweep", "at least one axis is required");
  const auto axis = [](const std::vector<double>& v) {
    std::vector<std::optional<double>> out;
    if (v.empty()) out.emplace_back();
    for (const double x : v) out.emplace_back(x);
    return out;
  };
  const auto alphas = axis(config.sweep.alpha);
  const auto cs = axis(config.sweep.c);
  const auto lrs = axis(config.sweep.lr);

  std::vector<SweepRow> rows;
  for (const auto& a : alphas) {
    for (const auto& c : cs) {
      for (const auto& lr : lrs) {
        for (const std::uint64_t seed : config.seeds) {
          SweepRow row;
          row.alpha = a;
          row.c = c;
          row.lr = lr;
          row.seed = seed;
          rows.push_back(std::move(row));
        }
      }
    }
  }
  // Canonical order: by axis values, then seed.
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& x, const SweepRow& y) {
    const auto key = [](const SweepRow& r) {
      return std::make_tuple(r.alpha.value_or(0.0), r.c.value_or(0.0), r.lr.value_or(0.0), r.seed);
    };
    return key(x) < key(y);
  });

  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    SweepRow& row = rows[static_cast<std::size_t>(i)];
    try {
      const ExperimentConfig point = sweep_point(config, row.alpha, row.c, row.lr);
      row.summary = run(point, row.seed).summary;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.summary.seed = row.seed;
    }
  }
  return rows;
}

std::optional<std::size_t> select_best(const std::vector<SweepRow>& rows) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    if (r.summary.diverged || !r.error.empty() || !std::isfinite(r.summary.best_loss)) continue;
    if (!best || r.summary.best_loss < rows[*best].summary.best_loss) best = i;
  }
  return best;
}

}  // namespace dogsgd
