#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dogsgd/core.hpp"
#include "dogsgd/errors.hpp"
#include "dogsgd/kernels.hpp"
#include "dogsgd/schedules.hpp"
#include "test_support.hpp"

using namespace dogsgd;

namespace {

// Tamed denominator evaluated straight from its definition.
double tdog_oracle(std::size_t t, double g_prev, double lbar, double lbar0, std::size_t horizon, double delta,
                   bool drop_theta) {
  const double th = drop_theta ? 1.0 : std::log(60.0 * std::log(6.0 * static_cast<double>(horizon)) / delta);
  const double lp = 1.0 + std::log(1.0 + static_cast<double>(t) * lbar * lbar / (lbar0 * lbar0));
  return std::pow(8.0, 4) * th * th * lp * lp * (g_prev + 16.0 * lbar * lbar);
}

}  // namespace

TEST_SUITE("schedules") {
  TEST_CASE("dog_eta") {
    RunState s = init_state(ParamVector{0.0}, 0.1);
    s.grad_sq_sum = 1.0;
    CHECK(dog_eta(s) == 0.1);
    s.grad_sq_sum = 0.0;
    CHECK(dog_eta(s) == 0.0);

    RunState t = init_state(ParamVector{0.0, 0.0}, 0.1);
    const StepInfo info = step(t, ParamVector{2.0, 0.0}, DoG{}, Projection::unconstrained());
    CHECK(info.eta == doctest::Approx(0.05).epsilon(1e-15));
  }

  TEST_CASE("theta") {
    const double base = std::log(60.0 * std::log(6.0));
    CHECK(theta(1, 1.0) == doctest::Approx(base).epsilon(1e-15));
    CHECK(theta(1, 1.0) == doctest::Approx(4.678).epsilon(1e-3));
    CHECK(theta(1, 0.1) == doctest::Approx(base + std::log(10.0)).epsilon(1e-14));
    CHECK_THROWS_AS(theta(0, 0.5), ParameterError);
    CHECK_THROWS_AS(theta(1, 0.0), ParameterError);
    CHECK_THROWS_AS(theta(1, 1.5), ParameterError);
    CHECK_THROWS_AS(theta(1, -0.1), ParameterError);
  }

  TEST_CASE("T-DoG first step size") {
    const double r = 0.01;
    const double l0 = 3.0;
    RunState s = init_state(ParamVector{0.0, 0.0}, r);
    const TDoG rule{100, 0.1, false};
    const StepInfo info = step(s, ParamVector{3.0, 0.0}, rule, Projection::unconstrained(), l0);
    const double th = theta(100, 0.1);
    CHECK(info.grad_sq_sum_prime == doctest::Approx(4096.0 * th * th * 16.0 * l0 * l0).epsilon(1e-14));
    CHECK(info.eta == doctest::Approx(r / (256.0 * th * l0)).epsilon(1e-14));
  }

  TEST_CASE("T-DoG denominator matches its formula and dominates DoG") {
    CounterRng rng({21, 0});
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t dim = 1 + rng.below(4);
      const bool drop = trial % 2 == 0;
      const TDoG rule{500, 0.05 + 0.9 * rng.uniform(), drop};
      RunState s = init_state(testing::random_vector(rng, dim), 1e-3);
      double prev_prime = 0.0;
      double g_prev = 0.0;
      double lbar = 0.0;
      double lbar0 = 0.0;
      for (std::size_t t = 0; t < 50; ++t) {
        const ParamVector g = testing::random_vector(rng, dim);
        const double bound = std::sqrt(kernels::norm_sq(g)) * (1.0 + rng.uniform());
        lbar = std::max(lbar, bound);
        if (t == 0) lbar0 = lbar;
        RunState probe = s;
        const StepInfo info = step(s, g, rule, Projection::unconstrained(), bound);
        const double expect = tdog_oracle(t, g_prev, lbar, lbar0, rule.horizon, rule.delta, drop);
        CHECK(testing::rel_close(info.grad_sq_sum_prime, expect, 1e-13));
        CHECK(info.grad_sq_sum_prime >= info.grad_sq_sum);
        CHECK(info.grad_sq_sum_prime >= prev_prime);
        // Same state, plain DoG: never a smaller step.
        const StepInfo dog = step(probe, g, DoG{}, Projection::unconstrained(), bound);
        CHECK(info.eta <= dog.eta);
        prev_prime = info.grad_sq_sum_prime;
        g_prev = info.grad_sq_sum;
      }
    }
  }

  TEST_CASE("T-DoG with a stationary start is a parameter error") {
    RunState s = init_state(ParamVector{1.0}, 0.1);
    CHECK_THROWS_AS(step(s, ParamVector{0.0}, TDoG{10, 0.1, false}, Projection::unconstrained(), 0.0),
                    ParameterError);
  }

  TEST_CASE("T-DoG rejects a gradient beyond the supplied bound") {
    // With a bound far below ||g||, G' < G and the schedule is no longer valid.
    RunState s = init_state(ParamVector{0.0}, 0.1);
    step(s, ParamVector{1e-9}, TDoG{10, 0.9, true}, Projection::unconstrained(), 1e-9);
    CHECK_THROWS_AS(step(s, ParamVector{1e6}, TDoG{10, 0.9, true}, Projection::unconstrained(), 1e-9), InputError);
  }

  TEST_CASE("ldog_eta") {
    GroupState gs;
    ParamGroup g;
    g.range = {0, 1};
    g.r_bar = 1e-8;
    gs.groups.push_back(g);
    CHECK(ldog_eta(gs, 0, 1e-8) == doctest::Approx(1e-4).epsilon(1e-14));
    CHECK_THROWS_AS(ldog_eta(gs, 1, 1e-8), InputError);
  }

  TEST_CASE("single-group L-DoG without the guard reproduces DoG") {
    CounterRng rng({22, 0});
    const ParamVector x0 = testing::random_vector(rng, 5);
    RunState a = init_state(x0, 1e-3);
    RunState b = init_state(x0, 1e-3);
    const std::vector<IndexRange> whole{{0, 5}};
    init_groups(b, whole, 1e-3 / (1.0 + kernels::norm(x0)));
    b.groups.groups[0].r_eps = 1e-3;
    b.groups.groups[0].r_bar = 1e-3;
    for (int t = 0; t < 100; ++t) {
      const ParamVector g = testing::random_vector(rng, 5);
      const StepInfo ia = step(a, g, DoG{}, Projection::unconstrained());
      const StepInfo ib = step(b, g, LDoG{0.0}, Projection::unconstrained());
      CHECK(testing::rel_close(ia.eta, ib.eta, 1e-12));
      for (std::size_t i = 0; i < 5; ++i) CHECK(testing::rel_close(a.iterate[i], b.iterate[i], 1e-10));
    }
  }

  TEST_CASE("baselines") {
    RunState s = init_state(ParamVector{0.0}, 0.1);
    std::uint32_t flags = 0;
    const CosineSGD cos{1.0, 10};
    s.step = 0;
    CHECK(baseline_eta(cos, s, flags) == 1.0);
    s.step = 5;
    CHECK(baseline_eta(cos, s, flags) == doctest::Approx(0.5).epsilon(1e-15));
    s.step = 10;
    CHECK(baseline_eta(cos, s, flags) == doctest::Approx(0.0));
    CHECK(flags == 0);
    s.step = 11;
    CHECK(baseline_eta(cos, s, flags) == doctest::Approx(0.0));
    CHECK((flags & kFlagCosineClamped) != 0);

    s.grad_sq_sum = 4.0;
    CHECK(baseline_eta(AdaGradNorm{2.0}, s, flags) == 1.0);
    s.grad_sq_sum = 0.0;
    CHECK(baseline_eta(AdaGradNorm{2.0}, s, flags) == 0.0);
    CHECK(baseline_eta(ConstantSGD{0.3}, s, flags) == 0.3);
    CHECK_THROWS_AS(baseline_eta(DoG{}, s, flags), ParameterError);
  }

  TEST_CASE("ScaledDoG with c = 1 is bit-identical to DoG") {
    CounterRng rng({23, 0});
    const ParamVector x0 = testing::random_vector(rng, 4);
    RunState a = init_state(x0, 1e-4);
    RunState b = init_state(x0, 1e-4);
    for (int t = 0; t < 200; ++t) {
      const ParamVector g = testing::random_vector(rng, 4);
      const StepInfo ia = step(a, g, DoG{}, Projection::unconstrained());
      const StepInfo ib = step(b, g, ScaledDoG{1.0}, Projection::unconstrained());
      CHECK(ia.eta == ib.eta);
      CHECK(ia.grad_sq_sum_prime == ib.grad_sq_sum_prime);
      CHECK(a.iterate == b.iterate);
    }
  }

  TEST_CASE("ScaledDoG scales the first step by c") {
    for (const double c : {0.25, 0.5, 1.5, 4.0}) {
      RunState a = init_state(ParamVector{1.0, 2.0}, 1e-3);
      RunState b = a;
      const ParamVector g{0.3, -0.7};
      const double base = step(a, g, DoG{}, Projection::unconstrained()).eta;
      CHECK(step(b, g, ScaledDoG{c}, Projection::unconstrained()).eta == c * base);
    }
  }

  TEST_CASE("G' is reproduced bit for bit from the logged gradient stream") {
    CounterRng rng({24, 0});
    std::vector<ParamVector> grads;
    for (int t = 0; t < 100; ++t) grads.push_back(testing::random_vector(rng, 3));
    for (const Schedule& sch : {Schedule{DoG{}}, Schedule{TDoG{100, 0.1, false}}, Schedule{ScaledDoG{0.5}}}) {
      RunState a = init_state(ParamVector{0.1, 0.2, 0.3}, 1e-3);
      RunState b = a;
      for (const auto& g : grads) {
        const StepInfo ia = step(a, g, sch, Projection::unconstrained());
        const StepInfo ib = step(b, g, sch, Projection::unconstrained());
        CHECK(ia.grad_sq_sum_prime == ib.grad_sq_sum_prime);
      }
    }
  }

  TEST_CASE("validate and classification") {
    CHECK_THROWS_AS(validate(ScaledDoG{0.0}), ParameterError);
    CHECK_THROWS_AS(validate(TDoG{0, 0.1, false}), ParameterError);
    CHECK_THROWS_AS(validate(TDoG{10, 1.0, false}), ParameterError);
    CHECK_THROWS_AS(validate(TDoG{10, 0.0, false}), ParameterError);
    CHECK_THROWS_AS(validate(ConstantSGD{-1.0}), ParameterError);
    CHECK_THROWS_AS(validate(CosineSGD{1.0, 0}), ParameterError);
    CHECK_THROWS_AS(validate(AdaGradNorm{0.0}), ParameterError);
    CHECK_NOTHROW(validate(LDoG{0.0}));
    CHECK(is_dog_like(DoG{}));
    CHECK(is_dog_like(TDoG{}));
    CHECK(is_dog_like(ScaledDoG{0.5}));
    CHECK(is_dog_like(ScaledDoG{1.0}));
    CHECK_FALSE(is_dog_like(ScaledDoG{2.0}));
    CHECK_FALSE(is_dog_like(ConstantSGD{}));
    CHECK_FALSE(is_dog_like(AdaGradNorm{}));
    CHECK(schedule_name(DoG{}) == "dog");
  }
}
