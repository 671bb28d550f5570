#include <cmath>
#include <vector>

#include "doctest.h"
#include "dogsgd/averaging.hpp"
#include "dogsgd/errors.hpp"
#include "test_support.hpp"

using namespace dogsgd;

namespace {

// Feeds x_0..x_{T-1} with weights r̄_0..r̄_{T-1}, as the harness does.
AverageState feed(const std::vector<ParamVector>& xs, const std::vector<double>& rbar, double gamma = 8.0) {
  AverageState avg = AverageState::start(xs.front(), gamma);
  for (std::size_t t = 0; t < xs.size(); ++t) record(avg, xs[t], rbar[t], avg.weight_total);
  return avg;
}

}  // namespace

TEST_SUITE("averaging") {
  TEST_CASE("equal weights give the midpoint") {
    const AverageState avg = feed({ParamVector{0.0}, ParamVector{2.0}}, {1.0, 1.0});
    CHECK(weighted_average(avg)[0] == 1.0);
    CHECK(uniform_average(avg, 2)[0] == 1.0);
  }

  TEST_CASE("tau tie-break goes to the later step") {
    // S_1 = 1/1, S_2 = 2/2: tie, so tau = 2.
    const AverageState avg = feed({ParamVector{0.0}, ParamVector{1.0}, ParamVector{5.0}}, {1.0, 1.0, 2.0});
    CHECK(avg.tau == 2);
    CHECK(avg.best_score == 1.0);
    CHECK(avg.best_snapshot[0] == 0.5);
  }

  TEST_CASE("constant iterates average to the constant") {
    CounterRng rng({31, 0});
    std::vector<ParamVector> xs(20, ParamVector{3.25, -1.5});
    std::vector<double> rbar = testing::random_monotone(rng, 20);
    AverageState avg = feed(xs, rbar);
    const ParamVector w = weighted_average(avg);
    CHECK(w[0] == doctest::Approx(3.25).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(-1.5).epsilon(1e-15));
    for (std::size_t t = 1; t <= 20; ++t) poly_update(avg, xs[0], t);
    CHECK(avg.poly_avg[0] == doctest::Approx(3.25).epsilon(1e-15));
  }

  TEST_CASE("uniform average examples and errors") {
    AverageState one = feed({ParamVector{7.0}}, {1.0});
    CHECK(uniform_average(one, 1)[0] == 7.0);
    const AverageState three = feed({ParamVector{1.0}, ParamVector{2.0}, ParamVector{3.0}}, {1.0, 1.0, 1.0});
    CHECK(uniform_average(three, 3)[0] == 2.0);
    CHECK_THROWS_AS(uniform_average(three, 0), ParameterError);
  }

  TEST_CASE("poly recursion first coefficients") {
    AverageState avg = AverageState::start(ParamVector{0.0}, 8.0);
    poly_update(avg, ParamVector{4.0}, 1);
    CHECK(avg.poly_avg[0] == 4.0);
    poly_update(avg, ParamVector{10.0}, 2);
    CHECK(avg.poly_avg[0] == doctest::Approx(0.1 * 4.0 + 0.9 * 10.0).epsilon(1e-15));
    CHECK_THROWS_AS(poly_update(avg, ParamVector{1.0}, 0), ParameterError);
  }

  TEST_CASE("poly recursion equals its unrolled weights") {
    // Weight of x_k in x̄_t is c_k prod_{j=k+1..t} (1 - c_j), with x̄_0 = x_0.
    CounterRng rng({32, 0});
    const double gamma = 8.0;
    const std::size_t dim = 3;
    std::vector<ParamVector> xs;
    for (int k = 0; k <= 100; ++k) xs.push_back(testing::random_vector(rng, dim));
    AverageState avg = AverageState::start(xs[0], gamma);
    for (std::size_t t = 1; t <= 100; ++t) {
      poly_update(avg, xs[t], t);
      for (std::size_t i = 0; i < dim; ++i) {
        long double acc = 0.0L;
        long double wsum = 0.0L;
        for (std::size_t k = 0; k <= t; ++k) {
          long double w = k == 0 ? 1.0L : (1.0L + gamma) / (static_cast<long double>(k) + gamma);
          for (std::size_t j = k + 1; j <= t; ++j) w *= 1.0L - (1.0L + gamma) / (static_cast<long double>(j) + gamma);
          acc += w * xs[k][i];
          wsum += w;
        }
        CHECK(std::abs(static_cast<double>(wsum) - 1.0) < 1e-15);
        const double expect = static_cast<double>(acc);
        CHECK(std::abs(avg.poly_avg[i] - expect) <= 1e-12 * std::max(std::abs(expect), 1.0));
      }
    }
  }

  TEST_CASE("online tau snapshot equals the offline recomputation") {
    CounterRng rng({33, 0});
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t T = 2 + rng.below(60);
      const std::size_t dim = 1 + rng.below(4);
      std::vector<ParamVector> xs;
      for (std::size_t t = 0; t <= T; ++t) xs.push_back(testing::random_vector(rng, dim));
      std::vector<double> rbar = testing::random_monotone(rng, T + 1, 0.01);
      if (trial % 5 == 0) std::fill(rbar.begin(), rbar.end(), 0.5);  // all ties

      AverageState avg = AverageState::start(xs[0]);
      for (std::size_t t = 0; t < T; ++t) record(avg, xs[t], rbar[t], avg.weight_total);
      finalize(avg, rbar[T], avg.weight_total);

      // Offline: score every t in 1..T with the same left-to-right sums.
      double best = -INFINITY;
      std::size_t tau = 0;
      double prefix = 0.0;
      for (std::size_t t = 1; t <= T; ++t) {
        prefix += rbar[t - 1];
        const double score = prefix / rbar[t];
        if (score >= best) {
          best = score;
          tau = t;
        }
      }
      REQUIRE(avg.tau == tau);
      CHECK(avg.best_score == best);
      std::vector<double> num(dim, 0.0);
      double den = 0.0;
      for (std::size_t k = 0; k < tau; ++k) {
        for (std::size_t i = 0; i < dim; ++i) num[i] += rbar[k] * xs[k][i];
        den += rbar[k];
      }
      for (std::size_t i = 0; i < dim; ++i) CHECK(avg.best_snapshot[i] == num[i] / den);
    }
  }

  TEST_CASE("best score never decreases") {
    CounterRng rng({34, 0});
    const auto rbar = testing::random_monotone(rng, 200, 1e-3);
    AverageState avg = AverageState::start(ParamVector{0.0});
    double prev = -INFINITY;
    for (std::size_t t = 0; t < rbar.size(); ++t) {
      record(avg, ParamVector{static_cast<double>(t)}, rbar[t], avg.weight_total);
      CHECK(avg.best_score >= prev);
      prev = avg.best_score;
      if (t > 0) CHECK(avg.weight_total > 0.0);
    }
  }
}
