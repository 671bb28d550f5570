#include "dogsgd/averaging.hpp"

#include <cmath>
#include <string>

#include "dogsgd/errors.hpp"

namespace dogsgd {

AverageState AverageState::start(const ParamVector& x0, double gamma) {
  if (!(std::isfinite(gamma) && gamma > 0.0)) throw ParameterError("averaging: gamma must be positive");
  AverageState avg;
  avg.weighted_sum = ParamVector::zeros(x0.dim());
  avg.uniform_sum = ParamVector::zeros(x0.dim());
  avg.poly_avg = x0;
  avg.gamma = gamma;
  return avg;
}

namespace {

void score(AverageState& avg, double r_bar_t, double prefix_weight) {
  if (avg.count == 0) return;
  if (!(r_bar_t > 0.0)) throw InputError("averaging: r_bar must be positive");
  const double s = prefix_weight / r_bar_t;
  if (s >= avg.best_score) {
    avg.best_score = s;
    avg.tau = avg.count;
    avg.best_snapshot = weighted_average(avg);
  }
}

}  // namespace

void record(AverageState& avg, const ParamVector& x_t, double r_bar_t, double prefix_weight) {
  if (x_t.dim() != avg.weighted_sum.dim()) throw InputError("averaging: dimension mismatch");
  score(avg, r_bar_t, prefix_weight);
  for (std::size_t i = 0; i < x_t.dim(); ++i) {
    avg.weighted_sum[i] += r_bar_t * x_t[i];
    avg.uniform_sum[i] += x_t[i];
  }
  avg.weight_total += r_bar_t;
  ++avg.count;
}

void finalize(AverageState& avg, double r_bar_T, double prefix_weight) { score(avg, r_bar_T, prefix_weight); }

ParamVector weighted_average(const AverageState& avg) {
  if (!(avg.weight_total > 0.0)) throw InputError("weighted_average: no iterates recorded");
  ParamVector out(avg.weighted_sum.dim());
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] = avg.weighted_sum[i] / avg.weight_total;
  return out;
}

void poly_update(AverageState& avg, const ParamVector& x_t, std::size_t t) {
  if (t == 0) throw ParameterError("poly_update: t must be at least 1");
  if (x_t.dim() != avg.poly_avg.dim()) throw InputError("poly_update: dimension mismatch");
  const double c = (1.0 + avg.gamma) / (static_cast<double>(t) + avg.gamma);
  for (std::size_t i = 0; i < x_t.dim(); ++i) avg.poly_avg[i] = (1.0 - c) * avg.poly_avg[i] + c * x_t[i];
}

ParamVector uniform_average(const AverageState& avg, std::size_t t) {
  if (t == 0) throw ParameterError("uniform_average: t must be at least 1");
  if (t != avg.count) {
    throw InputError("uniform_average: asked for t = " + std::to_string(t) + " but " + std::to_string(avg.count) +
                     " iterates were recorded");
  }
  ParamVector out(avg.uniform_sum.dim());
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] = avg.uniform_sum[i] / static_cast<double>(t);
  return out;
}

}  // namespace dogsgd
