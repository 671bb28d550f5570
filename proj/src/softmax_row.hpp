#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "dogsgd/dataset.hpp"

namespace dogsgd::kernels::detail {

// logits[k] = b_k + <w_k, x>; returns log-sum-exp of the logits.
inline double softmax_logits(std::span<const double> x, std::span<const double> params, std::size_t classes,
                             std::span<double> logits) {
  const std::size_t d = x.size();
  const double* bias = params.data() + classes * d;
  double top = -INFINITY;
  for (std::size_t k = 0; k < classes; ++k) {
    const double* w = params.data() + k * d;
    double z = bias[k];
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
    logits[k] = z;
    top = std::max(top, z);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < classes; ++k) s += std::exp(logits[k] - top);
  return top + std::log(s);
}

// Cross-entropy of one row.
inline double softmax_row_loss(const Dataset& data, std::size_t i, std::span<const double> params,
                               std::span<double> logits) {
  const double lse = softmax_logits(data.row(i), params, data.num_classes, logits);
  return lse - logits[data.labels[i]];
}

// Adds the un-normalized gradient of one row to grad; returns its loss.
inline double softmax_row_accumulate(const Dataset& data, std::size_t i, std::span<const double> params,
                                     std::span<double> logits, std::span<double> grad) {
  const std::size_t d = data.d;
  const std::size_t classes = data.num_classes;
  const auto x = data.row(i);
  const double lse = softmax_logits(x, params, classes, logits);
  const std::uint32_t y = data.labels[i];
  const double loss = lse - logits[y];
  double* gbias = grad.data() + classes * d;
  for (std::size_t k = 0; k < classes; ++k) {
    const double r = std::exp(logits[k] - lse) - (k == y ? 1.0 : 0.0);
    double* gw = grad.data() + k * d;
    for (std::size_t j = 0; j < d; ++j) gw[j] += r * x[j];
    gbias[k] += r;
  }
  return loss;
}

}  // namespace dogsgd::kernels::detail
