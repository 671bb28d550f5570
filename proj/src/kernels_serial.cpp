#include <algorithm>
#include <cmath>
#include <vector>

#include "dogsgd/errors.hpp"
#include "dogsgd/kernels.hpp"
#include "softmax_row.hpp"

namespace dogsgd::kernels {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(std::span<const double> a) { return dot(a, a); }

double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

namespace serial {

double softmax_loss(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> params) {
  if (rows.empty()) throw InputError("softmax_loss: no rows");
  std::vector<double> logits(data.num_classes);
  double total = 0.0;
  for (const std::size_t i : rows) total += detail::softmax_row_loss(data, i, params, logits);
  return total / static_cast<double>(rows.size());
}

void softmax_gradient(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> params,
                      std::span<double> grad) {
  if (rows.empty()) throw InputError("softmax_gradient: no rows");
  std::vector<double> logits(data.num_classes);
  std::fill(grad.begin(), grad.end(), 0.0);
  for (const std::size_t i : rows) detail::softmax_row_accumulate(data, i, params, logits, grad);
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& g : grad) g *= inv;
}

}  // namespace serial

}  // namespace dogsgd::kernels
