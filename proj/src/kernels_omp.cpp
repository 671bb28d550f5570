#include <algorithm>
#include <vector>

#include "dogsgd/errors.hpp"
#include "dogsgd/kernels.hpp"
#include "softmax_row.hpp"

namespace dogsgd::kernels::parallel {

namespace {

std::size_t block_count(std::size_t rows) { return (rows + kRowBlock - 1) / kRowBlock; }

}  // namespace

double softmax_loss(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> params) {
  if (rows.empty()) throw InputError("softmax_loss: no rows");
  const std::size_t m = rows.size();
  const auto blocks = static_cast<std::ptrdiff_t>(block_count(m));
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);

#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    std::vector<double> logits(data.num_classes);
    const std::size_t lo = static_cast<std::size_t>(b) * kRowBlock;
    const std::size_t hi = std::min(m, lo + kRowBlock);
    double s = 0.0;
    for (std::size_t r = lo; r < hi; ++r) s += detail::softmax_row_loss(data, rows[r], params, logits);
    partial[static_cast<std::size_t>(b)] = s;
  }

  double total = 0.0;
  for (const double s : partial) total += s;
  return total / static_cast<double>(m);
}

void softmax_gradient(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> params,
                      std::span<double> grad) {
  if (rows.empty()) throw InputError("softmax_gradient: no rows");
  const std::size_t m = rows.size();
  const std::size_t p = grad.size();
  const auto blocks = static_cast<std::ptrdiff_t>(block_count(m));
  std::vector<double> partial(static_cast<std::size_t>(blocks) * p, 0.0);

#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    std::vector<double> logits(data.num_classes);
    std::span<double> acc(partial.data() + static_cast<std::size_t>(b) * p, p);
    const std::size_t lo = static_cast<std::size_t>(b) * kRowBlock;
    const std::size_t hi = std::min(m, lo + kRowBlock);
    for (std::size_t r = lo; r < hi; ++r) detail::softmax_row_accumulate(data, rows[r], params, logits, acc);
  }

  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const double* acc = partial.data() + static_cast<std::size_t>(b) * p;
    for (std::size_t j = 0; j < p; ++j) grad[j] += acc[j];
  }
  const double inv = 1.0 / static_cast<double>(m);
  for (double& g : grad) g *= inv;
}

}  // namespace dogsgd::kernels::parallel
