#pragma once

#include <cstddef>
#include <span>

#include "dogsgd/dataset.hpp"

// Hot loops of the toolkit. Each kernel exists twice:
//
//   serial::   straightforward single-accumulator loops, kept as the
//              reference the parallel versions are tested against;
//   parallel:: OpenMP versions that split rows into fixed blocks of
//              kRowBlock, reduce inside each block, then combine the block
//              partials in block order on one thread.
//
// The block layout never depends on the thread count, so parallel results
// are bit-identical for any OMP_NUM_THREADS. They differ from serial:: only
// by summation order.
//
// Softmax-regression parameters are laid out as a row-major K x d weight
// matrix followed by K biases.

namespace dogsgd::kernels {

inline constexpr std::size_t kRowBlock = 64;

double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> a);
double norm(std::span<const double> a);
/// ||a - b||
double distance(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

inline std::size_t softmax_param_count(const Dataset& data) { return data.num_classes * (data.d + 1); }

namespace serial {

/// Mean cross-entropy over the listed rows.
double softmax_loss(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> params);
/// Gradient of softmax_loss, written to grad (overwritten).
void softmax_gradient(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> params,
                      std::span<double> grad);

}  // namespace serial

namespace parallel {

double softmax_loss(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> params);
void softmax_gradient(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> params,
                      std::span<double> grad);

}  // namespace parallel

}  // namespace dogsgd::kernels
