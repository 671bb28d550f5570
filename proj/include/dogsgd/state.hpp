#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dogsgd/param_vector.hpp"

namespace dogsgd {

/// Neumaier compensated sum; keeps long accumulations of squared gradient
/// norms accurate to a few ulps regardless of run length.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Bit flags attached to a step.
enum StepFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagZeroGradient = 1u << 0,       // G_t = 0, step size defined as 0
  kFlagLipschitzSurrogate = 1u << 1, // L̄ tracked from observed gradient norms
  kFlagCosineClamped = 1u << 2,      // cosine schedule queried past its horizon
  kFlagDiverged = 1u << 3,
};

/// "zero_gradient|lipschitz_surrogate", or "" when no flag is set.
std::string flags_to_string(std::uint32_t flags);

/// Half-open coordinate range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Accumulators of one parameter group (layer) for per-group DoG.
struct ParamGroup {
  IndexRange range;
  double r_eps = 0.0;
  double r_bar = 0.0;
  CompensatedSum grad_sq;
  double eta = 0.0;

  double grad_sq_sum() const noexcept { return grad_sq.value(); }
};

/// Partition of the coordinates into groups. Empty unless per-group DoG is
/// in use.
struct GroupState {
  std::vector<ParamGroup> groups;
  bool empty() const noexcept { return groups.empty(); }
  std::size_t size() const noexcept { return groups.size(); }
};

/// Projected-SGD state at step t. Fields hold values for the most recently
/// completed step; before the first step they hold the initial values.
struct RunState {
  ParamVector iterate;  // x_t
  ParamVector anchor;   // x_0
  std::size_t step = 0;

  double r_eps = 0.0;
  double r_bar = 0.0;               // max(r_eps, max_k ||x_k - x_0||)
  double grad_sq_sum = 0.0;         // G_t
  double grad_sq_sum_prev = 0.0;    // G_{t-1}, 0 before step 0
  double grad_sq_sum_prime = 0.0;   // G'_t
  double lbar = 0.0;                // L̄_t
  double lbar_initial = 0.0;        // L̄_0
  bool lipschitz_surrogate = false;

  // Reference step size for the divergence guard: the first positive eta,
  // rescaled as if r_eps were the full initialization scale 1 + ||x_0||.
  double eta_reference = 0.0;

  CompensatedSum grad_sq_acc;
  GroupState groups;

  std::size_t dim() const noexcept { return iterate.dim(); }
};

}  // namespace dogsgd
