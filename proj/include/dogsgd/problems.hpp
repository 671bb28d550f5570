#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dogsgd/core.hpp"
#include "dogsgd/dataset.hpp"
#include "dogsgd/param_vector.hpp"
#include "dogsgd/rng.hpp"
#include "dogsgd/state.hpp"

namespace dogsgd {

/// A stochastic convex problem. Implementations are immutable after
/// construction; every random draw is keyed by the RngKey passed in, so
/// concurrent callers never share generator state.
class ProblemOracle {
 public:
  virtual ~ProblemOracle() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;

  /// Full objective f(x).
  virtual double loss(std::span<const double> x) const = 0;

  /// Stochastic subgradient with E[g | x] in the subdifferential of f at x.
  virtual void sample_grad(std::span<const double> x, RngKey key, std::span<double> out) const = 0;

  /// Exact (sub)gradient of f, when the problem can compute it.
  virtual std::optional<ParamVector> full_grad(std::span<const double> /*x*/) const { return std::nullopt; }

  /// Domain X; all of R^d unless overridden.
  virtual Projection domain() const { return Projection::unconstrained(); }

  virtual std::optional<ParamVector> optimum() const { return std::nullopt; }

  /// ℓ(x) with ||g(x)|| <= ℓ(x) almost surely, when known.
  virtual std::optional<double> lipschitz_at(std::span<const double> /*x*/) const { return std::nullopt; }

  virtual ParamVector initial_point() const { return ParamVector::zeros(dim()); }

  /// Instances built around a specific r_eps report it here.
  virtual std::optional<double> preferred_r_eps() const { return std::nullopt; }

  /// Coordinate groups for per-group DoG; one group by default.
  virtual std::vector<IndexRange> parameter_groups() const { return {IndexRange{0, dim()}}; }

  /// True when sample_grad ignores its key.
  virtual bool deterministic() const { return false; }

  ParamVector sample_grad(const ParamVector& x, RngKey key) const {
    ParamVector g(dim());
    sample_grad(x.span(), key, g.span());
    return g;
  }
};

/// f(x) = 1/2 sum_i h_i (x_i - x*_i)^2 with exact gradients.
class QuadraticProblem final : public ProblemOracle {
 public:
  QuadraticProblem(std::vector<double> curvature, ParamVector x_star, std::optional<ParamVector> x0 = std::nullopt);

  std::string name() const override { return "quadratic"; }
  std::size_t dim() const override { return curvature_.size(); }
  double loss(std::span<const double> x) const override;
  void sample_grad(std::span<const double> x, RngKey key, std::span<double> out) const override;
  using ProblemOracle::sample_grad;
  std::optional<ParamVector> full_grad(std::span<const double> x) const override;
  std::optional<ParamVector> optimum() const override { return x_star_; }
  std::optional<double> lipschitz_at(std::span<const double> x) const override;
  ParamVector initial_point() const override { return x0_; }
  bool deterministic() const override { return true; }

 private:
  std::vector<double> curvature_;
  ParamVector x_star_;
  ParamVector x0_;
};

/// Curvatures log-spaced on [1, condition], optimum at the all-ones vector,
/// start at the origin.
std::unique_ptr<QuadraticProblem> make_quadratic(std::size_t dim, double condition);

struct LeastSquaresOptions {
  /// Half-width of the additive label noise, as a fraction of B.
  double noise_fraction = 0.5;
  /// Return the exact expected gradient instead of a sample.
  bool noiseless = false;
};

/// Stochastic least squares with oracle g(x) = (<a, x> - b) a.
///
/// Samples: a = rho u, u uniform on the sphere, rho uniform on [0, A];
/// b = <a, x_p> + uniform noise on [-sigma, sigma], sigma = noise_fraction B.
/// The planted x_p has norm (1 - noise_fraction) B / A, so |b| <= B always.
/// The expected objective is f(x) = 1/2 (A^2/(3m) ||x - x_p||^2 + sigma^2/3);
/// its normal equations give the unique minimizer x* = x_p.
class LeastSquaresProblem final : public ProblemOracle {
 public:
  LeastSquaresProblem(double a_bound, double b_bound, std::size_t dim, std::uint64_t seed,
                      LeastSquaresOptions options = {});

  std::string name() const override { return "least_squares"; }
  std::size_t dim() const override { return x_star_.dim(); }
  double loss(std::span<const double> x) const override;
  void sample_grad(std::span<const double> x, RngKey key, std::span<double> out) const override;
  using ProblemOracle::sample_grad;
  std::optional<ParamVector> full_grad(std::span<const double> x) const override;
  std::optional<ParamVector> optimum() const override { return x_star_; }
  /// ℓ(x) = A (A ||x|| + B).
  std::optional<double> lipschitz_at(std::span<const double> x) const override;
  bool deterministic() const override { return options_.noiseless; }

  /// max of ℓ over the ball of radius 3 d_0 around the origin.
  double lstar() const;
  double a_bound() const noexcept { return a_bound_; }
  double b_bound() const noexcept { return b_bound_; }
  double noise_halfwidth() const noexcept { return sigma_; }

 private:
  double a_bound_;
  double b_bound_;
  double sigma_;
  LeastSquaresOptions options_;
  ParamVector x_star_;
};

std::unique_ptr<LeastSquaresProblem> least_squares_oracle(double a_bound, double b_bound, std::size_t dim,
                                                          std::uint64_t seed, LeastSquaresOptions options = {});

/// Multiclass softmax regression (no regularization) on a dataset. Loss is the
/// mean cross-entropy over all rows; gradients come from mini-batches drawn
/// uniformly without replacement.
class LogisticProblem final : public ProblemOracle {
 public:
  LogisticProblem(std::shared_ptr<const Dataset> data, std::size_t batch_size);

  std::string name() const override { return "logistic"; }
  std::size_t dim() const override { return param_count_; }
  double loss(std::span<const double> x) const override;
  void sample_grad(std::span<const double> x, RngKey key, std::span<double> out) const override;
  using ProblemOracle::sample_grad;
  std::optional<ParamVector> full_grad(std::span<const double> x) const override;
  /// Weights and biases.
  std::vector<IndexRange> parameter_groups() const override;
  bool deterministic() const override { return batch_size_ == data_->n; }

  const Dataset& data() const noexcept { return *data_; }
  std::size_t batch_size() const noexcept { return batch_size_; }

  /// Sorted row indices of the mini-batch for key.
  std::vector<std::size_t> sample_rows(RngKey key) const;

 private:
  std::shared_ptr<const Dataset> data_;
  std::size_t batch_size_;
  std::size_t param_count_;
  std::vector<std::size_t> all_rows_;
};

std::unique_ptr<LogisticProblem> logistic_oracle(Dataset data, std::size_t batch_size);

/// f(x) = max_i max{x_i, -x_i / sqrt(m)} started at x_0 = (10 r_eps / sqrt(m)) 1,
/// so d_0 = 10 r_eps. The subgradient picks the smallest maximizing index:
/// e_i when x_i > 0, else -e_i / sqrt(m). The minimizer is the origin.
class NemirovskiProblem final : public ProblemOracle {
 public:
  NemirovskiProblem(std::size_t dim, double r_eps);

  std::string name() const override { return "nemirovski"; }
  std::size_t dim() const override { return dim_; }
  double loss(std::span<const double> x) const override;
  void sample_grad(std::span<const double> x, RngKey key, std::span<double> out) const override;
  using ProblemOracle::sample_grad;
  std::optional<ParamVector> full_grad(std::span<const double> x) const override;
  std::optional<ParamVector> optimum() const override { return ParamVector::zeros(dim_); }
  std::optional<double> lipschitz_at(std::span<const double> /*x*/) const override { return 1.0; }
  ParamVector initial_point() const override;
  std::optional<double> preferred_r_eps() const override { return r_eps_; }
  bool deterministic() const override { return true; }

  /// Smallest index attaining the max.
  std::size_t active_index(std::span<const double> x) const;

 private:
  std::size_t dim_;
  double r_eps_;
};

std::unique_ptr<NemirovskiProblem> nemirovski_instance(std::size_t dim, double r_eps);

/// Projection onto the closed ball of the given radius around center.
Projection ball_projection(const ParamVector& center, double radius);

}  // namespace dogsgd
