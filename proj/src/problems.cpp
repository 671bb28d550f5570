#include "dogsgd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dogsgd/errors.hpp"
#include "dogsgd/kernels.hpp"

namespace dogsgd {

namespace {

void require_dim(std::span<const double> x, std::size_t dim, const char* who) {
  if (x.size() != dim) {
    throw InputError(std::string(who) + ": expected dimension " + std::to_string(dim) + ", got " +
                     std::to_string(x.size()));
  }
}

}  // namespace

// ---------------------------------------------------------------- quadratic

QuadraticProblem::QuadraticProblem(std::vector<double> curvature, ParamVector x_star, std::optional<ParamVector> x0)
    : curvature_(std::move(curvature)), x_star_(std::move(x_star)) {
  if (curvature_.empty()) throw InputError("quadratic: empty curvature");
  if (x_star_.dim() != curvature_.size()) throw InputError("quadratic: optimum has the wrong dimension");
  for (const double h : curvature_) {
    if (!(std::isfinite(h) && h > 0.0)) throw ParameterError("quadratic: curvatures must be positive");
  }
  x0_ = x0 ? std::move(*x0) : ParamVector::zeros(curvature_.size());
  if (x0_.dim() != curvature_.size()) throw InputError("quadratic: start point has the wrong dimension");
}

double QuadraticProblem::loss(std::span<const double> x) const {
  require_dim(x, dim(), "quadratic");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_star_[i];
    s += curvature_[i] * d * d;
  }
  return 0.5 * s;
}

void QuadraticProblem::sample_grad(std::span<const double> x, RngKey, std::span<double> out) const {
  require_dim(x, dim(), "quadratic");
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = curvature_[i] * (x[i] - x_star_[i]);
}

std::optional<ParamVector> QuadraticProblem::full_grad(std::span<const double> x) const {
  ParamVector g(dim());
  sample_grad(x, {}, g.span());
  return g;
}

std::optional<double> QuadraticProblem::lipschitz_at(std::span<const double> x) const {
  ParamVector g(dim());
  sample_grad(x, {}, g.span());
  return kernels::norm(g);
}

std::unique_ptr<QuadraticProblem> make_quadratic(std::size_t dim, double condition) {
  if (dim == 0) throw ParameterError("quadratic: dim must be positive");
  if (!(std::isfinite(condition) && condition >= 1.0)) throw ParameterError("quadratic: condition must be >= 1");
  std::vector<double> h(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double frac = dim == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(dim - 1);
    h[i] = std::pow(condition, frac);
  }
  return std::make_unique<QuadraticProblem>(std::move(h), ParamVector(dim, 1.0));
}

// ------------------------------------------------------------ least squares

LeastSquaresProblem::LeastSquaresProblem(double a_bound, double b_bound, std::size_t dim, std::uint64_t seed,
                                         LeastSquaresOptions options)
    : a_bound_(a_bound), b_bound_(b_bound), options_(options) {
  if (!(std::isfinite(a_bound) && a_bound > 0.0)) throw ParameterError("least squares: A must be positive");
  if (!(std::isfinite(b_bound) && b_bound > 0.0)) throw ParameterError("least squares: B must be positive");
  if (dim == 0) throw ParameterError("least squares: dim must be positive");
  if (!(options.noise_fraction >= 0.0 && options.noise_fraction < 1.0)) {
    throw ParameterError("least squares: noise_fraction must lie in [0, 1)");
  }
  sigma_ = options.noise_fraction * b_bound;

  // Planted solution; a separate stream from the per-step sampling keys.
  CounterRng rng(RngKey{seed, ~std::uint64_t{0}}, 1);
  x_star_ = ParamVector(dim);
  double nrm = 0.0;
  while (nrm == 0.0) {
    for (double& v : x_star_) v = rng.normal();
    nrm = kernels::norm(x_star_);
  }
  const double target = (1.0 - options.noise_fraction) * b_bound / a_bound;
  for (double& v : x_star_) v *= target / nrm;
}

double LeastSquaresProblem::loss(std::span<const double> x) const {
  require_dim(x, dim(), "least squares");
  const double m = static_cast<double>(dim());
  const double dist = kernels::distance(x, x_star_);
  return 0.5 * (a_bound_ * a_bound_ / (3.0 * m) * dist * dist + sigma_ * sigma_ / 3.0);
}

std::optional<ParamVector> LeastSquaresProblem::full_grad(std::span<const double> x) const {
  require_dim(x, dim(), "least squares");
  const double c = a_bound_ * a_bound_ / (3.0 * static_cast<double>(dim()));
  ParamVector g(dim());
  for (std::size_t i = 0; i < g.dim(); ++i) g[i] = c * (x[i] - x_star_[i]);
  return g;
}

void LeastSquaresProblem::sample_grad(std::span<const double> x, RngKey key, std::span<double> out) const {
  require_dim(x, dim(), "least squares");
  if (options_.noiseless) {
    const auto g = *full_grad(x);
    std::copy(g.begin(), g.end(), out.begin());
    return;
  }
  CounterRng rng(key);
  // a = rho * u with u uniform on the sphere
  double nrm = 0.0;
  while (nrm == 0.0) {
    for (double& v : out) v = rng.normal();
    nrm = kernels::norm(out);
  }
  const double rho = a_bound_ * rng.uniform();
  for (double& v : out) v *= rho / nrm;
  double b = kernels::dot(out, x_star_) + sigma_ * rng.uniform(-1.0, 1.0);
  b = std::clamp(b, -b_bound_, b_bound_);
  const double residual = kernels::dot(out, x) - b;
  for (double& v : out) v *= residual;
}

std::optional<double> LeastSquaresProblem::lipschitz_at(std::span<const double> x) const {
  return a_bound_ * (a_bound_ * kernels::norm(x) + b_bound_);
}

double LeastSquaresProblem::lstar() const {
  const double d0 = kernels::norm(x_star_);
  return a_bound_ * (a_bound_ * 3.0 * d0 + b_bound_);
}

std::unique_ptr<LeastSquaresProblem> least_squares_oracle(double a_bound, double b_bound, std::size_t dim,
                                                          std::uint64_t seed, LeastSquaresOptions options) {
  return std::make_unique<LeastSquaresProblem>(a_bound, b_bound, dim, seed, options);
}

// ------------------------------------------------------------------ logistic

LogisticProblem::LogisticProblem(std::shared_ptr<const Dataset> data, std::size_t batch_size)
    : data_(std::move(data)), batch_size_(batch_size) {
  if (!data_ || data_->n == 0) throw InputError("logistic: empty dataset");
  data_->validate();
  if (batch_size_ == 0 || batch_size_ > data_->n) {
    throw ParameterError("logistic: batch_size must lie in [1, n]");
  }
  param_count_ = kernels::softmax_param_count(*data_);
  all_rows_.resize(data_->n);
  std::iota(all_rows_.begin(), all_rows_.end(), std::size_t{0});
}

double LogisticProblem::loss(std::span<const double> x) const {
  require_dim(x, dim(), "logistic");
  return kernels::parallel::softmax_loss(*data_, all_rows_, x);
}

std::vector<std::size_t> LogisticProblem::sample_rows(RngKey key) const {
  const std::size_t n = data_->n;
  if (batch_size_ == n) return all_rows_;
  // Floyd's algorithm: a uniform subset of size batch_size_.
  CounterRng rng(key);
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> rows;
  rows.reserve(batch_size_);
  for (std::size_t j = n - batch_size_; j < n; ++j) {
    const auto t = static_cast<std::size_t>(rng.below(j + 1));
    const std::size_t pick = taken[t] ? j : t;
    taken[pick] = 1;
    rows.push_back(pick);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

void LogisticProblem::sample_grad(std::span<const double> x, RngKey key, std::span<double> out) const {
  require_dim(x, dim(), "logistic");
  const auto rows = sample_rows(key);
  kernels::parallel::softmax_gradient(*data_, rows, x, out);
}

std::optional<ParamVector> LogisticProblem::full_grad(std::span<const double> x) const {
  require_dim(x, dim(), "logistic");
  ParamVector g(dim());
  kernels::parallel::softmax_gradient(*data_, all_rows_, x, g.span());
  return g;
}

std::vector<IndexRange> LogisticProblem::parameter_groups() const {
  const std::size_t w = data_->num_classes * data_->d;
  return {IndexRange{0, w}, IndexRange{w, param_count_}};
}

std::unique_ptr<LogisticProblem> logistic_oracle(Dataset data, std::size_t batch_size) {
  return std::make_unique<LogisticProblem>(std::make_shared<const Dataset>(std::move(data)), batch_size);
}

// ---------------------------------------------------------------- nemirovski

NemirovskiProblem::NemirovskiProblem(std::size_t dim, double r_eps) : dim_(dim), r_eps_(r_eps) {
  if (dim == 0) throw ParameterError("nemirovski: dim must be positive");
  if (!(std::isfinite(r_eps) && r_eps > 0.0)) throw ParameterError("nemirovski: r_eps must be positive");
}

std::size_t NemirovskiProblem::active_index(std::span<const double> x) const {
  require_dim(x, dim_, "nemirovski");
  const double inv_root = 1.0 / std::sqrt(static_cast<double>(dim_));
  std::size_t best = 0;
  double best_value = -INFINITY;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double v = std::max(x[i], -x[i] * inv_root);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

double NemirovskiProblem::loss(std::span<const double> x) const {
  const std::size_t i = active_index(x);
  return std::max(x[i], -x[i] / std::sqrt(static_cast<double>(dim_)));
}

void NemirovskiProblem::sample_grad(std::span<const double> x, RngKey, std::span<double> out) const {
  const std::size_t i = active_index(x);
  std::fill(out.begin(), out.end(), 0.0);
  out[i] = x[i] > 0.0 ? 1.0 : -1.0 / std::sqrt(static_cast<double>(dim_));
}

std::optional<ParamVector> NemirovskiProblem::full_grad(std::span<const double> x) const {
  ParamVector g(dim_);
  sample_grad(x, {}, g.span());
  return g;
}

ParamVector NemirovskiProblem::initial_point() const {
  return ParamVector(dim_, 10.0 * r_eps_ / std::sqrt(static_cast<double>(dim_)));
}

std::unique_ptr<NemirovskiProblem> nemirovski_instance(std::size_t dim, double r_eps) {
  return std::make_unique<NemirovskiProblem>(dim, r_eps);
}

Projection ball_projection(const ParamVector& center, double radius) { return Projection::ball(center, radius); }

}  // namespace dogsgd
