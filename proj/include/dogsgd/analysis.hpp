#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dogsgd/core.hpp"
#include "dogsgd/param_vector.hpp"
#include "dogsgd/problems.hpp"
#include "dogsgd/schedules.hpp"

namespace dogsgd {

/// Relative slack granted to right-hand sides of trajectory certificates.
inline constexpr double kCertificateTolerance = 1e-9;

/// Relative slack for the scalar lemma verifiers, to absorb rounding in
/// sums whose two sides agree in exact arithmetic.
inline constexpr double kLemmaTolerance = 1e-12;

/// A per-step inequality lhs_t <= rhs_t evaluated along a run.
struct Certificate {
  std::string name;
  std::vector<double> lhs;
  std::vector<double> rhs;
  bool satisfied = true;
  std::optional<std::size_t> first_violation;

  /// satisfied iff lhs_t <= rhs_t (1 + kCertificateTolerance) for every t.
  static Certificate evaluate(std::string name, std::vector<double> lhs, std::vector<double> rhs);
};

/// Everything needed to re-check a run offline. For T steps:
/// iterates x_0..x_T, gradients g_0..g_{T-1}, r̄_0..r̄_T (r̄_T from x_T),
/// G'_0..G'_{T-1} and eta_0..eta_{T-1}.
struct Trace {
  double r_eps = 0.0;
  std::vector<ParamVector> iterates;
  std::vector<ParamVector> gradients;
  std::vector<double> r_bar;
  std::vector<double> grad_sq_sum_prime;
  std::vector<double> eta;

  std::size_t steps() const noexcept { return gradients.size(); }
  /// Throws InputError when the sequences have inconsistent lengths.
  void validate() const;
};

/// Runs `steps` iterations from the problem's start point, keeping the whole
/// trajectory in memory. Meant for small runs and tests.
Trace record_trace(const ProblemOracle& problem, const Schedule& schedule, double r_eps, std::size_t steps,
                   std::uint64_t seed, const Projection& projection = Projection::unconstrained());

/// Weighted regret bound for DoG-like runs, t = 0..T (t = 0 is 0 <= 0):
///   sum_{k<t} r̄_k <g_k, x_k - x*>  <=  r̄_t (2 d̄_t + r̄_t) sqrt(G'_{t-1}).
/// Holds for any reference point x* in the domain.
Certificate regret_certificate(const Trace& trace, const ParamVector& x_star);

/// Running noise sum N_t = sum_{k<t} r̄_k <g_k - ∇f(x_k), x_k - x*>, t = 0..T.
std::vector<double> noise_term(const Trace& trace, const ParamVector& x_star,
                               std::span<const ParamVector> full_grads);

struct StabilityReport {
  bool precondition_ok = true;  // r_eps <= 3 d_0
  Certificate radius;           // r̄_t <= 3 d_0
  std::optional<Certificate> distance;  // d_t <= 2 d_0 (noiseless runs with known x*)
};

StabilityReport stability_check(const Trace& trace, double d0, const std::optional<ParamVector>& x_star = std::nullopt,
                                bool noiseless = false);

/// Lower bound of the max-ratio lemma: (1/e) (T / log+(s_T / s_0) - 1).
double max_ratio_lower_bound(std::size_t horizon, double s0, double s_last);

/// max_{t<=T} sum_{i<t} s_i / s_t >= (1/e)(T / log+(s_T / s_0) - 1)
/// for positive nondecreasing s_0..s_T (T >= 1).
bool verify_max_ratio_lemma(std::span<const double> s);

/// sum_{k=1..t} (a_k - a_{k-1}) / sqrt(a_k) <= 2 (sqrt(a_t) - sqrt(a_0)),
/// checked for every prefix t. Terms with a_k = 0 count as 0.
bool verify_adagrad_algebra(std::span<const double> a);

/// |sum_{i<=t} a_i b_i| <= 2 a_t max_{i<=t} |sum_{j<=i} b_j| for every prefix t.
bool verify_sequence_product_bound(std::span<const double> a, std::span<const double> b);

/// sum_{k=0..t} (a_k - a_{k-1}) / (a_k log+^2(a_k / a_{-1})) <= 1 for every
/// prefix, where a_minus1 = a_{-1} > 0.
bool verify_log_sum_bound(double a_minus1, std::span<const double> a);

/// (err_dog - err_x) / err_dog; positive means x beat DoG.
/// Throws ParameterError when err_dog = 0 or either error leaves [0, 1].
double red_score(double err_x, double err_dog);

/// Outcome of the randomized lemma suites.
struct LemmaSuiteReport {
  struct Entry {
    std::string lemma;
    std::size_t cases = 0;
    std::size_t failures = 0;
  };
  std::vector<Entry> entries;
  bool all_passed() const;
};

/// `cases` random instances per lemma plus fixed adversarial shapes
/// (constant, single jump, geometric, alternating signs).
LemmaSuiteReport run_lemma_suites(std::size_t cases, std::uint64_t seed);

}  // namespace dogsgd
