#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dogsgd/averaging.hpp"
#include "dogsgd/schedules.hpp"

namespace dogsgd {

inline constexpr double kDefaultAlpha = 1e-4;
inline constexpr std::size_t kDefaultEvalEvery = 50;

/// Which problem to build and its parameters. Only the fields of the chosen
/// kind are read.
struct ProblemSpec {
  enum class Kind { Quadratic, LeastSquares, Logistic, Nemirovski };
  Kind kind = Kind::Quadratic;

  std::size_t dim = 20;  // quadratic, least squares, nemirovski

  double condition = 100.0;  // quadratic

  double a_bound = 1.0;  // least squares
  double b_bound = 1.0;
  double noise_fraction = 0.5;
  bool noiseless = false;
  std::optional<std::uint64_t> instance_seed;  // defaults to the run seed

  std::optional<std::string> dataset;  // logistic: CSV path, else synthetic data
  std::string label_column = "label";
  char delimiter = ',';
  std::size_t n = 2000;
  std::size_t d = 20;
  std::size_t classes = 5;
  double weight_scale = 1.0;
  std::optional<std::uint64_t> data_seed;  // defaults to the run seed
  std::size_t batch_size = 32;

  double r_eps = 0x1.0p-10;  // nemirovski: instance scale
};

const char* to_string(ProblemSpec::Kind kind);

/// Axes of a sweep; an empty axis is not swept.
struct SweepAxes {
  std::vector<double> alpha;
  std::vector<double> c;
  std::vector<double> lr;  // ConstantSGD eta, CosineSGD peak or AdaGradNorm rho

  bool empty() const noexcept { return alpha.empty() && c.empty() && lr.empty(); }
};

/// A run is fully determined by (config, seed).
struct ExperimentConfig {
  ProblemSpec problem;
  Schedule schedule = DoG{};
  std::size_t steps = 1000;
  std::vector<std::uint64_t> seeds{0};
  double alpha = kDefaultAlpha;      // r_eps = alpha (1 + ||x_0||)
  std::optional<double> r_eps;       // explicit override
  std::size_t eval_every = kDefaultEvalEvery;
  double gamma = kDefaultPolyGamma;
  std::optional<double> domain_radius;  // project onto a ball around x_0
  std::string output = "run.csv";
  SweepAxes sweep;
};

/// Parses the JSON config format:
///
///   {
///     "problem":  {"kind": "logistic", "n": 2000, "batch_size": 32, ...},
///     "schedule": {"kind": "dog"},
///     "steps": 5000, "seeds": [0, 1], "alpha": 1e-4, "eval_every": 50,
///     "gamma": 8, "domain_radius": 10, "r_eps": 1e-3, "output": "out.csv",
///     "sweep": {"alpha": [1e-8, 1e-6], "c": [0.5, 1], "lr": [0.01, 0.1]}
///   }
///
/// Schedule kinds: dog, scaled_dog {c}, tdog {T, delta, drop_theta},
/// ldog {eps}, sgd {eta}, cosine {peak, T}, adagrad_norm {rho}.
/// Unknown keys are rejected. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON of a config (all defaults filled in), for run metadata.
std::string config_to_json(const ExperimentConfig& config);

}  // namespace dogsgd
