#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dogsgd {

/// Per-column affine map applied at load time: z = (x - mean) / scale.
/// scale is 0 for constant columns, whose standardized values are all 0.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;
};

/// Labelled feature matrix, row-major, n rows by d columns.
struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;
  std::vector<std::uint32_t> labels;
  std::vector<std::string> feature_names;
  Standardization standardization;

  std::span<const double> row(std::size_t i) const { return {features.data() + i * d, d}; }

  /// Throws InputError if shapes disagree, a label is out of range or a
  /// feature is non-finite.
  void validate() const;
};

/// Reads a delimited text file with a header row. The column named
/// label_column holds non-negative integer class labels; every other column
/// is a numeric feature. Features are standardized per column.
Dataset load_dataset(const std::string& path, const std::string& label_column, char delimiter = ',');
Dataset parse_dataset(std::istream& in, const std::string& label_column, char delimiter = ',');

/// Gaussian features with labels drawn from a planted softmax model, so the
/// classes overlap and the cross-entropy minimum is finite.
Dataset make_synthetic_classification(std::size_t n, std::size_t d, std::size_t num_classes,
                                      std::uint64_t seed, double weight_scale = 1.0);

}  // namespace dogsgd
