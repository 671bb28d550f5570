#include "dogsgd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

#include "dogsgd/errors.hpp"
#include "dogsgd/rng.hpp"

namespace dogsgd {

void Dataset::validate() const {
  if (features.size() != n * d) throw InputError("dataset: feature matrix is not n x d");
  if (labels.size() != n) throw InputError("dataset: label count differs from n");
  if (num_classes == 0) throw InputError("dataset: no classes");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= num_classes) throw InputError("dataset: label out of range in row " + std::to_string(i));
  }
  for (const double v : features) {
    if (!std::isfinite(v)) throw InputError("dataset: non-finite feature");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

void standardize(Dataset& data) {
  data.standardization.mean.assign(data.d, 0.0);
  data.standardization.scale.assign(data.d, 0.0);
  const double n = static_cast<double>(data.n);
  for (std::size_t j = 0; j < data.d; ++j) {
    const double first = data.features[j];
    bool constant = true;
    double mean = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      const double v = data.features[i * data.d + j];
      constant = constant && v == first;
      mean += v;
    }
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      const double diff = data.features[i * data.d + j] - mean;
      var += diff * diff;
    }
    const double scale = constant ? 0.0 : std::sqrt(var / n);
    data.standardization.mean[j] = mean;
    data.standardization.scale[j] = scale;
    for (std::size_t i = 0; i < data.n; ++i) {
      double& v = data.features[i * data.d + j];
      v = scale > 0.0 ? (v - mean) / scale : 0.0;
    }
  }
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& label_column, char delimiter) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (const auto field : split(line, delimiter)) header.emplace_back(field);
    break;
  }
  if (header.empty()) throw ParseError(line_no, "", "missing header row");

  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw ParseError(line_no, label_column, "no such label column in header");
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());

  Dataset data;
  data.d = header.size() - 1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_idx) data.feature_names.push_back(header[j]);
  }

  std::uint32_t max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, delimiter);
    if (fields.size() != header.size()) {
      throw ParseError(line_no, "", "expected " + std::to_string(header.size()) + " fields, found " +
                                        std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string_view f = fields[j];
      if (f.empty()) throw ParseError(line_no, header[j], "missing value");
      if (j == label_idx) {
        std::uint32_t label = 0;
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
        if (ec != std::errc() || ptr != f.data() + f.size()) {
          throw ParseError(line_no, header[j], "label must be a non-negative integer, got '" + std::string(f) + "'");
        }
        data.labels.push_back(label);
        max_label = std::max(max_label, label);
      } else {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
          throw ParseError(line_no, header[j], "not a finite number: '" + std::string(f) + "'");
        }
        data.features.push_back(v);
      }
    }
    ++data.n;
  }
  if (data.n == 0) throw ParseError(line_no, "", "no data rows");
  data.num_classes = static_cast<std::size_t>(max_label) + 1;
  standardize(data);
  data.validate();
  return data;
}

Dataset load_dataset(const std::string& path, const std::string& label_column, char delimiter) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset '" + path + "'");
  return parse_dataset(in, label_column, delimiter);
}

Dataset make_synthetic_classification(std::size_t n, std::size_t d, std::size_t num_classes, std::uint64_t seed,
                                      double weight_scale) {
  if (n == 0 || d == 0 || num_classes < 2) throw ParameterError("synthetic data: need n, d >= 1 and >= 2 classes");
  Dataset data;
  data.n = n;
  data.d = d;
  data.num_classes = num_classes;
  data.features.resize(n * d);
  data.labels.resize(n);
  for (std::size_t j = 0; j < d; ++j) data.feature_names.push_back("x" + std::to_string(j));

  CounterRng wrng(RngKey{seed, ~std::uint64_t{0}}, 2);
  std::vector<double> w(num_classes * d);
  for (double& v : w) v = weight_scale * wrng.normal();

  std::vector<double> logits(num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(RngKey{seed, i}, 3);
    double* x = data.features.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) x[j] = rng.normal();
    double top = -INFINITY;
    for (std::size_t k = 0; k < num_classes; ++k) {
      double z = 0.0;
      for (std::size_t j = 0; j < d; ++j) z += w[k * d + j] * x[j];
      logits[k] = z;
      top = std::max(top, z);
    }
    double total = 0.0;
    for (double& z : logits) total += (z = std::exp(z - top));
    double u = rng.uniform() * total;
    std::size_t label = num_classes - 1;
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (u < logits[k]) {
        label = k;
        break;
      }
      u -= logits[k];
    }
    data.labels[i] = static_cast<std::uint32_t>(label);
  }
  data.standardization.mean.assign(d, 0.0);
  data.standardization.scale.assign(d, 1.0);
  return data;
}

}  // namespace dogsgd
