#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iatr/matrix.hpp"

namespace iatr {

/// Per-class instance collection. classes[n] holds the I(n) instances of class n,
/// one L-dimensional feature vector per row, in acquisition order.
struct TrainingSet {
  std::vector<std::string> labels;
  std::vector<Matrix> classes;

  std::size_t num_classes() const noexcept { return classes.size(); }
  std::size_t dim() const noexcept { return classes.empty() ? 0 : classes.front().cols(); }
  std::size_t instances(std::size_t n) const { return classes.at(n).rows(); }
  std::size_t min_instances() const;
  std::size_t total_instances() const;

  std::optional<std::size_t> find_class(std::string_view label) const;

  /// Throws InvalidInput/DimensionMismatch unless N >= 1, every I(n) >= 1, L >= 1,
  /// all dims agree, labels are unique and every value is finite.
  void validate() const;
};

/// The R feature vectors extracted from one observation.
struct QuerySet {
  Matrix vectors;

  std::size_t size() const noexcept { return vectors.rows(); }
  std::size_t dim() const noexcept { return vectors.cols(); }

  void validate(std::size_t expected_dim) const;
};

}  // namespace iatr
