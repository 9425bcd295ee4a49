#include "iatr/training_set.hpp"

#include <algorithm>
#include <set>

#include "iatr/error.hpp"

namespace iatr {

std::size_t TrainingSet::min_instances() const {
  std::size_t m = classes.empty() ? 0 : classes.front().rows();
  for (const auto& c : classes) m = std::min(m, c.rows());
  return m;
}

std::size_t TrainingSet::total_instances() const {
  std::size_t total = 0;
  for (const auto& c : classes) total += c.rows();
  return total;
}

std::optional<std::size_t> TrainingSet::find_class(std::string_view label) const {
  for (std::size_t n = 0; n < labels.size(); ++n)
    if (labels[n] == label) return n;
  return std::nullopt;
}

void TrainingSet::validate() const {
  if (classes.empty()) throw Error(ErrorCode::InvalidInput, "training set has no classes");
  if (labels.size() != classes.size())
    throw Error(ErrorCode::InvalidInput, "label count does not match class count");
  const std::size_t l = dim();
  if (l == 0) throw Error(ErrorCode::InvalidInput, "feature dimension must be >= 1");
  std::set<std::string> seen;
  for (std::size_t n = 0; n < classes.size(); ++n) {
    const auto& c = classes[n];
    if (c.rows() == 0) throw Error(ErrorCode::InvalidInput, "class '" + labels[n] + "' has no instances");
    if (c.cols() != l)
      throw Error(ErrorCode::DimensionMismatch, "class '" + labels[n] + "' has dimension " +
                                                    std::to_string(c.cols()) + ", expected " +
                                                    std::to_string(l));
    if (!c.all_finite()) throw Error(ErrorCode::InvalidInput, "class '" + labels[n] + "' has non-finite values");
    if (!seen.insert(labels[n]).second) throw Error(ErrorCode::InvalidInput, "duplicate label '" + labels[n] + "'");
  }
}

void QuerySet::validate(std::size_t expected_dim) const {
  if (vectors.rows() == 0) throw Error(ErrorCode::InvalidInput, "query set is empty");
  if (vectors.cols() != expected_dim)
    throw Error(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(vectors.cols()) +
                                                  " does not match template dimension " +
                                                  std::to_string(expected_dim));
  if (!vectors.all_finite()) throw Error(ErrorCode::InvalidInput, "query has non-finite values");
}

}  // namespace iatr
