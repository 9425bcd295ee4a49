#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "iatr/training_set.hpp"

namespace iatr {

struct FeatureRow {
  std::string class_id;
  std::string recording_id;
  std::size_t window_index = 0;
  std::vector<double> values;
};

/// Rows of the feature file `class_id,recording_id,window_index,f1..fB`.
struct FeatureTable {
  std::vector<FeatureRow> rows;

  std::size_t dim() const noexcept { return rows.empty() ? 0 : rows.front().values.size(); }
};

void write_feature_csv(std::ostream& out, const FeatureTable& table);
FeatureTable read_feature_csv(std::istream& in);

void save_feature_csv(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable load_feature_csv(const std::filesystem::path& path);

/// Groups rows by class in order of first appearance, keeping file order within a class.
TrainingSet to_training_set(const FeatureTable& table);

/// One row per instance; recording_id is `session`, window_index the row number.
FeatureTable from_training_set(const TrainingSet& set, const std::string& session);

}  // namespace iatr
