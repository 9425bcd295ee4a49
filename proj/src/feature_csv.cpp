#include "iatr/feature_csv.hpp"

#include <fstream>

#include "iatr/error.hpp"
#include "iatr/text_io.hpp"

namespace iatr {

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  const std::size_t dims = table.dim();
  out << "class_id,recording_id,window_index";
  for (std::size_t b = 1; b <= dims; ++b) out << ",f" << b;
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.values.size() != dims) throw Error(ErrorCode::DimensionMismatch, "feature rows differ in length");
    text::require_plain_field(row.class_id, "class id");
    text::require_plain_field(row.recording_id, "recording id");
    out << row.class_id << ',' << row.recording_id << ',' << row.window_index;
    for (double v : row.values) out << ',' << text::format_double(v);
    out << '\n';
  }
}

FeatureTable read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "feature CSV: empty input");
  const auto header = text::split_csv(line);
  if (header.size() < 4 || text::trim(header[0]) != "class_id" || text::trim(header[1]) != "recording_id" ||
      text::trim(header[2]) != "window_index")
    throw Error(ErrorCode::ParseError, "feature CSV: expected header class_id,recording_id,window_index,f1..fB");
  const std::size_t dims = header.size() - 3;
  for (std::size_t b = 0; b < dims; ++b)
    if (text::trim(header[3 + b]) != "f" + std::to_string(b + 1))
      throw Error(ErrorCode::ParseError, "feature CSV: feature columns must be named f1..fB");

  FeatureTable table;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (text::trim(line).empty()) continue;
    const std::string ctx = "feature CSV row " + std::to_string(row_no);
    const auto f = text::split_csv(line);
    if (f.size() != dims + 3)
      throw Error(ErrorCode::ParseError, ctx + ": expected " + std::to_string(dims + 3) + " fields");
    FeatureRow row;
    row.class_id = std::string(text::trim(f[0]));
    row.recording_id = std::string(text::trim(f[1]));
    if (row.class_id.empty()) throw Error(ErrorCode::ParseError, ctx + ": empty class_id");
    row.window_index = text::parse_size(f[2], ctx);
    row.values.reserve(dims);
    for (std::size_t b = 0; b < dims; ++b) row.values.push_back(text::parse_double(f[3 + b], ctx));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void save_feature_csv(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  write_feature_csv(out, table);
}

FeatureTable load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open feature file " + path.string());
  return read_feature_csv(in);
}

TrainingSet to_training_set(const FeatureTable& table) {
  TrainingSet set;
  for (const auto& row : table.rows) {
    auto n = set.find_class(row.class_id);
    if (!n) {
      set.labels.push_back(row.class_id);
      set.classes.emplace_back();
      n = set.classes.size() - 1;
    }
    set.classes[*n].append_row(row.values);
  }
  set.validate();
  return set;
}

FeatureTable from_training_set(const TrainingSet& set, const std::string& session) {
  FeatureTable table;
  for (std::size_t n = 0; n < set.num_classes(); ++n) {
    const Matrix& c = set.classes[n];
    for (std::size_t i = 0; i < c.rows(); ++i) {
      const auto r = c.row(i);
      table.rows.push_back({set.labels[n], session, i, std::vector<double>(r.begin(), r.end())});
    }
  }
  return table;
}

}  // namespace iatr
