#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace iatr {

struct LabeledSignal {
  std::string class_label;
  std::string task_label;
  double sample_rate_hz = 0.0;
  std::vector<double> samples;

  friend bool operator==(const LabeledSignal&, const LabeledSignal&) = default;
};

struct LabeledSignalSet {
  std::vector<LabeledSignal> entries;
};

/// "Oz.." -> "oz": trailing periods and whitespace stripped, lower-cased.
std::string normalize_channel_label(std::string_view label);

/// "S001", "s1" or "1" -> "S001".
std::string mmi_subject_id(std::string_view subject);

/// <root>/S###/S###R##.edf
std::filesystem::path mmi_run_path(const std::filesystem::path& root, std::string_view subject, int run);

/// Loads one channel of each requested run. class_label is the subject id,
/// task_label the run id ("R03"). Throws MissingFile or ChannelNotFound (the
/// message lists the available labels).
LabeledSignalSet load_mmi_subject(const std::filesystem::path& root, std::string_view subject,
                                  const std::vector<int>& runs, std::string_view channel);

/// CSV with header class_label,task_label,sample_rate_hz,sample_index,value.
/// Rows are grouped by (class_label, task_label) in order of first appearance
/// and ordered by sample_index. Throws ParseError naming the row.
LabeledSignalSet read_csv_signals(std::istream& in);
LabeledSignalSet load_csv_signals(const std::filesystem::path& path);
void write_csv_signals(std::ostream& out, const LabeledSignalSet& set);

}  // namespace iatr
