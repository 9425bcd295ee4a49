#include "iatr/signals.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "iatr/edf.hpp"
#include "iatr/error.hpp"
#include "iatr/text_io.hpp"

namespace iatr {

std::string normalize_channel_label(std::string_view label) {
  label = text::trim(label);
  while (!label.empty() && (label.back() == '.' || std::isspace(static_cast<unsigned char>(label.back()))))
    label.remove_suffix(1);
  std::string out(label);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string mmi_subject_id(std::string_view subject) {
  subject = text::trim(subject);
  if (!subject.empty() && (subject.front() == 'S' || subject.front() == 's')) subject.remove_prefix(1);
  const auto n = text::parse_size(subject, "subject id");
  if (n < 1 || n > 999) throw Error(ErrorCode::BadConfig, "subject number out of range");
  std::string digits = std::to_string(n);
  return "S" + std::string(3 - digits.size(), '0') + digits;
}

std::filesystem::path mmi_run_path(const std::filesystem::path& root, std::string_view subject, int run) {
  if (run < 1 || run > 99) throw Error(ErrorCode::BadConfig, "run number out of range");
  const auto id = mmi_subject_id(subject);
  const std::string r = (run < 10 ? "R0" : "R") + std::to_string(run);
  return root / id / (id + r + ".edf");
}

LabeledSignalSet load_mmi_subject(const std::filesystem::path& root, std::string_view subject,
                                  const std::vector<int>& runs, std::string_view channel) {
  if (!std::filesystem::is_directory(root))
    throw Error(ErrorCode::MissingFile, "dataset directory " + root.string() + " does not exist");
  const auto id = mmi_subject_id(subject);
  const auto wanted = normalize_channel_label(channel);
  LabeledSignalSet out;
  for (int run : runs) {
    const auto path = mmi_run_path(root, id, run);
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, "missing recording " + path.string());
    const auto rec = read_edf_file(path);
    const auto it = std::find_if(rec.signals.begin(), rec.signals.end(), [&](const EdfSignal& s) {
      return !s.is_annotation() && normalize_channel_label(s.label) == wanted;
    });
    if (it == rec.signals.end()) {
      std::string available;
      for (const auto& s : rec.signals) {
        if (s.is_annotation()) continue;
        if (!available.empty()) available += ", ";
        available += s.label;
      }
      throw Error(ErrorCode::ChannelNotFound, "channel '" + std::string(channel) + "' not in " + path.string() +
                                                  "; available: " + available);
    }
    const std::string r = (run < 10 ? "R0" : "R") + std::to_string(run);
    out.entries.push_back({id, r, rec.sample_rate(*it), it->physical});
  }
  return out;
}

LabeledSignalSet read_csv_signals(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      text::trim(line) != "class_label,task_label,sample_rate_hz,sample_index,value")
    throw Error(ErrorCode::ParseError, "signal CSV row 1: expected header "
                                       "class_label,task_label,sample_rate_hz,sample_index,value");
  struct Pending {
    double rate;
    std::map<std::size_t, double> samples;
  };
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, Pending> groups;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (text::trim(line).empty()) continue;
    const std::string ctx = "signal CSV row " + std::to_string(row_no);
    const auto f = text::split_csv(line);
    if (f.size() != 5) throw Error(ErrorCode::ParseError, ctx + ": expected 5 fields");
    std::pair key{std::string(text::trim(f[0])), std::string(text::trim(f[1]))};
    if (key.first.empty()) throw Error(ErrorCode::ParseError, ctx + ": empty class_label");
    const double rate = text::parse_double(f[2], ctx);
    if (!(rate > 0.0)) throw Error(ErrorCode::ParseError, ctx + ": sample rate must be positive");
    const auto index = text::parse_size(f[3], ctx);
    const double value = text::parse_double(f[4], ctx);
    auto [it, inserted] = groups.try_emplace(key, Pending{rate, {}});
    if (inserted) order.push_back(key);
    if (it->second.rate != rate) throw Error(ErrorCode::ParseError, ctx + ": sample rate changes within a signal");
    if (!it->second.samples.emplace(index, value).second)
      throw Error(ErrorCode::ParseError, ctx + ": duplicate sample_index " + std::to_string(index));
  }
  if (order.empty()) throw Error(ErrorCode::ParseError, "signal CSV: no data rows");
  LabeledSignalSet set;
  for (const auto& key : order) {
    const auto& g = groups[key];
    LabeledSignal s{key.first, key.second, g.rate, {}};
    s.samples.reserve(g.samples.size());
    for (const auto& [idx, v] : g.samples) s.samples.push_back(v);
    set.entries.push_back(std::move(s));
  }
  return set;
}

LabeledSignalSet load_csv_signals(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open signal file " + path.string());
  return read_csv_signals(in);
}

void write_csv_signals(std::ostream& out, const LabeledSignalSet& set) {
  out << "class_label,task_label,sample_rate_hz,sample_index,value\n";
  for (const auto& e : set.entries) {
    text::require_plain_field(e.class_label, "class label");
    text::require_plain_field(e.task_label, "task label");
    const auto rate = text::format_double(e.sample_rate_hz);
    for (std::size_t i = 0; i < e.samples.size(); ++i)
      out << e.class_label << ',' << e.task_label << ',' << rate << ',' << i << ','
          << text::format_double(e.samples[i]) << '\n';
  }
}

}  // namespace iatr
