#pragma once

// European Data Format reader (and a writer for test fixtures).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace iatr {

struct EdfDateTime {
  int day = 1;
  int month = 1;
  int year = 1985;  // two-digit years: 85-99 -> 19xx, 00-84 -> 20xx
  int hour = 0;
  int minute = 0;
  int second = 0;

  friend bool operator==(const EdfDateTime&, const EdfDateTime&) = default;
};

struct EdfSignal {
  std::string label;
  std::string transducer;
  std::string physical_dimension;
  double physical_min = 0.0;
  double physical_max = 0.0;
  int digital_min = 0;
  int digital_max = 0;
  std::string prefiltering;
  std::size_t samples_per_record = 0;
  std::string reserved;

  std::vector<std::int16_t> digital;
  /// Empty for annotation channels, which are kept only as raw words.
  std::vector<double> physical;

  bool is_annotation() const;
  double to_physical(std::int16_t d) const;

  friend bool operator==(const EdfSignal&, const EdfSignal&) = default;
};

struct EdfRecording {
  std::string version = "0";
  std::string patient_id;
  std::string recording_id;
  EdfDateTime start;
  std::string reserved;
  std::size_t num_records = 0;
  double record_duration_s = 1.0;
  std::vector<EdfSignal> signals;

  std::size_t header_bytes() const { return 256 * (signals.size() + 1); }
  std::size_t record_bytes() const;
  double sample_rate(const EdfSignal& s) const {
    return static_cast<double>(s.samples_per_record) / record_duration_s;
  }

  friend bool operator==(const EdfRecording&, const EdfRecording&) = default;
};

/// Throws MalformedHeader (short input, non-ASCII or unparsable header fields),
/// SizeMismatch (byte count differs from the header's implied size) or
/// BadScaling (digital_min >= digital_max, physical_min == physical_max).
EdfRecording parse_edf(std::string_view bytes);

EdfRecording read_edf_file(const std::filesystem::path& path);

/// Writes header and digital samples. Numeric header fields must fit in 8 characters.
std::string serialize_edf(const EdfRecording& rec);

}  // namespace iatr
