#include "iatr/edf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "iatr/error.hpp"
#include "iatr/text_io.hpp"

namespace iatr {
namespace {

constexpr std::size_t kFixedHeader = 256;

class FieldReader {
 public:
  explicit FieldReader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view raw(std::size_t width, const char* name) {
    if (pos_ + width > bytes_.size())
      throw Error(ErrorCode::MalformedHeader, std::string("input ends inside header field ") + name);
    const auto field = bytes_.substr(pos_, width);
    pos_ += width;
    for (char c : field)
      if (static_cast<unsigned char>(c) < 32 || static_cast<unsigned char>(c) > 126)
        throw Error(ErrorCode::MalformedHeader, std::string("non-ASCII byte in header field ") + name);
    return field;
  }

  std::string text(std::size_t width, const char* name) {
    auto f = raw(width, name);
    const auto last = f.find_last_not_of(' ');
    return std::string(last == std::string_view::npos ? std::string_view{} : f.substr(0, last + 1));
  }

  long long integer(std::size_t width, const char* name) {
    const auto f = text::trim(raw(width, name));
    long long v = 0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size())
      throw Error(ErrorCode::MalformedHeader, std::string("header field ") + name + " is not an integer");
    return v;
  }

  double real(std::size_t width, const char* name) {
    const auto f = text::trim(raw(width, name));
    double v = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(v))
      throw Error(ErrorCode::MalformedHeader, std::string("header field ") + name + " is not a number");
    return v;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

// "dd.mm.yy" / "hh.mm.ss"
void parse_triplet(std::string_view f, int& a, int& b, int& c, const char* name) {
  auto two = [&](std::size_t at) {
    int v = 0;
    const auto res = std::from_chars(f.data() + at, f.data() + at + 2, v);
    if (res.ec != std::errc{} || res.ptr != f.data() + at + 2)
      throw Error(ErrorCode::MalformedHeader, std::string("header field ") + name + " is malformed");
    return v;
  };
  if (f.size() != 8 || f[2] != '.' || f[5] != '.')
    throw Error(ErrorCode::MalformedHeader, std::string("header field ") + name + " is malformed");
  a = two(0);
  b = two(3);
  c = two(6);
}

std::string pad(std::string_view s, std::size_t width, const char* name) {
  if (s.size() > width) throw Error(ErrorCode::InvalidInput, std::string("EDF field ") + name + " is too long");
  std::string out(s);
  out.resize(width, ' ');
  return out;
}

std::string two_digits(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace

bool EdfSignal::is_annotation() const { return label == "EDF Annotations"; }

double EdfSignal::to_physical(std::int16_t d) const {
  return (static_cast<double>(d) - digital_min) * (physical_max - physical_min) /
             static_cast<double>(digital_max - digital_min) +
         physical_min;
}

std::size_t EdfRecording::record_bytes() const {
  std::size_t total = 0;
  for (const auto& s : signals) total += 2 * s.samples_per_record;
  return total;
}

EdfRecording parse_edf(std::string_view bytes) {
  if (bytes.size() < kFixedHeader)
    throw Error(ErrorCode::MalformedHeader, "input has " + std::to_string(bytes.size()) +
                                                " bytes, shorter than the 256-byte header");
  FieldReader rd(bytes);
  EdfRecording rec;
  rec.version = rd.text(8, "version");
  if (rec.version != "0") throw Error(ErrorCode::MalformedHeader, "unsupported version '" + rec.version + "'");
  rec.patient_id = rd.text(80, "patient");
  rec.recording_id = rd.text(80, "recording");
  int yy = 0;
  parse_triplet(rd.raw(8, "startdate"), rec.start.day, rec.start.month, yy, "startdate");
  rec.start.year = yy >= 85 ? 1900 + yy : 2000 + yy;
  parse_triplet(rd.raw(8, "starttime"), rec.start.hour, rec.start.minute, rec.start.second, "starttime");
  const long long header_bytes = rd.integer(8, "header bytes");
  rec.reserved = rd.text(44, "reserved");
  const long long records = rd.integer(8, "number of records");
  rec.record_duration_s = rd.real(8, "record duration");
  const long long ns = rd.integer(4, "number of signals");
  if (records < 0) throw Error(ErrorCode::MalformedHeader, "record count must be known (got -1)");
  if (ns < 1) throw Error(ErrorCode::MalformedHeader, "recording declares no signals");
  if (!(rec.record_duration_s > 0.0)) throw Error(ErrorCode::MalformedHeader, "record duration must be positive");
  rec.num_records = static_cast<std::size_t>(records);
  const auto signal_count = static_cast<std::size_t>(ns);
  if (header_bytes < 0 || static_cast<std::size_t>(header_bytes) != kFixedHeader * (signal_count + 1))
    throw Error(ErrorCode::MalformedHeader, "header byte count " + std::to_string(header_bytes) +
                                                " disagrees with " + std::to_string(signal_count) + " signals");
  if (bytes.size() < kFixedHeader * (signal_count + 1))
    throw Error(ErrorCode::MalformedHeader, "input ends inside the signal headers");

  rec.signals.resize(signal_count);
  for (auto& s : rec.signals) s.label = rd.text(16, "label");
  for (auto& s : rec.signals) s.transducer = rd.text(80, "transducer");
  for (auto& s : rec.signals) s.physical_dimension = rd.text(8, "physical dimension");
  for (auto& s : rec.signals) s.physical_min = rd.real(8, "physical minimum");
  for (auto& s : rec.signals) s.physical_max = rd.real(8, "physical maximum");
  for (auto& s : rec.signals) s.digital_min = static_cast<int>(rd.integer(8, "digital minimum"));
  for (auto& s : rec.signals) s.digital_max = static_cast<int>(rd.integer(8, "digital maximum"));
  for (auto& s : rec.signals) s.prefiltering = rd.text(80, "prefiltering");
  for (auto& s : rec.signals) {
    const long long n = rd.integer(8, "samples per record");
    if (n < 1) throw Error(ErrorCode::MalformedHeader, "samples per record must be positive");
    s.samples_per_record = static_cast<std::size_t>(n);
  }
  for (auto& s : rec.signals) s.reserved = rd.text(32, "signal reserved");

  for (const auto& s : rec.signals) {
    if (s.is_annotation()) continue;
    if (s.digital_min >= s.digital_max)
      throw Error(ErrorCode::BadScaling, "signal '" + s.label + "' has digital_min >= digital_max");
    if (s.physical_min == s.physical_max)
      throw Error(ErrorCode::BadScaling, "signal '" + s.label + "' has physical_min == physical_max");
  }

  const std::size_t expected = rec.header_bytes() + rec.num_records * rec.record_bytes();
  if (bytes.size() != expected)
    throw Error(ErrorCode::SizeMismatch, "file has " + std::to_string(bytes.size()) + " bytes, header implies " +
                                             std::to_string(expected));

  for (auto& s : rec.signals) s.digital.reserve(rec.num_records * s.samples_per_record);
  std::size_t pos = rec.header_bytes();
  for (std::size_t r = 0; r < rec.num_records; ++r) {
    for (auto& s : rec.signals) {
      for (std::size_t k = 0; k < s.samples_per_record; ++k, pos += 2) {
        const auto lo = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[pos]));
        const auto hi = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[pos + 1]));
        s.digital.push_back(static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8))));
      }
    }
  }
  for (auto& s : rec.signals) {
    if (s.is_annotation()) continue;
    s.physical.reserve(s.digital.size());
    for (auto d : s.digital) s.physical.push_back(s.to_physical(d));
  }
  return rec;
}

EdfRecording read_edf_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_edf(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string serialize_edf(const EdfRecording& rec) {
  auto num = [](double v, const char* name) {
    auto s = text::format_double(v);
    if (s.size() > 8) throw Error(ErrorCode::InvalidInput, std::string("EDF field ") + name + " needs > 8 chars");
    return pad(s, 8, name);
  };
  auto integer = [](long long v, std::size_t width, const char* name) { return pad(std::to_string(v), width, name); };

  std::string out;
  out += pad(rec.version, 8, "version");
  out += pad(rec.patient_id, 80, "patient");
  out += pad(rec.recording_id, 80, "recording");
  out += two_digits(rec.start.day) + "." + two_digits(rec.start.month) + "." + two_digits(rec.start.year % 100);
  out += two_digits(rec.start.hour) + "." + two_digits(rec.start.minute) + "." + two_digits(rec.start.second);
  out += integer(static_cast<long long>(rec.header_bytes()), 8, "header bytes");
  out += pad(rec.reserved, 44, "reserved");
  out += integer(static_cast<long long>(rec.num_records), 8, "number of records");
  out += num(rec.record_duration_s, "record duration");
  out += integer(static_cast<long long>(rec.signals.size()), 4, "number of signals");
  for (const auto& s : rec.signals) out += pad(s.label, 16, "label");
  for (const auto& s : rec.signals) out += pad(s.transducer, 80, "transducer");
  for (const auto& s : rec.signals) out += pad(s.physical_dimension, 8, "physical dimension");
  for (const auto& s : rec.signals) out += num(s.physical_min, "physical minimum");
  for (const auto& s : rec.signals) out += num(s.physical_max, "physical maximum");
  for (const auto& s : rec.signals) out += integer(s.digital_min, 8, "digital minimum");
  for (const auto& s : rec.signals) out += integer(s.digital_max, 8, "digital maximum");
  for (const auto& s : rec.signals) out += pad(s.prefiltering, 80, "prefiltering");
  for (const auto& s : rec.signals) out += integer(static_cast<long long>(s.samples_per_record), 8, "samples");
  for (const auto& s : rec.signals) out += pad(s.reserved, 32, "signal reserved");

  for (const auto& s : rec.signals)
    if (s.digital.size() != rec.num_records * s.samples_per_record)
      throw Error(ErrorCode::InvalidInput, "signal '" + s.label + "' sample count disagrees with header");
  for (std::size_t r = 0; r < rec.num_records; ++r) {
    for (const auto& s : rec.signals) {
      for (std::size_t k = 0; k < s.samples_per_record; ++k) {
        const auto w = static_cast<std::uint16_t>(s.digital[r * s.samples_per_record + k]);
        out += static_cast<char>(w & 0xFF);
        out += static_cast<char>(w >> 8);
      }
    }
  }
  return out;
}

}  // namespace iatr
