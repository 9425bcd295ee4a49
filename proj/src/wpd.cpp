#include "iatr/wpd.hpp"

#include <cmath>

#include "iatr/error.hpp"

namespace iatr {

std::size_t EpochConfig::window_samples() const {
  return static_cast<std::size_t>(std::llround(window_seconds * sample_rate_hz));
}

std::size_t EpochConfig::hop_samples() const {
  return static_cast<std::size_t>(std::llround(static_cast<double>(window_samples()) * (1.0 - overlap_fraction)));
}

void EpochConfig::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    throw Error(ErrorCode::BadConfig, "sample rate must be positive");
  if (!(window_seconds > 0.0) || !std::isfinite(window_seconds))
    throw Error(ErrorCode::BadConfig, "window length must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    throw Error(ErrorCode::BadConfig, "overlap fraction must lie in [0, 1)");
  if (window_samples() < 2) throw Error(ErrorCode::BadConfig, "window must span at least 2 samples");
  if (hop_samples() < 1) throw Error(ErrorCode::BadConfig, "hop must be at least 1 sample");
}

std::vector<std::vector<double>> epoch_signal(std::span<const double> samples, const EpochConfig& cfg) {
  cfg.validate();
  const std::size_t w = cfg.window_samples();
  const std::size_t h = cfg.hop_samples();
  if (samples.size() < w)
    throw Error(ErrorCode::SignalTooShort, "signal has " + std::to_string(samples.size()) +
                                               " samples, window needs " + std::to_string(w));
  const std::size_t count = (samples.size() - w) / h + 1;
  std::vector<std::vector<double>> windows;
  windows.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto slice = samples.subspan(k * h, w);
    windows.emplace_back(slice.begin(), slice.end());
  }
  return windows;
}

std::vector<double> Wavelet::highpass() const {
  const std::size_t n = lowpass.size();
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = ((k % 2 == 0) ? 1.0 : -1.0) * lowpass[n - 1 - k];
  return g;
}

Wavelet Wavelet::by_name(const std::string& name) {
  // Minimum-phase Daubechies low-pass filters, unit L2 norm.
  if (name == "haar" || name == "db1") return {name, {0.70710678118654752440, 0.70710678118654752440}};
  if (name == "db2")
    return {name,
            {-0.12940952255126038117, 0.22414386804201338103, 0.83651630373780790558, 0.48296291314453414337}};
  if (name == "db3")
    return {name,
            {0.035226291885709536603, -0.085441273882026661693, -0.1350110200102545887, 0.4598775021184915701,
             0.80689150931109257649, 0.332670552950082616}};
  if (name == "db4")
    return {name,
            {-0.010597401785069032105, 0.032883011666885199735, 0.030841381835560763627,
             -0.18703481171909308408, -0.027983769416859854211, 0.63088076792985890788,
             0.71484657055291564709, 0.23037781330889650086}};
  if (name == "db5")
    return {name,
            {0.003335725285473771278, -0.012580751999081999469, -0.0062414902127982742742,
             0.077571493840045713523, -0.032244869584638374648, -0.24229488706638203186,
             0.13842814590132073151, 0.72430852843777292773, 0.60382926979718967054,
             0.16010239797419291448}};
  if (name == "db6")
    return {name,
            {-0.0010773010853084795649, 0.0047772575109455106396, 0.00055384220116149613925,
             -0.031582039317486029565, 0.027522865530305728626, 0.097501605587323049102,
             -0.12976686756726193556, -0.22626469396543982008, 0.31525035170919762909,
             0.75113390802109535068, 0.49462389039845308568, 0.11154074335010946362}};
  if (name == "db8")
    return {name,
            {-0.00011747678412476953373, 0.00067544940645056936637, -0.0003917403733769470463,
             -0.0048703529934515743104, 0.0087460940474057767164, 0.013981027917398281649,
             -0.044088253930794751507, -0.01736930100180754617, 0.12874742662047845886,
             0.00047248457391328277036, -0.28401554296154692652, -0.015829105256349305667,
             0.58535468365420671277, 0.67563073629728980681, 0.31287159091429997066,
             0.054415842243104009955}};
  throw Error(ErrorCode::BadConfig, "unknown wavelet '" + name + "'");
}

void WpdConfig::validate(double sample_rate_hz) const {
  if (level < 1 || level > 16) throw Error(ErrorCode::BadConfig, "WPD level must lie in [1, 16]");
  (void)Wavelet::by_name(wavelet);
  const double nyquist = sample_rate_hz / 2.0;
  if (!(band_low_hz >= 0.0 && band_low_hz < band_high_hz && band_high_hz <= nyquist))
    throw Error(ErrorCode::BadConfig, "band must satisfy 0 <= low < high <= Nyquist");
}

namespace {

// One analysis step with periodic extension: out[k] = sum_j filter[j] * x[(2k + j) mod N].
std::vector<double> analyse(const std::vector<double>& x, const std::vector<double>& filter) {
  const std::size_t n = x.size();
  std::vector<double> out(n / 2, 0.0);
  for (std::size_t k = 0; k < n / 2; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < filter.size(); ++j) acc += filter[j] * x[(2 * k + j) % n];
    out[k] = acc;
  }
  return out;
}

std::size_t gray_code(std::size_t b) { return b ^ (b >> 1); }

}  // namespace

WpdLeaves wpd_decompose(std::span<const double> window, const WpdConfig& cfg) {
  if (cfg.level < 1 || cfg.level > 16) throw Error(ErrorCode::BadConfig, "WPD level must lie in [1, 16]");
  const Wavelet wavelet = Wavelet::by_name(cfg.wavelet);
  if (window.size() < wavelet.lowpass.size())
    throw Error(ErrorCode::WindowTooShort, "window has " + std::to_string(window.size()) +
                                               " samples, filter needs " +
                                               std::to_string(wavelet.lowpass.size()));
  const std::size_t block = std::size_t{1} << cfg.level;
  WpdLeaves out;
  out.pad = (block - window.size() % block) % block;

  std::vector<std::vector<double>> nodes{std::vector<double>(window.begin(), window.end())};
  nodes.front().resize(window.size() + out.pad, 0.0);
  const auto high = wavelet.highpass();
  for (std::size_t depth = 0; depth < cfg.level; ++depth) {
    std::vector<std::vector<double>> next;
    next.reserve(nodes.size() * 2);
    for (const auto& node : nodes) {
      next.push_back(analyse(node, wavelet.lowpass));
      next.push_back(analyse(node, high));
    }
    nodes = std::move(next);
  }

  if (!cfg.frequency_order) {
    out.leaves = std::move(nodes);
    return out;
  }
  out.leaves.resize(nodes.size());
  for (std::size_t b = 0; b < nodes.size(); ++b) out.leaves[b] = std::move(nodes[gray_code(b)]);
  return out;
}

std::vector<double> band_variance_features(const WpdLeaves& leaves, const WpdConfig& cfg, double sample_rate_hz) {
  cfg.validate(sample_rate_hz);
  if (!cfg.frequency_order)
    throw Error(ErrorCode::BadConfig, "band selection requires frequency-ordered leaves");
  const double width = sample_rate_hz / 2.0 / static_cast<double>(leaves.leaves.size());
  constexpr double slack = 1e-9;
  std::vector<double> features;
  for (std::size_t b = 0; b < leaves.leaves.size(); ++b) {
    const double lo = width * static_cast<double>(b);
    const double hi = lo + width;
    if (lo + slack < cfg.band_low_hz || hi > cfg.band_high_hz + slack) continue;
    const auto& c = leaves.leaves[b];
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= static_cast<double>(c.size());
    double var = 0.0;
    for (double v : c) var += (v - mean) * (v - mean);
    features.push_back(var / static_cast<double>(c.size()));
  }
  return features;
}

std::vector<std::vector<double>> extract_features(std::span<const double> samples, const EpochConfig& epoch,
                                                  const WpdConfig& wpd) {
  wpd.validate(epoch.sample_rate_hz);
  std::vector<std::vector<double>> out;
  for (const auto& w : epoch_signal(samples, epoch))
    out.push_back(band_variance_features(wpd_decompose(w, wpd), wpd, epoch.sample_rate_hz));
  return out;
}

}  // namespace iatr
