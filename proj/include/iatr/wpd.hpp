#pragma once

// Epoching and wavelet-packet band-variance features.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace iatr {

struct EpochConfig {
  double window_seconds = 4.0;
  double overlap_fraction = 0.5;
  double sample_rate_hz = 160.0;

  std::size_t window_samples() const;
  std::size_t hop_samples() const;
  /// Throws BadConfig unless the window spans >= 2 samples and the hop >= 1.
  void validate() const;
};

/// Verbatim windows of window_samples() taken every hop_samples().
/// Throws SignalTooShort when the signal is shorter than one window.
std::vector<std::vector<double>> epoch_signal(std::span<const double> samples, const EpochConfig& cfg);

/// Orthonormal analysis low-pass filter. The high-pass is its quadrature mirror.
struct Wavelet {
  std::string name;
  std::vector<double> lowpass;

  std::vector<double> highpass() const;

  /// "haar"/"db1", "db2" ... "db6", "db8". Throws BadConfig otherwise.
  static Wavelet by_name(const std::string& name);
};

struct WpdConfig {
  std::size_t level = 3;
  std::string wavelet = "db4";
  double band_low_hz = 0.0;
  double band_high_hz = 60.0;
  bool frequency_order = true;

  void validate(double sample_rate_hz) const;
};

struct WpdLeaves {
  /// 2^level coefficient arrays. In frequency order leaf b covers
  /// [b, b+1) * fs / 2^(level+1) Hz; otherwise natural (Paley) order.
  std::vector<std::vector<double>> leaves;
  /// Zeros appended so the length divides 2^level.
  std::size_t pad = 0;
};

/// Full packet tree with periodic extension. Throws WindowTooShort when the
/// window is shorter than the filter.
WpdLeaves wpd_decompose(std::span<const double> window, const WpdConfig& cfg);

/// Population variance of every frequency-ordered leaf whose band lies inside
/// [band_low_hz, band_high_hz], lowest band first.
std::vector<double> band_variance_features(const WpdLeaves& leaves, const WpdConfig& cfg, double sample_rate_hz);

/// Epoch, decompose and reduce: one feature vector per window.
std::vector<std::vector<double>> extract_features(std::span<const double> samples, const EpochConfig& epoch,
                                                  const WpdConfig& wpd);

}  // namespace iatr
