#pragma once

// Class-structured synthetic feature sessions with cross-session drift.
//
// Randomness is portable: std::mt19937_64 (bit-specified by the standard)
// seeded per class with splitmix64(seed + 0x9E3779B97F4A7C15 * (class + 1)),
// uniforms from the top 53 bits, normals by Box-Muller (one normal per pair
// of uniforms). Per class the draw order is: L mean components, L drift
// components, then session-1 instances, then session-2 instances; each
// instance draws one uniform for the heavy-tail decision followed by L normals.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "iatr/matrix.hpp"
#include "iatr/training_set.hpp"

namespace iatr {

struct SynthConfig {
  std::size_t num_classes = 30;
  std::size_t instances_per_class = 30;
  std::size_t dim = 6;
  double class_mean_spread = 10.0;    // class means ~ N(0, spread^2) per dimension
  double within_class_std = 1.0;
  double session_drift_std = 3.0;     // per-class, per-dimension session-2 offset
  double heavy_tail_fraction = 0.05;  // instances drawn with 5x the within-class std
  double covariance_inflation = 0.1;  // session-2 std factor (1 + x); only when drift > 0
  std::uint64_t seed = 7;

  /// Throws BadConfig.
  void validate() const;
};

struct SynthSessions {
  TrainingSet session1;
  TrainingSet session2;
  Matrix class_means;  // N x L, ground truth
  Matrix drift;        // N x L, session-2 offsets
};

SynthSessions generate_sessions(const SynthConfig& cfg);

/// Labels used by the generator: "C01", "C02", ...
std::string synth_label(std::size_t n, std::size_t num_classes);

class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed);
  static PortableRng substream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace iatr
