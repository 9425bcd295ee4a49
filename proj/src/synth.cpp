#include "iatr/synth.hpp"

#include <cmath>
#include <numbers>

#include "iatr/error.hpp"

namespace iatr {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

PortableRng::PortableRng(std::uint64_t seed) : engine_(seed) {}

PortableRng PortableRng::substream(std::uint64_t seed, std::uint64_t stream) {
  return PortableRng(splitmix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1)));
}

std::uint64_t PortableRng::next_u64() { return engine_(); }

double PortableRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double PortableRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void SynthConfig::validate() const {
  if (num_classes < 1 || instances_per_class < 1 || dim < 1)
    throw Error(ErrorCode::BadConfig, "synthetic counts must be >= 1");
  const auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!ok(class_mean_spread) || !ok(within_class_std) || !ok(session_drift_std) || !ok(covariance_inflation))
    throw Error(ErrorCode::BadConfig, "synthetic spreads must be finite and >= 0");
  if (!(heavy_tail_fraction >= 0.0 && heavy_tail_fraction < 1.0))
    throw Error(ErrorCode::BadConfig, "heavy-tail fraction must lie in [0, 1)");
}

std::string synth_label(std::size_t n, std::size_t num_classes) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(num_classes).size());
  std::string digits = std::to_string(n + 1);
  return "C" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

SynthSessions generate_sessions(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t dims = cfg.dim;
  SynthSessions out;
  out.class_means = Matrix(cfg.num_classes, dims);
  out.drift = Matrix(cfg.num_classes, dims);
  const double inflated =
      cfg.within_class_std * (cfg.session_drift_std > 0.0 ? 1.0 + cfg.covariance_inflation : 1.0);

  for (std::size_t n = 0; n < cfg.num_classes; ++n) {
    PortableRng rng = PortableRng::substream(cfg.seed, n);
    for (std::size_t l = 0; l < dims; ++l) out.class_means(n, l) = cfg.class_mean_spread * rng.normal();
    for (std::size_t l = 0; l < dims; ++l) out.drift(n, l) = cfg.session_drift_std * rng.normal();

    const auto draw = [&](double std_dev, bool drifted) {
      Matrix block(cfg.instances_per_class, dims);
      for (std::size_t i = 0; i < cfg.instances_per_class; ++i) {
        const bool heavy = rng.uniform() < cfg.heavy_tail_fraction;
        const double sd = heavy ? 5.0 * std_dev : std_dev;
        for (std::size_t l = 0; l < dims; ++l)
          block(i, l) = out.class_means(n, l) + (drifted ? out.drift(n, l) : 0.0) + sd * rng.normal();
      }
      return block;
    };
    const std::string label = synth_label(n, cfg.num_classes);
    out.session1.labels.push_back(label);
    out.session1.classes.push_back(draw(cfg.within_class_std, false));
    out.session2.labels.push_back(label);
    out.session2.classes.push_back(draw(inflated, true));
  }
  return out;
}

}  // namespace iatr
