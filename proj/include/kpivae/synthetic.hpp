#ifndef KPIVAE_SYNTHETIC_HPP
#define KPIVAE_SYNTHETIC_HPP

#include "kpivae/series.hpp"
#include "kpivae/types.hpp"

#include <cstdint>
#include <vector>

namespace kpivae {

enum class AnomalyType { spike, dip, level_shift };

struct SynthConfig {
  Index length = 43200;
  std::int64_t start_timestamp = 0;
  std::int64_t interval = 60;     // seconds between points
  Index period = 1440;            // points per seasonal cycle
  std::vector<double> amplitudes = {2.0, 0.7};  // harmonic k+1 amplitudes
  std::vector<double> phases = {0.0, 0.9};
  double day_variation = 0.05;    // per-cycle amplitude jitter fraction
  double noise_sigma = 0.15;
  // Anomalies: segments of random type, uniform magnitude (in noise-sigma
  // units) and duration, placed without overlap until the point budget
  // rate * length is reached.
  double anomaly_rate = 0.01;
  double anomaly_mag_min = 6.0;
  double anomaly_mag_max = 10.0;
  Index anomaly_dur_min = 2;
  Index anomaly_dur_max = 12;
  std::vector<AnomalyType> anomaly_types = {
      AnomalyType::spike, AnomalyType::dip, AnomalyType::level_shift};
  // Missing data: bursts of uniform length, same placement scheme.
  double missing_rate = 0.003;
  Index missing_burst_min = 1;
  Index missing_burst_max = 8;
  std::uint64_t seed = 0;
};

/// Seasonal waveform plus per-cycle jitter, Gaussian noise, labeled anomaly
/// segments and missing bursts. Deterministic per seed.
RawSeries generate(const SynthConfig& cfg);

}  // namespace kpivae

#endif  // KPIVAE_SYNTHETIC_HPP
