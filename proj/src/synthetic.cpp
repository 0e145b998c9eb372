#include "kpivae/synthetic.hpp"

#include "kpivae/rng.hpp"

#include <cmath>
#include <limits>

namespace kpivae {

namespace {

constexpr double kTwoPi = 6.283185307179586;

void validate(const SynthConfig& cfg) {
  if (cfg.length < 1) throw DataError("length must be positive");
  if (cfg.period < 2) throw DataError("period must be at least 2");
  if (cfg.interval < 1) throw DataError("interval must be positive");
  if (cfg.noise_sigma < 0.0) throw DataError("noise sigma must be >= 0");
  if (cfg.anomaly_rate < 0.0 || cfg.anomaly_rate >= 1.0 ||
      cfg.missing_rate < 0.0 || cfg.missing_rate >= 1.0) {
    throw DataError("rates must lie in [0, 1)");
  }
  if (cfg.amplitudes.size() != cfg.phases.size()) {
    throw DataError("amplitudes and phases must pair up");
  }
  if (cfg.anomaly_dur_min < 1 || cfg.anomaly_dur_max < cfg.anomaly_dur_min ||
      cfg.missing_burst_min < 1 ||
      cfg.missing_burst_max < cfg.missing_burst_min) {
    throw DataError("duration ranges must be non-empty and positive");
  }
  if (cfg.anomaly_mag_max < cfg.anomaly_mag_min) {
    throw DataError("magnitude range must be non-empty");
  }
  if (cfg.anomaly_rate > 0.0 && cfg.anomaly_types.empty()) {
    throw DataError("anomaly rate set but no types enabled");
  }
}

struct Placed {
  Index begin;
  Index end;
};

// Place non-overlapping segments (one free point kept between segments so
// labeled runs stay maximal) until the covered points reach target.
std::vector<Placed> place_segments(Index length, double target_points,
                                   Index dur_min, Index dur_max,
                                   std::vector<std::uint8_t>& occupied,
                                   Rng& rng) {
  std::vector<Placed> placed;
  double covered = 0.0;
  std::size_t attempts = 0;
  const std::size_t max_attempts =
      1000 + 200 * static_cast<std::size_t>(target_points);
  while (covered < target_points - 1e-9) {
    if (++attempts > max_attempts) {
      throw DataError("cannot place requested segments without overlap");
    }
    const Index dur =
        dur_min + static_cast<Index>(rng.integer(
                      static_cast<std::size_t>(dur_max - dur_min + 1)));
    if (dur > length) continue;
    const Index start = static_cast<Index>(
        rng.integer(static_cast<std::size_t>(length - dur + 1)));
    bool free = true;
    const Index lo = std::max<Index>(0, start - 1);
    const Index hi = std::min(length, start + dur + 1);
    for (Index i = lo; i < hi && free; ++i) {
      free = !occupied[static_cast<std::size_t>(i)];
    }
    if (!free) continue;
    for (Index i = start; i < start + dur; ++i) {
      occupied[static_cast<std::size_t>(i)] = 1;
    }
    placed.push_back({start, start + dur});
    covered += static_cast<double>(dur);
  }
  return placed;
}

}  // namespace

RawSeries generate(const SynthConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const Index n = cfg.length;

  // 1) Per-cycle amplitude jitter.
  const Index cycles = (n + cfg.period - 1) / cfg.period;
  std::vector<double> jitter(static_cast<std::size_t>(cycles));
  for (double& j : jitter) {
    j = cfg.day_variation * (2.0 * rng.uniform() - 1.0);
  }

  // 2) Waveform and noise.
  RawSeries raw;
  raw.start_timestamp = cfg.start_timestamp;
  raw.interval = cfg.interval;
  raw.values.resize(static_cast<std::size_t>(n));
  raw.labels.assign(static_cast<std::size_t>(n), 0);
  raw.missing.assign(static_cast<std::size_t>(n), 0);
  for (Index t = 0; t < n; ++t) {
    double seasonal = 0.0;
    for (std::size_t k = 0; k < cfg.amplitudes.size(); ++k) {
      const double harmonic = static_cast<double>(k + 1);
      seasonal += cfg.amplitudes[k] *
                  std::sin(kTwoPi * harmonic * static_cast<double>(t) /
                               static_cast<double>(cfg.period) +
                           cfg.phases[k]);
    }
    const double j = jitter[static_cast<std::size_t>(t / cfg.period)];
    raw.values[static_cast<std::size_t>(t)] =
        seasonal * (1.0 + j) + cfg.noise_sigma * rng.normal();
  }

  // 3) Anomaly segments.
  std::vector<std::uint8_t> occupied(static_cast<std::size_t>(n), 0);
  const double anomaly_target = cfg.anomaly_rate * static_cast<double>(n);
  const auto anomalies = place_segments(n, anomaly_target, cfg.anomaly_dur_min,
                                        cfg.anomaly_dur_max, occupied, rng);
  for (const Placed& seg : anomalies) {
    const AnomalyType type = cfg.anomaly_types[rng.integer(
        cfg.anomaly_types.size())];
    const double mag =
        cfg.anomaly_mag_min +
        (cfg.anomaly_mag_max - cfg.anomaly_mag_min) * rng.uniform();
    double offset = mag * cfg.noise_sigma;
    switch (type) {
      case AnomalyType::spike:
        break;
      case AnomalyType::dip:
        offset = -offset;
        break;
      case AnomalyType::level_shift:
        if (rng.uniform() < 0.5) offset = -offset;
        break;
    }
    for (Index i = seg.begin; i < seg.end; ++i) {
      raw.values[static_cast<std::size_t>(i)] += offset;
      raw.labels[static_cast<std::size_t>(i)] = 1;
    }
  }

  // 4) Missing bursts; they avoid each other but may touch anomalies.
  std::vector<std::uint8_t> burst_occupied(static_cast<std::size_t>(n), 0);
  const double missing_target = cfg.missing_rate * static_cast<double>(n);
  const auto bursts =
      place_segments(n, missing_target, cfg.missing_burst_min,
                     cfg.missing_burst_max, burst_occupied, rng);
  for (const Placed& seg : bursts) {
    for (Index i = seg.begin; i < seg.end; ++i) {
      raw.values[static_cast<std::size_t>(i)] =
          std::numeric_limits<double>::quiet_NaN();
      raw.missing[static_cast<std::size_t>(i)] = 1;
    }
  }
  return raw;
}

}  // namespace kpivae
