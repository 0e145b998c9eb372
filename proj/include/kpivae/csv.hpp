#ifndef KPIVAE_CSV_HPP
#define KPIVAE_CSV_HPP

#include "kpivae/series.hpp"
#include "kpivae/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kpivae {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

/// Read "timestamp,value,label" rows. The label column may be absent.
/// An empty value field marks a missing point. Timestamps must be strictly
/// increasing; the sampling interval is the gcd of the gaps, and interior
/// gaps are filled with synthesized missing points. Malformed input raises
/// DataError naming the line.
RawSeries load_series(const std::string& path);

/// Write every point, including missing ones (empty value field), so that
/// a load of the output reproduces the series exactly.
void save_series(const std::string& path, const RawSeries& raw);

/// Per-point anomaly scores; points without a score (warm-up prefix,
/// missing points) have an empty score field.
struct ScoreSeries {
  std::int64_t start_timestamp = 0;
  std::int64_t interval = 1;
  std::vector<double> scores;
  std::vector<std::uint8_t> scored;
};

void save_scores(const std::string& path, const ScoreSeries& s);
ScoreSeries load_scores(const std::string& path);

}  // namespace kpivae

#endif  // KPIVAE_CSV_HPP
