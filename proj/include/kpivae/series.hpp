#ifndef KPIVAE_SERIES_HPP
#define KPIVAE_SERIES_HPP

#include "kpivae/rng.hpp"
#include "kpivae/types.hpp"

#include <cstdint>
#include <vector>

namespace kpivae {

/// Raw evenly spaced series. Missing points carry value NaN and missing=1.
/// Labels mark known anomalies (used for training masks and evaluation).
struct RawSeries {
  std::int64_t start_timestamp = 0;
  std::int64_t interval = 1;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> missing;
  std::size_t size() const { return values.size(); }
};

struct Standardization {
  double mean = 0.0;
  double std = 1.0;
};

/// Standardized series ready for windowing. Missing values are zero-filled
/// so they contribute nothing after masking.
struct PreparedSeries {
  std::int64_t start_timestamp = 0;
  std::int64_t interval = 1;
  Vec values;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> missing;
  Standardization stats;
  Index size() const { return values.size(); }
};

/// Standardize using statistics estimated from points that are neither
/// missing nor labeled anomalous (population std). Throws NumericError when
/// no such point exists or the series is effectively constant.
PreparedSeries prepare(const RawSeries& raw);

/// Standardize with externally supplied statistics (e.g. the training split's).
PreparedSeries prepare(const RawSeries& raw, const Standardization& stats);

/// Number of length-w windows over n points: max(0, n - w + 1).
Index window_count(Index n, Index w);

/// One sliding window with its exclusion mask. alpha(w) = 0 where the point
/// is missing or labeled anomalous; beta is the mean of alpha.
struct Window {
  Vec x;
  Vec alpha;
  double beta = 1.0;
};

/// Window whose last point sits at series index t (requires t >= w-1).
Window extract_window(const PreparedSeries& s, Index t, Index window_size);

/// Sliding windows as columns of a W x (N-W+1) matrix, plus congruent
/// exclusion masks: alpha = 0 where the point is missing or labeled.
struct WindowSet {
  Mat x;      // W x count
  Mat alpha;  // W x count
  Vec beta;   // per-window mean of alpha
  std::vector<Index> last_index;  // series index of each window's last point
};
WindowSet make_windows(const PreparedSeries& s, Index window_size);

/// Mark round(lambda * eligible) currently-present points as missing
/// (value zeroed, missing flag set). Labels are untouched. Returns a copy.
PreparedSeries inject_missing(const PreparedSeries& s, double lambda, Rng& rng);

/// Keep whole labeled segments, chosen with probability proportional to
/// length, until retained points first reach keep_ratio * labeled_total;
/// clear the labels of all other segments. Returns a copy.
RawSeries downsample_labels(const RawSeries& raw, double keep_ratio, Rng& rng);

/// Part boundaries of a contiguous fractional split: k+1 cut points with
/// bounds[i] = floor(n * cumulative ratio). Ratios must be positive and sum
/// to 1 within 1e-9.
std::vector<Index> split_bounds(Index n, const std::vector<double>& ratios);

/// Contiguous fractional split at split_bounds. The first part is
/// standardized from its own statistics, later parts reuse them.
std::vector<PreparedSeries> split(const PreparedSeries& s,
                                  const std::vector<double>& ratios);

/// Mean absolute difference of adjacent non-missing pairs, on the
/// standardized scale. Throws NumericError when no such pair exists.
double smoothness_stat(const PreparedSeries& s);

}  // namespace kpivae

#endif  // KPIVAE_SERIES_HPP
