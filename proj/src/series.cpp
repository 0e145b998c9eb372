#include "kpivae/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace kpivae {

namespace {

Standardization estimate_stats(const RawSeries& raw) {
  double sum = 0.0;
  double sum_sq = 0.0;
  Index count = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.missing[i] || raw.labels[i]) continue;
    sum += raw.values[i];
    sum_sq += raw.values[i] * raw.values[i];
    ++count;
  }
  if (count == 0) {
    throw NumericError("no usable points to estimate standardization");
  }
  const double mean = sum / static_cast<double>(count);
  const double var = sum_sq / static_cast<double>(count) - mean * mean;
  const double std = std::sqrt(std::max(var, 0.0));
  if (std < 1e-8) {
    throw NumericError("series is constant, standard deviation below 1e-8");
  }
  return {mean, std};
}

PreparedSeries standardize(const RawSeries& raw, const Standardization& stats) {
  PreparedSeries s;
  s.start_timestamp = raw.start_timestamp;
  s.interval = raw.interval;
  s.labels = raw.labels;
  s.missing = raw.missing;
  s.stats = stats;
  s.values.resize(static_cast<Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    s.values(static_cast<Index>(i)) =
        raw.missing[i] ? 0.0 : (raw.values[i] - stats.mean) / stats.std;
  }
  return s;
}

}  // namespace

PreparedSeries prepare(const RawSeries& raw) {
  return standardize(raw, estimate_stats(raw));
}

PreparedSeries prepare(const RawSeries& raw, const Standardization& stats) {
  if (stats.std <= 0.0) {
    throw NumericError("standardization requires a positive std");
  }
  return standardize(raw, stats);
}

Index window_count(Index n, Index w) { return std::max<Index>(0, n - w + 1); }

Window extract_window(const PreparedSeries& s, Index t, Index window_size) {
  if (t < window_size - 1 || t >= s.size()) {
    throw DataError("window end index out of range");
  }
  Window w;
  const Index first = t - window_size + 1;
  w.x = s.values.segment(first, window_size);
  w.alpha.resize(window_size);
  for (Index i = 0; i < window_size; ++i) {
    const auto si = static_cast<std::size_t>(first + i);
    w.alpha(i) = (s.missing[si] || s.labels[si]) ? 0.0 : 1.0;
  }
  w.beta = w.alpha.mean();
  return w;
}

WindowSet make_windows(const PreparedSeries& s, Index window_size) {
  if (window_size < 1) throw DataError("window size must be at least 1");
  const Index n = s.size();
  const Index count = window_count(n, window_size);
  WindowSet ws;
  ws.x.resize(window_size, count);
  ws.alpha.resize(window_size, count);
  ws.beta.resize(count);
  ws.last_index.resize(static_cast<std::size_t>(count));
  for (Index b = 0; b < count; ++b) {
    const Index first = b;
    ws.x.col(b) = s.values.segment(first, window_size);
    for (Index w = 0; w < window_size; ++w) {
      const Index i = first + w;
      ws.alpha(w, b) = (s.missing[static_cast<std::size_t>(i)] ||
                        s.labels[static_cast<std::size_t>(i)])
                           ? 0.0
                           : 1.0;
    }
    ws.beta(b) = ws.alpha.col(b).mean();
    ws.last_index[static_cast<std::size_t>(b)] = first + window_size - 1;
  }
  return ws;
}

PreparedSeries inject_missing(const PreparedSeries& s, double lambda,
                              Rng& rng) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw DataError("injection ratio must lie in [0, 1]");
  }
  PreparedSeries out = s;
  std::vector<Index> eligible;
  for (Index i = 0; i < s.size(); ++i) {
    if (!s.missing[static_cast<std::size_t>(i)]) eligible.push_back(i);
  }
  const auto n_eligible = static_cast<double>(eligible.size());
  const auto k = static_cast<std::size_t>(std::llround(lambda * n_eligible));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.integer(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
    const Index idx = eligible[i];
    out.missing[static_cast<std::size_t>(idx)] = 1;
    out.values(idx) = 0.0;
  }
  return out;
}

RawSeries downsample_labels(const RawSeries& raw, double keep_ratio,
                            Rng& rng) {
  if (keep_ratio < 0.0 || keep_ratio > 1.0) {
    throw DataError("label keep ratio must lie in [0, 1]");
  }
  struct Segment {
    std::size_t begin;
    std::size_t end;  // past-the-end
    std::size_t length() const { return end - begin; }
  };
  std::vector<Segment> segments;
  std::size_t total = 0;
  for (std::size_t i = 0; i < raw.size();) {
    if (!raw.labels[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < raw.size() && raw.labels[j]) ++j;
    segments.push_back({i, j});
    total += j - i;
    i = j;
  }

  const double target = keep_ratio * static_cast<double>(total);
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<bool> keep(segments.size(), false);
  double kept = 0.0;
  std::size_t remaining = order.size();
  while (kept < target - 1e-9 && remaining > 0) {
    double weight = 0.0;
    for (std::size_t r = 0; r < remaining; ++r) {
      weight += static_cast<double>(segments[order[r]].length());
    }
    double u = rng.uniform() * weight;
    std::size_t pick = remaining - 1;
    for (std::size_t r = 0; r < remaining; ++r) {
      u -= static_cast<double>(segments[order[r]].length());
      if (u <= 0.0) {
        pick = r;
        break;
      }
    }
    const std::size_t seg = order[pick];
    keep[seg] = true;
    kept += static_cast<double>(segments[seg].length());
    std::swap(order[pick], order[remaining - 1]);
    --remaining;
  }

  RawSeries out = raw;
  for (std::size_t si = 0; si < segments.size(); ++si) {
    if (keep[si]) continue;
    for (std::size_t i = segments[si].begin; i < segments[si].end; ++i) {
      out.labels[i] = 0;
    }
  }
  return out;
}

std::vector<Index> split_bounds(Index n, const std::vector<double>& ratios) {
  if (ratios.empty()) throw DataError("split needs at least one ratio");
  double sum = 0.0;
  for (double r : ratios) {
    if (r <= 0.0) throw DataError("split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DataError("split ratios must sum to 1");
  }
  std::vector<Index> bounds(1, 0);
  double cum = 0.0;
  for (std::size_t k = 0; k + 1 < ratios.size(); ++k) {
    cum += ratios[k];
    // The epsilon keeps mathematically exact boundaries (e.g. 43200 * 0.70)
    // from flooring one short after accumulated rounding in cum.
    bounds.push_back(static_cast<Index>(
        std::floor(static_cast<double>(n) * cum + 1e-9)));
  }
  bounds.push_back(n);
  return bounds;
}

std::vector<PreparedSeries> split(const PreparedSeries& s,
                                  const std::vector<double>& ratios) {
  const std::vector<Index> bounds = split_bounds(s.size(), ratios);
  std::vector<PreparedSeries> parts;
  Standardization first_stats;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const Index begin = bounds[k];
    const Index end = bounds[k + 1];
    if (end <= begin) throw DataError("split produced an empty part");
    RawSeries part;
    part.start_timestamp = s.start_timestamp + begin * s.interval;
    part.interval = s.interval;
    part.values.resize(static_cast<std::size_t>(end - begin));
    part.labels.assign(s.labels.begin() + begin, s.labels.begin() + end);
    part.missing.assign(s.missing.begin() + begin, s.missing.begin() + end);
    for (Index i = begin; i < end; ++i) {
      part.values[static_cast<std::size_t>(i - begin)] =
          part.missing[static_cast<std::size_t>(i - begin)]
              ? std::numeric_limits<double>::quiet_NaN()
              : s.values(i) * s.stats.std + s.stats.mean;
    }
    if (k == 0) {
      parts.push_back(prepare(part));
      first_stats = parts.back().stats;
    } else {
      parts.push_back(prepare(part, first_stats));
    }
  }
  return parts;
}

double smoothness_stat(const PreparedSeries& s) {
  double sum = 0.0;
  Index pairs = 0;
  for (Index i = 0; i + 1 < s.size(); ++i) {
    if (s.missing[static_cast<std::size_t>(i)] ||
        s.missing[static_cast<std::size_t>(i + 1)]) {
      continue;
    }
    sum += std::abs(s.values(i + 1) - s.values(i));
    ++pairs;
  }
  if (pairs == 0) {
    throw NumericError("no adjacent non-missing pairs for smoothness");
  }
  return sum / static_cast<double>(pairs);
}

}  // namespace kpivae
