#include "kpivae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace kpivae {

namespace {

void check_sizes(const GroundTruth& truth, const std::vector<double>& scores,
                 const std::vector<std::uint8_t>& scored) {
  if (truth.anomaly.size() != truth.missing.size() ||
      truth.anomaly.size() != scores.size() ||
      truth.anomaly.size() != scored.size()) {
    throw DataError("truth, score and mask lengths differ");
  }
}

bool countable(const GroundTruth& truth,
               const std::vector<std::uint8_t>& scored, std::size_t i) {
  return scored[i] && !truth.missing[i];
}

Prf rates(Index tp, Index fp, Index fn) {
  Prf r;
  r.precision = (tp + fp == 0)
                    ? 1.0
                    : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = (tp + fn == 0)
                 ? 1.0
                 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.fscore = (r.precision + r.recall == 0.0)
                 ? 0.0
                 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

// Sweep-friendly digest: per participating segment its countable size and
// maximum score, plus the scores of countable normal points.
struct Digest {
  std::vector<double> seg_max;    // ascending
  std::vector<Index> seg_suffix;  // suffix sums of countable sizes
  std::vector<double> normals;    // ascending
  Index anomaly_total = 0;
};

Digest make_digest(const GroundTruth& truth, const std::vector<double>& scores,
                   const std::vector<std::uint8_t>& scored) {
  Digest d;
  std::vector<std::pair<double, Index>> segs;
  for (const SegmentSpan& s : truth_segments(truth)) {
    double smax = -std::numeric_limits<double>::infinity();
    Index size = 0;
    for (Index i = s.begin; i < s.end; ++i) {
      if (!countable(truth, scored, static_cast<std::size_t>(i))) continue;
      smax = std::max(smax, scores[static_cast<std::size_t>(i)]);
      ++size;
    }
    if (size == 0) continue;
    segs.emplace_back(smax, size);
    d.anomaly_total += size;
  }
  std::sort(segs.begin(), segs.end());
  d.seg_max.reserve(segs.size());
  for (const auto& [smax, size] : segs) d.seg_max.push_back(smax);
  d.seg_suffix.assign(segs.size() + 1, 0);
  for (std::size_t i = segs.size(); i-- > 0;) {
    d.seg_suffix[i] = d.seg_suffix[i + 1] + segs[i].second;
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth.anomaly[i] && countable(truth, scored, i)) {
      d.normals.push_back(scores[i]);
    }
  }
  std::sort(d.normals.begin(), d.normals.end());
  return d;
}

// Counts under segment adjustment at one threshold.
void counts_at(const Digest& d, double threshold, Index& tp, Index& fp,
               Index& fn) {
  const auto seg_it =
      std::lower_bound(d.seg_max.begin(), d.seg_max.end(), threshold);
  tp = d.seg_suffix[static_cast<std::size_t>(seg_it - d.seg_max.begin())];
  fp = static_cast<Index>(
      d.normals.end() -
      std::lower_bound(d.normals.begin(), d.normals.end(), threshold));
  fn = d.anomaly_total - tp;
}

std::vector<double> candidate_thresholds(
    const GroundTruth& truth, const std::vector<double>& scores,
    const std::vector<std::uint8_t>& scored) {
  std::set<double> values;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (countable(truth, scored, i)) values.insert(scores[i]);
  }
  std::vector<double> out(values.begin(), values.end());
  out.push_back(std::numeric_limits<double>::infinity());
  return out;
}

}  // namespace

std::vector<SegmentSpan> truth_segments(const GroundTruth& truth) {
  std::vector<SegmentSpan> segs;
  const auto n = static_cast<Index>(truth.size());
  for (Index i = 0; i < n;) {
    if (!truth.anomaly[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    Index j = i;
    while (j < n && truth.anomaly[static_cast<std::size_t>(j)]) ++j;
    segs.push_back({i, j});
    i = j;
  }
  return segs;
}

std::vector<std::uint8_t> adjust(const GroundTruth& truth,
                                 const std::vector<std::uint8_t>& raw_flags) {
  if (raw_flags.size() != truth.size()) {
    throw DataError("flag vector length differs from truth");
  }
  std::vector<std::uint8_t> out = raw_flags;
  for (const SegmentSpan& s : truth_segments(truth)) {
    bool hit = false;
    for (Index i = s.begin; i < s.end && !hit; ++i) {
      hit = raw_flags[static_cast<std::size_t>(i)] != 0;
    }
    for (Index i = s.begin; i < s.end; ++i) {
      out[static_cast<std::size_t>(i)] = hit ? 1 : 0;
    }
  }
  return out;
}

Prf prf_at_threshold(const GroundTruth& truth,
                     const std::vector<double>& scores,
                     const std::vector<std::uint8_t>& scored,
                     double threshold) {
  check_sizes(truth, scores, scored);
  std::vector<std::uint8_t> raw(truth.size(), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    raw[i] = (countable(truth, scored, i) && scores[i] >= threshold) ? 1 : 0;
  }
  const std::vector<std::uint8_t> adj = adjust(truth, raw);
  Index tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!countable(truth, scored, i)) continue;
    if (truth.anomaly[i]) {
      adj[i] ? ++tp : ++fn;
    } else if (adj[i]) {
      ++fp;
    }
  }
  return rates(tp, fp, fn);
}

BestF best_fscore(const GroundTruth& truth, const std::vector<double>& scores,
                  const std::vector<std::uint8_t>& scored) {
  check_sizes(truth, scores, scored);
  const std::vector<double> cands = candidate_thresholds(truth, scores, scored);
  if (cands.size() == 1) {
    throw DataError("no countable points to evaluate");
  }
  const Digest d = make_digest(truth, scores, scored);
  BestF best;
  best.best_f = -1.0;
  for (double threshold : cands) {
    Index tp, fp, fn;
    counts_at(d, threshold, tp, fp, fn);
    const Prf r = rates(tp, fp, fn);
    best.table.push_back({threshold, r.precision, r.recall, r.fscore});
    if (r.fscore > best.best_f) {
      best.best_f = r.fscore;
      best.best_threshold = threshold;
    }
  }
  return best;
}

double auc(const GroundTruth& truth, const std::vector<double>& scores,
           const std::vector<std::uint8_t>& scored) {
  check_sizes(truth, scores, scored);
  const Digest d = make_digest(truth, scores, scored);
  if (d.anomaly_total == 0) {
    throw DataError("no countable anomaly points for average precision");
  }
  const std::vector<double> cands = candidate_thresholds(truth, scores, scored);
  double ap = 0.0;
  double recall_prev = 0.0;
  for (std::size_t i = cands.size(); i-- > 0;) {
    Index tp, fp, fn;
    counts_at(d, cands[i], tp, fp, fn);
    const Prf r = rates(tp, fp, fn);
    ap += (r.recall - recall_prev) * r.precision;
    recall_prev = r.recall;
  }
  return ap;
}

std::vector<std::optional<Index>> alert_delays(
    const GroundTruth& truth, const std::vector<double>& scores,
    const std::vector<std::uint8_t>& scored, double threshold) {
  check_sizes(truth, scores, scored);
  std::vector<std::optional<Index>> delays;
  for (const SegmentSpan& s : truth_segments(truth)) {
    std::optional<Index> delay;
    for (Index i = s.begin; i < s.end; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (countable(truth, scored, u) && scores[u] >= threshold) {
        delay = i - s.begin;
        break;
      }
    }
    delays.push_back(delay);
  }
  return delays;
}

EvalReport evaluate(const GroundTruth& truth,
                    const std::vector<double>& scores,
                    const std::vector<std::uint8_t>& scored) {
  EvalReport report;
  report.best = best_fscore(truth, scores, scored);
  const Digest d = make_digest(truth, scores, scored);
  report.auc = d.anomaly_total > 0
                   ? auc(truth, scores, scored)
                   : std::numeric_limits<double>::quiet_NaN();
  report.delays =
      alert_delays(truth, scores, scored, report.best.best_threshold);
  return report;
}

}  // namespace kpivae
