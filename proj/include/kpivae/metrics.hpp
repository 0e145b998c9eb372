#ifndef KPIVAE_METRICS_HPP
#define KPIVAE_METRICS_HPP

#include "kpivae/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace kpivae {

/// Per-point ground truth. Evaluation ignores missing points entirely and
/// only counts points that actually received a score.
struct GroundTruth {
  std::vector<std::uint8_t> anomaly;
  std::vector<std::uint8_t> missing;
  std::size_t size() const { return anomaly.size(); }
};

/// Half-open [begin, end) span of a maximal run of anomaly=1.
struct SegmentSpan {
  Index begin;
  Index end;
};

std::vector<SegmentSpan> truth_segments(const GroundTruth& truth);

/// Segment adjustment: if any counted point of a truth segment is flagged,
/// flag the whole segment. Flags outside segments pass through.
std::vector<std::uint8_t> adjust(const GroundTruth& truth,
                                 const std::vector<std::uint8_t>& raw_flags);

struct Prf {
  double precision;
  double recall;
  double fscore;
};

/// Flag rule is score >= threshold. Precision is 1 when nothing is flagged,
/// recall is 1 when there are no anomaly points, F is 0 when P + R = 0.
Prf prf_at_threshold(const GroundTruth& truth,
                     const std::vector<double>& scores,
                     const std::vector<std::uint8_t>& scored,
                     double threshold);

struct ThresholdRow {
  double threshold;
  double precision;
  double recall;
  double fscore;
};

struct BestF {
  double best_f = 0.0;
  double best_threshold = 0.0;
  std::vector<ThresholdRow> table;  // ascending thresholds, +inf last
};

/// Sweep every distinct score value plus +inf; return the maximum F-score
/// and the smallest threshold achieving it.
BestF best_fscore(const GroundTruth& truth, const std::vector<double>& scores,
                  const std::vector<std::uint8_t>& scored);

/// Average precision over the adjusted precision-recall curve, thresholds
/// descending: AP = sum_i (R_i - R_{i-1}) P_i with R_0 = 0.
double auc(const GroundTruth& truth, const std::vector<double>& scores,
           const std::vector<std::uint8_t>& scored);

/// Per truth segment, in order: intervals from the segment start to its
/// first raw-flagged point, or nullopt when no point was flagged.
std::vector<std::optional<Index>> alert_delays(
    const GroundTruth& truth, const std::vector<double>& scores,
    const std::vector<std::uint8_t>& scored, double threshold);

struct EvalReport {
  BestF best;
  double auc = 0.0;  // NaN when the truth has no countable anomaly points
  std::vector<std::optional<Index>> delays;  // at the best threshold
};

EvalReport evaluate(const GroundTruth& truth,
                    const std::vector<double>& scores,
                    const std::vector<std::uint8_t>& scored);

}  // namespace kpivae

#endif  // KPIVAE_METRICS_HPP
