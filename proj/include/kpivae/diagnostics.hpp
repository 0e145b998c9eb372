#ifndef KPIVAE_DIAGNOSTICS_HPP
#define KPIVAE_DIAGNOSTICS_HPP

#include "kpivae/detector.hpp"
#include "kpivae/metrics.hpp"
#include "kpivae/network.hpp"
#include "kpivae/series.hpp"
#include "kpivae/training.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kpivae {

/// Posterior of one window: series index of its last point, that point's
/// time of day in seconds, and the posterior mean/std.
struct LatentRow {
  Index last_index;
  std::int64_t time_of_day;
  Vec mu;
  Vec sigma;
};

/// One row per window of the series, in time order.
std::vector<LatentRow> export_latent(const PreparedSeries& s,
                                     const ModelParams& p);

void write_latent_csv(const std::string& path,
                      const std::vector<LatentRow>& rows);

/// Mean Euclidean distance between posterior means of windows adjacent in
/// time. Smooth latent trajectories make this small relative to the
/// all-pairs baseline below.
double mean_adjacent_distance(const std::vector<LatentRow>& rows);
double mean_random_pair_distance(const std::vector<LatentRow>& rows,
                                 Index pairs, Rng& rng);

struct AblationRow {
  std::string variant;
  bool m_elbo;     // masked objective (donut mode) vs plain fit on clean data
  bool injection;  // per-epoch missing injection during training
  bool mcmc;       // imputation before scoring
  double mean_best_f = 0.0;
  double mean_auc = 0.0;
};

struct AblationConfig {
  TrainConfig base;            // injection_lambda used by injection variants
  DetectConfig detect;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<double> ratios = {0.49, 0.21, 0.30};
  double label_keep = 1.0;     // fraction of labeled points kept for training
};

/// Train and evaluate the five technique combinations on identical splits
/// and seeds: plain baseline, masked objective alone, plus injection, plus
/// imputation, and all three together. Evaluation always uses the full
/// original labels of the test part.
std::vector<AblationRow> run_ablation(const RawSeries& data,
                                      const AblationConfig& cfg);

void write_ablation_csv(const std::string& path,
                        const std::vector<AblationRow>& rows);

}  // namespace kpivae

#endif  // KPIVAE_DIAGNOSTICS_HPP
