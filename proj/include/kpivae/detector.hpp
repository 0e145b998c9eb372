#ifndef KPIVAE_DETECTOR_HPP
#define KPIVAE_DETECTOR_HPP

#include "kpivae/csv.hpp"
#include "kpivae/network.hpp"
#include "kpivae/series.hpp"
#include "kpivae/types.hpp"

#include <cstdint>
#include <vector>

namespace kpivae {

struct DetectConfig {
  Index mcmc_iters = 10;
  Index mc_samples = 1024;
  std::uint64_t seed = 0;
  bool use_mcmc = true;
  bool use_prior = false;  // sample z from N(0, I) instead of q(z|x)
};

/// Replace the masked coordinates of x by model reconstructions, M rounds.
/// Each round samples one z from q(z|x_current) and a stochastic draw from
/// p(x|z); observed coordinates are kept bit-identical to the input.
Vec mcmc_impute(const Vec& x, const std::vector<std::uint8_t>& missing_mask,
                const ModelParams& p, Index M, Rng& rng);

/// Anomaly score of the window's last point: the negative mean, over L
/// posterior samples z ~ q(z|x), of the last dimension's log density under
/// p(x|z). Higher means more anomalous.
double reconstruction_score(const Vec& x, const ModelParams& p, Index L,
                            Rng& rng);

/// Same reduction but with z drawn from the prior N(0, I).
double prior_score(const Vec& x, const ModelParams& p, Index L, Rng& rng);

/// Score reduction shared by both variants: z_samples is K x L.
double last_point_score(double x_last, const Mat& z_samples,
                        const ModelParams& p);

/// Score every window ending at t >= W-1. Windows containing missing points
/// are imputed first when use_mcmc is on; points that are themselves missing
/// receive no score. Each t uses an independent substream of cfg.seed.
ScoreSeries detect(const PreparedSeries& s, const ModelParams& p,
                   const DetectConfig& cfg);

}  // namespace kpivae

#endif  // KPIVAE_DETECTOR_HPP
