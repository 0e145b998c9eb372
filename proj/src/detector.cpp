#include "kpivae/detector.hpp"

#include <cmath>

namespace kpivae {

namespace {

// Posterior samples for one window: each column is mu_z + xi .* sigma_z.
Mat posterior_samples(const Vec& x, const ModelParams& p, Index L, Rng& rng) {
  const DiagGaussian q = encode(x, p);
  Mat z = rng.normal_mat(p.latent_dim, L);
  z.array().colwise() *= q.sigma.array();
  z.colwise() += q.mu;
  return z;
}

}  // namespace

Vec mcmc_impute(const Vec& x, const std::vector<std::uint8_t>& missing_mask,
                const ModelParams& p, Index M, Rng& rng) {
  if (static_cast<Index>(missing_mask.size()) != x.size()) {
    throw DataError("missing mask length differs from window");
  }
  Vec current = x;
  for (Index m = 0; m < M; ++m) {
    const DiagGaussian q = encode(current, p);
    const Vec z = reparameterize(q, rng.normal_vec(p.latent_dim));
    const DiagGaussian px = decode(z, p);
    for (Index i = 0; i < x.size(); ++i) {
      const double draw = px.mu(i) + rng.normal() * px.sigma(i);
      if (missing_mask[static_cast<std::size_t>(i)]) current(i) = draw;
    }
  }
  return current;
}

double last_point_score(double x_last, const Mat& z_samples,
                        const ModelParams& p) {
  const auto [mu, sigma] = decode_last_dim(z_samples, p);
  const Eigen::ArrayXd r = (x_last - mu.array()) / sigma.array();
  const double mean_log_density =
      (-kLogSqrt2Pi - sigma.array().log() - 0.5 * r.square()).mean();
  return -mean_log_density;
}

double reconstruction_score(const Vec& x, const ModelParams& p, Index L,
                            Rng& rng) {
  if (L < 1) throw DataError("need at least one sample");
  return last_point_score(x(x.size() - 1), posterior_samples(x, p, L, rng), p);
}

double prior_score(const Vec& x, const ModelParams& p, Index L, Rng& rng) {
  if (L < 1) throw DataError("need at least one sample");
  return last_point_score(x(x.size() - 1), rng.normal_mat(p.latent_dim, L), p);
}

ScoreSeries detect(const PreparedSeries& s, const ModelParams& p,
                   const DetectConfig& cfg) {
  const Index W = p.window_size;
  const Index n = s.size();
  if (n < W) throw DataError("series shorter than the model window");

  ScoreSeries out;
  out.start_timestamp = s.start_timestamp;
  out.interval = s.interval;
  out.scores.assign(static_cast<std::size_t>(n), 0.0);
  out.scored.assign(static_cast<std::size_t>(n), 0);

  std::vector<Index> targets;
  for (Index t = W - 1; t < n; ++t) {
    if (!s.missing[static_cast<std::size_t>(t)]) targets.push_back(t);
  }

  // Windows are scored in chunks so the decoder runs as a few large matrix
  // products; each window still draws from its own (seed, t) substream.
  constexpr std::size_t kChunk = 8;
  const Index L = cfg.mc_samples;
  for (std::size_t begin = 0; begin < targets.size(); begin += kChunk) {
    const std::size_t count = std::min(kChunk, targets.size() - begin);
    Mat z(p.latent_dim, static_cast<Index>(count) * L);
    std::vector<double> last_values(count);
    for (std::size_t j = 0; j < count; ++j) {
      const Index t = targets[begin + j];
      Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t)));
      Vec x = s.values.segment(t - W + 1, W);
      if (cfg.use_mcmc) {
        std::vector<std::uint8_t> mask(
            s.missing.begin() + (t - W + 1), s.missing.begin() + t + 1);
        bool any = false;
        for (std::uint8_t m : mask) any = any || m;
        if (any) x = mcmc_impute(x, mask, p, cfg.mcmc_iters, rng);
      }
      last_values[j] = x(W - 1);
      if (cfg.use_prior) {
        z.middleCols(static_cast<Index>(j) * L, L) =
            rng.normal_mat(p.latent_dim, L);
      } else {
        z.middleCols(static_cast<Index>(j) * L, L) =
            posterior_samples(x, p, L, rng);
      }
    }
    const auto [mu, sigma] = decode_last_dim(z, p);
    for (std::size_t j = 0; j < count; ++j) {
      const Eigen::ArrayXd m = mu.segment(static_cast<Index>(j) * L, L);
      const Eigen::ArrayXd sd = sigma.segment(static_cast<Index>(j) * L, L);
      const Eigen::ArrayXd r = (last_values[j] - m) / sd;
      const double mean_log_density =
          (-kLogSqrt2Pi - sd.log() - 0.5 * r.square()).mean();
      const Index t = targets[begin + j];
      out.scores[static_cast<std::size_t>(t)] = -mean_log_density;
      out.scored[static_cast<std::size_t>(t)] = 1;
    }
  }
  return out;
}

}  // namespace kpivae
