#ifndef KPIVAE_TRAINING_HPP
#define KPIVAE_TRAINING_HPP

#include "kpivae/network.hpp"
#include "kpivae/series.hpp"
#include "kpivae/types.hpp"

#include <cstdint>
#include <vector>

namespace kpivae {

enum class TrainMode { donut, vae_baseline };

struct TrainConfig {
  // Model shape.
  Index window_size = 120;
  Index latent_dim = 5;
  Index hidden_units = 100;
  double epsilon = 1e-4;
  // Optimization.
  Index batch_size = 256;
  Index epochs = 250;
  double initial_lr = 1e-3;
  double lr_discount = 0.75;
  Index lr_every = 10;
  double l2_coeff = 1e-3;
  double clip_norm = 10.0;
  double injection_lambda = 0.01;
  Index mc_samples_train = 1;
  std::uint64_t seed = 0;
  bool early_stop = true;  // keep the best-validation epoch's parameters
  TrainMode mode = TrainMode::donut;
};

/// Three-term decomposition of the masked lower bound (reconstruction,
/// weighted prior, entropy); their sum is the bound estimate itself.
struct ElboTerms {
  double recon = 0.0;
  double prior = 0.0;
  double entropy = 0.0;
  double sum() const { return recon + prior + entropy; }
};

/// Monte Carlo estimate of the masked lower bound for one window.
/// xi_samples is L x K, one standard-normal draw per row.
double m_elbo_estimate(const Window& w, const ModelParams& p,
                       const Mat& xi_samples);

ElboTerms elbo_decomposition(const Window& w, const ModelParams& p,
                             const Mat& xi_samples);
ElboTerms elbo_decomposition(const Window& w, const ModelParams& p, Index L,
                             Rng& rng);

double lr_schedule(Index epoch, const TrainConfig& cfg);

/// Scale all tensors by limit/norm when the global L2 norm exceeds the
/// limit. Returns the pre-clip global norm.
double clip_gradients(GradientSet& g, double limit);

double gradient_norm(const GradientSet& g);

struct AdamState {
  std::vector<Eigen::ArrayXd> m;
  std::vector<Eigen::ArrayXd> v;
  std::int64_t step = 0;
};
AdamState init_adam(const ModelParams& p);

/// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction.
/// The L2 penalty gradient l2_coeff * w is added to hidden-layer weight
/// gradients here, after clipping, so the clip norm reflects the data term.
void adam_step(ModelParams& p, const GradientSet& g, AdamState& st, double lr,
               double l2_coeff);

struct TraceRow {
  Index epoch;
  double lr;
  double train_m_elbo;
  double valid_m_elbo;
  double recon;
  double prior;
  double entropy;
};

struct TrainResult {
  ModelParams params;
  std::vector<TraceRow> trace;
  Index best_epoch = -1;      // -1 when early_stop is off or epochs == 0
  Index train_windows = 0;    // windows used per epoch (after any exclusion)
};

/// Run the full training loop. In donut mode each epoch injects missing
/// points into a fresh copy of the training series before windowing; in
/// vae_baseline mode injection is off and windows touching any missing or
/// labeled point are excluded entirely.
TrainResult train(const PreparedSeries& train_series,
                  const PreparedSeries& valid_series, const TrainConfig& cfg);

}  // namespace kpivae

#endif  // KPIVAE_TRAINING_HPP
