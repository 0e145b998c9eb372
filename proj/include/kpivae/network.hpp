#ifndef KPIVAE_NETWORK_HPP
#define KPIVAE_NETWORK_HPP

#include "kpivae/rng.hpp"
#include "kpivae/types.hpp"

#include <utility>
#include <vector>

namespace kpivae {

/// 0.5 * log(2*pi), the per-dimension Gaussian normalization constant.
inline constexpr double kLogSqrt2Pi = 0.9189385332046727;

/// Diagonal Gaussian: one mean and one standard deviation per dimension.
struct DiagGaussian {
  Vec mu;
  Vec sigma;
};

/// All weight/bias tensors of the variational and generative networks.
/// Both nets are two ReLU layers followed by a linear mean head and a
/// softplus-plus-epsilon std head.
struct NetWeights {
  Mat enc_w1;  // hidden x W
  Vec enc_b1;
  Mat enc_w2;  // hidden x hidden
  Vec enc_b2;
  Mat z_mean_w;  // K x hidden
  Vec z_mean_b;
  Mat z_std_w;  // K x hidden
  Vec z_std_b;
  Mat dec_w1;  // hidden x K
  Vec dec_b1;
  Mat dec_w2;  // hidden x hidden
  Vec dec_b2;
  Mat x_mean_w;  // W x hidden
  Vec x_mean_b;
  Mat x_std_w;  // W x hidden
  Vec x_std_b;
};

/// Gradients are shape-congruent with the weights.
using GradientSet = NetWeights;

/// Flat elementwise view of one tensor, used to drive the optimizer,
/// clipping, initialization and serialization from a single canonical list.
struct TensorView {
  const char* name;
  double* data;
  Index rows;
  Index cols;
  bool is_weight;    // weight matrix (He-initialized) vs bias (zeroed)
  bool l2_penalty;   // hidden-layer weight, subject to L2 regularization
  Index size() const { return rows * cols; }
  Eigen::Map<Eigen::ArrayXd> array() const {
    return Eigen::Map<Eigen::ArrayXd>(data, size());
  }
};

/// Canonical tensor enumeration; the ordering defines the model file layout
/// and the optimizer's iteration order.
std::vector<TensorView> tensor_views(NetWeights& w);
std::vector<TensorView> tensor_views(const NetWeights& w);

/// Trained model: network weights plus the hyperparameters and
/// standardization statistics needed to deploy it.
struct ModelParams {
  Index window_size = 120;
  Index latent_dim = 5;
  Index hidden_units = 100;
  double epsilon = 1e-4;  // std head floor
  double data_mean = 0.0;
  double data_std = 1.0;
  NetWeights w;
};

/// Allocate tensors for the given shape, weights ~ N(0, 2/fan_in), biases 0.
ModelParams init_params(Index window_size, Index latent_dim, Index hidden_units,
                        double epsilon, Rng& rng);

/// Zero-filled gradient tensors congruent with p.
GradientSet zero_gradients(const ModelParams& p);

/// log(1 + exp(a)) without overflow; strictly positive.
double softplus(double a);
/// Derivative of softplus, the logistic function, computed stably.
double softplus_grad(double a);

/// Sum over dimensions of the diagonal-Gaussian log density, in log space.
double gaussian_log_prob(const Vec& x, const DiagGaussian& g);

DiagGaussian encode(const Vec& x, const ModelParams& p);
DiagGaussian decode(const Vec& z, const ModelParams& p);

/// z = mu + xi .* sigma
Vec reparameterize(const DiagGaussian& g, const Vec& xi);

/// Every intermediate of a batched forward pass; column b is window b.
/// Kept so the backward pass and tests can reuse the exact activations.
struct ForwardCache {
  Mat a1, h1, a2, h2;      // encoder hidden
  Mat mu_z, sp_z, sigma_z; // posterior heads (sp = pre-softplus)
  Mat z;
  Mat c1, g1, c2, g2;      // decoder hidden
  Mat mu_x, sp_x, sigma_x; // likelihood heads
};

/// Batched forward through both nets with reparameterized z. X is W x B,
/// Xi is K x B; one column per window.
ForwardCache run_forward(const Mat& X, const Mat& Xi, const ModelParams& p);

/// Per-window masked lower-bound terms computed from a forward cache:
/// recon_b  = sum_w alpha_wb * log N(x_wb | mu_x, sigma_x)
/// prior_b  = beta_b * log N(z_b | 0, I)
/// entropy_b = -log N(z_b | mu_z, sigma_z)
struct BoundTerms {
  Vec recon;
  Vec prior;
  Vec entropy;
};
BoundTerms bound_terms(const Mat& X, const Mat& Alpha, const Vec& beta,
                       const ForwardCache& f);

/// Loss (mean over columns of the negative masked lower bound) and its
/// analytic gradients. Gradients are exact for the sampled xi.
std::pair<double, GradientSet> backward_batch(const Mat& X, const Mat& Alpha,
                                              const Vec& beta, const Mat& Xi,
                                              const ModelParams& p);

/// Single-window negative bound and gradients.
std::pair<double, GradientSet> backward(const Vec& x, const Vec& alpha,
                                        double beta, const Vec& xi,
                                        const ModelParams& p);

/// Decoder hidden features for a batch of latent samples (Z is K x L).
Mat decoder_hidden(const Mat& Z, const ModelParams& p);

/// Likelihood parameters of the window's last dimension only, for a batch
/// of latent samples. Returns (mu, sigma), each of length L.
std::pair<Vec, Vec> decode_last_dim(const Mat& Z, const ModelParams& p);

}  // namespace kpivae

#endif  // KPIVAE_NETWORK_HPP
