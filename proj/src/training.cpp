#include "kpivae/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace kpivae {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct BatchTerms {
  double recon;
  double prior;
  double entropy;
};

// Mean of each bound term over columns, with each distinct window
// replicated L times (columns grouped by replica block).
BatchTerms mean_terms(const Mat& X, const Mat& Alpha, const Vec& beta,
                      const Mat& Xi, const ModelParams& p) {
  const ForwardCache f = run_forward(X, Xi, p);
  const BoundTerms t = bound_terms(X, Alpha, beta, f);
  const double n = static_cast<double>(X.cols());
  return {t.recon.sum() / n, t.prior.sum() / n, t.entropy.sum() / n};
}

}  // namespace

double m_elbo_estimate(const Window& w, const ModelParams& p,
                       const Mat& xi_samples) {
  const ElboTerms t = elbo_decomposition(w, p, xi_samples);
  return t.sum();
}

ElboTerms elbo_decomposition(const Window& w, const ModelParams& p,
                             const Mat& xi_samples) {
  const Index L = xi_samples.rows();
  if (L < 1) throw DataError("need at least one xi sample");
  if (xi_samples.cols() != p.latent_dim) {
    throw DataError("xi sample width does not match latent dimension");
  }
  const Mat X = w.x.replicate(1, L);
  const Mat Alpha = w.alpha.replicate(1, L);
  const Vec beta = Vec::Constant(L, w.beta);
  const Mat Xi = xi_samples.transpose();
  const BatchTerms t = mean_terms(X, Alpha, beta, Xi, p);
  return {t.recon, t.prior, t.entropy};
}

ElboTerms elbo_decomposition(const Window& w, const ModelParams& p, Index L,
                             Rng& rng) {
  return elbo_decomposition(w, p, rng.normal_mat(L, p.latent_dim));
}

double lr_schedule(Index epoch, const TrainConfig& cfg) {
  const auto steps = static_cast<double>(epoch / cfg.lr_every);
  return cfg.initial_lr * std::pow(cfg.lr_discount, steps);
}

double gradient_norm(const GradientSet& g) {
  double sq = 0.0;
  for (const TensorView& v : tensor_views(g)) sq += v.array().square().sum();
  return std::sqrt(sq);
}

double clip_gradients(GradientSet& g, double limit) {
  const double norm = gradient_norm(g);
  if (norm > limit) {
    const double scale = limit / norm;
    for (const TensorView& v : tensor_views(g)) v.array() *= scale;
  }
  return norm;
}

AdamState init_adam(const ModelParams& p) {
  AdamState st;
  for (const TensorView& v : tensor_views(p.w)) {
    st.m.emplace_back(Eigen::ArrayXd::Zero(v.size()));
    st.v.emplace_back(Eigen::ArrayXd::Zero(v.size()));
  }
  return st;
}

void adam_step(ModelParams& p, const GradientSet& g, AdamState& st, double lr,
               double l2_coeff) {
  ++st.step;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.step));
  const auto weights = tensor_views(p.w);
  const auto grads = tensor_views(const_cast<GradientSet&>(g));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Eigen::ArrayXd grad = grads[i].array();
    if (weights[i].l2_penalty) grad += l2_coeff * weights[i].array();
    st.m[i] = kBeta1 * st.m[i] + (1.0 - kBeta1) * grad;
    st.v[i] = kBeta2 * st.v[i] + (1.0 - kBeta2) * grad.square();
    weights[i].array() -=
        lr * (st.m[i] / bc1) / ((st.v[i] / bc2).sqrt() + kAdamEps);
  }
}

TrainResult train(const PreparedSeries& train_series,
                  const PreparedSeries& valid_series, const TrainConfig& cfg) {
  const Index W = cfg.window_size;
  if (train_series.size() < W || valid_series.size() < W) {
    throw DataError("series shorter than the window size");
  }

  Rng init_rng(mix_seed(cfg.seed, 0));
  Rng epoch_rng(mix_seed(cfg.seed, 1));

  TrainResult result;
  result.params = init_params(W, cfg.latent_dim, cfg.hidden_units, cfg.epsilon,
                              init_rng);
  result.params.data_mean = train_series.stats.mean;
  result.params.data_std = train_series.stats.std;
  if (cfg.epochs == 0) return result;

  ModelParams& params = result.params;
  AdamState adam = init_adam(params);

  // Baseline mode trains on the fixed clean-window subset.
  WindowSet base_ws;
  std::vector<Index> base_cols;
  if (cfg.mode == TrainMode::vae_baseline) {
    base_ws = make_windows(train_series, W);
    for (Index b = 0; b < base_ws.x.cols(); ++b) {
      if (base_ws.alpha.col(b).minCoeff() == 1.0) base_cols.push_back(b);
    }
    if (base_cols.empty()) {
      throw DataError("no clean windows available for baseline training");
    }
  }

  const WindowSet valid_ws = make_windows(valid_series, W);
  const Index valid_count = valid_ws.x.cols();
  const Index L = cfg.mc_samples_train;

  ModelParams best_params = params;
  double best_valid = -std::numeric_limits<double>::infinity();

  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, cfg);

    WindowSet epoch_ws;
    std::vector<Index> order;
    if (cfg.mode == TrainMode::donut) {
      const PreparedSeries injected =
          inject_missing(train_series, cfg.injection_lambda, epoch_rng);
      epoch_ws = make_windows(injected, W);
      order.resize(static_cast<std::size_t>(epoch_ws.x.cols()));
      std::iota(order.begin(), order.end(), 0);
    } else {
      epoch_ws = base_ws;
      order = base_cols;
    }
    result.train_windows = static_cast<Index>(order.size());
    epoch_rng.shuffle(order.begin(), order.end());

    double loss_sum = 0.0;
    Index loss_windows = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const auto batch = static_cast<Index>(
          std::min(static_cast<std::size_t>(cfg.batch_size),
                   order.size() - begin));
      Mat X(W, batch);
      Mat Alpha(W, batch);
      Vec beta(batch);
      for (Index j = 0; j < batch; ++j) {
        const Index b = order[begin + static_cast<std::size_t>(j)];
        X.col(j) = epoch_ws.x.col(b);
        Alpha.col(j) = epoch_ws.alpha.col(b);
        beta(j) = epoch_ws.beta(b);
      }
      if (L > 1) {
        X = X.replicate(1, L).eval();
        Alpha = Alpha.replicate(1, L).eval();
        beta = beta.replicate(L, 1).eval();
      }
      const Mat Xi = epoch_rng.normal_mat(cfg.latent_dim, batch * L);
      auto [loss, grads] = backward_batch(X, Alpha, beta, Xi, params);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " +
                           std::to_string(epoch));
      }
      clip_gradients(grads, cfg.clip_norm);
      adam_step(params, grads, adam, lr, cfg.l2_coeff);
      loss_sum += loss * static_cast<double>(batch);
      loss_windows += batch;
    }

    // Validation bound with the same xi draws every epoch, so epoch-to-epoch
    // movement reflects the parameters rather than sampling noise.
    Rng valid_rng(mix_seed(cfg.seed, 2));
    const Mat valid_xi = valid_rng.normal_mat(cfg.latent_dim, valid_count);
    const BatchTerms vt = mean_terms(valid_ws.x, valid_ws.alpha, valid_ws.beta,
                                     valid_xi, params);
    const double valid_m_elbo = vt.recon + vt.prior + vt.entropy;
    if (!std::isfinite(valid_m_elbo)) {
      throw NumericError("non-finite validation bound at epoch " +
                         std::to_string(epoch));
    }

    result.trace.push_back({epoch, lr,
                            -loss_sum / static_cast<double>(loss_windows),
                            valid_m_elbo, vt.recon, vt.prior, vt.entropy});

    if (valid_m_elbo > best_valid) {
      best_valid = valid_m_elbo;
      if (cfg.early_stop) {
        best_params = params;
        result.best_epoch = epoch;
      }
    }
  }

  if (cfg.early_stop) result.params = best_params;
  return result;
}

}  // namespace kpivae
