#include "kpivae/network.hpp"

#include <cmath>

namespace kpivae {

namespace {

inline double sigmoid(double a) {
  if (a >= 0.0) {
    return 1.0 / (1.0 + std::exp(-a));
  }
  const double e = std::exp(a);
  return e / (1.0 + e);
}

inline Mat relu(const Mat& a) { return a.cwiseMax(0.0); }

// Derivative mask; exactly-zero pre-activations get slope 0.
inline Mat relu_mask(const Mat& a) {
  return (a.array() > 0.0).cast<double>().matrix();
}

inline Mat softplus_mat(const Mat& a) {
  return a.unaryExpr([](double v) { return softplus(v); });
}

inline Mat sigmoid_mat(const Mat& a) {
  return a.unaryExpr([](double v) { return sigmoid(v); });
}

template <typename W>
std::vector<TensorView> make_views(W& w) {
  auto view = [](const char* name, auto& m, bool is_weight, bool l2) {
    return TensorView{name, const_cast<double*>(m.data()), m.rows(), m.cols(),
                      is_weight, l2};
  };
  return {
      view("enc_w1", w.enc_w1, true, true),
      view("enc_b1", w.enc_b1, false, false),
      view("enc_w2", w.enc_w2, true, true),
      view("enc_b2", w.enc_b2, false, false),
      view("z_mean_w", w.z_mean_w, true, false),
      view("z_mean_b", w.z_mean_b, false, false),
      view("z_std_w", w.z_std_w, true, false),
      view("z_std_b", w.z_std_b, false, false),
      view("dec_w1", w.dec_w1, true, true),
      view("dec_b1", w.dec_b1, false, false),
      view("dec_w2", w.dec_w2, true, true),
      view("dec_b2", w.dec_b2, false, false),
      view("x_mean_w", w.x_mean_w, true, false),
      view("x_mean_b", w.x_mean_b, false, false),
      view("x_std_w", w.x_std_w, true, false),
      view("x_std_b", w.x_std_b, false, false),
  };
}

void allocate(NetWeights& w, Index window, Index latent, Index hidden) {
  w.enc_w1.resize(hidden, window);
  w.enc_b1.resize(hidden);
  w.enc_w2.resize(hidden, hidden);
  w.enc_b2.resize(hidden);
  w.z_mean_w.resize(latent, hidden);
  w.z_mean_b.resize(latent);
  w.z_std_w.resize(latent, hidden);
  w.z_std_b.resize(latent);
  w.dec_w1.resize(hidden, latent);
  w.dec_b1.resize(hidden);
  w.dec_w2.resize(hidden, hidden);
  w.dec_b2.resize(hidden);
  w.x_mean_w.resize(window, hidden);
  w.x_mean_b.resize(window);
  w.x_std_w.resize(window, hidden);
  w.x_std_b.resize(window);
}

}  // namespace

std::vector<TensorView> tensor_views(NetWeights& w) { return make_views(w); }

std::vector<TensorView> tensor_views(const NetWeights& w) {
  return make_views(w);
}

ModelParams init_params(Index window_size, Index latent_dim, Index hidden_units,
                        double epsilon, Rng& rng) {
  ModelParams p;
  p.window_size = window_size;
  p.latent_dim = latent_dim;
  p.hidden_units = hidden_units;
  p.epsilon = epsilon;
  allocate(p.w, window_size, latent_dim, hidden_units);
  for (const TensorView& v : tensor_views(p.w)) {
    auto a = v.array();
    if (v.is_weight) {
      const double scale = std::sqrt(2.0 / static_cast<double>(v.cols));
      for (Index i = 0; i < a.size(); ++i) a[i] = scale * rng.normal();
    } else {
      a.setZero();
    }
  }
  return p;
}

GradientSet zero_gradients(const ModelParams& p) {
  GradientSet g;
  allocate(g, p.window_size, p.latent_dim, p.hidden_units);
  for (const TensorView& v : tensor_views(g)) v.array().setZero();
  return g;
}

double softplus(double a) {
  if (a > 30.0) return a + std::log1p(std::exp(-a));
  return std::log1p(std::exp(a));
}

double softplus_grad(double a) { return sigmoid(a); }

double gaussian_log_prob(const Vec& x, const DiagGaussian& g) {
  const Eigen::ArrayXd r = (x - g.mu).array() / g.sigma.array();
  return -kLogSqrt2Pi * static_cast<double>(x.size()) -
         g.sigma.array().log().sum() - 0.5 * r.square().sum();
}

DiagGaussian encode(const Vec& x, const ModelParams& p) {
  const Vec h1 = (p.w.enc_w1 * x + p.w.enc_b1).cwiseMax(0.0);
  const Vec h2 = (p.w.enc_w2 * h1 + p.w.enc_b2).cwiseMax(0.0);
  DiagGaussian g;
  g.mu = p.w.z_mean_w * h2 + p.w.z_mean_b;
  g.sigma = (p.w.z_std_w * h2 + p.w.z_std_b)
                .unaryExpr([&](double a) { return softplus(a) + p.epsilon; });
  return g;
}

DiagGaussian decode(const Vec& z, const ModelParams& p) {
  const Vec g1 = (p.w.dec_w1 * z + p.w.dec_b1).cwiseMax(0.0);
  const Vec g2 = (p.w.dec_w2 * g1 + p.w.dec_b2).cwiseMax(0.0);
  DiagGaussian g;
  g.mu = p.w.x_mean_w * g2 + p.w.x_mean_b;
  g.sigma = (p.w.x_std_w * g2 + p.w.x_std_b)
                .unaryExpr([&](double a) { return softplus(a) + p.epsilon; });
  return g;
}

Vec reparameterize(const DiagGaussian& g, const Vec& xi) {
  return g.mu + xi.cwiseProduct(g.sigma);
}

ForwardCache run_forward(const Mat& X, const Mat& Xi, const ModelParams& p) {
  ForwardCache f;
  f.a1 = (p.w.enc_w1 * X).colwise() + p.w.enc_b1;
  f.h1 = relu(f.a1);
  f.a2 = (p.w.enc_w2 * f.h1).colwise() + p.w.enc_b2;
  f.h2 = relu(f.a2);
  f.mu_z = (p.w.z_mean_w * f.h2).colwise() + p.w.z_mean_b;
  f.sp_z = (p.w.z_std_w * f.h2).colwise() + p.w.z_std_b;
  f.sigma_z = (softplus_mat(f.sp_z).array() + p.epsilon).matrix();
  f.z = f.mu_z + Xi.cwiseProduct(f.sigma_z);
  f.c1 = (p.w.dec_w1 * f.z).colwise() + p.w.dec_b1;
  f.g1 = relu(f.c1);
  f.c2 = (p.w.dec_w2 * f.g1).colwise() + p.w.dec_b2;
  f.g2 = relu(f.c2);
  f.mu_x = (p.w.x_mean_w * f.g2).colwise() + p.w.x_mean_b;
  f.sp_x = (p.w.x_std_w * f.g2).colwise() + p.w.x_std_b;
  f.sigma_x = (softplus_mat(f.sp_x).array() + p.epsilon).matrix();
  return f;
}

BoundTerms bound_terms(const Mat& X, const Mat& Alpha, const Vec& beta,
                       const ForwardCache& f) {
  const Index latent = f.z.rows();
  const Eigen::ArrayXXd rx = (X - f.mu_x).array() / f.sigma_x.array();
  const Eigen::ArrayXXd log_px =
      -kLogSqrt2Pi - f.sigma_x.array().log() - 0.5 * rx.square();
  const Eigen::ArrayXXd rz = (f.z - f.mu_z).array() / f.sigma_z.array();
  const Eigen::ArrayXXd log_qz =
      -kLogSqrt2Pi - f.sigma_z.array().log() - 0.5 * rz.square();
  BoundTerms t;
  t.recon = (Alpha.array() * log_px).colwise().sum().transpose().matrix();
  t.prior = (beta.transpose().array() *
             (-kLogSqrt2Pi * static_cast<double>(latent) -
              0.5 * f.z.array().square().colwise().sum()))
                .transpose()
                .matrix();
  t.entropy = (-log_qz.colwise().sum()).transpose().matrix();
  return t;
}

std::pair<double, GradientSet> backward_batch(const Mat& X, const Mat& Alpha,
                                              const Vec& beta, const Mat& Xi,
                                              const ModelParams& p) {
  const Index batch = X.cols();
  const double scale = 1.0 / static_cast<double>(batch);
  const ForwardCache f = run_forward(X, Xi, p);

  const BoundTerms t = bound_terms(X, Alpha, beta, f);
  const double loss =
      -scale * (t.recon.sum() + t.prior.sum() + t.entropy.sum());

  GradientSet g = zero_gradients(p);

  // Likelihood heads.
  const Mat diff_x = X - f.mu_x;
  const Mat inv_sx = f.sigma_x.cwiseInverse();
  Mat g_mu_x = (-scale) *
               (Alpha.array() * diff_x.array() * inv_sx.array().square())
                   .matrix();
  Mat g_sig_x =
      (-scale) * (Alpha.array() *
                  (-inv_sx.array() +
                   diff_x.array().square() * inv_sx.array().cube()))
                     .matrix();
  Mat g_sp_x = g_sig_x.cwiseProduct(sigmoid_mat(f.sp_x));

  g.x_mean_w = g_mu_x * f.g2.transpose();
  g.x_mean_b = g_mu_x.rowwise().sum();
  g.x_std_w = g_sp_x * f.g2.transpose();
  g.x_std_b = g_sp_x.rowwise().sum();

  // Decoder hidden layers.
  Mat g_g2 = p.w.x_mean_w.transpose() * g_mu_x +
             p.w.x_std_w.transpose() * g_sp_x;
  Mat g_c2 = g_g2.cwiseProduct(relu_mask(f.c2));
  g.dec_w2 = g_c2 * f.g1.transpose();
  g.dec_b2 = g_c2.rowwise().sum();
  Mat g_g1 = p.w.dec_w2.transpose() * g_c2;
  Mat g_c1 = g_g1.cwiseProduct(relu_mask(f.c1));
  g.dec_w1 = g_c1 * f.z.transpose();
  g.dec_b1 = g_c1.rowwise().sum();

  // z collects the decoder path, the weighted prior term and the explicit
  // z argument of the entropy term.
  const Mat diff_z = f.z - f.mu_z;
  const Mat inv_sz = f.sigma_z.cwiseInverse();
  Mat g_z = p.w.dec_w1.transpose() * g_c1;
  g_z.noalias() += scale * f.z * beta.asDiagonal();
  g_z -= scale * (diff_z.array() * inv_sz.array().square()).matrix();

  // Posterior heads; mu and sigma also feed the entropy term directly.
  Mat g_mu_z = g_z + scale * (diff_z.array() * inv_sz.array().square()).matrix();
  Mat g_sig_z =
      g_z.cwiseProduct(Xi) +
      scale * (-inv_sz.array() +
               diff_z.array().square() * inv_sz.array().cube())
                  .matrix();
  Mat g_sp_z = g_sig_z.cwiseProduct(sigmoid_mat(f.sp_z));

  g.z_mean_w = g_mu_z * f.h2.transpose();
  g.z_mean_b = g_mu_z.rowwise().sum();
  g.z_std_w = g_sp_z * f.h2.transpose();
  g.z_std_b = g_sp_z.rowwise().sum();

  // Encoder hidden layers.
  Mat g_h2 = p.w.z_mean_w.transpose() * g_mu_z +
             p.w.z_std_w.transpose() * g_sp_z;
  Mat g_a2 = g_h2.cwiseProduct(relu_mask(f.a2));
  g.enc_w2 = g_a2 * f.h1.transpose();
  g.enc_b2 = g_a2.rowwise().sum();
  Mat g_h1 = p.w.enc_w2.transpose() * g_a2;
  Mat g_a1 = g_h1.cwiseProduct(relu_mask(f.a1));
  g.enc_w1 = g_a1 * X.transpose();
  g.enc_b1 = g_a1.rowwise().sum();

  return {loss, std::move(g)};
}

std::pair<double, GradientSet> backward(const Vec& x, const Vec& alpha,
                                        double beta, const Vec& xi,
                                        const ModelParams& p) {
  Vec beta_vec(1);
  beta_vec(0) = beta;
  return backward_batch(x, alpha, beta_vec, xi, p);
}

Mat decoder_hidden(const Mat& Z, const ModelParams& p) {
  const Mat g1 = relu((p.w.dec_w1 * Z).colwise() + p.w.dec_b1);
  return relu((p.w.dec_w2 * g1).colwise() + p.w.dec_b2);
}

std::pair<Vec, Vec> decode_last_dim(const Mat& Z, const ModelParams& p) {
  const Mat g2 = decoder_hidden(Z, p);
  const Index last = p.window_size - 1;
  Vec mu = ((p.w.x_mean_w.row(last) * g2).transpose().array() +
            p.w.x_mean_b(last))
               .matrix();
  Vec sp = ((p.w.x_std_w.row(last) * g2).transpose().array() +
            p.w.x_std_b(last))
               .matrix();
  Vec sigma = sp.unaryExpr([&](double a) { return softplus(a) + p.epsilon; });
  return {std::move(mu), std::move(sigma)};
}

}  // namespace kpivae
