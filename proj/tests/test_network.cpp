#include "doctest.h"

#include "kpivae/network.hpp"
#include "kpivae/training.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace kpivae;
using kpivae::test::make_window;
using kpivae::test::sign_pattern;
using kpivae::test::toy_params;

namespace {

double single_sample_loss(const Vec& x, const Vec& alpha, double beta,
                          const Vec& xi, const ModelParams& p) {
  Window w = make_window(x, alpha);
  w.beta = beta;
  return -m_elbo_estimate(w, p, xi.transpose());
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("softplus closed-form and asymptotic values") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(std::abs(softplus(100.0) - 100.0) < 1e-12);
  CHECK(softplus(-100.0) > 0.0);
  CHECK(softplus(-100.0) < 1e-40);
  // Monotone over a wide range.
  double prev = softplus(-50.0);
  for (double a = -49.0; a <= 50.0; a += 1.0) {
    CHECK(softplus(a) > prev);
    prev = softplus(a);
  }
  CHECK(softplus_grad(0.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("gaussian_log_prob hand values") {
  DiagGaussian g;
  g.mu = Vec::Zero(1);
  g.sigma = Vec::Ones(1);
  Vec x = Vec::Zero(1);
  CHECK(gaussian_log_prob(x, g) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-14));

  // Zero residual: only the normalization terms remain.
  DiagGaussian g2;
  g2.mu = Vec::Constant(3, 1.5);
  g2.sigma = Vec::Constant(3, 0.7);
  Vec x2 = g2.mu;
  CHECK(gaussian_log_prob(x2, g2) ==
        doctest::Approx(3.0 * (-0.9189385332046727 - std::log(0.7)))
            .epsilon(1e-13));

  // Two dimensions, evaluated by hand from the density formula.
  DiagGaussian g3;
  g3.mu = Vec::Zero(2);
  g3.sigma = Vec(2);
  g3.sigma << 1.0, 2.0;
  Vec x3(2);
  x3 << 1.0, -1.0;
  CHECK(gaussian_log_prob(x3, g3) ==
        doctest::Approx(-3.1560242469692907).epsilon(1e-14));
}

TEST_CASE("gaussian_log_prob is maximized at the mean") {
  DiagGaussian g;
  g.mu = Vec::Constant(2, 0.3);
  g.sigma = Vec::Constant(2, 0.8);
  const double at_mean = gaussian_log_prob(g.mu, g);
  for (double dx = -2.0; dx <= 2.0; dx += 0.25) {
    for (double dy = -2.0; dy <= 2.0; dy += 0.25) {
      if (dx == 0.0 && dy == 0.0) continue;
      Vec x(2);
      x << g.mu(0) + dx, g.mu(1) + dy;
      CHECK(gaussian_log_prob(x, g) < at_mean);
    }
  }
}

TEST_CASE("zero-parameter encode and decode collapse to softplus(0)+eps") {
  Rng rng(3);
  ModelParams p = init_params(6, 2, 4, 1e-4, rng);
  for (const TensorView& v : tensor_views(p.w)) v.array().setZero();
  const DiagGaussian qz = encode(Vec::Constant(6, 2.5), p);
  CHECK(qz.mu.isZero(0.0));
  for (Index i = 0; i < 2; ++i) {
    CHECK(qz.sigma(i) ==
          doctest::Approx(std::log(2.0) + 1e-4).epsilon(1e-14));
  }
  const DiagGaussian px = decode(Vec::Constant(2, -1.0), p);
  CHECK(px.mu.isZero(0.0));
  CHECK(px.mu.size() == 6);
  for (Index i = 0; i < 6; ++i) {
    CHECK(px.sigma(i) ==
          doctest::Approx(std::log(2.0) + 1e-4).epsilon(1e-14));
  }
}

TEST_CASE("hand-set single-unit encoder reproduces a hand forward pass") {
  Rng rng(4);
  ModelParams p = init_params(2, 1, 1, 1e-4, rng);
  p.w.enc_w1 << 0.5, -1.0;
  p.w.enc_b1 << 0.1;
  p.w.enc_w2 << 2.0;
  p.w.enc_b2 << -0.2;
  p.w.z_mean_w << 0.25;
  p.w.z_mean_b << 0.05;
  p.w.z_std_w << -0.5;
  p.w.z_std_b << 1.0;
  Vec x(2);
  x << 2.0, -1.0;
  // h1 = relu(0.5*2 + (-1)*(-1) + 0.1) = 2.1; h2 = relu(2*2.1 - 0.2) = 4.0
  const DiagGaussian q = encode(x, p);
  CHECK(q.mu(0) == doctest::Approx(0.25 * 4.0 + 0.05).epsilon(1e-14));
  CHECK(q.sigma(0) ==
        doctest::Approx(std::log1p(std::exp(-1.0)) + 1e-4).epsilon(1e-14));
}

TEST_CASE("sigma heads stay above the floor for random parameters") {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    ModelParams p = init_params(4, 2, 3, 1e-4, rng);
    const Vec x = rng.normal_vec(4);
    const DiagGaussian qz = encode(x, p);
    CHECK(qz.sigma.minCoeff() >= 1e-4);
    const DiagGaussian px = decode(rng.normal_vec(2), p);
    CHECK(px.sigma.minCoeff() >= 1e-4);
  }
}

TEST_CASE("reparameterize examples and moments") {
  DiagGaussian g;
  g.mu = Vec::Constant(1, 1.0);
  g.sigma = Vec::Constant(1, 2.0);
  CHECK(reparameterize(g, Vec::Zero(1))(0) == 1.0);
  CHECK(reparameterize(g, Vec::Ones(1))(0) == 3.0);

  Rng rng(6);
  const Index n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double z = reparameterize(g, rng.normal_vec(1))(0);
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double std = std::sqrt(sum_sq / n - mean * mean);
  // Standard errors: sigma/sqrt(n) for the mean, sigma/sqrt(2n) for the std.
  CHECK(std::abs(mean - 1.0) < 3.0 * 2.0 / std::sqrt(double(n)));
  CHECK(std::abs(std - 2.0) < 3.0 * 2.0 / std::sqrt(2.0 * n));
}

TEST_CASE("batched forward matches the single-window paths") {
  Rng rng(7);
  ModelParams p = toy_params(5, 2, 4, 71);
  const Mat X = rng.normal_mat(5, 3);
  const Mat Xi = rng.normal_mat(2, 3);
  const ForwardCache f = run_forward(X, Xi, p);
  for (Index b = 0; b < 3; ++b) {
    const DiagGaussian q = encode(X.col(b), p);
    CHECK((f.mu_z.col(b) - q.mu).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((f.sigma_z.col(b) - q.sigma).lpNorm<Eigen::Infinity>() < 1e-12);
    const Vec z = reparameterize(q, Xi.col(b));
    const DiagGaussian px = decode(z, p);
    CHECK((f.mu_x.col(b) - px.mu).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((f.sigma_x.col(b) - px.sigma).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("backward loss equals the forward bound bit-for-bit") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    ModelParams p = toy_params(4, 2, 5, 100 + trial);
    const Vec x = rng.normal_vec(4);
    Vec alpha(4);
    for (Index i = 0; i < 4; ++i) alpha(i) = rng.uniform() < 0.7 ? 1.0 : 0.0;
    const double beta = alpha.mean();
    const Vec xi = rng.normal_vec(2);
    const auto [loss, grads] = backward(x, alpha, beta, xi, p);
    CHECK(loss == single_sample_loss(x, alpha, beta, xi, p));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(9);
  const double h = 1e-4;
  int configs_done = 0;
  int coords_checked = 0;
  int coords_skipped = 0;
  std::uint64_t param_seed = 200;
  while (configs_done < 20) {
    ModelParams p = toy_params(4, 2, 5, param_seed++);
    const Vec x = rng.normal_vec(4);
    Vec alpha(4);
    for (Index i = 0; i < 4; ++i) alpha(i) = rng.uniform() < 0.75 ? 1.0 : 0.0;
    const double beta = alpha.mean();
    const Vec xi = rng.normal_vec(2);
    const auto [loss, grads] = backward(x, alpha, beta, xi, p);
    CHECK(std::isfinite(loss));

    const auto grad_views = tensor_views(grads);
    const auto param_views = tensor_views(p.w);
    double max_rel = 0.0;
    for (std::size_t ti = 0; ti < param_views.size(); ++ti) {
      for (Index i = 0; i < param_views[ti].size(); ++i) {
        double& theta = param_views[ti].data[i];
        const double saved = theta;
        theta = saved + h;
        const ForwardCache f_hi = run_forward(x, xi, p);
        const double loss_hi = single_sample_loss(x, alpha, beta, xi, p);
        theta = saved - h;
        const ForwardCache f_lo = run_forward(x, xi, p);
        const double loss_lo = single_sample_loss(x, alpha, beta, xi, p);
        theta = saved;
        // A ReLU kink between the two evaluation points invalidates the
        // central-difference estimate for this coordinate.
        if (sign_pattern(f_hi) != sign_pattern(f_lo)) {
          ++coords_skipped;
          continue;
        }
        const double fd = (loss_hi - loss_lo) / (2.0 * h);
        const double an = grad_views[ti].array()[i];
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
        max_rel = std::max(max_rel, std::abs(fd - an) / denom);
        ++coords_checked;
      }
    }
    CHECK(max_rel < 1e-4);
    ++configs_done;
  }
  CHECK(coords_checked > 3000);
  // Kink crossings should be rare events, not a systematic escape hatch.
  CHECK(coords_skipped < coords_checked / 100);
}

TEST_CASE("masked dimensions zero their likelihood-head gradients exactly") {
  Rng rng(10);
  ModelParams p = toy_params(4, 2, 5, 300);
  const Vec x = rng.normal_vec(4);
  Vec alpha = Vec::Ones(4);
  alpha(1) = 0.0;
  alpha(3) = 0.0;
  const Vec xi = rng.normal_vec(2);
  const auto [loss, grads] = backward(x, alpha, alpha.mean(), xi, p);
  (void)loss;
  for (const Index masked : {Index(1), Index(3)}) {
    CHECK(grads.x_mean_w.row(masked).isZero(0.0));
    CHECK(grads.x_mean_b(masked) == 0.0);
    CHECK(grads.x_std_w.row(masked).isZero(0.0));
    CHECK(grads.x_std_b(masked) == 0.0);
  }
  CHECK_FALSE(grads.x_mean_w.row(0).isZero(0.0));
}

TEST_CASE("decode_last_dim agrees with full decode") {
  Rng rng(11);
  ModelParams p = toy_params(6, 3, 4, 400);
  const Mat Z = rng.normal_mat(3, 10);
  const auto [mu, sigma] = decode_last_dim(Z, p);
  for (Index l = 0; l < 10; ++l) {
    const DiagGaussian px = decode(Z.col(l), p);
    CHECK(mu(l) == doctest::Approx(px.mu(5)).epsilon(1e-13));
    CHECK(sigma(l) == doctest::Approx(px.sigma(5)).epsilon(1e-13));
  }
}

TEST_CASE("tensor registry covers every parameter exactly once") {
  Rng rng(12);
  ModelParams p = init_params(4, 2, 5, 1e-4, rng);
  const auto views = tensor_views(p.w);
  CHECK(views.size() == 16);
  Index total = 0;
  int l2_count = 0;
  for (const TensorView& v : views) {
    total += v.size();
    if (v.l2_penalty) {
      ++l2_count;
      CHECK(v.is_weight);
    }
  }
  // Two nets, each: in->5, 5->5, two heads (out x 5 + out).
  const Index expected = (5 * 4 + 5) + (5 * 5 + 5) + 2 * (2 * 5 + 2) +
                         (5 * 2 + 5) + (5 * 5 + 5) + 2 * (4 * 5 + 4);
  CHECK(total == expected);
  CHECK(l2_count == 4);  // the four hidden-layer weight matrices
}

TEST_CASE("initialization is deterministic per seed and scales by fan-in") {
  ModelParams a = toy_params(8, 3, 10, 1234);
  ModelParams b = toy_params(8, 3, 10, 1234);
  const auto va = tensor_views(a.w);
  const auto vb = tensor_views(b.w);
  for (std::size_t i = 0; i < va.size(); ++i) {
    CHECK((va[i].array() == vb[i].array()).all());
    if (!va[i].is_weight) CHECK(va[i].array().isZero(0.0));
  }
  // Wider fan-in shrinks the typical weight magnitude.
  ModelParams wide = toy_params(200, 3, 10, 1234);
  const double narrow_rms =
      std::sqrt(a.w.enc_w1.array().square().mean());
  const double wide_rms =
      std::sqrt(wide.w.enc_w1.array().square().mean());
  CHECK(wide_rms < narrow_rms);
}

}  // TEST_SUITE
