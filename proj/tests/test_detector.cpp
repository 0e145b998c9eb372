#include "doctest.h"

#include "kpivae/detector.hpp"

#include "test_util.hpp"

#include <cmath>
#include <numeric>

using namespace kpivae;
using kpivae::test::toy_params;

namespace {

PreparedSeries make_prepared(const std::vector<double>& values,
                             const std::vector<std::uint8_t>& missing = {}) {
  PreparedSeries s;
  s.start_timestamp = 0;
  s.interval = 60;
  s.values = Eigen::Map<const Vec>(values.data(),
                                   static_cast<Index>(values.size()));
  s.labels.assign(values.size(), 0);
  s.missing = missing.empty() ? std::vector<std::uint8_t>(values.size(), 0)
                              : missing;
  for (std::size_t i = 0; i < s.missing.size(); ++i) {
    if (s.missing[i]) s.values(static_cast<Index>(i)) = 0.0;
  }
  return s;
}

// Unit-variance, zero-mean likelihood head regardless of z: all weights
// zero, x_std_b solved so softplus(b) + eps = 1.
ModelParams standard_normal_decoder(Index W) {
  ModelParams p = toy_params(W, 2, 4, 77);
  for (const TensorView& v : tensor_views(p.w)) v.array().setZero();
  const double b = std::log(std::expm1(1.0 - p.epsilon));
  p.w.x_std_b.setConstant(b);
  return p;
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("imputation with zero rounds or an empty mask is the identity") {
  ModelParams p = toy_params(6, 2, 5, 70);
  Rng rng(1);
  const Vec x = rng.normal_vec(6);
  const std::vector<std::uint8_t> none(6, 0);
  std::vector<std::uint8_t> some(6, 0);
  some[1] = some[4] = 1;

  Rng r0(2);
  const Vec y0 = mcmc_impute(x, some, p, 0, r0);
  CHECK((y0.array() == x.array()).all());

  Rng r1(3);
  const Vec y1 = mcmc_impute(x, none, p, 5, r1);
  CHECK((y1.array() == x.array()).all());
}

TEST_CASE("imputation replaces exactly the masked coordinates") {
  ModelParams p = toy_params(8, 2, 6, 71);
  Rng rng(4);
  const Vec x = rng.normal_vec(8);
  std::vector<std::uint8_t> mask(8, 0);
  mask[0] = mask[3] = mask[7] = 1;
  Rng draw(5);
  const Vec y = mcmc_impute(x, mask, p, 10, draw);
  for (Index i = 0; i < 8; ++i) {
    if (mask[static_cast<std::size_t>(i)]) {
      CHECK(y(i) != x(i));
    } else {
      CHECK(y(i) == x(i));  // observed coordinates bit-identical
    }
  }
  // Deterministic per seed.
  Rng draw2(5);
  const Vec y2 = mcmc_impute(x, mask, p, 10, draw2);
  CHECK((y2.array() == y.array()).all());

  CHECK_THROWS_AS(mcmc_impute(x, std::vector<std::uint8_t>(3, 0), p, 1, rng),
                  DataError);
}

TEST_CASE("unit-Gaussian decoder scores the standard negative log density") {
  const ModelParams p = standard_normal_decoder(5);
  Vec x = Vec::Zero(5);
  Rng rng(6);
  CHECK(reconstruction_score(x, p, 64, rng) ==
        doctest::Approx(0.9189385332046727).epsilon(1e-12));
  x(4) = 2.0;
  Rng rng2(7);
  CHECK(reconstruction_score(x, p, 64, rng2) ==
        doctest::Approx(0.9189385332046727 + 2.0).epsilon(1e-12));
  // The reduction ignores every dimension except the last.
  x(0) = 50.0;
  Rng rng3(8);
  CHECK(reconstruction_score(x, p, 64, rng3) ==
        doctest::Approx(0.9189385332046727 + 2.0).epsilon(1e-12));
}

TEST_CASE("score reduction is invariant to sample order") {
  ModelParams p = toy_params(6, 3, 8, 72);
  Rng rng(9);
  Mat z = rng.normal_mat(3, 32);
  const double a = last_point_score(0.7, z, p);
  Mat shuffled(3, 32);
  std::vector<Index> order(32);
  std::iota(order.begin(), order.end(), Index{0});
  Rng perm(10);
  perm.shuffle(order.begin(), order.end());
  for (Index j = 0; j < 32; ++j) shuffled.col(j) = z.col(order[j]);
  const double b = last_point_score(0.7, shuffled, p);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("posterior sampling follows the documented draw order") {
  ModelParams p = toy_params(6, 2, 5, 73);
  Rng rng(11);
  const Vec x = rng.normal_vec(6);
  Rng lib(12);
  const double score = reconstruction_score(x, p, 16, lib);
  // Manual assembly: one K x L standard-normal block, scaled and shifted.
  Rng manual(12);
  const DiagGaussian q = encode(x, p);
  Mat z = manual.normal_mat(2, 16);
  z.array().colwise() *= q.sigma.array();
  z.colwise() += q.mu;
  CHECK(score == last_point_score(x(5), z, p));
}

TEST_CASE("prior scoring draws straight standard normals") {
  ModelParams p = toy_params(6, 2, 5, 74);
  Rng rng(13);
  const Vec x = rng.normal_vec(6);
  Rng lib(14);
  const double score = prior_score(x, p, 16, lib);
  Rng manual(14);
  CHECK(score == last_point_score(x(5), manual.normal_mat(2, 16), p));
  CHECK_THROWS_AS(prior_score(x, p, 0, lib), DataError);
}

TEST_CASE("detect scores every present point past the warm-up prefix") {
  ModelParams p = toy_params(5, 2, 6, 75);
  std::vector<double> v(12);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.5 * i);
  std::vector<std::uint8_t> missing(12, 0);
  missing[7] = 1;
  const PreparedSeries s = make_prepared(v, missing);
  DetectConfig cfg;
  cfg.mc_samples = 16;
  cfg.seed = 15;
  const ScoreSeries out = detect(s, p, cfg);
  REQUIRE(out.scores.size() == 12);
  for (std::size_t t = 0; t < 4; ++t) CHECK(out.scored[t] == 0);
  for (std::size_t t = 4; t < 12; ++t) {
    CHECK(out.scored[t] == (t == 7 ? 0 : 1));
    if (out.scored[t]) CHECK(std::isfinite(out.scores[t]));
  }
  CHECK(out.start_timestamp == s.start_timestamp);
  CHECK(out.interval == s.interval);

  const ScoreSeries again = detect(s, p, cfg);
  CHECK(again.scores == out.scores);
  CHECK(again.scored == out.scored);
}

TEST_CASE("batched detection matches the single-window scorer") {
  ModelParams p = toy_params(6, 2, 8, 76);
  std::vector<double> v(20);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(0.3 * i);
  const PreparedSeries s = make_prepared(v);
  DetectConfig cfg;
  cfg.mc_samples = 32;
  cfg.seed = 16;
  const ScoreSeries out = detect(s, p, cfg);
  for (Index t = 5; t < 20; ++t) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    const Vec x = s.values.segment(t - 5, 6);
    const double single = reconstruction_score(x, p, 32, rng);
    CHECK(out.scores[static_cast<std::size_t>(t)] ==
          doctest::Approx(single).epsilon(1e-12));
  }
  // Prior variant agrees with the single-window prior scorer.
  DetectConfig pc = cfg;
  pc.use_prior = true;
  const ScoreSeries pout = detect(s, p, pc);
  for (Index t = 5; t < 20; ++t) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    const Vec x = s.values.segment(t - 5, 6);
    CHECK(pout.scores[static_cast<std::size_t>(t)] ==
          doctest::Approx(prior_score(x, p, 32, rng)).epsilon(1e-12));
  }
}

TEST_CASE("imputation toggling only matters when windows contain gaps") {
  ModelParams p = toy_params(5, 2, 6, 78);
  std::vector<double> clean(15);
  for (std::size_t i = 0; i < clean.size(); ++i) clean[i] = std::sin(0.4 * i);
  const PreparedSeries s = make_prepared(clean);
  DetectConfig on;
  on.mc_samples = 16;
  on.seed = 17;
  DetectConfig off = on;
  off.use_mcmc = false;
  const ScoreSeries a = detect(s, p, on);
  const ScoreSeries b = detect(s, p, off);
  CHECK(a.scores == b.scores);

  std::vector<std::uint8_t> missing(15, 0);
  missing[6] = 1;
  const PreparedSeries gap = make_prepared(clean, missing);
  const ScoreSeries c = detect(gap, p, on);
  const ScoreSeries d = detect(gap, p, off);
  // Windows covering index 6 score differently once imputation runs.
  bool any_diff = false;
  for (std::size_t t = 7; t <= 10; ++t) {
    any_diff = any_diff || c.scores[t] != d.scores[t];
  }
  CHECK(any_diff);
  // Windows past the gap are untouched by it.
  for (std::size_t t = 11; t < 15; ++t) CHECK(c.scores[t] == d.scores[t]);
}

TEST_CASE("series boundaries") {
  ModelParams p = toy_params(5, 2, 6, 79);
  const PreparedSeries exact =
      make_prepared({0.1, 0.2, 0.3, 0.4, 0.5});
  DetectConfig cfg;
  cfg.mc_samples = 8;
  const ScoreSeries out = detect(exact, p, cfg);
  Index scored = 0;
  for (auto f : out.scored) scored += f;
  CHECK(scored == 1);
  CHECK(out.scored[4] == 1);

  const PreparedSeries tiny = make_prepared({0.1, 0.2, 0.3});
  CHECK_THROWS_AS(detect(tiny, p, cfg), DataError);
}

}  // TEST_SUITE
