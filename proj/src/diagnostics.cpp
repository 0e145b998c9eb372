#include "kpivae/diagnostics.hpp"

#include "kpivae/csv.hpp"

#include <cmath>
#include <fstream>

namespace kpivae {

std::vector<LatentRow> export_latent(const PreparedSeries& s,
                                     const ModelParams& p) {
  const Index W = p.window_size;
  std::vector<LatentRow> rows;
  constexpr std::int64_t kDay = 86400;
  for (Index t = W - 1; t < s.size(); ++t) {
    const DiagGaussian q = encode(s.values.segment(t - W + 1, W), p);
    std::int64_t tod = (s.start_timestamp + t * s.interval) % kDay;
    if (tod < 0) tod += kDay;
    rows.push_back({t, tod, q.mu, q.sigma});
  }
  return rows;
}

void write_latent_csv(const std::string& path,
                      const std::vector<LatentRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const Index k = rows.empty() ? 0 : rows.front().mu.size();
  out << "last_index,time_of_day";
  for (Index i = 0; i < k; ++i) out << ",mu_" << i;
  for (Index i = 0; i < k; ++i) out << ",sigma_" << i;
  out << '\n';
  for (const LatentRow& r : rows) {
    out << r.last_index << ',' << r.time_of_day;
    for (Index i = 0; i < k; ++i) out << ',' << format_double(r.mu(i));
    for (Index i = 0; i < k; ++i) out << ',' << format_double(r.sigma(i));
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

double mean_adjacent_distance(const std::vector<LatentRow>& rows) {
  if (rows.size() < 2) throw DataError("need at least two windows");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    sum += (rows[i + 1].mu - rows[i].mu).norm();
  }
  return sum / static_cast<double>(rows.size() - 1);
}

double mean_random_pair_distance(const std::vector<LatentRow>& rows,
                                 Index pairs, Rng& rng) {
  if (rows.size() < 2) throw DataError("need at least two windows");
  double sum = 0.0;
  for (Index i = 0; i < pairs; ++i) {
    const std::size_t a = rng.integer(rows.size());
    std::size_t b = rng.integer(rows.size() - 1);
    if (b >= a) ++b;
    sum += (rows[a].mu - rows[b].mu).norm();
  }
  return sum / static_cast<double>(pairs);
}

std::vector<AblationRow> run_ablation(const RawSeries& data,
                                      const AblationConfig& cfg) {
  if (cfg.base.injection_lambda <= 0.0) {
    throw DataError("ablation needs a positive injection ratio to vary");
  }
  RawSeries train_view = data;
  if (cfg.label_keep < 1.0) {
    Rng label_rng(mix_seed(cfg.base.seed, 90));
    train_view = downsample_labels(data, cfg.label_keep, label_rng);
  }
  const std::vector<PreparedSeries> parts =
      split(prepare(train_view), cfg.ratios);
  if (parts.size() != 3) {
    throw DataError("ablation expects train/valid/test ratios");
  }
  const PreparedSeries& train_part = parts[0];
  const PreparedSeries& valid_part = parts[1];
  const PreparedSeries& test_part = parts[2];

  // Evaluation truth: the original labels of the test stretch.
  const std::vector<Index> bounds =
      split_bounds(static_cast<Index>(data.size()), cfg.ratios);
  GroundTruth truth;
  truth.anomaly.assign(data.labels.begin() + bounds[2],
                       data.labels.begin() + bounds[3]);
  truth.missing.assign(data.missing.begin() + bounds[2],
                       data.missing.begin() + bounds[3]);

  struct Variant {
    const char* name;
    bool m_elbo;
    bool injection;
    bool mcmc;
  };
  const Variant variants[] = {
      {"vae_baseline", false, false, false},
      {"m_elbo", true, false, false},
      {"m_elbo_injection", true, true, false},
      {"m_elbo_mcmc", true, false, true},
      {"all_three", true, true, true},
  };

  std::vector<AblationRow> rows;
  for (const Variant& v : variants) {
    rows.push_back({v.name, v.m_elbo, v.injection, v.mcmc, 0.0, 0.0});
  }

  for (const std::uint64_t seed : cfg.seeds) {
    // Three distinct trainings cover all five variants.
    ModelParams models[3];
    for (int kind = 0; kind < 3; ++kind) {
      TrainConfig tc = cfg.base;
      tc.seed = seed;
      tc.mode = kind == 0 ? TrainMode::vae_baseline : TrainMode::donut;
      if (kind != 2) tc.injection_lambda = 0.0;
      models[kind] = train(train_part, valid_part, tc).params;
    }
    for (std::size_t vi = 0; vi < rows.size(); ++vi) {
      const Variant& v = variants[vi];
      const int kind = !v.m_elbo ? 0 : (v.injection ? 2 : 1);
      DetectConfig dc = cfg.detect;
      dc.seed = seed;
      dc.use_mcmc = v.mcmc;
      const ScoreSeries scores = detect(test_part, models[kind], dc);
      rows[vi].mean_best_f +=
          best_fscore(truth, scores.scores, scores.scored).best_f;
      rows[vi].mean_auc += auc(truth, scores.scores, scores.scored);
    }
  }
  const auto n = static_cast<double>(cfg.seeds.size());
  for (AblationRow& r : rows) {
    r.mean_best_f /= n;
    r.mean_auc /= n;
  }
  return rows;
}

void write_ablation_csv(const std::string& path,
                        const std::vector<AblationRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "variant,m_elbo,injection,mcmc,mean_best_f,mean_auc\n";
  for (const AblationRow& r : rows) {
    out << r.variant << ',' << (r.m_elbo ? 1 : 0) << ','
        << (r.injection ? 1 : 0) << ',' << (r.mcmc ? 1 : 0) << ','
        << format_double(r.mean_best_f) << ',' << format_double(r.mean_auc)
        << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace kpivae
