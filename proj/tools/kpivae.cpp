#include "CLI11.hpp"

#include "kpivae/config.hpp"
#include "kpivae/csv.hpp"
#include "kpivae/detector.hpp"
#include "kpivae/diagnostics.hpp"
#include "kpivae/metrics.hpp"
#include "kpivae/model_io.hpp"
#include "kpivae/series.hpp"
#include "kpivae/synthetic.hpp"
#include "kpivae/training.hpp"
#include "kpivae/types.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace kpivae;

KeyValues load_config(const std::string& path) {
  if (path.empty()) return KeyValues();
  return KeyValues::from_file(path);
}

TrainMode parse_mode(const std::string& text) {
  if (text == "donut") return TrainMode::donut;
  if (text == "vae_baseline") return TrainMode::vae_baseline;
  throw DataError("mode must be 'donut' or 'vae_baseline', got '" + text +
                  "'");
}

std::vector<AnomalyType> parse_anomaly_types(const std::string& text) {
  std::vector<AnomalyType> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(start, comma - start);
    if (item == "spike") {
      out.push_back(AnomalyType::spike);
    } else if (item == "dip") {
      out.push_back(AnomalyType::dip);
    } else if (item == "level_shift") {
      out.push_back(AnomalyType::level_shift);
    } else {
      throw DataError("unknown anomaly type '" + item + "'");
    }
    start = comma + 1;
  }
  return out;
}

SynthConfig synth_from(KeyValues& kv) {
  SynthConfig cfg;
  cfg.length = kv.get_int("length", cfg.length);
  cfg.start_timestamp = kv.get_int("start_timestamp", cfg.start_timestamp);
  cfg.interval = kv.get_int("interval", cfg.interval);
  cfg.period = kv.get_int("period", cfg.period);
  cfg.amplitudes = kv.get_double_list("amplitudes", cfg.amplitudes);
  cfg.phases = kv.get_double_list("phases", cfg.phases);
  cfg.day_variation = kv.get_double("day_variation", cfg.day_variation);
  cfg.noise_sigma = kv.get_double("noise_sigma", cfg.noise_sigma);
  cfg.anomaly_rate = kv.get_double("anomaly_rate", cfg.anomaly_rate);
  cfg.anomaly_mag_min = kv.get_double("anomaly_mag_min", cfg.anomaly_mag_min);
  cfg.anomaly_mag_max = kv.get_double("anomaly_mag_max", cfg.anomaly_mag_max);
  cfg.anomaly_dur_min = kv.get_int("anomaly_dur_min", cfg.anomaly_dur_min);
  cfg.anomaly_dur_max = kv.get_int("anomaly_dur_max", cfg.anomaly_dur_max);
  if (kv.has("anomaly_types")) {
    cfg.anomaly_types = parse_anomaly_types(kv.get_string("anomaly_types", ""));
  }
  cfg.missing_rate = kv.get_double("missing_rate", cfg.missing_rate);
  cfg.missing_burst_min =
      kv.get_int("missing_burst_min", cfg.missing_burst_min);
  cfg.missing_burst_max =
      kv.get_int("missing_burst_max", cfg.missing_burst_max);
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  return cfg;
}

TrainConfig train_from(KeyValues& kv) {
  TrainConfig cfg;
  cfg.window_size = kv.get_int("window_size", cfg.window_size);
  cfg.latent_dim = kv.get_int("latent_dim", cfg.latent_dim);
  cfg.hidden_units = kv.get_int("hidden_units", cfg.hidden_units);
  cfg.epsilon = kv.get_double("epsilon", cfg.epsilon);
  cfg.batch_size = kv.get_int("batch_size", cfg.batch_size);
  cfg.epochs = kv.get_int("epochs", cfg.epochs);
  cfg.initial_lr = kv.get_double("initial_lr", cfg.initial_lr);
  cfg.lr_discount = kv.get_double("lr_discount", cfg.lr_discount);
  cfg.lr_every = kv.get_int("lr_every", cfg.lr_every);
  cfg.l2_coeff = kv.get_double("l2_coeff", cfg.l2_coeff);
  cfg.clip_norm = kv.get_double("clip_norm", cfg.clip_norm);
  cfg.injection_lambda =
      kv.get_double("injection_lambda", cfg.injection_lambda);
  cfg.mc_samples_train = kv.get_int("mc_samples_train", cfg.mc_samples_train);
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  cfg.early_stop = kv.get_bool("early_stop", cfg.early_stop);
  cfg.mode = parse_mode(kv.get_string("mode", "donut"));
  return cfg;
}

DetectConfig detect_from(KeyValues& kv) {
  DetectConfig cfg;
  cfg.mcmc_iters = kv.get_int("mcmc_iters", cfg.mcmc_iters);
  cfg.mc_samples = kv.get_int("mc_samples", cfg.mc_samples);
  cfg.use_mcmc = kv.get_bool("use_mcmc", cfg.use_mcmc);
  return cfg;
}

struct LabeledCounts {
  std::size_t before = 0;
  std::size_t after = 0;
};

LabeledCounts apply_label_ratio(RawSeries& raw, double ratio,
                                std::uint64_t seed) {
  LabeledCounts counts;
  for (const std::uint8_t l : raw.labels) counts.before += l;
  if (ratio < 1.0) {
    Rng rng(mix_seed(seed, 90));
    raw = downsample_labels(raw, ratio, rng);
  }
  for (const std::uint8_t l : raw.labels) counts.after += l;
  return counts;
}

void write_trace(const std::string& path, const TrainResult& result,
                 const LabeledCounts& counts, double label_ratio) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "# label_ratio " << format_double(label_ratio) << ": retained "
      << counts.after << " of " << counts.before << " labeled points\n";
  out << "# training windows per epoch: " << result.train_windows << '\n';
  if (result.best_epoch >= 0) {
    out << "# best validation epoch: " << result.best_epoch << '\n';
  }
  out << "epoch,lr,train_m_elbo,valid_m_elbo,recon,prior,entropy\n";
  for (const TraceRow& r : result.trace) {
    out << r.epoch << ',' << format_double(r.lr) << ','
        << format_double(r.train_m_elbo) << ','
        << format_double(r.valid_m_elbo) << ',' << format_double(r.recon)
        << ',' << format_double(r.prior) << ',' << format_double(r.entropy)
        << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

// ---- subcommand option bags -------------------------------------------

struct SynthOpts {
  std::string config;
  std::string out;
  std::optional<std::int64_t> seed;
  std::optional<std::int64_t> length;
};

struct TrainOpts {
  std::string data;
  std::string config;
  std::string model_out;
  std::string trace_out;
  double label_ratio = 1.0;
  std::optional<std::int64_t> seed;
  std::optional<std::int64_t> epochs;
  std::optional<std::int64_t> window;
  std::optional<std::int64_t> latent;
  std::optional<std::string> mode;
  double train_ratio = 0.7;
  double valid_ratio = 0.3;
};

struct DetectOpts {
  std::string data;
  std::string model;
  std::string out;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> samples;
  std::optional<std::int64_t> mcmc_iters;
  bool no_mcmc = false;
  bool prior = false;
};

struct EvaluateOpts {
  std::string scores;
  std::string truth;
  std::string table;
};

struct AblateOpts {
  std::string data;
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  double label_ratio = 1.0;
};

struct DiagnoseOpts {
  std::string data;
  std::string model;
  std::string out;
  std::int64_t pairs = 10000;
  std::uint64_t seed = 0;
};

// ---- subcommand bodies ------------------------------------------------

void run_synth(const SynthOpts& o) {
  KeyValues kv = load_config(o.config);
  SynthConfig cfg = synth_from(kv);
  kv.reject_unused();
  if (o.seed) cfg.seed = static_cast<std::uint64_t>(*o.seed);
  if (o.length) cfg.length = *o.length;
  save_series(o.out, generate(cfg));
  std::cout << "wrote " << cfg.length << " points to " << o.out << '\n';
}

void run_train(const TrainOpts& o) {
  KeyValues kv = load_config(o.config);
  TrainConfig cfg = train_from(kv);
  double label_ratio = kv.get_double("label_ratio", o.label_ratio);
  const double train_ratio = kv.get_double("train_ratio", o.train_ratio);
  const double valid_ratio = kv.get_double("valid_ratio", o.valid_ratio);
  kv.reject_unused();
  if (o.seed) cfg.seed = static_cast<std::uint64_t>(*o.seed);
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.window) cfg.window_size = *o.window;
  if (o.latent) cfg.latent_dim = *o.latent;
  if (o.mode) cfg.mode = parse_mode(*o.mode);
  if (o.label_ratio != 1.0) label_ratio = o.label_ratio;

  RawSeries raw = load_series(o.data);
  const LabeledCounts counts =
      apply_label_ratio(raw, label_ratio, cfg.seed);
  const std::vector<PreparedSeries> parts =
      split(prepare(raw), {train_ratio, valid_ratio});
  const TrainResult result = train(parts[0], parts[1], cfg);
  save_model(o.model_out, result.params);
  const std::string trace_path =
      o.trace_out.empty() ? o.model_out + ".trace.csv" : o.trace_out;
  write_trace(trace_path, result, counts, label_ratio);
  std::cout << "trained " << cfg.epochs << " epochs on "
            << result.train_windows << " windows";
  if (result.best_epoch >= 0) {
    std::cout << ", kept epoch " << result.best_epoch;
  }
  std::cout << "; model: " << o.model_out << '\n';
}

void run_detect(const DetectOpts& o) {
  const ModelParams params = load_model(o.model);
  const RawSeries raw = load_series(o.data);
  const PreparedSeries prepared =
      prepare(raw, {params.data_mean, params.data_std});
  DetectConfig cfg;
  cfg.seed = o.seed;
  if (o.samples) cfg.mc_samples = *o.samples;
  if (o.mcmc_iters) cfg.mcmc_iters = *o.mcmc_iters;
  cfg.use_mcmc = !o.no_mcmc;
  cfg.use_prior = o.prior;
  save_scores(o.out, detect(prepared, params, cfg));
  std::cout << "wrote scores to " << o.out << '\n';
}

void run_evaluate(const EvaluateOpts& o) {
  const ScoreSeries scores = load_scores(o.scores);
  const RawSeries truth_raw = load_series(o.truth);
  if (truth_raw.size() != scores.scores.size() ||
      truth_raw.start_timestamp != scores.start_timestamp ||
      truth_raw.interval != scores.interval) {
    throw DataError("score and truth files cover different ranges");
  }
  GroundTruth truth{truth_raw.labels, truth_raw.missing};
  const EvalReport report = evaluate(truth, scores.scores, scores.scored);

  std::size_t evaluable = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (scores.scored[i] && !truth.missing[i]) ++evaluable;
  }
  std::size_t detected = 0;
  double delay_sum = 0.0;
  for (const auto& d : report.delays) {
    if (d) {
      ++detected;
      delay_sum += static_cast<double>(*d);
    }
  }
  std::cout << "points evaluated: " << evaluable << '\n';
  std::cout << "anomaly segments: " << report.delays.size() << " (detected "
            << detected << " at best threshold)\n";
  std::cout << "best f-score: " << format_double(report.best.best_f)
            << " at threshold " << format_double(report.best.best_threshold)
            << '\n';
  if (std::isnan(report.auc)) {
    std::cout << "auc: n/a (no anomaly points)\n";
  } else {
    std::cout << "auc: " << format_double(report.auc) << '\n';
  }
  if (detected > 0) {
    std::cout << "mean alert delay: "
              << format_double(delay_sum / static_cast<double>(detected))
              << " intervals\n";
  }
  if (!o.table.empty()) {
    std::ofstream out(o.table);
    if (!out) throw DataError("cannot write " + o.table);
    out << "threshold,precision,recall,fscore\n";
    for (const ThresholdRow& r : report.best.table) {
      out << format_double(r.threshold) << ',' << format_double(r.precision)
          << ',' << format_double(r.recall) << ',' << format_double(r.fscore)
          << '\n';
    }
  }
}

void run_ablate_cmd(const AblateOpts& o) {
  KeyValues kv = load_config(o.config);
  AblationConfig cfg;
  cfg.base = train_from(kv);
  cfg.detect = detect_from(kv);
  cfg.label_keep = kv.get_double("label_keep", o.label_ratio);
  kv.reject_unused();
  cfg.seeds = o.seeds;
  const RawSeries raw = load_series(o.data);
  const std::vector<AblationRow> rows = run_ablation(raw, cfg);
  if (!o.out.empty()) write_ablation_csv(o.out, rows);
  for (const AblationRow& r : rows) {
    std::cout << r.variant << ": best_f " << format_double(r.mean_best_f)
              << ", auc " << format_double(r.mean_auc) << '\n';
  }
}

void run_diagnose(const DiagnoseOpts& o) {
  const ModelParams params = load_model(o.model);
  const RawSeries raw = load_series(o.data);
  const PreparedSeries prepared =
      prepare(raw, {params.data_mean, params.data_std});
  const std::vector<LatentRow> rows = export_latent(prepared, params);
  write_latent_csv(o.out, rows);
  Rng rng(mix_seed(o.seed, 7));
  const double adjacent = mean_adjacent_distance(rows);
  const double random = mean_random_pair_distance(rows, o.pairs, rng);
  std::cout << "windows: " << rows.size() << '\n';
  std::cout << "mean adjacent distance: " << format_double(adjacent) << '\n';
  std::cout << "mean random-pair distance: " << format_double(random) << '\n';
  std::cout << "ratio: " << format_double(adjacent / random) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seasonal KPI anomaly detection with a windowed Gaussian VAE"};
  app.require_subcommand(1);

  SynthOpts synth_opts;
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a labeled synthetic KPI fixture");
  synth_cmd->add_option("--config", synth_opts.config,
                        "Key=value generator config");
  synth_cmd->add_option("--out", synth_opts.out, "Output CSV path")
      ->required();
  synth_cmd->add_option("--seed", synth_opts.seed, "Override generator seed");
  synth_cmd->add_option("--length", synth_opts.length,
                        "Override series length");

  TrainOpts train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train a detection model");
  train_cmd->add_option("--data", train_opts.data, "Input CSV")->required();
  train_cmd->add_option("--config", train_opts.config,
                        "Key=value training config");
  train_cmd->add_option("--model-out", train_opts.model_out,
                        "Model file path")
      ->required();
  train_cmd->add_option("--trace", train_opts.trace_out,
                        "Trace CSV path (default <model>.trace.csv)");
  train_cmd->add_option("--label-ratio", train_opts.label_ratio,
                        "Fraction of labeled points kept (0 = unsupervised)");
  train_cmd->add_option("--seed", train_opts.seed, "Override seed");
  train_cmd->add_option("--epochs", train_opts.epochs, "Override epochs");
  train_cmd->add_option("--window", train_opts.window,
                        "Override window size");
  train_cmd->add_option("--latent", train_opts.latent,
                        "Override latent dimension");
  train_cmd->add_option("--mode", train_opts.mode,
                        "donut or vae_baseline");

  DetectOpts detect_opts;
  auto* detect_cmd = app.add_subcommand("detect", "Score a series");
  detect_cmd->add_option("--data", detect_opts.data, "Input CSV")->required();
  detect_cmd->add_option("--model", detect_opts.model, "Model file")
      ->required();
  detect_cmd->add_option("--out", detect_opts.out, "Scores CSV path")
      ->required();
  detect_cmd->add_option("--seed", detect_opts.seed, "Detection seed");
  detect_cmd->add_option("--samples", detect_opts.samples,
                         "Monte Carlo samples per window");
  detect_cmd->add_option("--mcmc-iters", detect_opts.mcmc_iters,
                         "Imputation iterations");
  detect_cmd->add_flag("--no-mcmc", detect_opts.no_mcmc,
                       "Disable imputation of missing points");
  detect_cmd->add_flag("--prior", detect_opts.prior,
                       "Sample latents from the prior instead of q(z|x)");

  EvaluateOpts eval_opts;
  auto* eval_cmd =
      app.add_subcommand("evaluate", "Segment-adjusted metrics for scores");
  eval_cmd->add_option("--scores", eval_opts.scores, "Scores CSV")
      ->required();
  eval_cmd->add_option("--truth", eval_opts.truth, "Labeled data CSV")
      ->required();
  eval_cmd->add_option("--table", eval_opts.table,
                       "Write the threshold table CSV here");

  AblateOpts ablate_opts;
  auto* ablate_cmd =
      app.add_subcommand("ablate", "Train and compare technique variants");
  ablate_cmd->add_option("--data", ablate_opts.data, "Labeled data CSV")
      ->required();
  ablate_cmd->add_option("--config", ablate_opts.config,
                         "Key=value training config");
  ablate_cmd->add_option("--out", ablate_opts.out, "Result CSV path");
  ablate_cmd->add_option("--seeds", ablate_opts.seeds,
                         "Seeds to average over");
  ablate_cmd->add_option("--label-ratio", ablate_opts.label_ratio,
                         "Fraction of labeled points kept for training");

  DiagnoseOpts diag_opts;
  auto* diag_cmd =
      app.add_subcommand("diagnose", "Export per-window posteriors");
  diag_cmd->add_option("--data", diag_opts.data, "Input CSV")->required();
  diag_cmd->add_option("--model", diag_opts.model, "Model file")->required();
  diag_cmd->add_option("--out", diag_opts.out, "Latent CSV path")->required();
  diag_cmd->add_option("--pairs", diag_opts.pairs,
                       "Random pairs for the distance baseline");
  diag_cmd->add_option("--seed", diag_opts.seed, "Pair sampling seed");

  try {
    app.parse(argc, argv);
    if (synth_cmd->parsed()) run_synth(synth_opts);
    if (train_cmd->parsed()) run_train(train_opts);
    if (detect_cmd->parsed()) run_detect(detect_opts);
    if (eval_cmd->parsed()) run_evaluate(eval_opts);
    if (ablate_cmd->parsed()) run_ablate_cmd(ablate_opts);
    if (diag_cmd->parsed()) run_diagnose(diag_opts);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
