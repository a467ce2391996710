// Command-line front end: synthetic data generation, fairness-aware
// partitioning, calibration evaluation, and the benchmark sweep.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fairdex/experiment.hpp"
#include "fairdex/io.hpp"
#include "fairdex/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fairdex;

struct GridArgs {
  int rows = 32;
  int cols = 32;
  GridSpec spec() const { return GridSpec{rows, cols}; }
};

struct ClassifierArgs {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
  std::string kind = "logistic-regression";

  ClassifierSpec spec() const {
    ClassifierSpec s;
    s.kind = kind;
    s.learning_rate = learning_rate;
    s.epochs = epochs;
    s.l2 = l2;
    s.seed = seed;
    return s;
  }
};

void add_grid_options(CLI::App* cmd, GridArgs& grid) {
  cmd->add_option("--rows", grid.rows, "Base grid rows")->check(CLI::PositiveNumber);
  cmd->add_option("--cols", grid.cols, "Base grid columns")->check(CLI::PositiveNumber);
}

void add_classifier_options(CLI::App* cmd, ClassifierArgs& args) {
  cmd->add_option("--lr", args.learning_rate, "Gradient-descent learning rate");
  cmd->add_option("--epochs", args.epochs, "Gradient-descent epochs");
  cmd->add_option("--l2", args.l2, "L2 penalty (intercept unpenalized)");
  cmd->add_option("--seed,--model-seed", args.seed, "Classifier seed");
  cmd->add_option("--model", args.kind, "Classifier kind (default logistic-regression)");
}

// "rmin:rmax:cmin:cmax:shift"
BiasBlob parse_blob(const std::string& text) {
  BiasBlob blob;
  std::vector<std::string> parts;
  std::string field;
  std::stringstream ss(text);
  while (std::getline(ss, field, ':')) parts.push_back(field);
  if (parts.size() != 5)
    throw CLI::ValidationError("--blob expects rmin:rmax:cmin:cmax:shift");
  blob.rect.row_min = std::stoi(parts[0]);
  blob.rect.row_max = std::stoi(parts[1]);
  blob.rect.col_min = std::stoi(parts[2]);
  blob.rect.col_max = std::stoi(parts[3]);
  blob.label_shift = std::stod(parts[4]);
  return blob;
}

// "0-19" or "0,3,7"
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dash = text.find('-');
  if (dash != std::string::npos) {
    const auto lo = std::stoull(text.substr(0, dash));
    const auto hi = std::stoull(text.substr(dash + 1));
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) seeds.push_back(std::stoull(field));
  return seeds;
}

std::map<int, double> parse_label_thresholds(const std::vector<std::string>& entries) {
  std::map<int, double> out;
  for (const std::string& entry : entries) {
    const auto colon = entry.find(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("--label-threshold expects task:value");
    out[std::stoi(entry.substr(0, colon))] = std::stod(entry.substr(colon + 1));
  }
  return out;
}

int run_synth(const GridArgs& grid, const std::string& out_path, int records,
              int features, int tasks, const std::vector<std::string>& blob_args,
              bool no_default_blobs, double noise_sd, std::uint64_t seed) {
  SynthConfig config = default_synth_config(seed);
  config.grid = grid.spec();
  config.n_records = records;
  config.n_features = features;
  config.m_tasks = tasks;
  config.noise_sd = noise_sd;
  if (!blob_args.empty()) {
    config.bias_blobs.clear();
    for (const std::string& text : blob_args) config.bias_blobs.push_back(parse_blob(text));
  } else if (no_default_blobs || !(config.grid == GridSpec{32, 32})) {
    // The built-in blob rectangles are meaningful only on the default grid.
    config.bias_blobs.clear();
  }
  const Dataset d = generate(config);
  write_dataset_csv(d, out_path);
  std::cout << "wrote " << d.records.size() << " records to " << out_path << "\n";
  return 0;
}

int run_partition(const GridArgs& grid, const ClassifierArgs& classifier,
                  const std::string& data_path, const std::string& algorithm_arg,
                  int height, int task, const std::vector<double>& alpha,
                  bool normalized_multi, const std::string& out_dir,
                  const std::vector<std::string>& threshold_args) {
  IngestOptions ingest;
  ingest.label_thresholds = parse_label_thresholds(threshold_args);
  const Dataset d = read_dataset_csv(data_path, grid.spec(), ingest);
  const Algorithm algorithm = parse_algorithm(algorithm_arg);

  FairTree tree;
  switch (algorithm) {
    case Algorithm::Fair:
      tree = fair_kdtree(d, classifier.spec(), height, task);
      break;
    case Algorithm::Iterative:
      tree = iterative_fair_kdtree(d, classifier.spec(), height, task);
      break;
    case Algorithm::Multi: {
      TaskWeights weights;
      if (alpha.empty()) {
        weights.alpha.assign(static_cast<std::size_t>(d.task_count()),
                             1.0 / d.task_count());
      } else {
        weights.alpha = alpha;
      }
      BuildOptions options;
      options.normalized_multi_objective = normalized_multi;
      tree = multi_objective_fair_kdtree(d, classifier.spec(), height, weights, options);
      break;
    }
    case Algorithm::Median:
      tree = median_kdtree(d, height);
      break;
    default:
      throw CLI::ValidationError("partition supports fair|iterative|multi|median");
  }

  fs::create_directories(out_dir);
  const Partitioning partitioning = tree.leaf_partitioning();
  write_partitioning_csv(partitioning, (fs::path(out_dir) / "partitioning.csv").string());
  write_partitioning_json(partitioning, d.grid,
                          (fs::path(out_dir) / "partitioning.json").string());
  write_tree_json(tree, (fs::path(out_dir) / "tree.json").string());
  std::cout << "height " << height << ": " << partitioning.region_count()
            << " neighborhoods, " << tree.stats.trainings << " trainings\n";
  return 0;
}

int run_evaluate(const GridArgs& grid, const ClassifierArgs& classifier,
                 const std::string& data_path, const std::string& partitioning_path,
                 int task, int bins, double threshold, const std::string& out_path,
                 const std::vector<std::string>& threshold_args) {
  IngestOptions ingest;
  ingest.label_thresholds = parse_label_thresholds(threshold_args);
  const Dataset d = read_dataset_csv(data_path, grid.spec(), ingest);
  const Partitioning partitioning = read_partitioning_csv(partitioning_path, grid.spec());
  const ScoreSet scores = train_and_score(encode_features(d, partitioning),
                                          task_labels(d, task), {}, classifier.spec());
  const CalibrationReport report =
      calibration_report(d, scores, partitioning, task, bins, threshold);
  ReportMeta meta;
  meta.algorithm = "evaluate";
  meta.height = 0;
  meta.seed = classifier.seed;
  meta.split_fraction = 1.0;
  meta.role = "full";
  write_report_json(report, meta, out_path);
  std::cout << "ence " << format_double(report.ence) << "  ece "
            << format_double(report.ece) << "  accuracy "
            << format_double(report.accuracy) << "\n";
  return 0;
}

struct SweepRow {
  std::string algorithm;
  int height = 0;
  std::uint64_t seed = 0;
  HeightResult result;
};

int run_benchmark(const GridArgs& grid, const ClassifierArgs& classifier,
                  const std::string& data_path, bool use_synth, int records,
                  int features, int tasks, const std::vector<std::string>& blob_args,
                  double noise_sd, const std::string& algorithms_arg,
                  const std::vector<int>& heights, const std::string& seeds_arg,
                  int task, const std::vector<double>& alpha, bool normalized_multi,
                  int bins, double threshold, double split_fraction,
                  const std::string& fixed_path, bool timing,
                  const std::string& out_dir,
                  const std::vector<std::string>& threshold_args) {
  std::vector<std::string> algorithm_names;
  {
    std::stringstream ss(algorithms_arg);
    std::string field;
    while (std::getline(ss, field, ',')) algorithm_names.push_back(field);
  }
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_arg);
  if (algorithm_names.empty() || seeds.empty())
    throw CLI::ValidationError("benchmark needs algorithms and seeds");

  IngestOptions ingest;
  ingest.label_thresholds = parse_label_thresholds(threshold_args);

  std::vector<SweepRow> merged;
  for (const std::string& name : algorithm_names) {
    const Algorithm algorithm = parse_algorithm(name);
    for (const std::uint64_t seed : seeds) {
      Dataset d;
      if (use_synth) {
        SynthConfig config = default_synth_config(seed);
        config.grid = grid.spec();
        config.n_records = records;
        config.n_features = features;
        config.m_tasks = tasks;
        config.noise_sd = noise_sd;
        if (!blob_args.empty()) {
          config.bias_blobs.clear();
          for (const std::string& text : blob_args)
            config.bias_blobs.push_back(parse_blob(text));
        } else if (!(config.grid == GridSpec{32, 32})) {
          config.bias_blobs.clear();
        }
        d = generate(config);
      } else {
        d = read_dataset_csv(data_path, grid.spec(), ingest);
      }

      ExperimentConfig cfg;
      cfg.algorithm = algorithm;
      cfg.heights = heights;
      cfg.task = task;
      if (!alpha.empty()) cfg.alpha.alpha = alpha;
      cfg.classifier = classifier.spec();
      cfg.ece_bins = bins;
      cfg.class_threshold = threshold;
      cfg.split_fraction = split_fraction;
      cfg.split_seed = seed;
      cfg.normalized_multi_objective = normalized_multi;
      cfg.fixed_partitioning_path = fixed_path;
      cfg.emit_timing = timing;
      cfg.output_dir =
          (fs::path(out_dir) / name / ("seed_" + std::to_string(seed))).string();

      const std::vector<HeightResult> rows = run_experiment(d, cfg);
      for (const HeightResult& row : rows)
        merged.push_back(SweepRow{name, row.height, seed, row});
    }
  }

  std::sort(merged.begin(), merged.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
    if (a.height != b.height) return a.height < b.height;
    return a.seed < b.seed;
  });
  fs::create_directories(out_dir);
  const std::string sweep_path = (fs::path(out_dir) / "results_sweep.csv").string();
  std::ofstream out(sweep_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + sweep_path);
  out << "algorithm,height,seed,ENCE_train,ENCE_test,ECE,accuracy,runtime_ms,"
         "retrain_count\n";
  for (const SweepRow& row : merged) {
    out << row.algorithm << "," << row.height << "," << row.seed << ","
        << format_double(row.result.ence_train) << ","
        << format_double(row.result.ence_test) << "," << format_double(row.result.ece)
        << "," << format_double(row.result.accuracy) << ","
        << format_double(row.result.runtime_ms) << "," << row.result.retrain_count
        << "\n";
  }
  std::cout << "wrote " << merged.size() << " sweep rows to " << sweep_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware KD-tree partitioning of gridded spatial data"};
  app.require_subcommand(1);

  // synth ----------------------------------------------------------------
  GridArgs synth_grid;
  std::string synth_out;
  int synth_records = 2000, synth_features = 6, synth_tasks = 1;
  std::vector<std::string> synth_blobs;
  bool synth_no_default_blobs = false;
  double synth_noise = 0.0;
  std::uint64_t synth_seed = 0;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset CSV");
  add_grid_options(synth, synth_grid);
  synth->add_option("--out", synth_out, "Output CSV path")->required();
  synth->add_option("--records", synth_records, "Record count");
  synth->add_option("--features", synth_features, "Numeric feature count");
  synth->add_option("--tasks", synth_tasks, "Binary task count");
  synth->add_option("--blob", synth_blobs,
                    "Bias blob rmin:rmax:cmin:cmax:shift (repeatable)");
  synth->add_flag("--no-default-blobs", synth_no_default_blobs,
                  "Drop the built-in 32x32 blob pair");
  synth->add_option("--noise-sd", synth_noise, "Latent score noise");
  synth->add_option("--seed", synth_seed, "Generator seed");

  // partition --------------------------------------------------------------
  GridArgs part_grid;
  ClassifierArgs part_classifier;
  std::string part_data, part_algorithm = "fair", part_out = "partition_out";
  int part_height = 4, part_task = 0;
  std::vector<double> part_alpha;
  bool part_normalized = false;
  std::vector<std::string> part_thresholds;
  CLI::App* partition =
      app.add_subcommand("partition", "Build a partitioning on a dataset");
  add_grid_options(partition, part_grid);
  add_classifier_options(partition, part_classifier);
  partition->add_option("--data", part_data, "Dataset CSV")->required();
  partition->add_option("--algorithm", part_algorithm, "fair|iterative|multi|median");
  partition->add_option("--height", part_height, "Tree height");
  partition->add_option("--task", part_task, "Task index");
  partition->add_option("--alpha", part_alpha, "Multi-objective task weights")->delimiter(',');
  partition->add_flag("--normalized-multi-objective", part_normalized,
                      "Use the sum-difference multi-task objective");
  partition->add_option("--label-threshold", part_thresholds,
                        "task:value for continuous outcome columns (repeatable)");
  partition->add_option("--out-dir", part_out, "Output directory");

  // evaluate ---------------------------------------------------------------
  GridArgs eval_grid;
  ClassifierArgs eval_classifier;
  std::string eval_data, eval_partitioning, eval_out = "report.json";
  int eval_task = 0, eval_bins = 15;
  double eval_threshold = 0.5;
  std::vector<std::string> eval_thresholds;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Evaluate calibration over a partitioning");
  add_grid_options(evaluate, eval_grid);
  add_classifier_options(evaluate, eval_classifier);
  evaluate->add_option("--data", eval_data, "Dataset CSV")->required();
  evaluate->add_option("--partitioning", eval_partitioning, "Partitioning CSV")
      ->required();
  evaluate->add_option("--task", eval_task, "Task index");
  evaluate->add_option("--bins", eval_bins, "ECE bin count");
  evaluate->add_option("--threshold", eval_threshold, "Classification threshold");
  evaluate->add_option("--label-threshold", eval_thresholds,
                       "task:value for continuous outcome columns (repeatable)");
  evaluate->add_option("--out", eval_out, "Report JSON path");

  // benchmark ----------------------------------------------------------------
  GridArgs bench_grid;
  ClassifierArgs bench_classifier;
  std::string bench_data, bench_algorithms = "fair,iterative,median";
  std::string bench_seeds = "0-19", bench_out = "benchmark_out", bench_fixed;
  bool bench_synth = false, bench_normalized = false, bench_timing = false;
  int bench_records = 2000, bench_features = 6, bench_tasks = 1;
  std::vector<std::string> bench_blobs;
  double bench_noise = 0.0;
  std::vector<int> bench_heights{4, 6, 8};
  int bench_task = 0, bench_bins = 15;
  std::vector<double> bench_alpha;
  double bench_threshold = 0.5, bench_split = 0.8;
  std::vector<std::string> bench_thresholds;
  CLI::App* benchmark =
      app.add_subcommand("benchmark", "Height/seed sweep over algorithms");
  add_grid_options(benchmark, bench_grid);
  add_classifier_options(benchmark, bench_classifier);
  benchmark->add_option("--data", bench_data, "Dataset CSV (fixed across seeds)");
  benchmark->add_flag("--synth", bench_synth, "Generate a synthetic dataset per seed");
  benchmark->add_option("--records", bench_records, "Synthetic record count");
  benchmark->add_option("--features", bench_features, "Synthetic feature count");
  benchmark->add_option("--tasks", bench_tasks, "Synthetic task count");
  benchmark->add_option("--blob", bench_blobs,
                        "Synthetic bias blob rmin:rmax:cmin:cmax:shift (repeatable)");
  benchmark->add_option("--noise-sd", bench_noise, "Synthetic latent noise");
  benchmark->add_option("--algorithms", bench_algorithms,
                        "Comma list of fair|iterative|multi|median|reweight-grid|fixed");
  benchmark->add_option("--heights", bench_heights, "Tree heights to sweep")->delimiter(',');
  benchmark->add_option("--seeds", bench_seeds, "Seed list 0,1,2 or range 0-19");
  benchmark->add_option("--task", bench_task, "Task index");
  benchmark->add_option("--alpha", bench_alpha, "Multi-objective task weights")->delimiter(',');
  benchmark->add_flag("--normalized-multi-objective", bench_normalized,
                      "Use the sum-difference multi-task objective");
  benchmark->add_option("--bins", bench_bins, "ECE bin count");
  benchmark->add_option("--threshold", bench_threshold, "Classification threshold");
  benchmark->add_option("--split-fraction", bench_split, "Training share");
  benchmark->add_option("--fixed-partitioning", bench_fixed,
                        "Partitioning CSV for the fixed baseline");
  benchmark->add_flag("--timing", bench_timing,
                      "Record wall-clock runtime_ms (breaks byte determinism)");
  benchmark->add_option("--label-threshold", bench_thresholds,
                        "task:value for continuous outcome columns (repeatable)");
  benchmark->add_option("--out-dir", bench_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed())
      return run_synth(synth_grid, synth_out, synth_records, synth_features,
                       synth_tasks, synth_blobs, synth_no_default_blobs, synth_noise,
                       synth_seed);
    if (partition->parsed())
      return run_partition(part_grid, part_classifier, part_data, part_algorithm,
                           part_height, part_task, part_alpha, part_normalized,
                           part_out, part_thresholds);
    if (evaluate->parsed())
      return run_evaluate(eval_grid, eval_classifier, eval_data, eval_partitioning,
                          eval_task, eval_bins, eval_threshold, eval_out,
                          eval_thresholds);
    if (benchmark->parsed()) {
      if (!bench_synth && bench_data.empty())
        throw CLI::ValidationError("benchmark needs --data or --synth");
      return run_benchmark(bench_grid, bench_classifier, bench_data, bench_synth,
                           bench_records, bench_features, bench_tasks, bench_blobs,
                           bench_noise, bench_algorithms, bench_heights, bench_seeds,
                           bench_task, bench_alpha, bench_normalized, bench_bins,
                           bench_threshold, bench_split, bench_fixed, bench_timing,
                           bench_out, bench_thresholds);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
