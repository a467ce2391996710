#include "fairdex/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "fairdex/io.hpp"
#include "fairdex/rng.hpp"

namespace fairdex {

namespace {

namespace fs = std::filesystem;

Region whole_grid(const GridSpec& g) { return Region{0, g.rows - 1, 0, g.cols - 1}; }

struct BuiltPartitioning {
  Partitioning partitioning;
  std::optional<FairTree> tree;
  int construction_trainings = 0;
};

TaskWeights effective_alpha(const ExperimentConfig& cfg, int task_count) {
  if (!cfg.alpha.alpha.empty()) return cfg.alpha;
  TaskWeights w;
  w.alpha.assign(static_cast<std::size_t>(task_count),
                 1.0 / static_cast<double>(task_count));
  return w;
}

BuiltPartitioning build_partitioning(const Dataset& train, const ExperimentConfig& cfg,
                                     int height) {
  BuiltPartitioning out;
  switch (cfg.algorithm) {
    case Algorithm::Fair: {
      FairTree tree = fair_kdtree(train, cfg.classifier, height, cfg.task);
      out.construction_trainings = tree.stats.trainings;
      out.partitioning = tree.leaf_partitioning();
      out.tree = std::move(tree);
      break;
    }
    case Algorithm::Iterative: {
      FairTree tree = iterative_fair_kdtree(train, cfg.classifier, height, cfg.task);
      out.construction_trainings = tree.stats.trainings;
      out.partitioning = tree.leaf_partitioning();
      out.tree = std::move(tree);
      break;
    }
    case Algorithm::Multi: {
      BuildOptions options;
      options.normalized_multi_objective = cfg.normalized_multi_objective;
      FairTree tree = multi_objective_fair_kdtree(
          train, cfg.classifier, height, effective_alpha(cfg, train.task_count()),
          options);
      out.construction_trainings = tree.stats.trainings;
      out.partitioning = tree.leaf_partitioning();
      out.tree = std::move(tree);
      break;
    }
    case Algorithm::Median: {
      FairTree tree = median_kdtree(train, height);
      out.partitioning = tree.leaf_partitioning();
      out.tree = std::move(tree);
      break;
    }
    case Algorithm::ReweightGrid:
      out.partitioning = uniform_block_partitioning(train.grid, height);
      break;
    case Algorithm::Fixed:
      if (cfg.fixed_partitioning_path.empty())
        throw std::invalid_argument("fixed algorithm needs a partitioning file");
      out.partitioning = fixed_partition(cfg.fixed_partitioning_path, train.grid);
      break;
  }
  return out;
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  if (name == "fair") return Algorithm::Fair;
  if (name == "iterative") return Algorithm::Iterative;
  if (name == "multi") return Algorithm::Multi;
  if (name == "median") return Algorithm::Median;
  if (name == "reweight-grid") return Algorithm::ReweightGrid;
  if (name == "fixed") return Algorithm::Fixed;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Fair: return "fair";
    case Algorithm::Iterative: return "iterative";
    case Algorithm::Multi: return "multi";
    case Algorithm::Median: return "median";
    case Algorithm::ReweightGrid: return "reweight-grid";
    case Algorithm::Fixed: return "fixed";
  }
  return "unknown";
}

TrainTestSplit split_dataset(std::size_t n, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw std::invalid_argument("split fraction must lie in (0,1)");
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  SeededRng rng(seed);
  rng.shuffle(indices);
  const auto train_count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n)));
  TrainTestSplit split;
  split.train_indices.assign(indices.begin(),
                             indices.begin() + static_cast<std::ptrdiff_t>(train_count));
  split.test_indices.assign(indices.begin() + static_cast<std::ptrdiff_t>(train_count),
                            indices.end());
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  return split;
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.grid = d.grid;
  out.feature_names = d.feature_names;
  out.task_names = d.task_names;
  out.records.reserve(indices.size());
  for (std::size_t i : indices) out.records.push_back(d.records[i]);
  return out;
}

Partitioning fixed_partition(const std::string& path, const GridSpec& grid) {
  return read_partitioning_csv(path, grid);
}

long long block_count_for_height(int height) {
  const int half = height / 2;
  return (1LL << half) * (1LL << (half + height % 2));
}

Partitioning uniform_block_partitioning(const GridSpec& grid, int height) {
  if (height < 0) throw std::invalid_argument("height must be non-negative");
  int row_blocks = 1 << (height / 2);
  int col_blocks = 1 << (height / 2 + height % 2);
  row_blocks = std::min(row_blocks, grid.rows);
  col_blocks = std::min(col_blocks, grid.cols);
  Partitioning p;
  for (int i = 0; i < row_blocks; ++i) {
    const int r0 = static_cast<int>(static_cast<long long>(i) * grid.rows / row_blocks);
    const int r1 =
        static_cast<int>(static_cast<long long>(i + 1) * grid.rows / row_blocks) - 1;
    for (int j = 0; j < col_blocks; ++j) {
      const int c0 = static_cast<int>(static_cast<long long>(j) * grid.cols / col_blocks);
      const int c1 =
          static_cast<int>(static_cast<long long>(j + 1) * grid.cols / col_blocks) - 1;
      p.regions.push_back(Region{r0, r1, c0, c1});
    }
  }
  return p;
}

std::pair<ScoreSet, Partitioning> reweight_grid_baseline(const Dataset& d,
                                                         const ClassifierSpec& spec,
                                                         const Partitioning& blocks,
                                                         int task) {
  const ValidationResult valid = validate_partitioning(blocks, d.grid);
  if (!valid) throw std::invalid_argument("invalid block partitioning: " + valid.message);
  const std::vector<int> groups = assign_record_regions(d, blocks);
  const InstanceWeights weights = reweight(d, groups, task);
  const FeatureMatrix m = encode_features(d, blocks);
  ScoreSet scores = train_and_score(m, task_labels(d, task), weights, spec);
  scores.task_index = task;
  return {std::move(scores), blocks};
}

void write_results_csv(const std::vector<HeightResult>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "algorithm,height,ENCE_train,ENCE_test,ECE,accuracy,runtime_ms,retrain_count\n";
  for (const HeightResult& r : rows) {
    out << r.algorithm << "," << r.height << "," << format_double(r.ence_train) << ","
        << format_double(r.ence_test) << "," << format_double(r.ece) << ","
        << format_double(r.accuracy) << "," << format_double(r.runtime_ms) << ","
        << r.retrain_count << "\n";
  }
}

std::vector<HeightResult> run_experiment(const Dataset& d, const ExperimentConfig& cfg) {
  validate_dataset(d);
  if (cfg.task < 0 || cfg.task >= d.task_count())
    throw std::invalid_argument("configured task out of range");
  for (int h : cfg.heights)
    if (h < 0) throw std::invalid_argument("heights must be non-negative");
  if (cfg.algorithm == Algorithm::Multi)
    validate_task_weights(effective_alpha(cfg, d.task_count()), d.task_count());

  const TrainTestSplit split =
      split_dataset(d.records.size(), cfg.split_fraction, cfg.split_seed);
  if (split.train_indices.empty() || split.test_indices.empty())
    throw std::invalid_argument("train/test split left one side empty");
  const Dataset train = subset(d, split.train_indices);
  const Dataset test = subset(d, split.test_indices);

  if (!cfg.output_dir.empty()) fs::create_directories(cfg.output_dir);

  std::vector<HeightResult> rows;
  for (int height : cfg.heights) {
    const auto t0 = std::chrono::steady_clock::now();

    const BuiltPartitioning built = build_partitioning(train, cfg, height);
    const Partitioning& partitioning = built.partitioning;

    // Final model: neighborhoods updated to the new partitioning, trained on
    // the training split only. The reweighting baseline's weighted fit is
    // its final model.
    ScoreSet train_scores;
    ScoreSet test_scores;
    int total_trainings = built.construction_trainings;
    const FeatureEncoder encoder = FeatureEncoder::fit(train, partitioning);
    if (cfg.algorithm == Algorithm::ReweightGrid) {
      const std::vector<int> groups = assign_record_regions(train, partitioning);
      const InstanceWeights weights = reweight(train, groups, cfg.task);
      const LogisticModel model = fit_logistic(
          encoder.transform(train), task_labels(train, cfg.task), weights, cfg.classifier);
      train_scores.scores = model.score(encoder.transform(train));
      test_scores.scores = model.score(encoder.transform(test));
      total_trainings += 1;
    } else {
      const LogisticModel model =
          fit_logistic(encoder.transform(train), task_labels(train, cfg.task), {},
                       cfg.classifier);
      train_scores.scores = model.score(encoder.transform(train));
      test_scores.scores = model.score(encoder.transform(test));
      total_trainings += 1;
    }
    train_scores.task_index = cfg.task;
    test_scores.task_index = cfg.task;

    const CalibrationReport train_report = calibration_report(
        train, train_scores, partitioning, cfg.task, cfg.ece_bins, cfg.class_threshold);
    const CalibrationReport test_report = calibration_report(
        test, test_scores, partitioning, cfg.task, cfg.ece_bins, cfg.class_threshold);

    const auto t1 = std::chrono::steady_clock::now();
    HeightResult row;
    row.algorithm = algorithm_name(cfg.algorithm);
    row.height = height;
    row.ence_train = train_report.ence;
    row.ence_test = test_report.ence;
    row.ece = test_report.ece;
    row.accuracy = test_report.accuracy;
    row.runtime_ms =
        cfg.emit_timing
            ? std::chrono::duration<double, std::milli>(t1 - t0).count()
            : 0.0;
    row.retrain_count = total_trainings;
    rows.push_back(row);

    if (!cfg.output_dir.empty()) {
      const fs::path dir = fs::path(cfg.output_dir) / ("height_" + std::to_string(height));
      fs::create_directories(dir);
      write_partitioning_csv(partitioning, (dir / "partitioning.csv").string());
      write_partitioning_json(partitioning, d.grid, (dir / "partitioning.json").string());
      if (built.tree) write_tree_json(*built.tree, (dir / "tree.json").string());
      ReportMeta meta;
      meta.algorithm = row.algorithm;
      meta.height = height;
      meta.seed = cfg.split_seed;
      meta.split_fraction = cfg.split_fraction;
      meta.role = "train";
      write_report_json(train_report, meta, (dir / "report_train.json").string());
      meta.role = "test";
      write_report_json(test_report, meta, (dir / "report_test.json").string());
    }
  }

  if (!cfg.output_dir.empty())
    write_results_csv(rows, (fs::path(cfg.output_dir) / "results.csv").string());
  return rows;
}

}  // namespace fairdex
