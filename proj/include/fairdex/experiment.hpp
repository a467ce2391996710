#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairdex/calibration.hpp"
#include "fairdex/classifier.hpp"
#include "fairdex/fair_tree.hpp"
#include "fairdex/spatial.hpp"

namespace fairdex {

enum class Algorithm { Fair, Iterative, Multi, Median, ReweightGrid, Fixed };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm a);

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::Fair;
  std::vector<int> heights{4};
  int task = 0;                 // primary task for single-task algorithms
  TaskWeights alpha;            // multi-objective weights; empty = uniform
  ClassifierSpec classifier;
  int ece_bins = 15;
  double class_threshold = 0.5;
  double split_fraction = 0.8;  // train share, seeded shuffle
  std::uint64_t split_seed = 0;
  bool normalized_multi_objective = false;
  std::string fixed_partitioning_path;  // Algorithm::Fixed only
  std::string output_dir;               // empty: compute without writing files
  bool emit_timing = false;             // keep runtime_ms at 0 unless asked
};

// One results row per height, exactly the columns of the results CSV.
struct HeightResult {
  std::string algorithm;
  int height = 0;
  double ence_train = 0.0;
  double ence_test = 0.0;
  double ece = 0.0;       // test split
  double accuracy = 0.0;  // test split
  double runtime_ms = 0.0;
  int retrain_count = 0;  // classifier fits for this row, final model included
};

// Deterministic 80/20-style shuffle split; both sides keep dataset order.
struct TrainTestSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};
TrainTestSplit split_dataset(std::size_t n, double fraction, std::uint64_t seed);
Dataset subset(const Dataset& d, const std::vector<std::size_t>& indices);

// Runs the height sweep: per height, builds the configured partitioning on
// the training split, retrains the final model with those neighborhoods,
// and writes the per-height reports plus a results CSV when output_dir is
// set.
std::vector<HeightResult> run_experiment(const Dataset& d, const ExperimentConfig& cfg);

// Static baseline partitioning loaded from a rectangle CSV and validated.
Partitioning fixed_partition(const std::string& path, const GridSpec& grid);

// Reweighting baseline: instance weights computed with the blocks as groups,
// one weighted training, metrics over the block partitioning.
std::pair<ScoreSet, Partitioning> reweight_grid_baseline(const Dataset& d,
                                                         const ClassifierSpec& spec,
                                                         const Partitioning& blocks,
                                                         int task);

// Uniform tiling whose block count matches a height-h tree:
// 4^(h/2) * 2^(h mod 2), extra factor on the column axis for odd h.
Partitioning uniform_block_partitioning(const GridSpec& grid, int height);
long long block_count_for_height(int height);

void write_results_csv(const std::vector<HeightResult>& rows, const std::string& path);

}  // namespace fairdex
