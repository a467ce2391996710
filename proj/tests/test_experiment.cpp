#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "fairdex/experiment.hpp"
#include "fairdex/io.hpp"
#include "fairdex/synth.hpp"
#include "helpers.hpp"

using namespace fairdex;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fairdex_exp_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ClassifierSpec fast_spec() {
  ClassifierSpec spec;
  spec.epochs = 60;
  return spec;
}

SynthConfig small_synth(std::uint64_t seed) {
  SynthConfig c = default_synth_config(seed);
  c.grid = {16, 16};
  c.n_records = 300;
  c.bias_blobs = {{Region{2, 7, 2, 7}, 0.35}, {Region{9, 14, 9, 14}, -0.35}};
  return c;
}

}  // namespace

TEST_CASE("split_dataset is a deterministic disjoint partition of the records") {
  const TrainTestSplit a = split_dataset(100, 0.8, 3);
  const TrainTestSplit b = split_dataset(100, 0.8, 3);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.test_indices == b.test_indices);
  CHECK(a.train_indices.size() == 80);
  CHECK(a.test_indices.size() == 20);
  std::set<std::size_t> all(a.train_indices.begin(), a.train_indices.end());
  for (std::size_t i : a.test_indices) CHECK(all.insert(i).second);
  CHECK(all.size() == 100);
  const TrainTestSplit c = split_dataset(100, 0.8, 4);
  CHECK(a.train_indices != c.train_indices);
  CHECK_THROWS_AS(split_dataset(100, 0.0, 1), std::invalid_argument);
}

TEST_CASE("median at height 0 reports the overall miscalibration") {
  const Dataset d = generate(small_synth(1));
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::Median;
  cfg.heights = {0};
  cfg.classifier = fast_spec();
  const std::vector<HeightResult> rows = run_experiment(d, cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].height == 0);
  CHECK(rows[0].retrain_count == 1);

  // Recompute the overall |e - o| of the same final model directly.
  const TrainTestSplit split = split_dataset(d.records.size(), 0.8, 0);
  const Dataset train = subset(d, split.train_indices);
  const Partitioning whole{{Region{0, d.grid.rows - 1, 0, d.grid.cols - 1}}};
  const ScoreSet scores = train_and_score(encode_features(train, whole),
                                          task_labels(train, 0), {}, fast_spec());
  double e = 0.0, o = 0.0;
  for (std::size_t i = 0; i < train.records.size(); ++i) {
    e += scores.scores[i];
    o += train.records[i].labels[0];
  }
  const double n = static_cast<double>(train.records.size());
  CHECK(rows[0].ence_train == doctest::Approx(std::abs(e / n - o / n)).epsilon(1e-12));
}

TEST_CASE("identical configurations produce byte-identical outputs") {
  const Dataset d = generate(small_synth(2));
  TempDir tmp;
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::Fair;
  cfg.heights = {2, 3};
  cfg.classifier = fast_spec();
  cfg.output_dir = tmp.file("a");
  run_experiment(d, cfg);
  cfg.output_dir = tmp.file("b");
  run_experiment(d, cfg);
  for (const char* rel :
       {"results.csv", "height_2/partitioning.csv", "height_2/report_train.json",
        "height_3/report_test.json", "height_3/tree.json"}) {
    const std::string a = read_file((fs::path(tmp.file("a")) / rel).string());
    const std::string b = read_file((fs::path(tmp.file("b")) / rel).string());
    CHECK(a == b);
    CHECK_FALSE(a.empty());
  }
}

TEST_CASE("emitted partitionings pass validation on re-ingestion") {
  const Dataset d = generate(small_synth(3));
  TempDir tmp;
  for (Algorithm algorithm :
       {Algorithm::Fair, Algorithm::Iterative, Algorithm::Median,
        Algorithm::ReweightGrid}) {
    ExperimentConfig cfg;
    cfg.algorithm = algorithm;
    cfg.heights = {3};
    cfg.classifier = fast_spec();
    cfg.output_dir = tmp.file(algorithm_name(algorithm));
    run_experiment(d, cfg);
    const std::string path =
        (fs::path(cfg.output_dir) / "height_3" / "partitioning.csv").string();
    CHECK_NOTHROW(read_partitioning_csv(path, d.grid));
  }
}

TEST_CASE("test metrics never touch training records") {
  const Dataset d = generate(small_synth(4));
  const TrainTestSplit split = split_dataset(d.records.size(), 0.8, 17);
  std::set<std::size_t> train(split.train_indices.begin(), split.train_indices.end());
  for (std::size_t i : split.test_indices) CHECK(train.count(i) == 0);
  const Dataset test = subset(d, split.test_indices);
  for (const Record& r : test.records) {
    bool in_train = false;
    for (std::size_t i : split.train_indices)
      if (d.records[i].id == r.id) in_train = true;
    CHECK_FALSE(in_train);
  }
}

TEST_CASE("fixed_partition accepts whole-grid and block tilings") {
  TempDir tmp;
  const GridSpec g{32, 32};
  {
    Partitioning whole{{Region{0, 31, 0, 31}}};
    write_partitioning_csv(whole, tmp.file("whole.csv"));
    CHECK(fixed_partition(tmp.file("whole.csv"), g).region_count() == 1);
  }
  {
    Partitioning blocks;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        blocks.regions.push_back(Region{2 * i, 2 * i + 1, 2 * j, 2 * j + 1});
    write_partitioning_csv(blocks, tmp.file("blocks.csv"));
    CHECK(fixed_partition(tmp.file("blocks.csv"), g).region_count() == 256);
  }
  {
    Partitioning missing;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        if (i == 5 && j == 7) continue;
        missing.regions.push_back(Region{2 * i, 2 * i + 1, 2 * j, 2 * j + 1});
      }
    write_partitioning_csv(missing, tmp.file("missing.csv"));
    CHECK_THROWS_WITH_AS(fixed_partition(tmp.file("missing.csv"), g),
                         doctest::Contains("(10,14)"), std::runtime_error);
  }
}

TEST_CASE("block tiling matches the height formula") {
  CHECK(block_count_for_height(0) == 1);
  CHECK(block_count_for_height(1) == 2);
  CHECK(block_count_for_height(2) == 4);
  CHECK(block_count_for_height(5) == 32);
  CHECK(block_count_for_height(6) == 64);
  for (int h = 0; h <= 8; ++h) {
    const Partitioning p = uniform_block_partitioning(GridSpec{32, 32}, h);
    CHECK(p.region_count() == block_count_for_height(h));
    CHECK(validate_partitioning(p, GridSpec{32, 32}).ok);
  }
  // Clamped when the grid runs out of cells on an axis.
  const Partitioning clamped = uniform_block_partitioning(GridSpec{4, 4}, 6);
  CHECK(validate_partitioning(clamped, GridSpec{4, 4}).ok);
  CHECK(clamped.region_count() == 16);
}

TEST_CASE("reweight baseline with group-independent labels equals unweighted") {
  // Identical (g,y) counts in every block make all weights exactly 1, so the
  // weighted and unweighted trainings follow the same arithmetic.
  Dataset d;
  d.grid = {2, 2};
  d.feature_names = {"f_1"};
  d.task_names = {"label_1"};
  int id = 0;
  SeededRng rng(7);
  for (int row = 0; row < 2; ++row)
    for (int col = 0; col < 2; ++col)
      for (int y = 0; y < 2; ++y)
        for (int copy = 0; copy < 3; ++copy)
          d.records.push_back({id++, {row, col}, {rng.normal()},
                               {static_cast<std::uint8_t>(y)}});
  const Partitioning blocks = uniform_block_partitioning(d.grid, 2);
  const auto [weighted_scores, part] =
      reweight_grid_baseline(d, fast_spec(), blocks, 0);
  const ScoreSet unweighted = train_and_score(encode_features(d, blocks),
                                              task_labels(d, 0), {}, fast_spec());
  REQUIRE(weighted_scores.scores.size() == unweighted.scores.size());
  for (std::size_t i = 0; i < unweighted.scores.size(); ++i)
    CHECK(weighted_scores.scores[i] == unweighted.scores[i]);
  CHECK(part == blocks);
}

TEST_CASE("reweight baseline equalizes the weighted positive rate on biased data") {
  const Dataset d = generate(small_synth(6));
  const Partitioning blocks = uniform_block_partitioning(d.grid, 4);
  const std::vector<int> groups = assign_record_regions(d, blocks);
  const InstanceWeights w = reweight(d, groups, 0);
  double total_w = 0.0, total_pos = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    total_w += w[i];
    if (d.records[i].labels[0]) total_pos += w[i];
  }
  const double overall = total_pos / total_w;
  for (int g = 0; g < blocks.region_count(); ++g) {
    double gw = 0.0, gp = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (groups[i] != g) continue;
      gw += w[i];
      if (d.records[i].labels[0]) gp += w[i];
    }
    if (gw > 0.0) CHECK(gp / gw == doctest::Approx(overall).epsilon(1e-9));
  }
}

TEST_CASE("runtime stays zero unless timing is requested") {
  const Dataset d = generate(small_synth(8));
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::Median;
  cfg.heights = {2};
  cfg.classifier = fast_spec();
  const auto silent = run_experiment(d, cfg);
  CHECK(silent[0].runtime_ms == 0.0);
  cfg.emit_timing = true;
  const auto timed = run_experiment(d, cfg);
  CHECK(timed[0].runtime_ms > 0.0);
}

TEST_CASE("config validation rejects bad tasks and heights") {
  const Dataset d = generate(small_synth(9));
  ExperimentConfig cfg;
  cfg.classifier = fast_spec();
  cfg.task = 5;
  CHECK_THROWS_AS(run_experiment(d, cfg), std::invalid_argument);
  cfg.task = 0;
  cfg.heights = {-1};
  CHECK_THROWS_AS(run_experiment(d, cfg), std::invalid_argument);
}
