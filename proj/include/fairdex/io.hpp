#pragma once

#include <map>
#include <string>

#include "fairdex/calibration.hpp"
#include "fairdex/fair_tree.hpp"
#include "fairdex/spatial.hpp"

namespace fairdex {

// Shortest representation that round-trips, via std::to_chars.
std::string format_double(double v);

struct IngestOptions {
  // task index -> threshold for turning a raw continuous outcome column
  // into a binary label (value >= threshold). Tasks without an entry must
  // already be 0/1.
  std::map<int, double> label_thresholds;
};

// Canonical dataset CSV: header `id,row,col,label_1[,...],f_1,...,f_l`.
// Accepts `lat,lon` in place of `row,col`; continuous coordinates are
// quantized onto the grid by equal-width binning over the data's bounding
// box. Parse errors name the offending file line.
Dataset read_dataset_csv(const std::string& path, const GridSpec& grid,
                         const IngestOptions& options = {});
void write_dataset_csv(const Dataset& d, const std::string& path);

// Partitioning CSV: header `region_id,row_min,row_max,col_min,col_max`.
// Reading validates coverage and disjointness.
Partitioning read_partitioning_csv(const std::string& path, const GridSpec& grid);
void write_partitioning_csv(const Partitioning& p, const std::string& path);
void write_partitioning_json(const Partitioning& p, const GridSpec& grid,
                             const std::string& path);

// Tree JSON: every node with region bounds; internal nodes with axis, split
// index and child ids; leaves with the region id used by the partitioning
// files.
void write_tree_json(const FairTree& tree, const std::string& path);

struct ReportMeta {
  std::string algorithm;
  int height = 0;
  std::uint64_t seed = 0;
  double split_fraction = 0.8;
  std::string role;  // "train" or "test"
};

void write_report_json(const CalibrationReport& report, const ReportMeta& meta,
                       const std::string& path);

}  // namespace fairdex
