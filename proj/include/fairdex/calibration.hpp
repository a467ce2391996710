#pragma once

#include <optional>
#include <vector>

#include "fairdex/spatial.hpp"

namespace fairdex {

// Confidence scores aligned to dataset record order, each in [0,1].
struct ScoreSet {
  std::vector<double> scores;
  int task_index = -1;  // which task's labels these scores predict; -1 = unset
};

// Per-region calibration statistics. observed is the positive-label rate,
// expected the mean confidence score over the region's records.
struct RegionCalibration {
  int region_id = -1;
  long long count = 0;
  double observed = 0.0;
  double expected = 0.0;
  double abs_miscal = 0.0;
  std::optional<double> ratio_miscal;  // expected/observed; empty when observed == 0
};

struct CalibrationReport {
  std::vector<RegionCalibration> regions;
  double overall_observed = 0.0;
  double overall_expected = 0.0;
  double ence = 0.0;
  double ece = 0.0;
  int ece_bins = 15;
  double accuracy = 0.0;
  double threshold = 0.5;
};

// Per-region observed/expected statistics. Empty regions come back with
// count 0 and observed = expected = 0.
std::vector<RegionCalibration> region_stats(const Dataset& d, const ScoreSet& s,
                                            const Partitioning& p, int task);

// Record-count-weighted mean of per-region |observed - expected|.
double ence(const Dataset& d, const ScoreSet& s, const Partitioning& p, int task);

// Expected calibration error over `bins` equal-width score bins on [0,1].
// Bin m covers [(m-1)/M, m/M); a score of exactly 1.0 falls in the last bin.
double ece(const Dataset& d, const ScoreSet& s, int task, int bins);

// Fraction of records where (score >= threshold) matches the label.
double accuracy(const Dataset& d, const ScoreSet& s, int task, double threshold);

CalibrationReport calibration_report(const Dataset& d, const ScoreSet& s,
                                     const Partitioning& p, int task, int bins,
                                     double threshold);

}  // namespace fairdex
