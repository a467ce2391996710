#pragma once

// Test-only generators and independent oracles. Everything here recomputes
// expected values by direct scans or enumeration, never through the library
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "fairdex/calibration.hpp"
#include "fairdex/classifier.hpp"
#include "fairdex/fair_tree.hpp"
#include "fairdex/rng.hpp"
#include "fairdex/spatial.hpp"

namespace testutil {

using fairdex::Axis;
using fairdex::Dataset;
using fairdex::GridSpec;
using fairdex::Partitioning;
using fairdex::Record;
using fairdex::Region;
using fairdex::ScoreSet;
using fairdex::SeededRng;

inline Dataset random_dataset(SeededRng& rng, GridSpec grid, int n_records,
                              int n_features = 3, int n_tasks = 1) {
  Dataset d;
  d.grid = grid;
  for (int j = 0; j < n_features; ++j) d.feature_names.push_back("f_" + std::to_string(j + 1));
  for (int t = 0; t < n_tasks; ++t) d.task_names.push_back("label_" + std::to_string(t + 1));
  for (int i = 0; i < n_records; ++i) {
    Record r;
    r.id = i;
    const auto cell = static_cast<long long>(
        rng.bounded(static_cast<std::uint64_t>(grid.cell_count())));
    r.cell = {static_cast<int>(cell / grid.cols), static_cast<int>(cell % grid.cols)};
    for (int j = 0; j < n_features; ++j) r.features.push_back(rng.normal());
    for (int t = 0; t < n_tasks; ++t)
      r.labels.push_back(rng.uniform() < 0.5 ? 1 : 0);
    d.records.push_back(std::move(r));
  }
  return d;
}

// dyadic = true draws scores on a 1/64 grid so per-side residual sums are
// exact in binary floating point and ties are genuine ties.
inline ScoreSet random_scores(SeededRng& rng, std::size_t n, int task = 0,
                              bool dyadic = false) {
  ScoreSet s;
  s.task_index = task;
  s.scores.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (dyadic) {
      s.scores.push_back(static_cast<double>(rng.bounded(65)) / 64.0);
    } else {
      s.scores.push_back(rng.uniform());
    }
  }
  return s;
}

// Random valid partitioning built by recursive random rectangle splits.
inline Partitioning random_partitioning(SeededRng& rng, GridSpec grid,
                                        int max_regions = 12) {
  std::vector<Region> open{Region{0, grid.rows - 1, 0, grid.cols - 1}};
  std::vector<Region> done;
  while (!open.empty() &&
         static_cast<int>(open.size() + done.size()) < max_regions) {
    const Region r = open.back();
    open.pop_back();
    const bool can_row = r.row_extent() >= 2;
    const bool can_col = r.col_extent() >= 2;
    if ((!can_row && !can_col) || rng.uniform() < 0.25) {
      done.push_back(r);
      continue;
    }
    Axis axis = can_row && can_col ? (rng.bounded(2) == 0 ? Axis::Row : Axis::Col)
                                   : (can_row ? Axis::Row : Axis::Col);
    const int extent = r.extent(axis);
    const int k = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(extent - 1)));
    auto halves = fairdex::split_region(r, axis, k);
    open.push_back(halves.first);
    open.push_back(halves.second);
  }
  for (const Region& r : open) done.push_back(r);
  return Partitioning{std::move(done)};
}

// Sub-partitioning of p: each region is split further zero or more times.
inline Partitioning refine_partitioning(SeededRng& rng, const Partitioning& p,
                                        int extra_splits_per_region = 2) {
  Partitioning fine;
  for (const Region& region : p.regions) {
    std::vector<Region> open{region};
    int budget = static_cast<int>(rng.bounded(
        static_cast<std::uint64_t>(extra_splits_per_region + 1)));
    std::vector<Region> done;
    while (!open.empty()) {
      Region r = open.back();
      open.pop_back();
      const bool can_row = r.row_extent() >= 2;
      const bool can_col = r.col_extent() >= 2;
      if (budget <= 0 || (!can_row && !can_col)) {
        done.push_back(r);
        continue;
      }
      --budget;
      Axis axis = can_row && can_col ? (rng.bounded(2) == 0 ? Axis::Row : Axis::Col)
                                     : (can_row ? Axis::Row : Axis::Col);
      const int extent = r.extent(axis);
      const int k =
          1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(extent - 1)));
      auto halves = fairdex::split_region(r, axis, k);
      open.push_back(halves.first);
      open.push_back(halves.second);
    }
    for (const Region& r : done) fine.regions.push_back(r);
  }
  return fine;
}

// ---- oracles ---------------------------------------------------------

// Per-record scan over every region.
inline std::map<std::int64_t, int> assign_oracle(const Dataset& d, const Partitioning& p) {
  std::map<std::int64_t, int> out;
  for (const Record& r : d.records)
    for (std::size_t i = 0; i < p.regions.size(); ++i)
      if (p.regions[i].contains(r.cell)) {
        out[r.id] = static_cast<int>(i);
        break;
      }
  return out;
}

// Naive per-bin scan: for each bin, walk the whole dataset.
inline double ece_oracle(const Dataset& d, const ScoreSet& s, int task, int bins) {
  const double n = static_cast<double>(d.records.size());
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    long long count = 0;
    double score_sum = 0.0;
    long long pos = 0;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
      const double v = s.scores[i] * bins;
      const bool in_bin = b + 1 == bins ? (v >= b) : (v >= b && v < b + 1);
      if (!in_bin) continue;
      ++count;
      score_sum += s.scores[i];
      pos += d.records[i].labels[static_cast<std::size_t>(task)];
    }
    if (count == 0) continue;
    const double e = score_sum / static_cast<double>(count);
    const double o = static_cast<double>(pos) / static_cast<double>(count);
    total += (static_cast<double>(count) / n) * std::abs(o - e);
  }
  return total;
}

// Exhaustive split search: for every candidate index, sum residuals (and
// counts) record by record on each side, then take the smallest argmin.
struct SplitOracleResult {
  int k = 0;
  std::vector<double> z;
};

inline SplitOracleResult split_oracle(const Dataset& d, const std::vector<double>& residuals,
                                      const Region& region, Axis axis,
                                      bool count_weighted) {
  const int extent = region.extent(axis);
  SplitOracleResult out;
  for (int k = 1; k <= extent - 1; ++k) {
    auto halves = fairdex::split_region(region, axis, k);
    double left_sum = 0.0, right_sum = 0.0;
    long long left_count = 0, right_count = 0;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
      const auto cell = d.records[i].cell;
      if (halves.first.contains(cell)) {
        left_sum += residuals[i];
        ++left_count;
      } else if (halves.second.contains(cell)) {
        right_sum += residuals[i];
        ++right_count;
      }
    }
    double z;
    if (count_weighted) {
      z = std::abs(static_cast<double>(left_count) * std::abs(left_sum) -
                   static_cast<double>(right_count) * std::abs(right_sum));
    } else {
      z = std::abs(std::abs(left_sum) - std::abs(right_sum));
    }
    out.z.push_back(z);
    if (k == 1 || z < out.z[static_cast<std::size_t>(out.k - 1)]) out.k = k;
  }
  return out;
}

// Sort-based median: smallest k with at least half the records on the left,
// axis extent - 1 when no k qualifies.
inline int median_oracle(const Dataset& d, const Region& region, Axis axis) {
  std::vector<int> offsets;
  for (const Record& r : d.records)
    if (region.contains(r.cell))
      offsets.push_back(axis == Axis::Row ? r.cell.row - region.row_min
                                          : r.cell.col - region.col_min);
  std::sort(offsets.begin(), offsets.end());
  const int extent = region.extent(axis);
  const auto n = static_cast<long long>(offsets.size());
  for (int k = 1; k <= extent - 1; ++k) {
    const auto left = static_cast<long long>(
        std::upper_bound(offsets.begin(), offsets.end(), k - 1) - offsets.begin());
    if (2 * left >= n) return k;
  }
  return extent - 1;
}

// Central finite differences of the weighted log-loss.
inline std::vector<double> fd_gradient(const fairdex::FeatureMatrix& m,
                                       std::span<const std::uint8_t> labels,
                                       std::span<const double> weights,
                                       std::span<const double> coefficients, double l2,
                                       double h = 1e-6) {
  std::vector<double> beta(coefficients.begin(), coefficients.end());
  std::vector<double> grad(beta.size(), 0.0);
  for (std::size_t j = 0; j < beta.size(); ++j) {
    const double saved = beta[j];
    beta[j] = saved + h;
    const double up = fairdex::weighted_logloss(m, labels, weights, beta, l2);
    beta[j] = saved - h;
    const double down = fairdex::weighted_logloss(m, labels, weights, beta, l2);
    beta[j] = saved;
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace testutil
