#include "fairdex/calibration.hpp"

#include <cmath>
#include <stdexcept>

namespace fairdex {

namespace {

void check_aligned(const Dataset& d, const ScoreSet& s, int task) {
  if (task < 0 || task >= d.task_count())
    throw std::out_of_range("task index " + std::to_string(task) + " out of range");
  if (s.scores.size() != d.records.size())
    throw std::invalid_argument("score set not aligned to dataset");
}

}  // namespace

std::vector<RegionCalibration> region_stats(const Dataset& d, const ScoreSet& s,
                                            const Partitioning& p, int task) {
  check_aligned(d, s, task);
  const std::vector<int> region_of = assign_record_regions(d, p);
  const std::size_t t = static_cast<std::size_t>(p.region_count());
  std::vector<long long> count(t, 0);
  std::vector<double> score_sum(t, 0.0);
  std::vector<long long> pos(t, 0);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    if (region_of[i] < 0)
      throw std::invalid_argument("partitioning does not cover every record cell");
    const auto r = static_cast<std::size_t>(region_of[i]);
    count[r] += 1;
    score_sum[r] += s.scores[i];
    pos[r] += d.records[i].labels[static_cast<std::size_t>(task)];
  }
  std::vector<RegionCalibration> out(t);
  for (std::size_t r = 0; r < t; ++r) {
    RegionCalibration& rc = out[r];
    rc.region_id = static_cast<int>(r);
    rc.count = count[r];
    if (count[r] > 0) {
      rc.expected = score_sum[r] / static_cast<double>(count[r]);
      rc.observed = static_cast<double>(pos[r]) / static_cast<double>(count[r]);
    }
    rc.abs_miscal = std::abs(rc.observed - rc.expected);
    if (rc.observed > 0.0) rc.ratio_miscal = rc.expected / rc.observed;
  }
  return out;
}

double ence(const Dataset& d, const ScoreSet& s, const Partitioning& p, int task) {
  if (d.records.empty()) throw std::invalid_argument("ence over an empty dataset");
  const std::vector<RegionCalibration> stats = region_stats(d, s, p, task);
  const double n = static_cast<double>(d.records.size());
  double total = 0.0;
  for (const RegionCalibration& rc : stats)
    total += (static_cast<double>(rc.count) / n) * rc.abs_miscal;
  return total;
}

double ece(const Dataset& d, const ScoreSet& s, int task, int bins) {
  if (bins < 1) throw std::invalid_argument("ece needs at least one bin");
  if (d.records.empty()) throw std::invalid_argument("ece over an empty dataset");
  check_aligned(d, s, task);
  const std::size_t m = static_cast<std::size_t>(bins);
  std::vector<long long> count(m, 0);
  std::vector<double> score_sum(m, 0.0);
  std::vector<long long> pos(m, 0);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const double v = s.scores[i];
    auto idx = static_cast<long long>(std::floor(v * bins));
    if (idx >= bins) idx = bins - 1;  // score exactly 1.0
    if (idx < 0) idx = 0;
    const auto b = static_cast<std::size_t>(idx);
    count[b] += 1;
    score_sum[b] += v;
    pos[b] += d.records[i].labels[static_cast<std::size_t>(task)];
  }
  const double n = static_cast<double>(d.records.size());
  double total = 0.0;
  for (std::size_t b = 0; b < m; ++b) {
    if (count[b] == 0) continue;
    const double e = score_sum[b] / static_cast<double>(count[b]);
    const double o = static_cast<double>(pos[b]) / static_cast<double>(count[b]);
    total += (static_cast<double>(count[b]) / n) * std::abs(o - e);
  }
  return total;
}

double accuracy(const Dataset& d, const ScoreSet& s, int task, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("classification threshold must lie in [0,1]");
  if (d.records.empty()) throw std::invalid_argument("accuracy over an empty dataset");
  check_aligned(d, s, task);
  long long correct = 0;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const std::uint8_t predicted = s.scores[i] >= threshold ? 1 : 0;
    if (predicted == d.records[i].labels[static_cast<std::size_t>(task)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(d.records.size());
}

CalibrationReport calibration_report(const Dataset& d, const ScoreSet& s,
                                     const Partitioning& p, int task, int bins,
                                     double threshold) {
  CalibrationReport report;
  report.regions = region_stats(d, s, p, task);
  double score_sum = 0.0;
  long long pos = 0;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    score_sum += s.scores[i];
    pos += d.records[i].labels[static_cast<std::size_t>(task)];
  }
  if (!d.records.empty()) {
    const double n = static_cast<double>(d.records.size());
    report.overall_expected = score_sum / n;
    report.overall_observed = static_cast<double>(pos) / n;
  }
  report.ence = ence(d, s, p, task);
  report.ece = ece(d, s, task, bins);
  report.ece_bins = bins;
  report.accuracy = accuracy(d, s, task, threshold);
  report.threshold = threshold;
  return report;
}

}  // namespace fairdex
