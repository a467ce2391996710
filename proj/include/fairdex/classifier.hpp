#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fairdex/calibration.hpp"
#include "fairdex/spatial.hpp"

namespace fairdex {

struct ClassifierSpec {
  std::string kind = "logistic-regression";
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
};

// Dense row-major design matrix. Column 0 is the intercept column by
// convention and is never penalized.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
};

// Non-negative per-record weights; an empty vector means uniform.
using InstanceWeights = std::vector<double>;

// Fits standardization statistics and the region layout on one dataset and
// applies them to any dataset on the same grid. Column layout: intercept,
// standardized numeric features, one-hot region indicators ordered by
// region id. Numeric columns that are constant in the fit data stay 0.
class FeatureEncoder {
 public:
  static FeatureEncoder fit(const Dataset& d, const Partitioning& p);
  FeatureMatrix transform(const Dataset& d) const;
  std::size_t column_count() const { return 1 + means_.size() + static_cast<std::size_t>(region_count_); }

 private:
  GridSpec grid_;
  std::vector<double> means_;
  std::vector<double> stds_;  // 0 marks a constant column
  std::vector<int> cell_region_;
  int region_count_ = 0;
};

// Fit-and-transform on the same dataset.
FeatureMatrix encode_features(const Dataset& d, const Partitioning& p);

struct LogisticModel {
  std::vector<double> coefficients;  // aligned to FeatureMatrix columns

  std::vector<double> score(const FeatureMatrix& m) const;
};

// Mean weighted log-loss with an L2 penalty on every coefficient except the
// intercept (column 0). Exposed together with its gradient so the training
// path can be checked against finite differences.
double weighted_logloss(const FeatureMatrix& m, std::span<const std::uint8_t> labels,
                        std::span<const double> weights,
                        std::span<const double> coefficients, double l2);
void logloss_gradient(const FeatureMatrix& m, std::span<const std::uint8_t> labels,
                      std::span<const double> weights,
                      std::span<const double> coefficients, double l2,
                      std::span<double> gradient);

// Full-batch gradient descent from zero coefficients, exactly spec.epochs
// steps at fixed spec.learning_rate. Deterministic for fixed inputs.
LogisticModel fit_logistic(const FeatureMatrix& m, std::span<const std::uint8_t> labels,
                           std::span<const double> weights, const ClassifierSpec& spec);

// Trains the configured scorer and returns in-sample scores. `weights`
// empty means uniform. Dispatches to a registered plugin scorer when
// spec.kind is not the built-in logistic regression.
ScoreSet train_and_score(const FeatureMatrix& m, std::span<const std::uint8_t> labels,
                         std::span<const double> weights, const ClassifierSpec& spec);

// Plugin scorer contract: (matrix, labels, weights, spec) -> in-sample scores.
using ScorerFn = std::function<std::vector<double>(
    const FeatureMatrix&, std::span<const std::uint8_t>, std::span<const double>,
    const ClassifierSpec&)>;

void register_scorer(const std::string& name, ScorerFn fn);
bool scorer_registered(const std::string& name);

// Instance weights that make group and label statistically independent in
// the weighted sample: w(u) = count(g)*count(y) / (n * count(g,y)).
InstanceWeights reweight(const Dataset& d, std::span<const int> group_ids, int task);

}  // namespace fairdex
