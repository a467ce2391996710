#include "fairdex/classifier.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace fairdex {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) - y*z without overflow for large |z|.
double logloss_term(double z, double y) {
  const double a = z > 0.0 ? z : 0.0;
  return a - y * z + std::log1p(std::exp(-std::abs(z)));
}

void check_training_inputs(const FeatureMatrix& m, std::span<const std::uint8_t> labels,
                           std::span<const double> weights) {
  if (labels.size() != m.rows)
    throw std::invalid_argument("label count does not match matrix rows");
  if (!weights.empty()) {
    if (weights.size() != m.rows)
      throw std::invalid_argument("weight count does not match matrix rows");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("instance weights must be non-negative");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("instance weights must not all be zero");
  }
}

std::unordered_map<std::string, ScorerFn>& scorer_registry() {
  static std::unordered_map<std::string, ScorerFn> registry;
  return registry;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FeatureEncoder FeatureEncoder::fit(const Dataset& d, const Partitioning& p) {
  FeatureEncoder enc;
  enc.grid_ = d.grid;
  enc.cell_region_ = cell_region_table(p, d.grid);
  enc.region_count_ = p.region_count();
  const std::size_t l = static_cast<std::size_t>(d.feature_count());
  enc.means_.assign(l, 0.0);
  enc.stds_.assign(l, 0.0);
  const double n = static_cast<double>(d.records.size());
  if (d.records.empty()) return enc;
  for (const Record& r : d.records)
    for (std::size_t j = 0; j < l; ++j) enc.means_[j] += r.features[j];
  for (std::size_t j = 0; j < l; ++j) enc.means_[j] /= n;
  for (const Record& r : d.records)
    for (std::size_t j = 0; j < l; ++j) {
      const double dev = r.features[j] - enc.means_[j];
      enc.stds_[j] += dev * dev;
    }
  for (std::size_t j = 0; j < l; ++j) enc.stds_[j] = std::sqrt(enc.stds_[j] / n);
  return enc;
}

FeatureMatrix FeatureEncoder::transform(const Dataset& d) const {
  if (d.grid != grid_) throw std::invalid_argument("dataset grid does not match encoder");
  if (d.feature_count() != static_cast<int>(means_.size()))
    throw std::invalid_argument("dataset feature count does not match encoder");
  const std::size_t l = means_.size();
  FeatureMatrix m(d.records.size(), 1 + l + static_cast<std::size_t>(region_count_));
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const Record& r = d.records[i];
    m.at(i, 0) = 1.0;
    for (std::size_t j = 0; j < l; ++j)
      m.at(i, 1 + j) = stds_[j] > 0.0 ? (r.features[j] - means_[j]) / stds_[j] : 0.0;
    const int region =
        cell_region_[static_cast<std::size_t>(r.cell.row) * grid_.cols + r.cell.col];
    if (region < 0) throw std::invalid_argument("record cell not covered by partitioning");
    m.at(i, 1 + l + static_cast<std::size_t>(region)) = 1.0;
  }
  return m;
}

FeatureMatrix encode_features(const Dataset& d, const Partitioning& p) {
  return FeatureEncoder::fit(d, p).transform(d);
}

std::vector<double> LogisticModel::score(const FeatureMatrix& m) const {
  if (coefficients.size() != m.cols)
    throw std::invalid_argument("coefficient count does not match matrix columns");
  std::vector<double> out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    double z = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) z += row[j] * coefficients[j];
    out[i] = sigmoid(z);
  }
  return out;
}

double weighted_logloss(const FeatureMatrix& m, std::span<const std::uint8_t> labels,
                        std::span<const double> weights,
                        std::span<const double> coefficients, double l2) {
  check_training_inputs(m, labels, weights);
  const double n = static_cast<double>(m.rows);
  double loss = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    double z = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) z += row[j] * coefficients[j];
    const double w = weights.empty() ? 1.0 : weights[i];
    loss += w * logloss_term(z, static_cast<double>(labels[i]));
  }
  loss /= n;
  for (std::size_t j = 1; j < m.cols; ++j)
    loss += 0.5 * l2 * coefficients[j] * coefficients[j];
  return loss;
}

void logloss_gradient(const FeatureMatrix& m, std::span<const std::uint8_t> labels,
                      std::span<const double> weights,
                      std::span<const double> coefficients, double l2,
                      std::span<double> gradient) {
  if (gradient.size() != m.cols)
    throw std::invalid_argument("gradient buffer does not match matrix columns");
  for (std::size_t j = 0; j < m.cols; ++j) gradient[j] = 0.0;
  const double n = static_cast<double>(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    double z = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) z += row[j] * coefficients[j];
    const double w = weights.empty() ? 1.0 : weights[i];
    const double g = w * (sigmoid(z) - static_cast<double>(labels[i])) / n;
    for (std::size_t j = 0; j < m.cols; ++j) gradient[j] += g * row[j];
  }
  for (std::size_t j = 1; j < m.cols; ++j) gradient[j] += l2 * coefficients[j];
}

LogisticModel fit_logistic(const FeatureMatrix& m, std::span<const std::uint8_t> labels,
                           std::span<const double> weights, const ClassifierSpec& spec) {
  check_training_inputs(m, labels, weights);
  if (spec.learning_rate <= 0.0)
    throw std::invalid_argument("learning rate must be positive");
  if (spec.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  LogisticModel model;
  model.coefficients.assign(m.cols, 0.0);
  std::vector<double> gradient(m.cols, 0.0);
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    logloss_gradient(m, labels, weights, model.coefficients, spec.l2, gradient);
    for (std::size_t j = 0; j < m.cols; ++j)
      model.coefficients[j] -= spec.learning_rate * gradient[j];
  }
  return model;
}

ScoreSet train_and_score(const FeatureMatrix& m, std::span<const std::uint8_t> labels,
                         std::span<const double> weights, const ClassifierSpec& spec) {
  ScoreSet out;
  if (spec.kind == "logistic-regression") {
    out.scores = fit_logistic(m, labels, weights, spec).score(m);
    return out;
  }
  ScorerFn fn;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = scorer_registry().find(spec.kind);
    if (it == scorer_registry().end())
      throw std::invalid_argument("unknown classifier kind '" + spec.kind + "'");
    fn = it->second;
  }
  check_training_inputs(m, labels, weights);
  out.scores = fn(m, labels, weights, spec);
  if (out.scores.size() != m.rows)
    throw std::runtime_error("scorer '" + spec.kind + "' returned wrong score count");
  return out;
}

void register_scorer(const std::string& name, ScorerFn fn) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  scorer_registry()[name] = std::move(fn);
}

bool scorer_registered(const std::string& name) {
  if (name == "logistic-regression") return true;
  std::lock_guard<std::mutex> lock(registry_mutex());
  return scorer_registry().count(name) > 0;
}

InstanceWeights reweight(const Dataset& d, std::span<const int> group_ids, int task) {
  if (group_ids.size() != d.records.size())
    throw std::invalid_argument("group assignment not aligned to dataset");
  const std::vector<std::uint8_t> labels = task_labels(d, task);
  std::map<int, long long> group_count;
  long long label_count[2] = {0, 0};
  std::map<std::pair<int, int>, long long> cell_count;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    group_count[group_ids[i]] += 1;
    label_count[labels[i]] += 1;
    cell_count[{group_ids[i], labels[i]}] += 1;
  }
  const double n = static_cast<double>(d.records.size());
  InstanceWeights w(d.records.size(), 1.0);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const double ng = static_cast<double>(group_count[group_ids[i]]);
    const double ny = static_cast<double>(label_count[labels[i]]);
    const double ngy = static_cast<double>(cell_count[{group_ids[i], labels[i]}]);
    w[i] = (ng * ny) / (n * ngy);
  }
  return w;
}

}  // namespace fairdex
