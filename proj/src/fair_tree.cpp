#include "fairdex/fair_tree.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace fairdex {

namespace {

constexpr double kAlphaSumTolerance = 1e-9;

Region whole_grid(const GridSpec& g) { return Region{0, g.rows - 1, 0, g.cols - 1}; }

// Residual sums and record counts per slice of the region along the axis.
struct SliceAggregates {
  std::vector<double> sum;
  std::vector<long long> count;
  long long total_count = 0;
};

SliceAggregates slice_aggregates(const ResidualField& field, const Region& region,
                                 Axis axis) {
  const int extent = region.extent(axis);
  SliceAggregates agg;
  agg.sum.assign(static_cast<std::size_t>(extent), 0.0);
  agg.count.assign(static_cast<std::size_t>(extent), 0);
  for (int row = region.row_min; row <= region.row_max; ++row) {
    for (int col = region.col_min; col <= region.col_max; ++col) {
      const int slice = axis == Axis::Row ? row - region.row_min : col - region.col_min;
      agg.sum[static_cast<std::size_t>(slice)] += field.sum_at(row, col);
      agg.count[static_cast<std::size_t>(slice)] += field.count_at(row, col);
    }
  }
  for (long long c : agg.count) agg.total_count += c;
  return agg;
}

using SplitFn =
    std::function<std::optional<SplitOutcome>(const Region&, Axis, BuildStats&)>;

int build_node(FairTree& tree, const Region& region, int remaining, const SplitFn& split) {
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(FairTreeNode{region});
  if (remaining == 0 || region.single_cell()) return idx;
  Axis axis = remaining % 2 == 0 ? Axis::Row : Axis::Col;
  if (region.extent(axis) < 2) axis = other_axis(axis);
  auto outcome = split(region, axis, tree.stats);
  if (!outcome) return idx;
  const int left = build_node(tree, outcome->left, remaining - 1, split);
  const int right = build_node(tree, outcome->right, remaining - 1, split);
  FairTreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
  node.axis = static_cast<int>(outcome->decision.axis);
  node.split_index = outcome->decision.split_index;
  node.left = left;
  node.right = right;
  return idx;
}

void assign_leaf_ids(FairTree& tree) {
  int next = 0;
  std::function<void(int)> visit = [&](int idx) {
    FairTreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) {
      node.leaf_id = next++;
      return;
    }
    visit(node.left);
    visit(node.right);
  };
  if (tree.root >= 0) visit(tree.root);
}

void check_height(int height) {
  if (height < 0) throw std::invalid_argument("tree height must be non-negative");
}

ScoreSet train_on_partitioning(const Dataset& d, const Partitioning& p,
                               const ClassifierSpec& spec, int task, BuildStats& stats) {
  const FeatureMatrix m = encode_features(d, p);
  const std::vector<std::uint8_t> labels = task_labels(d, task);
  ScoreSet scores = train_and_score(m, labels, {}, spec);
  scores.task_index = task;
  stats.trainings += 1;
  return scores;
}

}  // namespace

ResidualVector residuals_from(const Dataset& d, const ScoreSet& s, int task) {
  if (s.scores.size() != d.records.size())
    throw std::invalid_argument("score set not aligned to dataset");
  const std::vector<std::uint8_t> labels = task_labels(d, task);
  ResidualVector r;
  r.values.reserve(d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i)
    r.values.push_back(s.scores[i] - static_cast<double>(labels[i]));
  return r;
}

void validate_task_weights(const TaskWeights& w, int task_count) {
  if (static_cast<int>(w.alpha.size()) != task_count)
    throw std::invalid_argument("task weight count does not match task count");
  double total = 0.0;
  for (double a : w.alpha) {
    if (a < 0.0 || a > 1.0)
      throw std::invalid_argument("task weights must lie in [0,1]");
    total += a;
  }
  if (std::abs(total - 1.0) > kAlphaSumTolerance)
    throw std::invalid_argument("task weights must sum to 1");
}

ResidualVector combine_residuals(std::span<const ResidualVector> per_task,
                                 const TaskWeights& w) {
  if (per_task.size() != w.alpha.size())
    throw std::invalid_argument("residual vectors do not match task weights");
  if (per_task.empty()) throw std::invalid_argument("no residual vectors to combine");
  const std::size_t n = per_task[0].values.size();
  ResidualVector total;
  total.values.assign(n, 0.0);
  for (std::size_t t = 0; t < per_task.size(); ++t) {
    if (per_task[t].values.size() != n)
      throw std::invalid_argument("residual vectors have mismatched lengths");
    for (std::size_t i = 0; i < n; ++i)
      total.values[i] += w.alpha[t] * per_task[t].values[i];
  }
  return total;
}

double fairness_objective(const ResidualVector& residuals,
                          std::span<const std::size_t> left,
                          std::span<const std::size_t> right) {
  double left_sum = 0.0;
  double right_sum = 0.0;
  for (std::size_t i : left) left_sum += residuals.values[i];
  for (std::size_t i : right) right_sum += residuals.values[i];
  return std::abs(std::abs(left_sum) - std::abs(right_sum));
}

ResidualField build_residual_field(const Dataset& d, const ResidualVector& r) {
  if (r.values.size() != d.records.size())
    throw std::invalid_argument("residual vector not aligned to dataset");
  ResidualField field;
  field.grid = d.grid;
  field.cell_sum.assign(static_cast<std::size_t>(d.grid.cell_count()), 0.0);
  field.cell_count.assign(static_cast<std::size_t>(d.grid.cell_count()), 0);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const Record& rec = d.records[i];
    const auto idx = static_cast<std::size_t>(rec.cell.row) * d.grid.cols + rec.cell.col;
    field.cell_sum[idx] += r.values[i];
    field.cell_count[idx] += 1;
  }
  return field;
}

std::optional<SplitOutcome> split_neighborhood(const ResidualField& field,
                                               const Region& region, Axis axis,
                                               SplitObjective form,
                                               long long* objective_calls) {
  const int extent = region.extent(axis);
  if (extent < 2) return std::nullopt;
  const SliceAggregates agg = slice_aggregates(field, region, axis);

  SplitDecision decision;
  decision.axis = axis;
  decision.objective_values.assign(static_cast<std::size_t>(extent - 1), 0.0);

  if (agg.total_count == 0) {
    // No data on either side of any candidate: place the boundary at the
    // geometric midpoint instead of collapsing to k = 1 via the tie rule.
    decision.split_index = (extent + 1) / 2;
  } else {
    // Suffix sums keep both sides pure additions over slice aggregates.
    std::vector<double> right_sum(static_cast<std::size_t>(extent) + 1, 0.0);
    std::vector<long long> right_count(static_cast<std::size_t>(extent) + 1, 0);
    for (int i = extent - 1; i >= 0; --i) {
      right_sum[static_cast<std::size_t>(i)] =
          right_sum[static_cast<std::size_t>(i) + 1] + agg.sum[static_cast<std::size_t>(i)];
      right_count[static_cast<std::size_t>(i)] =
          right_count[static_cast<std::size_t>(i) + 1] +
          agg.count[static_cast<std::size_t>(i)];
    }
    double left_sum = 0.0;
    long long left_count = 0;
    int best_k = 1;
    double best_z = 0.0;
    for (int k = 1; k <= extent - 1; ++k) {
      left_sum += agg.sum[static_cast<std::size_t>(k - 1)];
      left_count += agg.count[static_cast<std::size_t>(k - 1)];
      const double rs = right_sum[static_cast<std::size_t>(k)];
      double z;
      if (form == SplitObjective::SumDifference) {
        z = std::abs(std::abs(left_sum) - std::abs(rs));
      } else {
        z = std::abs(static_cast<double>(left_count) * std::abs(left_sum) -
                     static_cast<double>(right_count[static_cast<std::size_t>(k)]) *
                         std::abs(rs));
      }
      decision.objective_values[static_cast<std::size_t>(k - 1)] = z;
      if (k == 1 || z < best_z) {
        best_z = z;
        best_k = k;
      }
    }
    decision.split_index = best_k;
    if (objective_calls) *objective_calls += extent - 1;
  }

  auto halves = split_region(region, axis, decision.split_index);
  return SplitOutcome{halves.first, halves.second, std::move(decision)};
}

std::optional<SplitOutcome> median_split(const ResidualField& field, const Region& region,
                                         Axis axis) {
  const int extent = region.extent(axis);
  if (extent < 2) return std::nullopt;
  const SliceAggregates agg = slice_aggregates(field, region, axis);

  SplitDecision decision;
  decision.axis = axis;
  int k = extent - 1;
  long long left_count = 0;
  for (int candidate = 1; candidate <= extent - 1; ++candidate) {
    left_count += agg.count[static_cast<std::size_t>(candidate - 1)];
    if (2 * left_count >= agg.total_count) {
      k = candidate;
      break;
    }
  }
  decision.split_index = k;
  auto halves = split_region(region, axis, k);
  return SplitOutcome{halves.first, halves.second, std::move(decision)};
}

Partitioning FairTree::leaf_partitioning() const {
  Partitioning p;
  std::function<void(int)> visit = [&](int idx) {
    const FairTreeNode& node = nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) {
      p.regions.push_back(node.region);
      return;
    }
    visit(node.left);
    visit(node.right);
  };
  if (root >= 0) visit(root);
  return p;
}

int FairTree::leaf_count() const {
  int count = 0;
  for (const FairTreeNode& node : nodes)
    if (node.is_leaf()) ++count;
  return count;
}

FairTree build_tree_from_field(const ResidualField& field, int height, SplitObjective form,
                               BuildStats stats) {
  check_height(height);
  FairTree tree;
  tree.grid = field.grid;
  tree.height = height;
  tree.stats = stats;
  const SplitFn split = [&field, form](const Region& region, Axis axis,
                                       BuildStats& s) -> std::optional<SplitOutcome> {
    return split_neighborhood(field, region, axis, form, &s.objective_calls);
  };
  tree.root = build_node(tree, whole_grid(field.grid), height, split);
  assign_leaf_ids(tree);
  return tree;
}

FairTree fair_kdtree(const Dataset& d, const ClassifierSpec& spec, int height, int task) {
  check_height(height);
  validate_dataset(d);
  BuildStats stats;
  const Partitioning single{{whole_grid(d.grid)}};
  const ScoreSet scores = train_on_partitioning(d, single, spec, task, stats);
  const ResidualField field = build_residual_field(d, residuals_from(d, scores, task));
  return build_tree_from_field(field, height, SplitObjective::SumDifference, stats);
}

FairTree iterative_fair_kdtree(const Dataset& d, const ClassifierSpec& spec, int height,
                               int task) {
  check_height(height);
  validate_dataset(d);
  FairTree tree;
  tree.grid = d.grid;
  tree.height = height;
  tree.nodes.push_back(FairTreeNode{whole_grid(d.grid)});
  tree.root = 0;

  std::vector<int> frontier{0};  // current leaves, breadth-first order
  for (int level = 0; level < height; ++level) {
    const int remaining = height - level;
    bool any_splittable = false;
    for (int idx : frontier)
      if (!tree.nodes[static_cast<std::size_t>(idx)].region.single_cell())
        any_splittable = true;
    if (!any_splittable) break;

    Partitioning current;
    for (int idx : frontier)
      current.regions.push_back(tree.nodes[static_cast<std::size_t>(idx)].region);
    const ScoreSet scores = train_on_partitioning(d, current, spec, task, tree.stats);
    const ResidualField field = build_residual_field(d, residuals_from(d, scores, task));

    std::vector<int> next;
    for (int idx : frontier) {
      const Region region = tree.nodes[static_cast<std::size_t>(idx)].region;
      if (region.single_cell()) {
        next.push_back(idx);
        continue;
      }
      Axis axis = remaining % 2 == 0 ? Axis::Row : Axis::Col;
      if (region.extent(axis) < 2) axis = other_axis(axis);
      auto outcome = split_neighborhood(field, region, axis,
                                        SplitObjective::SumDifference,
                                        &tree.stats.objective_calls);
      if (!outcome) {
        next.push_back(idx);
        continue;
      }
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(FairTreeNode{outcome->left});
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(FairTreeNode{outcome->right});
      FairTreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
      node.axis = static_cast<int>(outcome->decision.axis);
      node.split_index = outcome->decision.split_index;
      node.left = left;
      node.right = right;
      next.push_back(left);
      next.push_back(right);
    }
    frontier = std::move(next);
  }
  assign_leaf_ids(tree);
  return tree;
}

FairTree multi_objective_fair_kdtree(const Dataset& d, const ClassifierSpec& spec,
                                     int height, const TaskWeights& weights,
                                     const BuildOptions& options) {
  check_height(height);
  validate_dataset(d);
  validate_task_weights(weights, d.task_count());
  BuildStats stats;
  const Partitioning single{{whole_grid(d.grid)}};
  std::vector<ResidualVector> per_task;
  per_task.reserve(static_cast<std::size_t>(d.task_count()));
  for (int task = 0; task < d.task_count(); ++task) {
    const ScoreSet scores = train_on_partitioning(d, single, spec, task, stats);
    per_task.push_back(residuals_from(d, scores, task));
  }
  const ResidualVector total = combine_residuals(per_task, weights);
  const ResidualField field = build_residual_field(d, total);
  const SplitObjective form = options.normalized_multi_objective
                                  ? SplitObjective::SumDifference
                                  : SplitObjective::CountWeightedSum;
  return build_tree_from_field(field, height, form, stats);
}

FairTree median_kdtree(const Dataset& d, int height) {
  check_height(height);
  validate_dataset(d);
  const ResidualField field =
      build_residual_field(d, ResidualVector{std::vector<double>(d.records.size(), 0.0)});
  FairTree tree;
  tree.grid = d.grid;
  tree.height = height;
  const SplitFn split = [&field](const Region& region, Axis axis,
                                 BuildStats&) -> std::optional<SplitOutcome> {
    return median_split(field, region, axis);
  };
  tree.root = build_node(tree, whole_grid(d.grid), height, split);
  assign_leaf_ids(tree);
  return tree;
}

}  // namespace fairdex
