#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fairdex/calibration.hpp"
#include "fairdex/classifier.hpp"
#include "fairdex/spatial.hpp"

namespace fairdex {

// Per-record residuals in dataset order: score - label for a single task,
// or the task-weighted sum of those differences in the multi-task case.
struct ResidualVector {
  std::vector<double> values;
};

ResidualVector residuals_from(const Dataset& d, const ScoreSet& s, int task);

struct TaskWeights {
  std::vector<double> alpha;
};

// Each weight in [0,1], summing to 1 within 1e-9. Throws on violation.
void validate_task_weights(const TaskWeights& w, int task_count);

ResidualVector combine_residuals(std::span<const ResidualVector> per_task,
                                 const TaskWeights& w);

// Split objective for one candidate index, from explicit left/right record
// membership: | |sum_L r| - |sum_R r| |. The count-weighted region
// miscalibration |N|*|o - e| equals |sum over N of (y - s)|, so this is the
// weighted form evaluated without any division. An empty side contributes 0.
double fairness_objective(const ResidualVector& residuals,
                          std::span<const std::size_t> left,
                          std::span<const std::size_t> right);

// How candidate split objectives are formed from per-side residual sums.
//   SumDifference:    | |sum_L| - |sum_R| |        (single-task objective)
//   CountWeightedSum: | |L|*|sum_L| - |R|*|sum_R| | (literal multi-task form)
enum class SplitObjective { SumDifference, CountWeightedSum };

// Per-cell residual sums and record counts; all split decisions read these
// aggregates instead of rescanning records.
struct ResidualField {
  GridSpec grid;
  std::vector<double> cell_sum;
  std::vector<long long> cell_count;

  double sum_at(int row, int col) const {
    return cell_sum[static_cast<std::size_t>(row) * grid.cols + col];
  }
  long long count_at(int row, int col) const {
    return cell_count[static_cast<std::size_t>(row) * grid.cols + col];
  }
};

ResidualField build_residual_field(const Dataset& d, const ResidualVector& r);

struct SplitDecision {
  int split_index = 0;  // k*: smallest argmin over candidates
  Axis axis = Axis::Row;
  std::vector<double> objective_values;  // candidate k = 1..extent-1
};

struct SplitOutcome {
  Region left;
  Region right;
  SplitDecision decision;
};

// Evaluates the objective at every legal split index along the axis and
// returns the halves at the smallest argmin. Returns nullopt when the region
// has extent 1 on the axis. A region holding no records splits at the
// geometric midpoint k = ceil(extent/2).
std::optional<SplitOutcome> split_neighborhood(const ResidualField& field,
                                               const Region& region, Axis axis,
                                               SplitObjective form,
                                               long long* objective_calls = nullptr);

// Median baseline split: smallest k that puts at least half of the region's
// records in the left half; extent-1 when no k does.
std::optional<SplitOutcome> median_split(const ResidualField& field,
                                         const Region& region, Axis axis);

struct BuildStats {
  int trainings = 0;
  long long objective_calls = 0;
};

struct FairTreeNode {
  Region region;
  int axis = -1;  // -1 for leaves, else Axis value
  int split_index = 0;
  int left = -1;
  int right = -1;
  int leaf_id = -1;  // region id in the leaf partitioning

  bool is_leaf() const { return axis < 0; }
  bool operator==(const FairTreeNode&) const = default;
};

// Binary spatial index; leaves form a valid partitioning of the grid.
struct FairTree {
  GridSpec grid;
  int height = 0;
  int root = -1;
  std::vector<FairTreeNode> nodes;
  BuildStats stats;

  Partitioning leaf_partitioning() const;
  int leaf_count() const;
  int node_count() const { return static_cast<int>(nodes.size()); }
  bool same_structure(const FairTree& other) const {
    return grid == other.grid && root == other.root && nodes == other.nodes;
  }
};

struct BuildOptions {
  // Replaces the literal count-weighted multi-task objective with the
  // sum-difference form consistent with the single-task objective.
  bool normalized_multi_objective = false;
};

// Depth-first recursion over a fixed residual field. Axis at each node is
// (remaining height) mod 2, 0 = row split, 1 = column split, falling back to
// the other axis when the chosen one has extent 1. Single-cell regions
// become leaves early.
FairTree build_tree_from_field(const ResidualField& field, int height,
                               SplitObjective form, BuildStats stats = {});

// Trains once on the whole-domain partitioning, then splits recursively on
// the resulting residuals.
FairTree fair_kdtree(const Dataset& d, const ClassifierSpec& spec, int height, int task);

// Breadth-first variant that retrains on the current level's partitioning
// before splitting each level.
FairTree iterative_fair_kdtree(const Dataset& d, const ClassifierSpec& spec, int height,
                               int task);

// Trains one classifier per task, combines residuals with the task weights,
// then splits recursively like fair_kdtree.
FairTree multi_objective_fair_kdtree(const Dataset& d, const ClassifierSpec& spec,
                                     int height, const TaskWeights& weights,
                                     const BuildOptions& options = {});

// Standard KD-tree baseline over record counts; no classifier involved.
FairTree median_kdtree(const Dataset& d, int height);

}  // namespace fairdex
