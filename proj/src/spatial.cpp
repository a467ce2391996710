#include "fairdex/spatial.hpp"

#include <stdexcept>
#include <unordered_set>

namespace fairdex {

namespace {

std::string cell_str(int row, int col) {
  return "(" + std::to_string(row) + "," + std::to_string(col) + ")";
}

}  // namespace

void validate_dataset(const Dataset& d) {
  if (!d.grid.valid()) throw std::invalid_argument("grid must be at least 1x1");
  if (d.task_count() < 1) throw std::invalid_argument("dataset needs at least one task");
  std::unordered_set<std::int64_t> seen;
  seen.reserve(d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const Record& r = d.records[i];
    if (!seen.insert(r.id).second)
      throw std::invalid_argument("duplicate record id " + std::to_string(r.id));
    if (r.cell.row < 0 || r.cell.row >= d.grid.rows || r.cell.col < 0 ||
        r.cell.col >= d.grid.cols)
      throw std::invalid_argument("record " + std::to_string(r.id) + " cell " +
                                  cell_str(r.cell.row, r.cell.col) + " outside grid");
    if (static_cast<int>(r.features.size()) != d.feature_count())
      throw std::invalid_argument("record " + std::to_string(r.id) +
                                  " has wrong feature count");
    if (static_cast<int>(r.labels.size()) != d.task_count())
      throw std::invalid_argument("record " + std::to_string(r.id) +
                                  " has wrong label count");
    for (auto y : r.labels)
      if (y != 0 && y != 1)
        throw std::invalid_argument("record " + std::to_string(r.id) +
                                    " has non-binary label");
  }
}

std::vector<std::uint8_t> task_labels(const Dataset& d, int task) {
  if (task < 0 || task >= d.task_count())
    throw std::out_of_range("task index " + std::to_string(task) + " out of range");
  std::vector<std::uint8_t> y;
  y.reserve(d.records.size());
  for (const Record& r : d.records) y.push_back(r.labels[static_cast<std::size_t>(task)]);
  return y;
}

ValidationResult validate_partitioning(const Partitioning& p, const GridSpec& g) {
  if (!g.valid()) return {false, "grid must be at least 1x1"};
  for (std::size_t i = 0; i < p.regions.size(); ++i) {
    const Region& r = p.regions[i];
    if (r.row_min > r.row_max || r.col_min > r.col_max)
      return {false, "region " + std::to_string(i) + " has inverted bounds"};
    if (r.row_min < 0 || r.row_max >= g.rows || r.col_min < 0 || r.col_max >= g.cols)
      return {false, "region " + std::to_string(i) + " extends outside the grid"};
  }
  std::vector<int> owner(static_cast<std::size_t>(g.cell_count()), -1);
  for (std::size_t i = 0; i < p.regions.size(); ++i) {
    const Region& r = p.regions[i];
    for (int row = r.row_min; row <= r.row_max; ++row) {
      for (int col = r.col_min; col <= r.col_max; ++col) {
        int& o = owner[static_cast<std::size_t>(row) * g.cols + col];
        if (o != -1)
          return {false, "cell " + cell_str(row, col) + " covered by regions " +
                             std::to_string(o) + " and " + std::to_string(i)};
        o = static_cast<int>(i);
      }
    }
  }
  for (int row = 0; row < g.rows; ++row)
    for (int col = 0; col < g.cols; ++col)
      if (owner[static_cast<std::size_t>(row) * g.cols + col] == -1)
        return {false, "cell " + cell_str(row, col) + " not covered by any region"};
  return {};
}

std::vector<int> cell_region_table(const Partitioning& p, const GridSpec& g) {
  std::vector<int> table(static_cast<std::size_t>(g.cell_count()), -1);
  for (std::size_t i = 0; i < p.regions.size(); ++i) {
    const Region& r = p.regions[i];
    for (int row = r.row_min; row <= r.row_max; ++row)
      for (int col = r.col_min; col <= r.col_max; ++col)
        table[static_cast<std::size_t>(row) * g.cols + col] = static_cast<int>(i);
  }
  return table;
}

std::vector<int> assign_record_regions(const Dataset& d, const Partitioning& p) {
  const std::vector<int> table = cell_region_table(p, d.grid);
  std::vector<int> out;
  out.reserve(d.records.size());
  for (const Record& r : d.records)
    out.push_back(table[static_cast<std::size_t>(r.cell.row) * d.grid.cols + r.cell.col]);
  return out;
}

std::map<std::int64_t, int> assign_records(const Dataset& d, const Partitioning& p) {
  const std::vector<int> regions = assign_record_regions(d, p);
  std::map<std::int64_t, int> out;
  for (std::size_t i = 0; i < d.records.size(); ++i) out[d.records[i].id] = regions[i];
  return out;
}

std::pair<Region, Region> split_region(const Region& r, Axis axis, int k) {
  const int extent = r.extent(axis);
  if (k < 1 || k > extent - 1)
    throw std::out_of_range("split index " + std::to_string(k) + " out of range [1," +
                            std::to_string(extent - 1) + "]");
  Region left = r;
  Region right = r;
  if (axis == Axis::Row) {
    left.row_max = r.row_min + k - 1;
    right.row_min = r.row_min + k;
  } else {
    left.col_max = r.col_min + k - 1;
    right.col_min = r.col_min + k;
  }
  return {left, right};
}

}  // namespace fairdex
