#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fairdex {

enum class Axis : int { Row = 0, Col = 1 };

inline Axis other_axis(Axis a) { return a == Axis::Row ? Axis::Col : Axis::Row; }

// Base grid overlaid on the spatial domain. Cells are addressed 0-based,
// row-major.
struct GridSpec {
  int rows = 0;
  int cols = 0;

  long long cell_count() const { return static_cast<long long>(rows) * cols; }
  bool valid() const { return rows >= 1 && cols >= 1; }
  bool operator==(const GridSpec&) const = default;
};

struct CellIndex {
  int row = 0;
  int col = 0;
  bool operator==(const CellIndex&) const = default;
};

// Axis-aligned rectangle of grid cells, bounds inclusive.
struct Region {
  int row_min = 0;
  int row_max = 0;
  int col_min = 0;
  int col_max = 0;

  int row_extent() const { return row_max - row_min + 1; }
  int col_extent() const { return col_max - col_min + 1; }
  int extent(Axis a) const { return a == Axis::Row ? row_extent() : col_extent(); }
  long long cell_count() const {
    return static_cast<long long>(row_extent()) * col_extent();
  }
  bool contains(CellIndex c) const {
    return c.row >= row_min && c.row <= row_max && c.col >= col_min && c.col <= col_max;
  }
  bool single_cell() const { return row_extent() == 1 && col_extent() == 1; }
  bool operator==(const Region&) const = default;
};

// Ordered list of regions; region id = position in the list. A valid
// partitioning covers every grid cell exactly once.
struct Partitioning {
  std::vector<Region> regions;

  int region_count() const { return static_cast<int>(regions.size()); }
  bool operator==(const Partitioning&) const = default;
};

struct Record {
  std::int64_t id = 0;
  CellIndex cell;
  std::vector<double> features;
  std::vector<std::uint8_t> labels;  // one binary label per task
};

struct Dataset {
  GridSpec grid;
  std::vector<Record> records;
  std::vector<std::string> feature_names;
  std::vector<std::string> task_names;

  std::size_t size() const { return records.size(); }
  int feature_count() const { return static_cast<int>(feature_names.size()); }
  int task_count() const { return static_cast<int>(task_names.size()); }
};

// Throws std::invalid_argument on the first violated dataset invariant
// (duplicate id, cell out of grid, non-binary label, ragged vectors).
void validate_dataset(const Dataset& d);

// Labels of one task in dataset order. Throws std::out_of_range on a bad task.
std::vector<std::uint8_t> task_labels(const Dataset& d, int task);

struct ValidationResult {
  bool ok = true;
  std::string message;  // names the first violated cell when !ok
  explicit operator bool() const { return ok; }
};

// Checks disjointness and full coverage of the grid.
ValidationResult validate_partitioning(const Partitioning& p, const GridSpec& g);

// Region id per cell, row-major. Requires a validated partitioning.
std::vector<int> cell_region_table(const Partitioning& p, const GridSpec& g);

// record id -> region id for every record. Requires a validated partitioning.
std::map<std::int64_t, int> assign_records(const Dataset& d, const Partitioning& p);

// Same assignment, as region ids in dataset order (the form used internally).
std::vector<int> assign_record_regions(const Dataset& d, const Partitioning& p);

// Splits r into the first k rows (or columns) and the remainder. Throws
// std::out_of_range unless 1 <= k <= extent-1 on the chosen axis.
std::pair<Region, Region> split_region(const Region& r, Axis axis, int k);

}  // namespace fairdex
