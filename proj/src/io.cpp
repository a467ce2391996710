#include "fairdex/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fairdex {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& raw, const std::string& path, std::size_t line,
                    const std::string& column) {
  const std::string s = trimmed(raw);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    parse_fail(path, line, "bad numeric value '" + s + "' in column " + column);
  return v;
}

long long parse_int(const std::string& raw, const std::string& path, std::size_t line,
                    const std::string& column) {
  const std::string s = trimmed(raw);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    parse_fail(path, line, "bad integer value '" + s + "' in column " + column);
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

ordered_json region_json(const Region& r) {
  return ordered_json{{"row_min", r.row_min},
                      {"row_max", r.row_max},
                      {"col_min", r.col_min},
                      {"col_max", r.col_max}};
}

int quantize(double v, double lo, double hi, int bins) {
  if (hi <= lo) return 0;
  const int idx = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
  return std::clamp(idx, 0, bins - 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Dataset read_dataset_csv(const std::string& path, const GridSpec& grid,
                         const IngestOptions& options) {
  if (!grid.valid()) throw std::invalid_argument("grid must be at least 1x1");
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, 1, "missing header row");
  const std::vector<std::string> header = split_line(line);
  if (header.size() < 4) parse_fail(path, 1, "header needs id, coordinates and a label");

  std::vector<std::string> names;
  names.reserve(header.size());
  for (const std::string& h : header) names.push_back(trimmed(h));
  if (names[0] != "id") parse_fail(path, 1, "first column must be 'id'");
  bool continuous_coords = false;
  if (names[1] == "row" && names[2] == "col") {
    continuous_coords = false;
  } else if (names[1] == "lat" && names[2] == "lon") {
    continuous_coords = true;
  } else {
    parse_fail(path, 1, "columns 2-3 must be 'row,col' or 'lat,lon'");
  }

  Dataset d;
  d.grid = grid;
  std::size_t col = 3;
  while (col < names.size() && names[col].rfind("label", 0) == 0)
    d.task_names.push_back(names[col++]);
  if (d.task_names.empty()) parse_fail(path, 1, "no label_* column found");
  for (; col < names.size(); ++col) d.feature_names.push_back(names[col]);

  struct RawRow {
    Record record;
    double lat = 0.0, lon = 0.0;
    std::size_t line_no = 0;
  };
  std::vector<RawRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != names.size())
      parse_fail(path, line_no,
                 "expected " + std::to_string(names.size()) + " fields, got " +
                     std::to_string(fields.size()));
    RawRow row;
    row.line_no = line_no;
    row.record.id = parse_int(fields[0], path, line_no, "id");
    if (continuous_coords) {
      row.lat = parse_double(fields[1], path, line_no, "lat");
      row.lon = parse_double(fields[2], path, line_no, "lon");
    } else {
      const long long r = parse_int(fields[1], path, line_no, "row");
      const long long c = parse_int(fields[2], path, line_no, "col");
      if (r < 0 || r >= grid.rows || c < 0 || c >= grid.cols)
        parse_fail(path, line_no,
                   "cell (" + std::to_string(r) + "," + std::to_string(c) +
                       ") outside the " + std::to_string(grid.rows) + "x" +
                       std::to_string(grid.cols) + " grid");
      row.record.cell = {static_cast<int>(r), static_cast<int>(c)};
    }
    for (std::size_t t = 0; t < d.task_names.size(); ++t) {
      const double v = parse_double(fields[3 + t], path, line_no, d.task_names[t]);
      const auto threshold = options.label_thresholds.find(static_cast<int>(t));
      if (threshold != options.label_thresholds.end()) {
        row.record.labels.push_back(v >= threshold->second ? 1 : 0);
      } else if (v == 0.0 || v == 1.0) {
        row.record.labels.push_back(static_cast<std::uint8_t>(v));
      } else {
        parse_fail(path, line_no,
                   "label value '" + trimmed(fields[3 + t]) + "' is not 0 or 1");
      }
    }
    for (std::size_t f = 0; f < d.feature_names.size(); ++f)
      row.record.features.push_back(parse_double(fields[3 + d.task_names.size() + f],
                                                 path, line_no, d.feature_names[f]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": dataset has no records");

  if (continuous_coords) {
    double lat_min = std::numeric_limits<double>::infinity();
    double lat_max = -std::numeric_limits<double>::infinity();
    double lon_min = lat_min, lon_max = lat_max;
    for (const RawRow& row : rows) {
      lat_min = std::min(lat_min, row.lat);
      lat_max = std::max(lat_max, row.lat);
      lon_min = std::min(lon_min, row.lon);
      lon_max = std::max(lon_max, row.lon);
    }
    for (RawRow& row : rows) {
      row.record.cell = {quantize(row.lat, lat_min, lat_max, grid.rows),
                         quantize(row.lon, lon_min, lon_max, grid.cols)};
    }
  }

  d.records.reserve(rows.size());
  for (RawRow& row : rows) d.records.push_back(std::move(row.record));
  try {
    validate_dataset(d);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return d;
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "id,row,col";
  for (const std::string& t : d.task_names) out << "," << t;
  for (const std::string& f : d.feature_names) out << "," << f;
  out << "\n";
  for (const Record& r : d.records) {
    out << r.id << "," << r.cell.row << "," << r.cell.col;
    for (auto y : r.labels) out << "," << static_cast<int>(y);
    for (double f : r.features) out << "," << format_double(f);
    out << "\n";
  }
}

Partitioning read_partitioning_csv(const std::string& path, const GridSpec& grid) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, 1, "missing header row");
  const std::vector<std::string> header = split_line(line);
  const std::vector<std::string> expected{"region_id", "row_min", "row_max", "col_min",
                                          "col_max"};
  if (header.size() != expected.size()) parse_fail(path, 1, "unexpected header");
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (trimmed(header[i]) != expected[i])
      parse_fail(path, 1, "expected column '" + expected[i] + "'");

  Partitioning p;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != expected.size()) parse_fail(path, line_no, "wrong field count");
    const long long id = parse_int(fields[0], path, line_no, "region_id");
    if (id != static_cast<long long>(p.regions.size()))
      parse_fail(path, line_no,
                 "region ids must be consecutive from 0, got " + std::to_string(id));
    Region r;
    r.row_min = static_cast<int>(parse_int(fields[1], path, line_no, "row_min"));
    r.row_max = static_cast<int>(parse_int(fields[2], path, line_no, "row_max"));
    r.col_min = static_cast<int>(parse_int(fields[3], path, line_no, "col_min"));
    r.col_max = static_cast<int>(parse_int(fields[4], path, line_no, "col_max"));
    p.regions.push_back(r);
  }
  const ValidationResult valid = validate_partitioning(p, grid);
  if (!valid) throw std::runtime_error(path + ": invalid partitioning: " + valid.message);
  return p;
}

void write_partitioning_csv(const Partitioning& p, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "region_id,row_min,row_max,col_min,col_max\n";
  for (std::size_t i = 0; i < p.regions.size(); ++i) {
    const Region& r = p.regions[i];
    out << i << "," << r.row_min << "," << r.row_max << "," << r.col_min << ","
        << r.col_max << "\n";
  }
}

void write_partitioning_json(const Partitioning& p, const GridSpec& grid,
                             const std::string& path) {
  ordered_json doc;
  doc["grid"] = ordered_json{{"rows", grid.rows}, {"cols", grid.cols}};
  doc["regions"] = ordered_json::array();
  for (std::size_t i = 0; i < p.regions.size(); ++i) {
    ordered_json r = region_json(p.regions[i]);
    ordered_json entry;
    entry["id"] = i;
    entry.update(r);
    doc["regions"].push_back(entry);
  }
  open_output(path) << doc.dump(2) << "\n";
}

void write_tree_json(const FairTree& tree, const std::string& path) {
  ordered_json doc;
  doc["grid"] = ordered_json{{"rows", tree.grid.rows}, {"cols", tree.grid.cols}};
  doc["height"] = tree.height;
  doc["root"] = tree.root;
  doc["nodes"] = ordered_json::array();
  for (const FairTreeNode& node : tree.nodes) {
    ordered_json n;
    n["region"] = region_json(node.region);
    if (node.is_leaf()) {
      n["leaf"] = true;
      n["region_id"] = node.leaf_id;
    } else {
      n["axis"] = node.axis == static_cast<int>(Axis::Row) ? "row" : "col";
      n["k"] = node.split_index;
      n["left"] = node.left;
      n["right"] = node.right;
    }
    doc["nodes"].push_back(n);
  }
  open_output(path) << doc.dump(2) << "\n";
}

void write_report_json(const CalibrationReport& report, const ReportMeta& meta,
                       const std::string& path) {
  ordered_json doc;
  doc["overall"] = ordered_json{{"e", report.overall_expected},
                                {"o", report.overall_observed},
                                {"ence", report.ence},
                                {"ece", report.ece},
                                {"accuracy", report.accuracy}};
  doc["regions"] = ordered_json::array();
  for (const RegionCalibration& rc : report.regions) {
    ordered_json r;
    r["id"] = rc.region_id;
    r["count"] = rc.count;
    r["e"] = rc.expected;
    r["o"] = rc.observed;
    r["abs_miscal"] = rc.abs_miscal;
    doc["regions"].push_back(r);
  }
  doc["meta"] = ordered_json{{"algorithm", meta.algorithm},
                             {"height", meta.height},
                             {"seed", meta.seed},
                             {"split", meta.split_fraction},
                             {"role", meta.role},
                             {"ece_bins", report.ece_bins},
                             {"threshold", report.threshold}};
  open_output(path) << doc.dump(2) << "\n";
}

}  // namespace fairdex
