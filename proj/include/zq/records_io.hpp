// Copyright 2026 The zeeman-qubit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// CSV files exchanged between the simulator, the estimator and lab data.
//
// records:   wait_time_s,shots_x,bright_x,shots_y,bright_y,trigger_mode,wall_time_s
// estimates: wait_time_s,wall_time_s,trigger_mode,contrast,contrast_raw,phase_rad,
//            ci_low,ci_high,confidence,on_boundary,phase_defined

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "zq/errors.hpp"
#include "zq/measurement.hpp"
#include "zq/mle.hpp"
#include "zq/units.hpp"

namespace zq {

struct EstimateRow {
  double wait_time = 0.0;
  double wall_time = 0.0;
  TriggerMode trigger_mode = TriggerMode::triggered;
  CoherenceEstimate estimate;  // readout-compensated
  double contrast_raw = 0.0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Header-indexed CSV table; cell() reports errors with line and column.
class CsvTable {
 public:
  CsvTable(std::istream& in, std::string source) : source_(std::move(source)) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty() || line.front() == '#') continue;
      if (header_.empty()) {
        header_ = split_csv_line(line);
        continue;
      }
      auto cells = split_csv_line(line);
      require(cells.size() == header_.size(), source_ + " line " + std::to_string(lineno) + ": expected " +
                                                  std::to_string(header_.size()) + " columns, found " +
                                                  std::to_string(cells.size()));
      rows_.push_back(std::move(cells));
      lines_.push_back(lineno);
    }
    require(!header_.empty(), source_ + ": missing header line");
  }

  bool has(std::string_view column) const { return find(column) >= 0; }

  void require_columns(std::initializer_list<std::string_view> cols) const {
    for (auto c : cols) require(has(c), source_ + ": missing column '" + std::string(c) + "'");
  }

  std::size_t size() const { return rows_.size(); }

  const std::string& cell(std::size_t row, std::string_view column) const {
    return rows_[row][static_cast<std::size_t>(find(column))];
  }

  std::string where(std::size_t row, std::string_view column) const {
    return source_ + " line " + std::to_string(lines_[row]) + ", column " + std::string(column);
  }

  double number(std::size_t row, std::string_view column) const {
    const auto& s = cell(row, column);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v),
            where(row, column) + ": expected a number, got '" + s + "'");
    return v;
  }

  long count(std::size_t row, std::string_view column) const {
    const auto& s = cell(row, column);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc() && ptr == s.data() + s.size(),
            where(row, column) + ": expected a non-negative integer, got '" + s + "'");
    require(v >= 0, where(row, column) + ": must be non-negative, got " + s);
    return v;
  }

  bool flag(std::size_t row, std::string_view column) const {
    const auto& s = cell(row, column);
    require(s == "0" || s == "1" || s == "true" || s == "false", where(row, column) + ": expected 0 or 1, got '" + s + "'");
    return s == "1" || s == "true";
  }

 private:
  int find(std::string_view column) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (header_[i] == column) return static_cast<int>(i);
    }
    return -1;
  }

  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

inline TriggerMode trigger_cell(const CsvTable& t, std::size_t row) {
  try {
    return parse_trigger_mode(t.cell(row, "trigger_mode"));
  } catch (const ValidationError& e) {
    throw ValidationError(t.where(row, "trigger_mode") + ": " + e.what());
  }
}

}  // namespace detail

inline constexpr std::string_view kRecordsHeader =
    "wait_time_s,shots_x,bright_x,shots_y,bright_y,trigger_mode,wall_time_s";
inline constexpr std::string_view kEstimatesHeader =
    "wait_time_s,wall_time_s,trigger_mode,contrast,contrast_raw,phase_rad,ci_low,ci_high,confidence,"
    "on_boundary,phase_defined";

inline void write_records_csv(std::ostream& out, const std::vector<MeasurementRecord>& records) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << format_number(r.wait_time) << ',' << r.shots_x << ',' << r.bright_x << ',' << r.shots_y << ','
        << r.bright_y << ',' << to_string(r.trigger_mode) << ',' << format_number(r.wall_time) << '\n';
  }
}

// wall_time_s may be omitted (lab data taken at one time); every other column
// is required.
inline std::vector<MeasurementRecord> read_records_csv(std::istream& in, const std::string& source = "records") {
  const detail::CsvTable t(in, source);
  t.require_columns({"wait_time_s", "shots_x", "bright_x", "shots_y", "bright_y", "trigger_mode"});
  std::vector<MeasurementRecord> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    MeasurementRecord r;
    r.wait_time = t.number(i, "wait_time_s");
    detail::require(r.wait_time > 0.0, t.where(i, "wait_time_s") + ": must be positive");
    r.shots_x = t.count(i, "shots_x");
    r.bright_x = t.count(i, "bright_x");
    r.shots_y = t.count(i, "shots_y");
    r.bright_y = t.count(i, "bright_y");
    detail::require(r.shots_x > 0, t.where(i, "shots_x") + ": must be positive");
    detail::require(r.shots_y > 0, t.where(i, "shots_y") + ": must be positive");
    detail::require(r.bright_x <= r.shots_x, t.where(i, "bright_x") + ": " + std::to_string(r.bright_x) +
                                                 " exceeds shots_x (" + std::to_string(r.shots_x) + ")");
    detail::require(r.bright_y <= r.shots_y, t.where(i, "bright_y") + ": " + std::to_string(r.bright_y) +
                                                 " exceeds shots_y (" + std::to_string(r.shots_y) + ")");
    r.trigger_mode = detail::trigger_cell(t, i);
    r.wall_time = t.has("wall_time_s") ? t.number(i, "wall_time_s") : 0.0;
    out.push_back(r);
  }
  detail::require(!out.empty(), source + ": no records");
  return out;
}

inline void write_estimates_csv(std::ostream& out, const std::vector<EstimateRow>& rows) {
  out << kEstimatesHeader << '\n';
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    out << format_number(r.wait_time) << ',' << format_number(r.wall_time) << ',' << to_string(r.trigger_mode) << ','
        << format_number(e.contrast) << ',' << format_number(r.contrast_raw) << ',' << format_number(e.phase) << ','
        << format_number(e.ci_low) << ',' << format_number(e.ci_high) << ',' << format_number(e.confidence) << ','
        << (e.on_boundary ? 1 : 0) << ',' << (e.phase_defined ? 1 : 0) << '\n';
  }
}

// Reads estimates; only wait_time_s and contrast are required, confidence
// defaults to 0 (unweighted fits).
inline std::vector<EstimateRow> read_estimates_csv(std::istream& in, const std::string& source = "estimates") {
  const detail::CsvTable t(in, source);
  t.require_columns({"wait_time_s", "contrast"});
  std::vector<EstimateRow> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    EstimateRow r;
    r.wait_time = t.number(i, "wait_time_s");
    r.wall_time = t.has("wall_time_s") ? t.number(i, "wall_time_s") : 0.0;
    if (t.has("trigger_mode")) r.trigger_mode = detail::trigger_cell(t, i);
    auto& e = r.estimate;
    e.contrast = t.number(i, "contrast");
    detail::require(e.contrast >= 0.0 && e.contrast <= 1.0, t.where(i, "contrast") + ": must lie in [0, 1]");
    r.contrast_raw = t.has("contrast_raw") ? t.number(i, "contrast_raw") : e.contrast;
    if (t.has("phase_rad")) e.phase = t.number(i, "phase_rad");
    if (t.has("ci_low")) e.ci_low = t.number(i, "ci_low");
    if (t.has("ci_high")) e.ci_high = t.number(i, "ci_high");
    if (t.has("confidence")) {
      e.confidence = t.number(i, "confidence");
      detail::require(e.confidence >= 0.0, t.where(i, "confidence") + ": must be non-negative");
    }
    if (t.has("on_boundary")) e.on_boundary = t.flag(i, "on_boundary");
    if (t.has("phase_defined")) e.phase_defined = t.flag(i, "phase_defined");
    out.push_back(r);
  }
  detail::require(!out.empty(), source + ": no estimates");
  return out;
}

enum class CsvKind { records, estimates };

// Tells the two CSV layouts apart by their header.
inline CsvKind detect_csv_kind(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty() || line.front() == '#') continue;
    const auto cols = detail::split_csv_line(line);
    auto has = [&](std::string_view c) { return std::find(cols.begin(), cols.end(), c) != cols.end(); };
    if (has("bright_x")) return CsvKind::records;
    if (has("contrast")) return CsvKind::estimates;
    break;
  }
  throw ValidationError(source + ": header matches neither the records nor the estimates layout");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  detail::require(static_cast<bool>(in), path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace zq
