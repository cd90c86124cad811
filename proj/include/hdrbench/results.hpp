/*
 * Copyright 2026 The hdrbench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Run records and their JSON-lines store.
//
// One record per line. Every line carries "schema_version"; a store written
// by a different version is rejected. When a key appears more than once the
// last line wins, so a fresh re-run simply appends.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "hdrbench/curves.hpp"
#include "hdrbench/error.hpp"
#include "hdrbench/measure.hpp"
#include "hdrbench/metrics.hpp"

namespace hdrbench {

inline constexpr int kResultsSchemaVersion = 1;

struct RunRecord {
  std::string key;
  std::string sequence;
  std::string variant;
  int qp = 0;
  std::size_t frame_count = 0;
  double frame_rate = 0.0;
  std::uint64_t bitstream_bytes = 0;
  double bitrate = 0.0;  // bits/s from the bitstream size
  std::optional<double> encoder_reported_bitrate;
  QualityRecord quality;
  /// Keyed by platform label.
  std::map<std::string, AggregatedMeasurement> measurements;
  std::string bitstream_digest;

  std::uint64_t bitstream_bits() const { return bitstream_bytes * 8; }

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

inline double bitrate_from_size(std::uint64_t bytes, std::size_t frames, double frame_rate) {
  if (frames == 0) throw ValidationError("cannot compute a bitrate for zero frames");
  return static_cast<double>(bytes) * 8.0 * frame_rate / static_cast<double>(frames);
}

// --- JSON -----------------------------------------------------------------

namespace json_detail {

using nlohmann::json;

/// Infinite dB values are written as the string "inf".
inline json db_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double db_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInfinitePsnr;
    if (s == "-inf") return -kInfinitePsnr;
    throw ParseError("bad dB value '" + s + "'");
  }
  return j.get<double>();
}

template <typename T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace json_detail

inline void to_json(nlohmann::json& j, const QualityRecord& q) {
  using namespace json_detail;
  j = json{{"psnr_y", db_to_json(q.psnr_y)},
           {"psnr_u", db_to_json(q.psnr_u)},
           {"psnr_v", db_to_json(q.psnr_v)},
           {"psnr_yuv", db_to_json(q.psnr_yuv)},
           {"external_score", optional_to_json(q.external_score)}};
}

inline void from_json(const nlohmann::json& j, QualityRecord& q) {
  using namespace json_detail;
  q.psnr_y = db_from_json(j.at("psnr_y"));
  q.psnr_u = db_from_json(j.at("psnr_u"));
  q.psnr_v = db_from_json(j.at("psnr_v"));
  q.psnr_yuv = db_from_json(j.at("psnr_yuv"));
  q.external_score = optional_from_json<double>(j, "external_score");
}

inline void to_json(nlohmann::json& j, const MeasurementSample& s) {
  j = nlohmann::json{{"wall_time", s.wall_time},
                     {"cpu_time", s.cpu_time},
                     {"energy", json_detail::optional_to_json(s.energy)},
                     {"pinned", s.pinned}};
}

inline void from_json(const nlohmann::json& j, MeasurementSample& s) {
  s.wall_time = j.at("wall_time").get<double>();
  s.cpu_time = j.at("cpu_time").get<double>();
  s.energy = json_detail::optional_from_json<double>(j, "energy");
  s.pinned = j.value("pinned", false);
}

inline void to_json(nlohmann::json& j, const AggregatedMeasurement& m) {
  j = nlohmann::json{{"samples", m.samples},
                     {"mean_wall_time", m.mean_wall_time},
                     {"mean_cpu_time", m.mean_cpu_time},
                     {"mean_energy", json_detail::optional_to_json(m.mean_energy)},
                     {"retained_count", m.retained_count},
                     {"warnings", m.warnings}};
}

inline void from_json(const nlohmann::json& j, AggregatedMeasurement& m) {
  m.samples = j.at("samples").get<std::vector<MeasurementSample>>();
  m.mean_wall_time = j.at("mean_wall_time").get<double>();
  m.mean_cpu_time = j.at("mean_cpu_time").get<double>();
  m.mean_energy = json_detail::optional_from_json<double>(j, "mean_energy");
  m.retained_count = j.at("retained_count").get<std::size_t>();
  m.warnings = j.value("warnings", std::vector<std::string>{});
}

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{{"schema_version", kResultsSchemaVersion},
                     {"key", r.key},
                     {"sequence", r.sequence},
                     {"variant", r.variant},
                     {"qp", r.qp},
                     {"frame_count", r.frame_count},
                     {"frame_rate", r.frame_rate},
                     {"bitstream_bytes", r.bitstream_bytes},
                     {"bitrate", r.bitrate},
                     {"encoder_reported_bitrate", json_detail::optional_to_json(r.encoder_reported_bitrate)},
                     {"quality", r.quality},
                     {"measurements", r.measurements},
                     {"bitstream_digest", r.bitstream_digest}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
  r.key = j.at("key").get<std::string>();
  r.sequence = j.at("sequence").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.qp = j.at("qp").get<int>();
  r.frame_count = j.at("frame_count").get<std::size_t>();
  r.frame_rate = j.at("frame_rate").get<double>();
  r.bitstream_bytes = j.at("bitstream_bytes").get<std::uint64_t>();
  r.bitrate = j.at("bitrate").get<double>();
  r.encoder_reported_bitrate = json_detail::optional_from_json<double>(j, "encoder_reported_bitrate");
  r.quality = j.at("quality").get<QualityRecord>();
  r.measurements = j.at("measurements").get<std::map<std::string, AggregatedMeasurement>>();
  r.bitstream_digest = j.at("bitstream_digest").get<std::string>();
}

inline void to_json(nlohmann::json& j, const ComparisonRow& row) {
  j = nlohmann::json{{"sequence", row.sequence},
                     {"intersection_quality", json_detail::optional_to_json(row.intersection_quality)},
                     {"ceil_qp", json_detail::optional_to_json(row.ceil_qp)},
                     {"columns", nlohmann::json::array()}};
  for (const auto& c : row.columns) j["columns"].push_back({{"name", c.name}, {"value", c.value}});
}

inline void from_json(const nlohmann::json& j, ComparisonRow& row) {
  row.sequence = j.at("sequence").get<std::string>();
  row.intersection_quality = json_detail::optional_from_json<double>(j, "intersection_quality");
  row.ceil_qp = json_detail::optional_from_json<int>(j, "ceil_qp");
  row.columns.clear();
  for (const auto& c : j.at("columns")) {
    row.columns.push_back({c.at("name").get<std::string>(), c.at("value").get<double>()});
  }
}

inline void to_json(nlohmann::json& j, const BdReport& r) {
  j = nlohmann::json{{"metric", bd_label(r.kind)},
                     {"cost", cost_kind_name(r.kind)},
                     {"bd_percent", r.bd_percent},
                     {"overlap", {r.overlap.lo, r.overlap.hi}},
                     {"rcd", nlohmann::json::array()},
                     {"intersections", r.intersections},
                     {"ceil_qp", json_detail::optional_to_json(r.ceil_qp)}};
  for (const auto& s : r.rcd_samples) {
    j["rcd"].push_back({{"quality", s.quality}, {"cost_a", s.cost_a}, {"cost_b", s.cost_b}, {"percent", s.percent}});
  }
}

// --- Store ----------------------------------------------------------------

/// Records in first-insertion order; a later record with the same key
/// replaces the earlier one in place.
class ResultSet {
 public:
  void put(RunRecord r) {
    auto it = index_.find(r.key);
    if (it != index_.end()) {
      records_[it->second] = std::move(r);
    } else {
      index_.emplace(r.key, records_.size());
      records_.push_back(std::move(r));
    }
  }

  const RunRecord* find(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  const std::vector<RunRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  friend bool operator==(const ResultSet& a, const ResultSet& b) { return a.records_ == b.records_; }

 private:
  std::vector<RunRecord> records_;
  std::map<std::string, std::size_t> index_;
};

inline ResultSet load_results(const std::filesystem::path& path) {
  ResultSet set;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open results store " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw RuntimeError(path.string() + ":" + std::to_string(line_no) + ": corrupt store line: " + e.what());
    }
    if (!j.is_object() || !j.contains("schema_version")) {
      throw RuntimeError(path.string() + ":" + std::to_string(line_no) + ": record without schema_version");
    }
    if (j.at("schema_version") != kResultsSchemaVersion) {
      throw RuntimeError(path.string() + ":" + std::to_string(line_no) + ": schema version " +
                         j.at("schema_version").dump() + " is not supported (expected " +
                         std::to_string(kResultsSchemaVersion) + ")");
    }
    try {
      set.put(j.get<RunRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw RuntimeError(path.string() + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
    } catch (const ParseError& e) {
      throw RuntimeError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return set;
}

/// Loads several stores and merges them. Records describing the same cell
/// (sequence, variant, QP) from different stores are combined so that
/// measurements from different platform labels end up side by side.
inline ResultSet merge_results(const std::vector<ResultSet>& sets) {
  ResultSet merged;
  std::map<std::tuple<std::string, std::string, int>, RunRecord> cells;
  std::vector<std::tuple<std::string, std::string, int>> order;
  for (const auto& set : sets) {
    for (const auto& r : set.records()) {
      auto id = std::make_tuple(r.sequence, r.variant, r.qp);
      auto it = cells.find(id);
      if (it == cells.end()) {
        cells.emplace(id, r);
        order.push_back(id);
      } else {
        for (const auto& [label, m] : r.measurements) it->second.measurements[label] = m;
      }
    }
  }
  for (const auto& id : order) merged.put(cells.at(id));
  return merged;
}

/// Append-only writer. Each record is flushed as one complete line, so
/// readers never observe a partial record.
class ResultStoreWriter {
 public:
  explicit ResultStoreWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::app) {
    if (!out_) throw IoError("cannot open results store " + path.string() + " for writing");
  }

  void append(const RunRecord& r) {
    out_ << nlohmann::json(r).dump() << '\n';
    out_.flush();
    if (!out_) throw IoError("write to " + path_.string() + " failed");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void store_results(const ResultSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open results store " + path.string() + " for writing");
  for (const auto& r : set.records()) out << nlohmann::json(r).dump() << '\n';
  if (!out) throw IoError("write to " + path.string() + " failed");
}

}  // namespace hdrbench
