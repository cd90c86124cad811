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

// Per-sequence comparison tables built from run records.
//
// The main table compares a candidate variant (default 8-8) with the
// reference (default 10-10): the PSNR-YUV where their rate curves cross,
// the QP ceiling on the reference ladder, BD-time per platform label and
// BD-energy per label that has energy, plus an average row. Every other
// variant present is additionally compared with the reference pairwise.

#pragma once

#include <algorithm>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdrbench/curves.hpp"
#include "hdrbench/error.hpp"
#include "hdrbench/results.hpp"

namespace hdrbench {

enum class ComplexityQuality {
  /// External score when every involved record has one, else PSNR-YUV.
  automatic,
  psnr,
  external,
};

struct ReportOptions {
  std::string reference = "10-10";
  std::string candidate = "8-8";
  ComplexityQuality complexity_quality = ComplexityQuality::automatic;
};

struct PairwiseEntry {
  std::string sequence;
  std::string reference;
  std::string candidate;
  std::string metric;  // e.g. "BD-rate[psnr_yuv]", "BDT_L[external]"
  double bd_percent = 0.0;
};

struct Report {
  std::string reference;
  std::string candidate;
  std::vector<ComparisonRow> rows;
  ComparisonRow average;
  std::vector<PairwiseEntry> pairs;
  std::vector<std::string> warnings;
};

namespace report_detail {

using Ladder = std::vector<const RunRecord*>;

inline constexpr const char* kPsnrAxis = "psnr_yuv";
inline constexpr const char* kExternalAxis = "external";

inline bool has_external(const Ladder& l) {
  return std::all_of(l.begin(), l.end(), [](const RunRecord* r) { return r->quality.external_score.has_value(); });
}

inline double quality_of(const RunRecord& r, const std::string& axis) {
  return axis == kExternalAxis ? r.quality.external_score.value() : r.quality.psnr_yuv;
}

inline Curve rate_curve(const Ladder& l, const std::string& axis) {
  std::vector<OperatingPoint> pts;
  for (const auto* r : l) pts.push_back({r->qp, quality_of(*r, axis), r->bitrate});
  return Curve(std::move(pts), {axis, CostKind::rate}, CostOrder::increasing);
}

inline std::optional<Curve> complexity_curve(const Ladder& l, const std::string& axis, const std::string& label,
                                             CostKind kind) {
  std::vector<OperatingPoint> pts;
  for (const auto* r : l) {
    auto it = r->measurements.find(label);
    if (it == r->measurements.end()) return std::nullopt;
    double cost;
    if (kind == CostKind::time) {
      cost = it->second.mean_cpu_time;
    } else {
      if (!it->second.mean_energy) return std::nullopt;
      cost = *it->second.mean_energy;
    }
    pts.push_back({r->qp, quality_of(*r, axis), cost});
  }
  return Curve(std::move(pts), {axis, kind}, CostOrder::unconstrained);
}

inline std::vector<std::string> labels_of(const Ladder& l) {
  std::vector<std::string> out;
  for (const auto* r : l) {
    for (const auto& [label, m] : r->measurements) {
      if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
    }
  }
  return out;
}

inline std::set<int> qps_of(const Ladder& l) {
  std::set<int> s;
  for (const auto* r : l) s.insert(r->qp);
  return s;
}

/// BDT_<label> columns for every label, then BDEE_<label> where energy
/// exists on both sides. Columns whose curves are unusable (say, a zero CPU
/// time) are skipped with a warning.
inline std::vector<CurvePair> complexity_pairs(const Ladder& ref, const Ladder& cand, const std::string& axis,
                                               const std::string& context, std::vector<std::string>& warnings) {
  std::vector<CurvePair> out;
  const auto labels = labels_of(ref);
  for (CostKind kind : {CostKind::time, CostKind::energy}) {
    for (const auto& label : labels) {
      const std::string column = std::string(kind == CostKind::time ? "BDT_" : "BDEE_") + label;
      try {
        auto a = complexity_curve(ref, axis, label, kind);
        auto b = complexity_curve(cand, axis, label, kind);
        if (a && b) out.push_back({column, *a, *b});
      } catch (const ValidationError& e) {
        warnings.push_back(context + ": " + column + " skipped: " + e.what());
      }
    }
  }
  return out;
}

}  // namespace report_detail

inline Report build_report(const ResultSet& results, const ReportOptions& options = {}) {
  using namespace report_detail;
  Report report;
  report.reference = options.reference;
  report.candidate = options.candidate;

  std::vector<std::string> sequences;
  std::vector<std::string> variants;
  std::map<std::pair<std::string, std::string>, Ladder> ladders;
  for (const auto& r : results.records()) {
    if (std::find(sequences.begin(), sequences.end(), r.sequence) == sequences.end()) sequences.push_back(r.sequence);
    if (std::find(variants.begin(), variants.end(), r.variant) == variants.end()) variants.push_back(r.variant);
    ladders[{r.sequence, r.variant}].push_back(&r);
  }
  if (sequences.empty()) throw ValidationError("no run records to report on");

  auto ladder = [&](const std::string& seq, const std::string& variant) -> const Ladder* {
    auto it = ladders.find({seq, variant});
    return it == ladders.end() ? nullptr : &it->second;
  };

  auto choose_axis = [&](const Ladder& a, const Ladder& b) -> std::string {
    switch (options.complexity_quality) {
      case ComplexityQuality::psnr: return kPsnrAxis;
      case ComplexityQuality::external:
        if (!has_external(a) || !has_external(b)) {
          throw ValidationError("external quality scores requested but missing from some records");
        }
        return kExternalAxis;
      case ComplexityQuality::automatic: return has_external(a) && has_external(b) ? kExternalAxis : kPsnrAxis;
    }
    return kPsnrAxis;
  };

  for (const auto& seq : sequences) {
    const Ladder* ref = ladder(seq, options.reference);
    const Ladder* cand = ladder(seq, options.candidate);
    if (!ref || !cand) {
      throw ValidationError("sequence " + seq + ": incomplete ladder, need both " + options.reference + " and " +
                            options.candidate + " runs");
    }
    if (qps_of(*ref) != qps_of(*cand)) {
      throw ValidationError("sequence " + seq + ": " + options.reference + " and " + options.candidate +
                            " were run on different QP ladders");
    }
    const Curve ref_rate = rate_curve(*ref, kPsnrAxis);
    const Curve cand_rate = rate_curve(*cand, kPsnrAxis);
    const std::string axis = choose_axis(*ref, *cand);
    const auto complexity = complexity_pairs(*ref, *cand, axis, "sequence " + seq, report.warnings);
    report.rows.push_back(report_row(seq, ref_rate, cand_rate, complexity));
  }
  report.average = average_row(report.rows);

  // Pairwise deltas of every variant against the reference.
  for (const auto& seq : sequences) {
    const Ladder* ref = ladder(seq, options.reference);
    for (const auto& variant : variants) {
      if (variant == options.reference) continue;
      const Ladder* cand = ladder(seq, variant);
      if (!cand) continue;
      try {
        std::vector<std::string> axes = {kPsnrAxis};
        if (has_external(*ref) && has_external(*cand)) axes.push_back(kExternalAxis);
        for (const auto& axis : axes) {
          report.pairs.push_back({seq, options.reference, variant, "BD-rate[" + axis + "]",
                                  bd_delta(rate_curve(*ref, axis), rate_curve(*cand, axis))});
        }
        const std::string axis = choose_axis(*ref, *cand);
        std::vector<std::string> skipped;
        const auto pairs = complexity_pairs(*ref, *cand, axis, "sequence " + seq + ", " + variant, skipped);
        // The candidate's skipped columns were already reported for the main table.
        if (variant != options.candidate) report.warnings.insert(report.warnings.end(), skipped.begin(), skipped.end());
        for (const auto& pair : pairs) {
          report.pairs.push_back({seq, options.reference, variant, pair.column + "[" + axis + "]",
                                  bd_delta(pair.reference, pair.candidate)});
        }
      } catch (const ValidationError& e) {
        report.warnings.push_back("sequence " + seq + ", " + variant + " vs " + options.reference + ": " + e.what());
      }
    }
  }

  // X and X-nosimd differ only in SIMD use and must produce identical
  // bitstreams.
  for (const auto& variant : variants) {
    const std::string nosimd = variant + "-nosimd";
    if (std::find(variants.begin(), variants.end(), nosimd) == variants.end()) continue;
    for (const auto& seq : sequences) {
      const Ladder* a = ladder(seq, variant);
      const Ladder* b = ladder(seq, nosimd);
      if (!a || !b) continue;
      for (const auto* ra : *a) {
        for (const auto* rb : *b) {
          if (ra->qp == rb->qp && ra->bitstream_digest != rb->bitstream_digest) {
            report.warnings.push_back("sequence " + seq + " QP " + std::to_string(ra->qp) + ": " + variant + " and " +
                                      nosimd + " bitstreams differ");
          }
        }
      }
    }
  }
  return report;
}

namespace report_detail {

inline std::vector<std::string> column_names(const Report& r) {
  std::vector<std::string> names;
  for (const auto& row : r.rows) {
    for (const auto& c : row.columns) {
      if (std::find(names.begin(), names.end(), c.name) == names.end()) names.push_back(c.name);
    }
  }
  return names;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace report_detail

/// Aligned plain-text table.
inline std::string format_table(const Report& report) {
  using namespace report_detail;
  const auto names = column_names(report);
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"Sequence", "PSNR", "ceil(QP)"};
  header.insert(header.end(), names.begin(), names.end());
  cells.push_back(header);
  auto add = [&](const ComparisonRow& row) {
    std::vector<std::string> line = {row.sequence,
                                     row.intersection_quality ? fixed(*row.intersection_quality, 2) : "-",
                                     row.ceil_qp ? std::to_string(*row.ceil_qp) : "-"};
    for (const auto& n : names) {
      auto v = row.column(n);
      line.push_back(v ? fixed(*v, 1) + "%" : "-");
    }
    cells.push_back(line);
  };
  for (const auto& row : report.rows) add(row);
  ComparisonRow avg = report.average;
  avg.intersection_quality.reset();
  avg.ceil_qp.reset();
  add(avg);

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream os;
  os << report.candidate << " vs " << report.reference << "\n";
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k == 1 || k + 1 == cells.size()) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      os << std::string(total, '-') << "\n";
    }
    for (std::size_t i = 0; i < cells[k].size(); ++i) {
      if (i == 0) {
        os << std::left << std::setw(static_cast<int>(width[i])) << cells[k][i];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[i])) << cells[k][i];
      }
    }
    os << "\n";
  }
  if (!report.pairs.empty()) {
    os << "\nPairwise deltas against " << report.reference << "\n";
    for (const auto& p : report.pairs) {
      os << "  " << p.sequence << "  " << p.candidate << "  " << p.metric << "  " << fixed(p.bd_percent, 2) << "%\n";
    }
  }
  for (const auto& w : report.warnings) os << "warning: " << w << "\n";
  return os.str();
}

/// CSV twin of the table: one line per sequence plus the average.
inline void write_report_csv(std::ostream& out, const Report& report) {
  const auto names = report_detail::column_names(report);
  out << "sequence,intersection_psnr,ceil_qp";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  out.precision(17);
  auto line = [&](const ComparisonRow& row, bool with_crossing) {
    out << row.sequence << ',';
    if (with_crossing && row.intersection_quality) out << *row.intersection_quality;
    out << ',';
    if (with_crossing && row.ceil_qp) out << *row.ceil_qp;
    for (const auto& n : names) {
      out << ',';
      if (auto v = row.column(n)) out << *v;
    }
    out << '\n';
  };
  for (const auto& row : report.rows) line(row, true);
  line(report.average, false);
}

inline nlohmann::json report_to_json(const Report& report) {
  nlohmann::json j;
  j["reference"] = report.reference;
  j["candidate"] = report.candidate;
  j["rows"] = report.rows;
  j["average"] = report.average;
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : report.pairs) {
    j["pairs"].push_back({{"sequence", p.sequence},
                          {"reference", p.reference},
                          {"candidate", p.candidate},
                          {"metric", p.metric},
                          {"bd_percent", p.bd_percent}});
  }
  j["warnings"] = report.warnings;
  return j;
}

}  // namespace hdrbench
