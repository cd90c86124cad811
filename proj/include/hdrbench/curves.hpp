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

// Quality/cost curve analysis.
//
// Every curve is interpolated as log10(cost) over quality with Akima's
// piecewise cubic. Comparisons between two curves (Bjontegaard delta,
// relative curve difference, crossings) are evaluated on the overlap of
// their quality ranges only; nothing is ever extrapolated.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hdrbench/error.hpp"

namespace hdrbench {

enum class CostKind { rate, time, energy };

inline const char* cost_kind_name(CostKind k) {
  switch (k) {
    case CostKind::rate: return "rate";
    case CostKind::time: return "time";
    case CostKind::energy: return "energy";
  }
  return "?";
}

inline const char* cost_unit(CostKind k) {
  switch (k) {
    case CostKind::rate: return "bits/s";
    case CostKind::time: return "s";
    case CostKind::energy: return "J";
  }
  return "?";
}

/// BD-rate, BD-time (BDT) or BD-encoding-energy (BDEE).
inline const char* bd_label(CostKind k) {
  switch (k) {
    case CostKind::rate: return "BD-rate";
    case CostKind::time: return "BDT";
    case CostKind::energy: return "BDEE";
  }
  return "?";
}

inline CostKind parse_cost_kind(std::string_view s) {
  if (s == "rate") return CostKind::rate;
  if (s == "time") return CostKind::time;
  if (s == "energy") return CostKind::energy;
  throw ValidationError("unknown cost kind '" + std::string(s) + "' (expected rate, time or energy)");
}

struct Axes {
  std::string quality = "psnr_yuv";
  CostKind cost = CostKind::rate;

  friend bool operator==(const Axes&, const Axes&) = default;
};

struct OperatingPoint {
  int qp = 0;
  double quality = 0.0;
  double cost = 0.0;

  friend bool operator==(const OperatingPoint&, const OperatingPoint&) = default;
};

/// How strictly a curve's cost must follow its quality.
enum class CostOrder {
  /// Cost strictly increases with quality (rate-distortion ladders).
  increasing,
  /// Only quality has to be strictly ordered. Measured times and energies
  /// are noisy and need not be monotone.
  unconstrained,
};

inline constexpr std::size_t kMinCurvePoints = 4;

class Curve {
 public:
  Curve(std::vector<OperatingPoint> points, Axes axes, CostOrder order = CostOrder::increasing)
      : points_(std::move(points)), axes_(std::move(axes)) {
    if (points_.size() < kMinCurvePoints) {
      throw ValidationError("a curve needs at least " + std::to_string(kMinCurvePoints) + " points, got " +
                            std::to_string(points_.size()));
    }
    for (const auto& p : points_) {
      if (!std::isfinite(p.quality)) {
        throw ValidationError("non-finite quality at QP " + std::to_string(p.qp));
      }
      if (!(p.cost > 0.0) || !std::isfinite(p.cost)) {
        throw ValidationError("cost must be positive and finite at QP " + std::to_string(p.qp));
      }
    }
    std::sort(points_.begin(), points_.end(),
              [](const OperatingPoint& a, const OperatingPoint& b) { return a.quality < b.quality; });
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i].quality > points_[i - 1].quality)) {
        throw ValidationError("quality is not strictly monotone (repeated value " +
                              std::to_string(points_[i].quality) + ")");
      }
      if (order == CostOrder::increasing && !(points_[i].cost > points_[i - 1].cost)) {
        throw ValidationError("cost does not strictly increase with quality between QP " +
                              std::to_string(points_[i - 1].qp) + " and QP " + std::to_string(points_[i].qp));
      }
    }
  }

  const std::vector<OperatingPoint>& points() const { return points_; }
  const Axes& axes() const { return axes_; }
  double min_quality() const { return points_.front().quality; }
  double max_quality() const { return points_.back().quality; }

  /// Same points with every cost multiplied by `factor`.
  Curve scaled(double factor, CostOrder order = CostOrder::unconstrained) const {
    auto pts = points_;
    for (auto& p : pts) p.cost *= factor;
    return Curve(std::move(pts), axes_, order);
  }

 private:
  std::vector<OperatingPoint> points_;
  Axes axes_;
};

/// Akima's piecewise cubic through (x, y) knots with strictly increasing x.
/// End slopes follow Akima's original extrapolation: two virtual segments on
/// each side continue the slope sequence linearly.
class AkimaInterpolant {
 public:
  AkimaInterpolant(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size()) throw ValidationError("knot coordinate counts differ");
    if (n < 3) throw ValidationError("Akima interpolation needs at least 3 knots");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(x_[i] > x_[i - 1])) throw ValidationError("knots must have strictly increasing abscissae");
    }

    // slopes[k] holds segment slope m_{k-2}: two virtual slopes on each end.
    std::vector<double> slopes(n + 3);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      slopes[i + 2] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    }
    slopes[1] = 2.0 * slopes[2] - slopes[3];
    slopes[0] = 2.0 * slopes[1] - slopes[2];
    slopes[n + 1] = 2.0 * slopes[n] - slopes[n - 1];
    slopes[n + 2] = 2.0 * slopes[n + 1] - slopes[n];

    tangent_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w_left = std::abs(slopes[i + 3] - slopes[i + 2]);
      const double w_right = std::abs(slopes[i + 1] - slopes[i]);
      if (w_left + w_right == 0.0) {
        tangent_[i] = 0.5 * (slopes[i + 1] + slopes[i + 2]);
      } else {
        tangent_[i] = (w_left * slopes[i + 1] + w_right * slopes[i + 2]) / (w_left + w_right);
      }
    }

    c2_.resize(n - 1);
    c3_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = x_[i + 1] - x_[i];
      const double m = slopes[i + 2];
      c2_[i] = (3.0 * m - 2.0 * tangent_[i] - tangent_[i + 1]) / h;
      c3_[i] = (tangent_[i] + tangent_[i + 1] - 2.0 * m) / (h * h);
    }
  }

  double min_x() const { return x_.front(); }
  double max_x() const { return x_.back(); }
  std::span<const double> knots_x() const { return x_; }
  std::span<const double> knots_y() const { return y_; }
  std::span<const double> tangents() const { return tangent_; }

  bool contains(double x) const { return x >= x_.front() && x <= x_.back(); }

  double operator()(double x) const {
    if (!contains(x)) {
      throw ValidationError("evaluation at " + std::to_string(x) + " outside [" + std::to_string(x_.front()) + ", " +
                            std::to_string(x_.back()) + "]; extrapolation is not supported");
    }
    if (x == x_.back()) return y_.back();
    const std::size_t i = segment(x);
    const double dx = x - x_[i];
    return y_[i] + dx * (tangent_[i] + dx * (c2_[i] + dx * c3_[i]));
  }

  double derivative(double x) const {
    if (!contains(x)) throw ValidationError("derivative outside the knot range");
    if (x == x_.back()) return tangent_.back();
    const std::size_t i = segment(x);
    const double dx = x - x_[i];
    return tangent_[i] + dx * (2.0 * c2_[i] + 3.0 * dx * c3_[i]);
  }

 private:
  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(std::distance(x_.begin(), it)) - 1;
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> tangent_;
  std::vector<double> c2_;
  std::vector<double> c3_;
};

/// Interpolant of log10(cost) over quality.
inline AkimaInterpolant fit_akima(const Curve& curve) {
  std::vector<double> q;
  std::vector<double> log_cost;
  for (const auto& p : curve.points()) {
    q.push_back(p.quality);
    log_cost.push_back(std::log10(p.cost));
  }
  return AkimaInterpolant(std::move(q), std::move(log_cost));
}

struct QualityInterval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double q) const { return q >= lo && q <= hi; }
  friend bool operator==(const QualityInterval&, const QualityInterval&) = default;
};

inline void check_compatible(const Curve& a, const Curve& b) {
  if (!(a.axes() == b.axes())) {
    throw ValidationError(std::string("axis mismatch: ") + a.axes().quality + "/" + cost_kind_name(a.axes().cost) +
                          " vs " + b.axes().quality + "/" + cost_kind_name(b.axes().cost));
  }
}

inline QualityInterval quality_overlap(const Curve& a, const Curve& b) {
  QualityInterval o{std::max(a.min_quality(), b.min_quality()), std::min(a.max_quality(), b.max_quality())};
  if (!(o.hi > o.lo)) {
    throw ValidationError("the curves' quality ranges do not overlap");
  }
  return o;
}

/// `count` evenly spaced points from lo to hi inclusive. The last point is
/// exactly hi.
inline std::vector<double> uniform_grid(const QualityInterval& range, std::size_t count) {
  if (count < 2) throw ValidationError("a grid needs at least 2 points");
  std::vector<double> g(count);
  const double step = range.width() / static_cast<double>(count - 1);
  for (std::size_t i = 0; i + 1 < count; ++i) g[i] = range.lo + step * static_cast<double>(i);
  g.back() = range.hi;
  return g;
}

inline constexpr std::size_t kBdSamples = 1001;

/// Mean of log10(cost_b) - log10(cost_a) over the overlap, by composite
/// Simpson on kBdSamples points.
inline double mean_log_difference(const Curve& a, const Curve& b) {
  check_compatible(a, b);
  const QualityInterval range = quality_overlap(a, b);
  const AkimaInterpolant fa = fit_akima(a);
  const AkimaInterpolant fb = fit_akima(b);
  const auto grid = uniform_grid(range, kBdSamples);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = (i == 0 || i + 1 == grid.size()) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * (fb(grid[i]) - fa(grid[i]));
  }
  const double h = range.width() / static_cast<double>(kBdSamples - 1);
  return sum * h / 3.0 / range.width();
}

/// Average relative cost of `b` against `a` at equal quality, in percent.
/// Positive means `b` is more expensive.
inline double bd_delta(const Curve& a, const Curve& b) {
  return 100.0 * (std::pow(10.0, mean_log_difference(a, b)) - 1.0);
}

struct RcdSample {
  double quality = 0.0;
  double cost_a = 0.0;
  double cost_b = 0.0;
  double percent = 0.0;
};

/// Relative curve difference 100 * (cost_b - cost_a) / cost_a at each grid
/// quality.
inline std::vector<RcdSample> rcd(const Curve& a, const Curve& b, std::span<const double> grid) {
  check_compatible(a, b);
  const QualityInterval range = quality_overlap(a, b);
  const AkimaInterpolant fa = fit_akima(a);
  const AkimaInterpolant fb = fit_akima(b);
  std::vector<RcdSample> out;
  out.reserve(grid.size());
  for (double q : grid) {
    if (!range.contains(q)) {
      throw ValidationError("RCD grid point " + std::to_string(q) + " lies outside the overlap [" +
                            std::to_string(range.lo) + ", " + std::to_string(range.hi) + "]");
    }
    const double la = fa(q);
    const double lb = fb(q);
    out.push_back({q, std::pow(10.0, la), std::pow(10.0, lb), 100.0 * (std::pow(10.0, lb - la) - 1.0)});
  }
  return out;
}

inline constexpr std::size_t kIntersectionScanPoints = 4096;
inline constexpr double kIntersectionTolerance = 1e-9;

/// Qualities in the overlap where the two curves cross. Roots are bracketed
/// by sign changes on a kIntersectionScanPoints grid and refined by
/// bisection. Touching without crossing is not reported.
inline std::vector<double> find_intersections(const Curve& a, const Curve& b) {
  check_compatible(a, b);
  const QualityInterval range = quality_overlap(a, b);
  const AkimaInterpolant fa = fit_akima(a);
  const AkimaInterpolant fb = fit_akima(b);
  auto diff = [&](double q) { return fb(q) - fa(q); };

  const auto grid = uniform_grid(range, kIntersectionScanPoints);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = diff(grid[i]);

  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  std::vector<double> roots;
  int last_sign = 0;
  std::optional<double> pending_zero;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const int s = sign(values[i]);
    if (s == 0) {
      if (!pending_zero && last_sign != 0) pending_zero = grid[i];
      continue;
    }
    if (last_sign != 0 && s != last_sign) {
      if (pending_zero) {
        roots.push_back(*pending_zero);
      } else {
        double lo = grid[i - 1];
        double hi = grid[i];
        const int lo_sign = last_sign;
        while (hi - lo >= kIntersectionTolerance) {
          const double mid = 0.5 * (lo + hi);
          const int ms = sign(diff(mid));
          if (ms == 0) {
            lo = hi = mid;
            break;
          }
          (ms == lo_sign ? lo : hi) = mid;
        }
        roots.push_back(0.5 * (lo + hi));
      }
    }
    pending_zero.reset();
    last_sign = s;
  }
  return roots;
}

/// Smallest tested QP of `reference` whose quality lies strictly below
/// `intersection_quality`.
inline int ceil_qp(double intersection_quality, const Curve& reference) {
  if (intersection_quality < reference.min_quality() || intersection_quality > reference.max_quality()) {
    throw ValidationError("intersection quality " + std::to_string(intersection_quality) +
                          " lies outside the reference curve");
  }
  std::optional<int> best;
  for (const auto& p : reference.points()) {
    if (p.quality < intersection_quality && (!best || p.qp < *best)) best = p.qp;
  }
  if (!best) {
    throw ValidationError("no tested QP has quality below " + std::to_string(intersection_quality));
  }
  return *best;
}

struct BdReport {
  CostKind kind = CostKind::rate;
  double bd_percent = 0.0;
  QualityInterval overlap;
  std::vector<RcdSample> rcd_samples;
  std::vector<double> intersections;
  std::optional<int> ceil_qp;
};

struct BdOptions {
  /// Number of RCD samples across the overlap; 0 disables them.
  std::size_t rcd_grid_points = 0;
  bool intersections = false;
};

/// Full comparison of `b` against reference `a`. The QP ceiling is taken on
/// `a` at the highest crossing.
inline BdReport compare_curves(const Curve& a, const Curve& b, const BdOptions& options = {}) {
  BdReport r;
  r.kind = a.axes().cost;
  r.bd_percent = bd_delta(a, b);
  r.overlap = quality_overlap(a, b);
  if (options.rcd_grid_points > 0) {
    r.rcd_samples = rcd(a, b, uniform_grid(r.overlap, options.rcd_grid_points));
  }
  if (options.intersections) {
    r.intersections = find_intersections(a, b);
    if (!r.intersections.empty()) {
      try {
        r.ceil_qp = ceil_qp(r.intersections.back(), a);
      } catch (const ValidationError&) {
        r.ceil_qp.reset();
      }
    }
  }
  return r;
}

/// Curve CSV: header `qp,quality,cost` then one point per line.
inline std::vector<OperatingPoint> read_curve_csv(std::istream& in) {
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty curve CSV");
  {
    std::string header;
    for (char c : line) {
      if (c != ' ' && c != '\t' && c != '\r') header += c;
    }
    if (header != "qp,quality,cost") {
      throw ParseError("curve CSV header must be 'qp,quality,cost', got '" + std::string(trim(line)) + "'");
    }
  }
  std::vector<OperatingPoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (fields.size() != 3) {
      throw ParseError("curve CSV line " + std::to_string(line_no) + ": expected 3 fields");
    }
    OperatingPoint p;
    auto parse = [&](std::string_view f, auto& value) {
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError("curve CSV line " + std::to_string(line_no) + ": bad number '" + std::string(f) + "'");
      }
    };
    parse(fields[0], p.qp);
    parse(fields[1], p.quality);
    parse(fields[2], p.cost);
    points.push_back(p);
  }
  return points;
}

inline void write_curve_csv(std::ostream& out, const Curve& curve) {
  out << "qp,quality,cost\n";
  out.precision(17);
  for (const auto& p : curve.points()) out << p.qp << ',' << p.quality << ',' << p.cost << '\n';
}

/// Columns quality,cost_a,cost_b,rcd_percent for external plotting.
inline void write_rcd_csv(std::ostream& out, std::span<const RcdSample> samples) {
  out << "quality,cost_a,cost_b,rcd_percent\n";
  out.precision(17);
  for (const auto& s : samples) out << s.quality << ',' << s.cost_a << ',' << s.cost_b << ',' << s.percent << '\n';
}

// ---------------------------------------------------------------------------
// Per-sequence comparison rows (intersection, QP ceiling, complexity deltas).

struct NamedValue {
  std::string name;
  double value = 0.0;
  friend bool operator==(const NamedValue&, const NamedValue&) = default;
};

struct ComparisonRow {
  std::string sequence;
  std::optional<double> intersection_quality;
  std::optional<int> ceil_qp;
  /// Named BD columns in display order, e.g. BDT_W, BDT_L, BDEE_L.
  std::vector<NamedValue> columns;

  std::optional<double> column(std::string_view name) const {
    for (const auto& c : columns) {
      if (c.name == name) return c.value;
    }
    return std::nullopt;
  }

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct CurvePair {
  std::string column;
  Curve reference;
  Curve candidate;
};

/// Row comparing a candidate against a reference: crossing of the rate
/// curves, the QP ceiling on the reference ladder and one BD value per
/// complexity curve pair.
inline ComparisonRow report_row(std::string sequence, const Curve& reference_rate, const Curve& candidate_rate,
                                std::span<const CurvePair> complexity) {
  ComparisonRow row;
  row.sequence = std::move(sequence);
  const auto crossings = find_intersections(reference_rate, candidate_rate);
  if (!crossings.empty()) {
    row.intersection_quality = crossings.back();
    try {
      row.ceil_qp = ceil_qp(crossings.back(), reference_rate);
    } catch (const ValidationError&) {
      row.ceil_qp.reset();
    }
  }
  for (const auto& pair : complexity) {
    row.columns.push_back({pair.column, bd_delta(pair.reference, pair.candidate)});
  }
  return row;
}

/// Arithmetic mean of every column over the rows that carry it.
inline ComparisonRow average_row(std::span<const ComparisonRow> rows, std::string label = "Average") {
  if (rows.empty()) throw ValidationError("cannot average an empty table");
  ComparisonRow avg;
  avg.sequence = std::move(label);
  std::vector<std::size_t> counts;
  for (const auto& r : rows) {
    for (const auto& c : r.columns) {
      auto it = std::find_if(avg.columns.begin(), avg.columns.end(),
                             [&](const NamedValue& v) { return v.name == c.name; });
      if (it == avg.columns.end()) {
        avg.columns.push_back({c.name, c.value});
        counts.push_back(1);
      } else {
        it->value += c.value;
        ++counts[static_cast<std::size_t>(it - avg.columns.begin())];
      }
    }
  }
  for (std::size_t i = 0; i < avg.columns.size(); ++i) avg.columns[i].value /= static_cast<double>(counts[i]);
  return avg;
}

}  // namespace hdrbench
