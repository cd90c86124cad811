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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hdrbench/curves.hpp"
#include "hdrbench/results.hpp"
#include "support/akima_reference.hpp"

using namespace hdrbench;

namespace {

const Axes kRate{"psnr_yuv", CostKind::rate};

Curve log_curve(const std::vector<double>& q, const std::vector<double>& log_cost, Axes axes = kRate,
                CostOrder order = CostOrder::unconstrained) {
  std::vector<OperatingPoint> pts;
  for (std::size_t i = 0; i < q.size(); ++i) {
    pts.push_back({37 - 5 * static_cast<int>(i), q[i], std::pow(10.0, log_cost[i])});
  }
  return Curve(pts, std::move(axes), order);
}

Curve scaled(const Curve& c, double factor) {
  auto pts = c.points();
  for (auto& p : pts) p.cost *= factor;
  return Curve(pts, c.axes(), CostOrder::unconstrained);
}

// A typical rate curve: six QPs, quality from 30 to 46 dB.
Curve rate_curve(double shift_db = 0.0, double rate_factor = 1.0) {
  const std::vector<std::pair<int, std::pair<double, double>>> ladder = {
      {37, {30.4, 210.0}}, {32, {33.9, 450.0}}, {27, {37.1, 1020.0}},
      {22, {40.3, 2400.0}}, {17, {43.2, 5900.0}}, {12, {46.0, 14800.0}}};
  std::vector<OperatingPoint> pts;
  for (const auto& [qp, qc] : ladder) pts.push_back({qp, qc.first + shift_db, qc.second * rate_factor});
  return Curve(pts, kRate);
}

std::vector<double> sorted_uniform(std::mt19937& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(Curve, ValidatesPoints) {
  EXPECT_THROW(log_curve({1, 2, 3}, {1, 2, 3}), ValidationError);
  EXPECT_THROW(log_curve({1, 2, 2, 3}, {1, 2, 3, 4}), ValidationError);
  EXPECT_THROW(log_curve({1, 2, NAN, 3}, {1, 2, 3, 4}), ValidationError);
  EXPECT_THROW(Curve({{1, 1, 1}, {2, 2, 0}, {3, 3, 3}, {4, 4, 4}}, kRate), ValidationError);
  // Rate must grow with quality unless explicitly relaxed.
  EXPECT_THROW(Curve({{1, 1, 4}, {2, 2, 3}, {3, 3, 5}, {4, 4, 6}}, kRate), ValidationError);
  EXPECT_NO_THROW(Curve({{1, 1, 4}, {2, 2, 3}, {3, 3, 5}, {4, 4, 6}}, kRate, CostOrder::unconstrained));
  // Points are sorted by quality on construction.
  const Curve c({{22, 40, 30}, {37, 30, 5}, {27, 36, 12}, {32, 33, 8}}, kRate);
  EXPECT_EQ(c.points().front().qp, 37);
  EXPECT_EQ(c.points().back().qp, 22);
}

TEST(Akima, ReproducesKnotsExactly) {
  const auto c = rate_curve();
  const auto f = fit_akima(c);
  for (const auto& p : c.points()) EXPECT_EQ(f(p.quality), std::log10(p.cost));
}

TEST(Akima, ReproducesLines) {
  const AkimaInterpolant f({0, 1, 2, 3, 4, 5}, {0, 2, 4, 6, 8, 10});
  EXPECT_NEAR(f(2.5), 5.0, 1e-12);
  std::mt19937 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = sorted_uniform(rng, 4 + rng() % 9, -20, 60);
    const double a = std::uniform_real_distribution<double>(-3, 3)(rng), b = std::uniform_real_distribution<double>(-5, 5)(rng);
    std::vector<double> y;
    for (double v : x) y.push_back(a * v + b);
    const AkimaInterpolant g(x, y);
    for (double q : sorted_uniform(rng, 50, x.front(), x.back())) EXPECT_NEAR(g(q), a * q + b, 1e-12);
  }
}

TEST(Akima, MatchesIndependentReference) {
  std::mt19937 rng(20260101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 7 + rng() % 6;
    std::vector<double> x = sorted_uniform(rng, n, 25.0, 50.0);
    std::vector<double> y = sorted_uniform(rng, n, 1.0, 5.0);
    const AkimaInterpolant f(x, y);
    const hdrbench_test::ReferenceAkima ref(x, y);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(f.tangents()[i] - ref.tangents()[i]));
    for (double q : sorted_uniform(rng, 200, x.front(), x.back())) worst = std::max(worst, std::abs(f(q) - ref(q)));
    for (double q : x) worst = std::max(worst, std::abs(f(q) - ref(q)));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Akima, GoldenValuesFromScipy) {
  // scipy.interpolate.Akima1DInterpolator (scipy 1.15.3) on the same knots.
  const std::vector<double> x{30.1, 32.4, 35.0, 37.2, 40.5, 43.05, 45.9};
  std::vector<double> y;
  for (double c : {120., 210., 390., 700., 1500., 2900., 6100.}) y.push_back(std::log10(c));
  const AkimaInterpolant f(x, y);
  const std::vector<std::pair<double, double>> golden = {
      {30.1, 2.0791812460476247}, {31.0, 2.174737847523462},  {33.3, 2.415695786041369},
      {36.0, 2.7052983072303847}, {39.9, 3.1120812747355076}, {42.0, 3.3439676359172843},
      {44.4, 3.6151613656580732}, {45.9, 3.7853298350107676}};
  for (const auto& [q, v] : golden) EXPECT_NEAR(f(q), v, 1e-12) << q;
  const std::vector<double> slopes{0.10680205363546531, 0.10531029099623494, 0.10497089000987203,
                                   0.1078564892136313,  0.111514079012206,   0.11322750286770233,
                                   0.11382554855191052};
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(f.tangents()[i], slopes[i], 1e-12) << i;

  // Flat runs make both weights vanish; the tangent falls back to the mean slope.
  const AkimaInterpolant step({0, 1, 2, 3, 4, 5, 6}, {0, 0, 0, 1, 1, 1, 1});
  EXPECT_NEAR(step(0.5), 0.0, 1e-15);
  EXPECT_NEAR(step(2.5), 0.5, 1e-15);
  EXPECT_NEAR(step(3.5), 1.0, 1e-15);
  for (double t : step.tangents()) EXPECT_EQ(t, 0.0);
}

TEST(Akima, IsC1AtInteriorKnots) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = sorted_uniform(rng, 8, 25.0, 50.0);
    const auto y = sorted_uniform(rng, 8, 1.0, 5.0);
    const AkimaInterpolant f(x, y);
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
      // Second-order one-sided stencils; f'' may jump at a knot, f' may not.
      const double h = 1e-4 * std::min(x[i] - x[i - 1], x[i + 1] - x[i]);
      const double left = (3 * f(x[i]) - 4 * f(x[i] - h) + f(x[i] - 2 * h)) / (2 * h);
      const double right = (-3 * f(x[i]) + 4 * f(x[i] + h) - f(x[i] + 2 * h)) / (2 * h);
      EXPECT_NEAR(left, right, 1e-6 * std::max(1.0, std::abs(left))) << "knot " << i;
    }
  }
}

TEST(Akima, RefusesToExtrapolate) {
  const AkimaInterpolant f({0, 1, 2, 3}, {0, 1, 4, 9});
  EXPECT_THROW(f(-1e-9), ValidationError);
  EXPECT_THROW(f(3.0 + 1e-9), ValidationError);
  EXPECT_NO_THROW(f(3.0));
  EXPECT_THROW(AkimaInterpolant({0, 1}, {0, 1}), ValidationError);
  EXPECT_THROW(AkimaInterpolant({0, 1, 1, 2}, {0, 1, 2, 3}), ValidationError);
}

TEST(BdDelta, ConstantRatioClosedForm) {
  const auto a = rate_curve();
  EXPECT_EQ(bd_delta(a, a), 0.0);
  for (double c : {0.5, 2.0, 10.0}) {
    EXPECT_NEAR(bd_delta(a, scaled(a, c)), 100.0 * (c - 1.0), 1e-9) << c;
  }
}

TEST(BdDelta, ConstantRatioOnRandomCurves) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto q = sorted_uniform(rng, 6, 28.0, 48.0);
    const auto lc = sorted_uniform(rng, 6, 2.0, 5.0);
    const auto a = log_curve(q, lc);
    for (double c : {0.5, 2.0, 10.0}) {
      EXPECT_NEAR(bd_delta(a, scaled(a, c)), 100.0 * (c - 1.0), 1e-9);
      const double ab = bd_delta(a, scaled(a, c)), ba = bd_delta(scaled(a, c), a);
      EXPECT_NEAR((1 + ab / 100) * (1 + ba / 100), 1.0, 1e-9);
    }
  }
}

TEST(BdDelta, ScaleCovariance) {
  const auto a = rate_curve();
  const auto b = rate_curve(-1.3, 0.9);
  const double base = bd_delta(a, b);
  const auto base_rcd = rcd(a, b, uniform_grid(quality_overlap(a, b), 17));
  for (double c : {1e-3, 0.7, 42.0}) {
    EXPECT_NEAR(bd_delta(scaled(a, c), scaled(b, c)), base, 1e-9);
    const auto r = rcd(scaled(a, c), scaled(b, c), uniform_grid(quality_overlap(a, b), 17));
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i].percent, base_rcd[i].percent, 1e-9);
  }
}

TEST(BdDelta, SignConvention) {
  // b needs 1.3 dB more quality for the same rate: it is more expensive.
  EXPECT_GT(bd_delta(rate_curve(), rate_curve(-1.3)), 0.0);
  EXPECT_LT(bd_delta(rate_curve(), rate_curve(+1.3)), 0.0);
}

TEST(BdDelta, RequiresOverlapAndMatchingAxes) {
  const auto a = log_curve({1, 2, 3, 4}, {1, 2, 3, 4});
  const auto b = log_curve({5, 6, 7, 8}, {1, 2, 3, 4});
  EXPECT_THROW(bd_delta(a, b), ValidationError);
  const auto t = log_curve({1, 2, 3, 4}, {1, 2, 3, 4}, Axes{"psnr_yuv", CostKind::time});
  EXPECT_THROW(bd_delta(a, t), ValidationError);
}

TEST(Rcd, Examples) {
  const auto a = rate_curve();
  const auto grid = uniform_grid(quality_overlap(a, a), 11);
  for (const auto& s : rcd(a, a, grid)) EXPECT_EQ(s.percent, 0.0);
  for (const auto& s : rcd(a, scaled(a, 2.0), grid)) EXPECT_NEAR(s.percent, 100.0, 1e-9);
  const std::vector<double> outside{a.max_quality() + 0.1};
  EXPECT_THROW(rcd(a, a, outside), ValidationError);
}

TEST(Intersections, CrossingLines) {
  const auto a = log_curve({3, 4, 6, 7}, {3, 4, 6, 7});
  const auto b = log_curve({3, 4, 6, 7}, {7, 6, 4, 3});
  const auto roots = find_intersections(a, b);
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0], 5.0, 1e-6);
  const std::vector<double> at_root{roots[0]};
  EXPECT_NEAR(rcd(a, b, at_root)[0].percent, 0.0, 1e-6);
  // RCD changes sign across the root.
  const std::vector<double> around{4.5, 5.5};
  const auto r = rcd(a, b, around);
  EXPECT_GT(r[0].percent, 0.0);
  EXPECT_LT(r[1].percent, 0.0);
}

TEST(Intersections, NoneForOffsetOrIdenticalCurves) {
  const auto a = rate_curve();
  EXPECT_TRUE(find_intersections(a, a).empty());
  EXPECT_TRUE(find_intersections(a, scaled(a, 1.5)).empty());
}

TEST(Intersections, TangentContactIsNotACrossing) {
  // log-cost difference (q - 5)^2 touches zero without changing sign.
  std::vector<double> q{2, 3, 4, 5, 6, 7, 8}, la, lb;
  for (double v : q) {
    la.push_back(0.1 * v);
    lb.push_back(0.1 * v + 0.01 * (v - 5) * (v - 5));
  }
  for (double r : find_intersections(log_curve(q, la), log_curve(q, lb))) {
    ADD_FAILURE() << "unexpected root " << r;
  }
}

TEST(Intersections, RootsLieInsideOverlapAndAreScaleInvariant) {
  const auto a = rate_curve();
  std::vector<OperatingPoint> pts = a.points();
  // Candidate cheaper at low quality, dearer at high quality.
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].cost *= 0.6 + 0.2 * static_cast<double>(i);
  const Curve b(pts, kRate);
  const auto roots = find_intersections(a, b);
  ASSERT_EQ(roots.size(), 1u);
  const auto overlap = quality_overlap(a, b);
  EXPECT_TRUE(overlap.contains(roots[0]));
  const auto scaled_roots = find_intersections(scaled(a, 3.0), scaled(b, 3.0));
  ASSERT_EQ(scaled_roots.size(), 1u);
  EXPECT_NEAR(scaled_roots[0], roots[0], 1e-9);
  const std::vector<double> at{roots[0]};
  EXPECT_NEAR(rcd(a, b, at)[0].percent, 0.0, 1e-6);
}

TEST(CeilQp, Examples) {
  const auto ref = rate_curve();  // QP 22 at 40.3 dB, QP 17 at 43.2 dB
  EXPECT_EQ(ceil_qp(41.0, ref), 22);
  EXPECT_EQ(ceil_qp(43.05, ref), 22);
  EXPECT_EQ(ceil_qp(30.5, ref), 37);
  EXPECT_EQ(ceil_qp(46.0, ref), 17);
  EXPECT_THROW(ceil_qp(30.4, ref), ValidationError);
  EXPECT_THROW(ceil_qp(29.0, ref), ValidationError);
}

TEST(CompareCurves, FullReport) {
  const auto a = rate_curve();
  std::vector<OperatingPoint> pts = a.points();
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].cost *= 0.6 + 0.2 * static_cast<double>(i);
  const Curve b(pts, kRate);
  BdOptions opts;
  opts.rcd_grid_points = 9;
  opts.intersections = true;
  const auto r = compare_curves(a, b, opts);
  EXPECT_EQ(r.rcd_samples.size(), 9u);
  ASSERT_EQ(r.intersections.size(), 1u);
  ASSERT_TRUE(r.ceil_qp.has_value());
  EXPECT_EQ(*r.ceil_qp, ceil_qp(r.intersections[0], a));
  EXPECT_EQ(r.overlap.lo, 30.4);
  EXPECT_EQ(r.overlap.hi, 46.0);
}

TEST(CurveCsv, ParsesAndWrites) {
  std::istringstream in("qp,quality,cost\n37, 30.4,210\n32,33.9,450\r\n\n27,37.1,1020\n22,40.3,2400\n");
  const auto pts = read_curve_csv(in);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[1].qp, 32);
  EXPECT_EQ(pts[1].quality, 33.9);
  std::ostringstream out;
  write_curve_csv(out, Curve(pts, kRate));
  std::istringstream back(out.str());
  EXPECT_EQ(read_curve_csv(back).size(), 4u);

  std::istringstream bad_header("quality,cost\n1,2\n");
  EXPECT_THROW(read_curve_csv(bad_header), ParseError);
  std::istringstream bad_value("qp,quality,cost\n1,x,2\n");
  EXPECT_THROW(read_curve_csv(bad_value), ParseError);
}

TEST(ReportRow, StartingRowRoundTrips) {
  ComparisonRow row;
  row.sequence = "Starting";
  row.intersection_quality = 43.05;
  row.ceil_qp = 22;
  row.columns = {{"BDT_W", -76.0}, {"BDT_L", -83.5}, {"BDEE_L", -82.3}};
  const nlohmann::json j = row;
  const auto back = nlohmann::json::parse(j.dump()).get<ComparisonRow>();
  EXPECT_EQ(back, row);
  EXPECT_EQ(*back.column("BDEE_L"), -82.3);
}

TEST(ReportRow, AverageOfPublishedColumns) {
  const std::vector<double> bdt_w{-69.5, -69.4, -76.4, -76.0, -45.7, -74.9, -72.8, -72.7};
  const std::vector<double> bdt_l{-77.7, -78.8, -84.4, -83.5, -63.3, -81.9, -81.4, -80.2};
  const std::vector<double> bdee_l{-76.7, -77.5, -83.2, -82.3, -60.2, -80.5, -80.1, -78.8};
  std::vector<ComparisonRow> rows(8);
  for (std::size_t i = 0; i < 8; ++i) {
    rows[i].sequence = "s" + std::to_string(i);
    rows[i].columns = {{"BDT_W", bdt_w[i]}, {"BDT_L", bdt_l[i]}, {"BDEE_L", bdee_l[i]}};
  }
  const auto avg = average_row(rows);
  EXPECT_NEAR(*avg.column("BDT_W"), -69.7, 0.05);
  EXPECT_NEAR(*avg.column("BDT_L"), -78.9, 0.05);
  EXPECT_NEAR(*avg.column("BDEE_L"), -77.4, 0.05);

  const std::vector<ComparisonRow> one{rows[3]};
  EXPECT_EQ(average_row(one).columns, rows[3].columns);
}

TEST(ReportRow, BuildsFromCurves) {
  const auto ref = rate_curve();
  std::vector<OperatingPoint> pts = ref.points();
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].cost *= 0.6 + 0.2 * static_cast<double>(i);
  const Curve cand(pts, kRate);
  const Axes time_axes{"psnr_yuv", CostKind::time};
  const auto t_ref = log_curve({30.4, 33.9, 37.1, 40.3, 43.2, 46.0}, {1, 1.2, 1.4, 1.6, 1.8, 2.0}, time_axes);
  const std::vector<CurvePair> pairs{{"BDT_L", t_ref, scaled(t_ref, 0.25)}};
  const auto row = report_row("seq", ref, cand, pairs);
  ASSERT_TRUE(row.intersection_quality.has_value());
  EXPECT_EQ(row.ceil_qp, ceil_qp(*row.intersection_quality, ref));
  EXPECT_NEAR(*row.column("BDT_L"), -75.0, 1e-9);
}
