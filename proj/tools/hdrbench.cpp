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

// hdrbench command line. Exit codes: 0 success, 1 invalid input, 2 runtime
// failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdrbench/hdrbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

json quality_json(const hdrbench::QualityRecord& q) { return json(q); }

json measurement_json(const hdrbench::AggregatedMeasurement& m) { return json(m); }

void append_trace(const std::string& trace, const std::string& line) {
  if (trace.empty()) return;
  std::ofstream out(trace, std::ios::app);
  out << line << '\n';
}

void copy_file(const fs::path& from, const fs::path& to) {
  fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HDR bit-depth encoding benchmark toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("hdrbench ") + hdrbench::kVersion + " (results schema " +
                                        std::to_string(hdrbench::kResultsSchemaVersion) + ")");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert a raw 4:2:0 sequence between 10-bit and 8-bit");
  std::string conv_in, conv_out, direction;
  int conv_w = 0, conv_h = 0;
  double conv_fps = 30.0;
  std::optional<int> conv_in_depth;
  convert->add_option("--in", conv_in, "Input raw YUV file")->required();
  convert->add_option("--out", conv_out, "Output raw YUV file")->required();
  convert->add_option("--direction", direction, "10to8 or 8to10")
      ->required()
      ->check(CLI::IsMember({"10to8", "8to10"}));
  convert->add_option("--width", conv_w)->required();
  convert->add_option("--height", conv_h)->required();
  convert->add_option("--fps", conv_fps, "Frame rate (metadata only)");
  convert->add_option("--in-depth", conv_in_depth, "Declared depth of the input; must match the direction");

  // quality
  auto* quality = app.add_subcommand("quality", "PSNR (and optional external score) of a test file against a reference");
  std::string q_ref, q_test, q_metric;
  int q_w = 0, q_h = 0, q_depth = 10;
  quality->add_option("--ref", q_ref)->required();
  quality->add_option("--test", q_test)->required();
  quality->add_option("--width", q_w)->required();
  quality->add_option("--height", q_h)->required();
  quality->add_option("--bit-depth", q_depth, "Sample depth of both files")->check(CLI::IsMember({8, 10}));
  quality->add_option("--metric-cmd", q_metric, "External metric command with {REF} and {TEST}");

  // bd
  auto* bd = app.add_subcommand("bd", "Bjontegaard delta, RCD and crossings of two qp,quality,cost curves");
  std::string curve_a, curve_b, cost_kind = "rate", bd_csv;
  std::size_t rcd_grid = 0;
  bool intersections = false;
  bool any_cost_order = false;
  bd->add_option("--curve-a", curve_a, "Reference curve CSV")->required();
  bd->add_option("--curve-b", curve_b, "Compared curve CSV")->required();
  bd->add_option("--cost", cost_kind, "rate, time or energy")->check(CLI::IsMember({"rate", "time", "energy"}));
  bd->add_option("--rcd-grid", rcd_grid, "Number of RCD samples across the overlap");
  bd->add_flag("--intersections", intersections, "Report crossings and the QP ceiling on curve A");
  bd->add_option("--csv", bd_csv, "Write quality,cost_a,cost_b,rcd_percent here");
  bd->add_flag("--any-cost-order", any_cost_order, "Do not require cost to increase with quality");

  // measure
  auto* measure = app.add_subcommand("measure", "Measure CPU time and energy of a command");
  std::string m_cmd, rapl_root = "/sys/class/powercap", rapl_domain = "intel-rapl:0";
  std::size_t reps = 5;
  bool no_pin = false, keep_outliers = false, no_rapl = false;
  measure->add_option("--cmd", m_cmd, "Shell command to measure")->required();
  measure->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber);
  measure->add_option("--rapl-domain", rapl_domain, "powercap domain directory name");
  measure->add_option("--rapl-root", rapl_root, "powercap root directory");
  measure->add_flag("--no-rapl", no_rapl, "Skip energy counters");
  measure->add_flag("--no-pin", no_pin, "Do not pin the command to one CPU");
  measure->add_flag("--keep-outliers", keep_outliers, "Average all repetitions");

  // noise
  auto* noise = app.add_subcommand("noise", "Quantization noise of the 10->8->10 round trip");

  // run
  auto* run = app.add_subcommand("run", "Execute a benchmark configuration");
  std::string config_path;
  bool fresh = false;
  run->add_option("--config", config_path, "JSON configuration")->required();
  run->add_flag("--fresh", fresh, "Ignore cached results");

  // report
  auto* report = app.add_subcommand("report", "Comparison table from one or more result stores");
  std::vector<std::string> stores;
  std::string reference = "10-10", candidate = "8-8", quality_axis = "auto", report_csv, report_json;
  report->add_option("--store", stores, "Results store(s); several are merged")->required();
  report->add_option("--reference", reference);
  report->add_option("--candidate", candidate);
  report->add_option("--quality", quality_axis, "Quality axis for BDT/BDEE: auto, psnr or external")
      ->check(CLI::IsMember({"auto", "psnr", "external"}));
  report->add_option("--csv", report_csv, "Also write the table as CSV");
  report->add_option("--json", report_json, "Also write the report as JSON");

  // Test codec.
  auto* mock_enc = app.add_subcommand("mock-encode", "Built-in test encoder");
  auto* mock_dec = app.add_subcommand("mock-decode", "Built-in test decoder");
  mock_enc->group("Testing");
  mock_dec->group("Testing");
  std::string me_in, me_out, trace;
  int me_w = 0, me_h = 0, me_depth = 10, me_internal = 10, me_qp = 32;
  double me_fps = 0.0;
  bool identity = false, no_simd = false;
  mock_enc->add_option("--input", me_in)->required();
  mock_enc->add_option("--output", me_out)->required();
  mock_enc->add_option("--width", me_w)->required();
  mock_enc->add_option("--height", me_h)->required();
  mock_enc->add_option("--bitdepth", me_depth);
  mock_enc->add_option("--internal-bitdepth", me_internal);
  mock_enc->add_option("--qp", me_qp);
  mock_enc->add_option("--fps", me_fps, "Print a bitrate line when given");
  mock_enc->add_flag("--identity", identity, "Copy the input verbatim");
  mock_enc->add_flag("--no-simd", no_simd, "Accepted for parity with real encoders; output is unchanged");
  mock_enc->add_option("--trace", trace, "Append one line per invocation to this file");
  std::string md_in, md_out;
  mock_dec->add_option("--input", md_in)->required();
  mock_dec->add_option("--output", md_out)->required();
  mock_dec->add_flag("--identity", identity, "Copy the bitstream verbatim");
  mock_dec->add_option("--trace", trace, "Append one line per invocation to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*convert) {
      const int in_depth = direction == "10to8" ? 10 : 8;
      const int out_depth = direction == "10to8" ? 8 : 10;
      if (conv_in_depth && *conv_in_depth != in_depth) {
        throw hdrbench::DepthError("direction " + direction + " needs " + std::to_string(in_depth) +
                                   "-bit input, but the input is declared " + std::to_string(*conv_in_depth) +
                                   "-bit");
      }
      const hdrbench::PlaneFormat in_format{conv_w, conv_h, in_depth};
      if (!(conv_fps > 0.0)) throw hdrbench::ValidationError("--fps must be positive");
      hdrbench::FrameReader reader(conv_in, in_format);
      hdrbench::FrameWriter writer(conv_out, in_format.with_depth(out_depth));
      while (auto frame = reader.next()) {
        writer.write(in_depth == 10 ? hdrbench::tonemap_10_to_8(*frame) : hdrbench::expand_8_to_10(*frame));
      }
      writer.close();
      std::cout << json{{"frames", reader.frame_count()}, {"direction", direction}, {"output", conv_out}}.dump()
                << "\n";
    } else if (*quality) {
      const hdrbench::PlaneFormat format{q_w, q_h, q_depth};
      auto record = hdrbench::file_quality(q_ref, q_test, format);
      if (!q_metric.empty()) record.external_score = hdrbench::external_metric(q_ref, q_test, q_metric);
      std::cout << quality_json(record).dump(2) << "\n";
    } else if (*bd) {
      const hdrbench::Axes axes{"quality", hdrbench::parse_cost_kind(cost_kind)};
      const auto order = any_cost_order || axes.cost != hdrbench::CostKind::rate ? hdrbench::CostOrder::unconstrained
                                                                                  : hdrbench::CostOrder::increasing;
      auto load = [&](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw hdrbench::IoError("cannot open " + path);
        return hdrbench::Curve(hdrbench::read_curve_csv(in), axes, order);
      };
      const auto a = load(curve_a);
      const auto b = load(curve_b);
      hdrbench::BdOptions opts;
      opts.rcd_grid_points = rcd_grid;
      opts.intersections = intersections;
      const auto result = hdrbench::compare_curves(a, b, opts);
      std::cout << json(result).dump(2) << "\n";
      if (!bd_csv.empty()) {
        std::ofstream out(bd_csv);
        if (!out) throw hdrbench::IoError("cannot write " + bd_csv);
        hdrbench::write_rcd_csv(out, result.rcd_samples);
      }
    } else if (*measure) {
      hdrbench::MeasureOptions opts;
      opts.repetitions = reps;
      opts.pin_to_single_cpu = !no_pin;
      opts.aggregate.drop_extremes = !keep_outliers;
      if (no_rapl) {
        opts.rapl.reset();
      } else {
        opts.rapl = hdrbench::RaplDomain{rapl_root, rapl_domain};
      }
      const auto run_result = hdrbench::measure_process(m_cmd, opts);
      std::cout << measurement_json(run_result.measurement).dump(2) << "\n";
    } else if (*noise) {
      const auto r = hdrbench::quantization_noise_report();
      json j{{"mse_ideal_inverse", r.mse_ideal_inverse},
             {"mse_shift_inverse", r.mse_shift_inverse},
             {"max_abs_error_shift", r.max_abs_error_shift},
             {"shift_forward_divergences", r.shift_forward_divergences},
             {"first_shift_forward_divergence", r.first_shift_forward_divergence.value_or(-1)}};
      std::cout << j.dump(2) << "\n";
    } else if (*run) {
      auto config = hdrbench::load_config(config_path);
      if (fresh) config.cache = hdrbench::CachePolicy::fresh;
      hdrbench::Runner runner(config);
      const auto p = hdrbench::plan(runner.config());
      const auto results = runner.run(p);
      const auto& s = runner.stats();
      std::cout << json{{"store", runner.config().store.string()},
                        {"cells", p.cells.size()},
                        {"executed", s.cells_executed},
                        {"cached", s.cells_cached},
                        {"encoder_invocations", s.encoder_invocations},
                        {"decoder_invocations", s.decoder_invocations},
                        {"records", results.size()}}
                       .dump(2)
                << "\n";
    } else if (*report) {
      std::vector<hdrbench::ResultSet> sets;
      for (const auto& s : stores) sets.push_back(hdrbench::load_results(s));
      hdrbench::ReportOptions opts;
      opts.reference = reference;
      opts.candidate = candidate;
      opts.complexity_quality = quality_axis == "psnr"       ? hdrbench::ComplexityQuality::psnr
                                : quality_axis == "external" ? hdrbench::ComplexityQuality::external
                                                             : hdrbench::ComplexityQuality::automatic;
      const auto r = hdrbench::build_report(hdrbench::merge_results(sets), opts);
      std::cout << hdrbench::format_table(r);
      if (!report_csv.empty()) {
        std::ofstream out(report_csv);
        if (!out) throw hdrbench::IoError("cannot write " + report_csv);
        hdrbench::write_report_csv(out, r);
      }
      if (!report_json.empty()) {
        std::ofstream out(report_json);
        if (!out) throw hdrbench::IoError("cannot write " + report_json);
        out << hdrbench::report_to_json(r).dump(2) << "\n";
      }
    } else if (*mock_enc) {
      append_trace(trace, "encode qp=" + std::to_string(me_qp) + (no_simd ? " nosimd" : ""));
      std::uintmax_t bytes;
      if (identity) {
        copy_file(me_in, me_out);
        bytes = fs::file_size(me_out);
      } else {
        hdrbench::mock::EncodeParams params;
        params.input = {me_w, me_h, me_depth};
        params.internal_depth = me_internal;
        params.qp = me_qp;
        bytes = hdrbench::mock::encode(me_in, me_out, params);
      }
      if (me_fps > 0.0) {
        const hdrbench::PlaneFormat f{me_w, me_h, me_depth};
        const auto frames = hdrbench::FrameReader(me_in, f).frame_count();
        std::cout << "bitrate: " << hdrbench::bitrate_from_size(bytes, frames, me_fps) << " bps\n";
      }
    } else if (*mock_dec) {
      append_trace(trace, "decode");
      if (identity) {
        copy_file(md_in, md_out);
      } else {
        hdrbench::mock::decode(md_in, md_out);
      }
    }
  } catch (const hdrbench::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
