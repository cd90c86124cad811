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

#include <json.hpp>

#include "hdrbench/hdrbench.hpp"
#include "support/test_util.hpp"

using namespace hdrbench;
using hdrbench_test::TempDir;
using nlohmann::json;

namespace {

const std::string kCli = HDRBENCH_CLI;

std::string mock_encoder(const std::string& extra = "") {
  return shell_quote(kCli) +
         " mock-encode --input {INPUT} --output {OUTPUT} --width {WIDTH} --height {HEIGHT} --bitdepth {BITDEPTH}"
         " --internal-bitdepth {INTERNAL_BITDEPTH} --qp {QP} --fps {FPS} {FLAGS}" +
         extra;
}

std::string mock_decoder(const std::string& extra = "") {
  return shell_quote(kCli) + " mock-decode --input {INPUT} --output {OUTPUT} {FLAGS}" + extra;
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (int s = 0; s < 2; ++s) {
      hdrbench_test::write_gradient_sequence(dir / ("seq" + std::to_string(s) + ".yuv"), {32, 16, 10}, 2, s);
    }
  }

  json base_config(int sequences = 1) const {
    json j;
    for (int s = 0; s < sequences; ++s) {
      j["sequences"].push_back({{"id", "seq" + std::to_string(s)},
                                {"path", "seq" + std::to_string(s) + ".yuv"},
                                {"width", 32},
                                {"height", 16},
                                {"fps", 30}});
    }
    j["variants"] = {"10-10", "8-8"};
    j["encoder"] = mock_encoder();
    j["decoder"] = mock_decoder();
    j["repetitions"] = 1;
    j["measure"] = false;
    j["rapl"] = nullptr;
    j["host"] = "T";
    return j;
  }

  PipelineConfig config(const json& j) const { return parse_config(j, dir.path()); }

  TempDir dir;
};

const RunRecord& record_for(const ResultSet& set, const std::string& variant, int qp) {
  for (const auto& r : set.records()) {
    if (r.variant == variant && r.qp == qp) return r;
  }
  throw std::runtime_error("no record for " + variant);
}

}  // namespace

TEST_F(PipelineTest, PlanIsCartesianAndOrdered) {
  auto j = base_config();
  j["variants"] = {"10-10", "8-10", "8-8"};
  const auto p = plan(config(j));
  EXPECT_EQ(p.cells.size(), 18u);
  EXPECT_EQ(p.cells[0].qp, 37);
  EXPECT_EQ(p.cells[5].qp, 12);
  EXPECT_EQ(p.cells[6].variant, 1u);

  j["sequences"] = json::array();
  for (int s = 0; s < 8; ++s) {
    j["sequences"].push_back(
        {{"id", "s" + std::to_string(s)}, {"path", "seq0.yuv"}, {"width", 32}, {"height", 16}, {"fps", 30}});
  }
  EXPECT_EQ(plan(config(j)).cells.size(), 144u);
}

TEST_F(PipelineTest, ConfigErrors) {
  auto j = base_config();
  j["qps"] = json::array();
  EXPECT_THROW(config(j), ValidationError);

  j = base_config();
  j["variants"] = {"10-10", "9-9"};
  EXPECT_THROW(config(j), ValidationError);

  j = base_config();
  j["variants"] = {"10-10", "10-10"};
  EXPECT_THROW(config(j), ValidationError);

  j = base_config();
  j["sequences"][0]["path"] = "missing.yuv";
  EXPECT_THROW(plan(config(j)), ValidationError);

  j = base_config();
  j["sequences"][0]["bit_depth"] = 8;
  EXPECT_THROW(config(j), ValidationError);

  j = base_config();
  j["qps"] = {22, 60};
  EXPECT_THROW(config(j), ValidationError);
}

TEST_F(PipelineTest, CustomVariantNeedsDepths) {
  auto j = base_config();
  j["variants"] = {{{"name", "10-10-fast"}, {"input_depth", 10}, {"internal_depth", 10}, {"flags", "--fast"}}};
  const auto c = config(j);
  EXPECT_EQ(c.variants[0].flags, "--fast");
  EXPECT_EQ(c.variants[0].encoder_template, mock_encoder());
}

TEST_F(PipelineTest, IdentityCodecIsLossless) {
  auto j = base_config();
  j["variants"] = {{{"name", "10-10"}, {"flags", "--identity"}, {"decoder_flags", "--identity"}}};
  j["qps"] = {22};
  Runner runner(config(j));
  const auto results = runner.run(plan(runner.config()));
  ASSERT_EQ(results.size(), 1u);
  const auto& r = results.records()[0];
  EXPECT_TRUE(std::isinf(r.quality.psnr_yuv));
  const auto raw = std::filesystem::file_size(dir / "seq0.yuv");
  EXPECT_EQ(r.bitstream_bytes, raw);
  EXPECT_DOUBLE_EQ(r.bitrate, static_cast<double>(raw) * 8 * 30 / 2);
}

TEST_F(PipelineTest, QuantizingCodecIsMonotone) {
  Runner runner(config(base_config()));
  const auto results = runner.run(plan(runner.config()));
  ASSERT_EQ(results.size(), 12u);
  for (const std::string v : {"10-10", "8-8"}) {
    for (std::size_t k = 0; k + 1 < kDefaultQpLadder.size(); ++k) {
      const auto& lo = record_for(results, v, kDefaultQpLadder[k]);
      const auto& hi = record_for(results, v, kDefaultQpLadder[k + 1]);
      EXPECT_GT(lo.bitrate, hi.bitrate) << v << " QP " << lo.qp;
      EXPECT_GT(lo.quality.psnr_yuv, hi.quality.psnr_yuv) << v << " QP " << lo.qp;
    }
  }
}

TEST_F(PipelineTest, BitrateAccountingIsExact) {
  auto j = base_config();
  j["qps"] = {27};
  j["reported_bitrate_regex"] = "bitrate: ([0-9.e+]+) bps";
  Runner runner(config(j));
  for (const auto& r : runner.run(plan(runner.config())).records()) {
    EXPECT_DOUBLE_EQ(r.bitrate * static_cast<double>(r.frame_count) / r.frame_rate,
                     static_cast<double>(r.bitstream_bits()));
    ASSERT_TRUE(r.encoder_reported_bitrate.has_value());
    EXPECT_NEAR(*r.encoder_reported_bitrate, r.bitrate, 1e-6 * r.bitrate);
  }
}

TEST_F(PipelineTest, EightBitCellsAreScoredInTenBitDomain) {
  auto j = base_config();
  j["variants"] = {{{"name", "8-8"}, {"flags", "--identity"}, {"decoder_flags", "--identity"}}};
  j["qps"] = {22};
  Runner runner(config(j));
  const auto& r = runner.run(plan(runner.config())).records()[0];
  // Identity on the tone-mapped input leaves only the 10->8->10 rounding error.
  const auto src = read_sequence(dir / "seq0.yuv", {32, 16, 10}, 30);
  const auto expected = sequence_quality(src, expand_8_to_10(tonemap_10_to_8(src)));
  EXPECT_EQ(r.quality, expected);
  EXPECT_TRUE(std::isfinite(r.quality.psnr_y));
}

TEST_F(PipelineTest, SimdToggleGivesIdenticalBitstreams) {
  auto j = base_config();
  j["variants"] = {"8-8", {{"name", "8-8-nosimd"}, {"flags", "--no-simd"}}};
  j["qps"] = {22, 37};
  Runner runner(config(j));
  const auto results = runner.run(plan(runner.config()));
  for (int qp : {22, 37}) {
    EXPECT_EQ(record_for(results, "8-8", qp).bitstream_digest, record_for(results, "8-8-nosimd", qp).bitstream_digest);
  }
  EXPECT_NE(record_for(results, "8-8", 22).key, record_for(results, "8-8-nosimd", 22).key);
}

TEST_F(PipelineTest, StoreRoundTripAndCache) {
  auto j = base_config();
  j["qps"] = {22, 27, 32, 37};
  j["measure"] = true;
  const auto trace = dir / "trace.txt";
  j["encoder"] = mock_encoder(" --trace " + shell_quote(trace.string()));
  j["decoder"] = mock_decoder(" --trace " + shell_quote(trace.string()));
  ResultSet first;
  {
    Runner runner(config(j));
    first = runner.run(plan(runner.config()));
    EXPECT_EQ(runner.stats().cells_executed, 8u);
    EXPECT_EQ(runner.stats().codec_invocations(), 16u);
  }
  EXPECT_EQ(load_results(dir / "results.jsonl"), first);
  const auto trace_lines = hdrbench_test::read_text(trace);

  {
    Runner warm(config(j));
    const auto again = warm.run(plan(warm.config()));
    EXPECT_EQ(warm.stats().codec_invocations(), 0u);
    EXPECT_EQ(warm.stats().cells_cached, 8u);
    EXPECT_EQ(again, first);
    EXPECT_EQ(hdrbench_test::read_text(trace), trace_lines);
  }
  {
    // A different host label never reuses measurements.
    auto other = j;
    other["host"] = "U";
    other["qps"] = {37};
    Runner runner(config(other));
    runner.run(plan(runner.config()));
    EXPECT_EQ(runner.stats().cells_executed, 2u);
  }
  {
    auto changed = j;
    changed["variants"] = {"10-10", {{"name", "8-8"}, {"flags", "--no-simd"}}};
    Runner runner(config(changed));
    runner.run(plan(runner.config()));
    EXPECT_EQ(runner.stats().cells_cached, 4u);
    EXPECT_EQ(runner.stats().cells_executed, 4u);
  }
  {
    auto fresh = j;
    fresh["cache"] = "fresh";
    fresh["qps"] = {37};
    Runner runner(config(fresh));
    runner.run(plan(runner.config()));
    EXPECT_EQ(runner.stats().cells_executed, 2u);
  }
}

TEST_F(PipelineTest, EncoderTemplateChangeMissesCache) {
  auto j = base_config();
  j["qps"] = {37};
  Runner(config(j)).run(plan(config(j)));
  j["encoder"] = mock_encoder(" --no-simd");
  Runner runner(config(j));
  runner.run(plan(runner.config()));
  EXPECT_EQ(runner.stats().cells_cached, 0u);
  EXPECT_EQ(runner.stats().cells_executed, 2u);
}

TEST_F(PipelineTest, CodecFailures) {
  auto j = base_config();
  j["qps"] = {37};
  j["decoder"] = "head -c 100 {INPUT} > {OUTPUT}";
  {
    Runner runner(config(j));
    EXPECT_THROW(runner.run(plan(runner.config())), PipelineError);
  }
  j["decoder"] = mock_decoder();
  j["encoder"] = "exit 4";
  {
    Runner runner(config(j));
    EXPECT_THROW(runner.run(plan(runner.config())), ProcessError);
  }
  j["measure"] = true;
  {
    Runner runner(config(j));
    EXPECT_THROW(runner.run(plan(runner.config())), ProcessError);
  }
  j["encoder"] = "true {OUTPUT}";
  {
    Runner runner(config(j));
    EXPECT_THROW(runner.run(plan(runner.config())), PipelineError);
  }
}

TEST_F(PipelineTest, ExternalMetricIsRecorded) {
  auto j = base_config();
  j["qps"] = {37};
  j["metric_cmd"] = "test -s {REF} && test -s {TEST} && echo 9.5";
  Runner runner(config(j));
  for (const auto& r : runner.run(plan(runner.config())).records()) {
    ASSERT_TRUE(r.quality.external_score.has_value());
    EXPECT_EQ(*r.quality.external_score, 9.5);
  }
}

TEST(Results, CorruptAndVersionMismatch) {
  TempDir dir;
  hdrbench_test::write_text(dir / "bad.jsonl", "{not json\n");
  EXPECT_THROW(load_results(dir / "bad.jsonl"), RuntimeError);
  hdrbench_test::write_text(dir / "old.jsonl", "{\"schema_version\": 99}\n");
  EXPECT_THROW(load_results(dir / "old.jsonl"), RuntimeError);
}

TEST(Results, InfinitePsnrRoundTrips) {
  TempDir dir;
  RunRecord r;
  r.key = "k";
  r.sequence = "s";
  r.variant = "10-10";
  r.qp = 22;
  r.frame_count = 3;
  r.frame_rate = 29.97;
  r.bitstream_bytes = 1234;
  r.bitrate = bitrate_from_size(1234, 3, 29.97);
  r.quality = {kInfinitePsnr, 50.5, kInfinitePsnr, kInfinitePsnr, 9.25};
  r.measurements["L"] = aggregate({{1.0, 0.9, 12.0, true}, {1.1, 1.0, 13.0, true}});
  r.bitstream_digest = sha256_hex("x");
  ResultSet set;
  set.put(r);
  store_results(set, dir / "s.jsonl");
  EXPECT_EQ(load_results(dir / "s.jsonl"), set);
}

TEST(Results, MergeCombinesPlatformLabels) {
  RunRecord a;
  a.key = "a";
  a.sequence = "s";
  a.variant = "8-8";
  a.qp = 22;
  a.measurements["L"] = aggregate({{1, 1, 1, false}});
  RunRecord b = a;
  b.key = "b";
  b.measurements.clear();
  b.measurements["W"] = aggregate({{2, 2, std::nullopt, false}});
  ResultSet sa, sb;
  sa.put(a);
  sb.put(b);
  const auto merged = merge_results({sa, sb});
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged.records()[0].measurements.size(), 2u);
}

TEST(Digest, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
