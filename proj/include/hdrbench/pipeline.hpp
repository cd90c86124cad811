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

// Benchmark orchestration: sequence x variant x QP cells, each one encoded
// by an external command under measurement, decoded, brought back to the
// source depth and scored against the 10-bit source.
//
// Encoder templates may use {INPUT} {OUTPUT} {QP} {WIDTH} {HEIGHT}
// {BITDEPTH} (depth of the file handed to the encoder) {INTERNAL_BITDEPTH}
// {FPS} {FRAMES} {SIMD} (1 or 0) and {FLAGS}. Decoder templates get {INPUT}
// (the bitstream) {OUTPUT} {WIDTH} {HEIGHT} {BITDEPTH} (the expected output
// depth, i.e. the internal depth) {FPS} {FRAMES} and {FLAGS}. Paths are
// substituted shell-quoted.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdrbench/bitdepth.hpp"
#include "hdrbench/digest.hpp"
#include "hdrbench/error.hpp"
#include "hdrbench/measure.hpp"
#include "hdrbench/metrics.hpp"
#include "hdrbench/process.hpp"
#include "hdrbench/results.hpp"
#include "hdrbench/yuv_io.hpp"

namespace hdrbench {

inline const std::vector<int> kDefaultQpLadder = {12, 17, 22, 27, 32, 37};

struct SequenceSpec {
  std::string id;
  std::filesystem::path path;
  PlaneFormat format;
  double frame_rate = 0.0;
};

struct VariantConfig {
  std::string name;
  int input_depth = 10;
  int internal_depth = 10;
  bool simd_enabled = true;
  std::string encoder_template;
  std::string decoder_template;
  std::string flags;
  std::string decoder_flags;
};

struct VariantDefaults {
  const char* name;
  int input_depth;
  int internal_depth;
  bool simd_enabled;
};

/// 10-10: 10-bit input, 10-bit encoder. 8-10: tone-mapped input, 10-bit
/// encoder. 8-8: tone-mapped input, 8-bit encoder, with and without SIMD.
inline constexpr VariantDefaults kKnownVariants[] = {
    {"10-10", 10, 10, true},
    {"8-10", 8, 10, true},
    {"8-8", 8, 8, true},
    {"8-8-nosimd", 8, 8, false},
};

enum class CachePolicy { reuse, fresh };

struct PipelineConfig {
  std::vector<SequenceSpec> sequences;
  std::vector<VariantConfig> variants;
  std::vector<int> qps = kDefaultQpLadder;
  std::size_t repetitions = 5;
  bool measure = true;
  CachePolicy cache = CachePolicy::reuse;
  std::optional<RaplDomain> rapl = RaplDomain{};
  bool pin_cpu = true;
  bool drop_extremes = true;
  std::string host = "local";
  std::filesystem::path work_dir = "work";
  std::filesystem::path store = "results.jsonl";
  std::optional<std::string> metric_cmd;
  std::optional<std::string> reported_bitrate_regex;
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

inline VariantConfig parse_variant(const nlohmann::json& j, const std::string& default_encoder,
                                   const std::string& default_decoder) {
  VariantConfig v;
  const nlohmann::json obj = j.is_string() ? nlohmann::json{{"name", j}} : j;
  v.name = obj.at("name").get<std::string>();
  const VariantDefaults* known = nullptr;
  for (const auto& k : kKnownVariants) {
    if (v.name == k.name) known = &k;
  }
  if (known) {
    v.input_depth = known->input_depth;
    v.internal_depth = known->internal_depth;
    v.simd_enabled = known->simd_enabled;
    auto check = [&](const char* key, int expected) {
      if (obj.contains(key) && obj.at(key).get<int>() != expected) {
        throw ValidationError("variant " + v.name + " requires " + key + " = " + std::to_string(expected));
      }
    };
    check("input_depth", known->input_depth);
    check("internal_depth", known->internal_depth);
    if (obj.contains("simd") && obj.at("simd").get<bool>() != known->simd_enabled) {
      throw ValidationError("variant " + v.name + " has a fixed SIMD setting");
    }
  } else {
    if (!obj.contains("input_depth") || !obj.contains("internal_depth")) {
      throw ValidationError("unknown variant '" + v.name +
                            "'; user-defined variants must set input_depth and internal_depth");
    }
    v.input_depth = obj.at("input_depth").get<int>();
    v.internal_depth = obj.at("internal_depth").get<int>();
    v.simd_enabled = get_or(obj, "simd", true);
  }
  for (int d : {v.input_depth, v.internal_depth}) {
    if (d != 8 && d != 10) throw ValidationError("variant " + v.name + ": depths must be 8 or 10");
  }
  if (v.internal_depth < v.input_depth) {
    throw ValidationError("variant " + v.name + ": internal depth below input depth is not supported");
  }
  v.encoder_template = get_or<std::string>(obj, "encoder", default_encoder);
  v.decoder_template = get_or<std::string>(obj, "decoder", default_decoder);
  v.flags = get_or<std::string>(obj, "flags", "");
  v.decoder_flags = get_or<std::string>(obj, "decoder_flags", "");
  if (v.encoder_template.empty() || v.decoder_template.empty()) {
    throw ValidationError("variant " + v.name + " has no encoder or decoder command template");
  }
  return v;
}

}  // namespace detail

/// Parses a configuration document. Relative paths resolve against
/// `base_dir`.
inline PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    const auto default_encoder = detail::get_or<std::string>(j, "encoder", "");
    const auto default_decoder = detail::get_or<std::string>(j, "decoder", "");
    for (const auto& s : j.at("sequences")) {
      SequenceSpec seq;
      seq.id = s.at("id").get<std::string>();
      seq.path = detail::resolve(base_dir, s.at("path").get<std::string>());
      seq.format = {s.at("width").get<int>(), s.at("height").get<int>(), detail::get_or(s, "bit_depth", 10)};
      seq.format.validate();
      if (seq.format.bit_depth != 10) {
        throw ValidationError("sequence " + seq.id + ": sources must be 10-bit");
      }
      seq.frame_rate = s.at("fps").get<double>();
      if (!(seq.frame_rate > 0.0)) throw ValidationError("sequence " + seq.id + ": fps must be positive");
      for (const auto& other : c.sequences) {
        if (other.id == seq.id) throw ValidationError("duplicate sequence id " + seq.id);
      }
      c.sequences.push_back(std::move(seq));
    }
    for (const auto& v : j.at("variants")) {
      c.variants.push_back(detail::parse_variant(v, default_encoder, default_decoder));
      for (std::size_t i = 0; i + 1 < c.variants.size(); ++i) {
        if (c.variants[i].name == c.variants.back().name) {
          throw ValidationError("duplicate variant " + c.variants.back().name);
        }
      }
    }
    if (j.contains("qps")) c.qps = j.at("qps").get<std::vector<int>>();
    c.repetitions = detail::get_or<std::size_t>(j, "repetitions", 5);
    c.measure = detail::get_or(j, "measure", true);
    const auto cache = detail::get_or<std::string>(j, "cache", "reuse");
    if (cache == "reuse") {
      c.cache = CachePolicy::reuse;
    } else if (cache == "fresh") {
      c.cache = CachePolicy::fresh;
    } else {
      throw ValidationError("cache must be 'reuse' or 'fresh'");
    }
    if (j.contains("rapl")) {
      if (j.at("rapl").is_null()) {
        c.rapl.reset();
      } else {
        RaplDomain d;
        d.root = detail::get_or<std::string>(j.at("rapl"), "root", d.root.string());
        d.domain = detail::get_or<std::string>(j.at("rapl"), "domain", d.domain);
        c.rapl = d;
      }
    }
    c.pin_cpu = detail::get_or(j, "pin_cpu", true);
    c.drop_extremes = detail::get_or(j, "drop_extremes", true);
    c.host = detail::get_or<std::string>(j, "host", "local");
    c.work_dir = detail::resolve(base_dir, detail::get_or<std::string>(j, "work_dir", "work"));
    c.store = detail::resolve(base_dir, detail::get_or<std::string>(j, "store", "results.jsonl"));
    if (j.contains("metric_cmd") && !j.at("metric_cmd").is_null()) c.metric_cmd = j.at("metric_cmd").get<std::string>();
    if (j.contains("reported_bitrate_regex") && !j.at("reported_bitrate_regex").is_null()) {
      c.reported_bitrate_regex = j.at("reported_bitrate_regex").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid configuration: ") + e.what());
  }
  if (c.sequences.empty()) throw ValidationError("configuration lists no sequences");
  if (c.variants.empty()) throw ValidationError("configuration lists no variants");
  if (c.qps.empty()) throw ValidationError("the QP ladder is empty");
  for (int qp : c.qps) {
    if (qp < 0 || qp > 51) throw ValidationError("QP " + std::to_string(qp) + " outside [0, 51]");
  }
  if (c.repetitions < 1) throw ValidationError("repetitions must be at least 1");
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

struct Cell {
  std::size_t sequence = 0;
  std::size_t variant = 0;
  int qp = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct RunPlan {
  std::vector<Cell> cells;
  std::size_t repetitions = 5;
  CachePolicy cache = CachePolicy::reuse;
};

/// Cells ordered by sequence, then variant, then descending QP so that the
/// cheap high-QP encodes fail first.
inline RunPlan plan(const PipelineConfig& config) {
  if (config.qps.empty()) throw ValidationError("the QP ladder is empty");
  for (const auto& seq : config.sequences) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(seq.path, ec)) {
      throw ValidationError("sequence " + seq.id + ": missing file " + seq.path.string());
    }
    FrameReader probe(seq.path, seq.format);
    if (probe.frame_count() == 0) throw ValidationError("sequence " + seq.id + " has no frames");
  }
  std::vector<int> ladder = config.qps;
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());

  RunPlan p;
  p.repetitions = config.repetitions;
  p.cache = config.cache;
  for (std::size_t s = 0; s < config.sequences.size(); ++s) {
    for (std::size_t v = 0; v < config.variants.size(); ++v) {
      for (int qp : ladder) p.cells.push_back({s, v, qp});
    }
  }
  return p;
}

class PipelineError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

struct RunStats {
  std::size_t cells_executed = 0;
  std::size_t cells_cached = 0;
  std::size_t encoder_invocations = 0;
  std::size_t decoder_invocations = 0;
  std::size_t codec_invocations() const { return encoder_invocations + decoder_invocations; }
};

class Runner {
 public:
  explicit Runner(PipelineConfig config) : config_(std::move(config)) {}

  const PipelineConfig& config() const { return config_; }
  const RunStats& stats() const { return stats_; }

  const std::string& sequence_digest(std::size_t index) {
    auto it = sequence_digests_.find(index);
    if (it == sequence_digests_.end()) {
      it = sequence_digests_.emplace(index, sha256_file(config_.sequences.at(index).path)).first;
    }
    return it->second;
  }

  /// Cache key: source content, variant definition, QP, command templates
  /// and host label.
  std::string cell_key(const Cell& cell) {
    const auto& v = config_.variants.at(cell.variant);
    Sha256 h;
    h.field(sequence_digest(cell.sequence))
        .field(v.name)
        .field(std::to_string(v.input_depth))
        .field(std::to_string(v.internal_depth))
        .field(v.simd_enabled ? "simd" : "nosimd")
        .field(std::to_string(cell.qp))
        .field(v.encoder_template)
        .field(v.flags)
        .field(v.decoder_template)
        .field(v.decoder_flags)
        .field(config_.host);
    return h.hex();
  }

  /// Runs every cell of `p`, skipping cached ones under the reuse policy.
  /// New records are appended to the configured store as they complete.
  ResultSet run(const RunPlan& p) {
    ResultSet results;
    std::error_code ec;
    if (std::filesystem::exists(config_.store, ec)) results = load_results(config_.store);
    std::filesystem::create_directories(config_.work_dir);
    ResultStoreWriter writer(config_.store);
    for (const Cell& cell : p.cells) {
      const std::string key = cell_key(cell);
      if (p.cache == CachePolicy::reuse) {
        const RunRecord* cached = results.find(key);
        if (cached && (!config_.measure || cached->measurements.count(config_.host))) {
          ++stats_.cells_cached;
          continue;
        }
      }
      RunRecord record = execute_cell(cell, p.repetitions);
      writer.append(record);
      results.put(std::move(record));
    }
    return results;
  }

  RunRecord execute_cell(const Cell& cell, std::size_t repetitions) {
    const auto& seq = config_.sequences.at(cell.sequence);
    const auto& v = config_.variants.at(cell.variant);
    std::filesystem::create_directories(config_.work_dir / "cells");

    std::filesystem::path input = seq.path;
    PlaneFormat input_format = seq.format;
    if (v.input_depth == 8) {
      input = tonemapped_source(cell.sequence);
      input_format = seq.format.with_depth(8);
    }
    const std::size_t frames = FrameReader(seq.path, seq.format).frame_count();
    const std::string stem = sanitize(seq.id + "_" + v.name + "_qp" + std::to_string(cell.qp));
    const auto bitstream = config_.work_dir / "cells" / (stem + ".bin");
    const auto decoded = config_.work_dir / "cells" / (stem + ".dec.yuv");
    std::filesystem::remove(bitstream);
    std::filesystem::remove(decoded);

    RunRecord record;
    record.key = cell_key(cell);
    record.sequence = seq.id;
    record.variant = v.name;
    record.qp = cell.qp;
    record.frame_count = frames;
    record.frame_rate = seq.frame_rate;

    const std::string encode_cmd = expand_template(
        v.encoder_template, {{"INPUT", shell_quote(input.string())},
                             {"OUTPUT", shell_quote(bitstream.string())},
                             {"QP", std::to_string(cell.qp)},
                             {"WIDTH", std::to_string(seq.format.width)},
                             {"HEIGHT", std::to_string(seq.format.height)},
                             {"BITDEPTH", std::to_string(input_format.bit_depth)},
                             {"INTERNAL_BITDEPTH", std::to_string(v.internal_depth)},
                             {"FPS", format_number(seq.frame_rate)},
                             {"FRAMES", std::to_string(frames)},
                             {"SIMD", v.simd_enabled ? "1" : "0"},
                             {"FLAGS", v.flags}});
    std::string encoder_stdout;
    if (config_.measure) {
      MeasureOptions mo;
      mo.repetitions = repetitions;
      mo.rapl = config_.rapl;
      mo.pin_to_single_cpu = config_.pin_cpu;
      mo.aggregate.drop_extremes = config_.drop_extremes;
      mo.capture_stdout = true;
      stats_.encoder_invocations += repetitions;
      MeasuredRun mr = measure_process(encode_cmd, mo);
      record.measurements[config_.host] = std::move(mr.measurement);
      encoder_stdout = std::move(mr.last_stdout);
    } else {
      ProcessOptions po;
      po.capture_stdout = true;
      ++stats_.encoder_invocations;
      ProcessResult res = run_shell(encode_cmd, po);
      if (res.exit_code != 0) {
        throw ProcessError("encoder exited with " + std::to_string(res.exit_code) + ": " + encode_cmd, res.exit_code);
      }
      encoder_stdout = std::move(res.stdout_text);
    }
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(bitstream, ec);
    if (ec || bytes == 0) throw PipelineError("encoder produced no bitstream at " + bitstream.string());
    record.bitstream_bytes = bytes;
    record.bitrate = bitrate_from_size(bytes, frames, seq.frame_rate);
    record.bitstream_digest = sha256_file(bitstream);
    if (config_.reported_bitrate_regex) {
      std::smatch m;
      const std::regex re(*config_.reported_bitrate_regex);
      if (std::regex_search(encoder_stdout, m, re) && m.size() > 1) {
        try {
          record.encoder_reported_bitrate = std::stod(m[1].str());
        } catch (const std::exception&) {
          // Unparsable encoder output; file-size accounting still applies.
        }
      }
    }

    const std::string decode_cmd =
        expand_template(v.decoder_template, {{"INPUT", shell_quote(bitstream.string())},
                                             {"OUTPUT", shell_quote(decoded.string())},
                                             {"WIDTH", std::to_string(seq.format.width)},
                                             {"HEIGHT", std::to_string(seq.format.height)},
                                             {"BITDEPTH", std::to_string(v.internal_depth)},
                                             {"FPS", format_number(seq.frame_rate)},
                                             {"FRAMES", std::to_string(frames)},
                                             {"FLAGS", v.decoder_flags}});
    ++stats_.decoder_invocations;
    ProcessResult dec = run_shell(decode_cmd);
    if (dec.exit_code != 0) {
      throw ProcessError("decoder exited with " + std::to_string(dec.exit_code) + ": " + decode_cmd, dec.exit_code);
    }

    const PlaneFormat decoded_format = seq.format.with_depth(v.internal_depth);
    const auto decoded_bytes = std::filesystem::file_size(decoded, ec);
    if (ec || decoded_bytes != frames * decoded_format.frame_bytes()) {
      throw PipelineError("decoder output " + decoded.string() + " does not hold " + std::to_string(frames) + " " +
                          std::to_string(seq.format.width) + "x" + std::to_string(seq.format.height) + " " +
                          std::to_string(decoded_format.bit_depth) + "-bit frames");
    }

    // Score in the 10-bit domain: 8-bit reconstructions are expanded first.
    const bool needs_expansion = decoded_format.bit_depth == 8;
    std::filesystem::path test_path = decoded;
    std::optional<FrameWriter> expanded_writer;
    if (needs_expansion && config_.metric_cmd) {
      test_path = config_.work_dir / "cells" / (stem + ".dec10.yuv");
      expanded_writer.emplace(test_path, seq.format);
    }
    FrameReader source_reader(seq.path, seq.format);
    FrameReader decoded_reader(decoded, decoded_format);
    QualityAccumulator acc;
    while (auto src = source_reader.next()) {
      Frame out = *decoded_reader.next();
      if (needs_expansion) out = expand_8_to_10(out);
      acc.add(*src, out);
      if (expanded_writer) expanded_writer->write(out);
    }
    if (expanded_writer) expanded_writer->close();
    record.quality = acc.result();
    if (config_.metric_cmd) {
      record.quality.external_score = external_metric(seq.path, test_path, *config_.metric_cmd);
    }
    ++stats_.cells_executed;
    return record;
  }

 private:
  static std::string sanitize(std::string s) {
    for (char& c : s) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '_' || c == '.';
      if (!ok) c = '_';
    }
    return s;
  }

  static std::string format_number(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
  }

  /// 8-bit version of a source, produced once per source content.
  std::filesystem::path tonemapped_source(std::size_t index) {
    const auto& seq = config_.sequences.at(index);
    const auto path =
        config_.work_dir / (sanitize(seq.id) + "-" + sequence_digest(index).substr(0, 16) + "-8bit.yuv");
    std::error_code ec;
    const auto expected = FrameReader(seq.path, seq.format).frame_count() * seq.format.with_depth(8).frame_bytes();
    if (std::filesystem::file_size(path, ec) == expected && !ec) return path;
    const auto tmp = path.string() + ".tmp";
    {
      FrameReader reader(seq.path, seq.format);
      FrameWriter writer(tmp, seq.format.with_depth(8));
      while (auto f = reader.next()) writer.write(tonemap_10_to_8(*f));
      writer.close();
    }
    std::filesystem::rename(tmp, path);
    return path;
  }

  PipelineConfig config_;
  RunStats stats_;
  std::map<std::size_t, std::string> sequence_digests_;
};

}  // namespace hdrbench
