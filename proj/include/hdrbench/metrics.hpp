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

// Full-reference quality between a source and a reconstructed sequence.

#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "hdrbench/error.hpp"
#include "hdrbench/measure.hpp"
#include "hdrbench/process.hpp"
#include "hdrbench/yuv_io.hpp"

namespace hdrbench {

/// PSNR of a lossless reconstruction.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

struct QualityRecord {
  double psnr_y = 0.0;
  double psnr_u = 0.0;
  double psnr_v = 0.0;
  double psnr_yuv = 0.0;
  std::optional<double> external_score;

  friend bool operator==(const QualityRecord&, const QualityRecord&) = default;
};

inline double mse_plane(std::span<const Sample> ref, std::span<const Sample> test) {
  if (ref.size() != test.size()) {
    throw ValidationError("plane size mismatch: " + std::to_string(ref.size()) + " vs " +
                          std::to_string(test.size()));
  }
  if (ref.empty()) {
    throw ValidationError("empty plane");
  }
  // Exact integer accumulation: 1023^2 * 2^32 samples still fits in 64 bits.
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const std::int64_t d = static_cast<std::int64_t>(ref[i]) - test[i];
    sum += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(sum) / static_cast<double>(ref.size());
}

inline double psnr_from_mse(double mse, int bit_depth) {
  if (mse == 0.0) return kInfinitePsnr;
  const double peak = static_cast<double>((1 << bit_depth) - 1);
  return 10.0 * std::log10(peak * peak / mse);
}

inline double psnr_plane(std::span<const Sample> ref, std::span<const Sample> test, int bit_depth) {
  return psnr_from_mse(mse_plane(ref, test), bit_depth);
}

/// Luma-weighted combination (6*Y + U + V) / 8. Any infinite component
/// makes the result infinite.
inline double psnr_yuv(double y, double u, double v) {
  if (std::isinf(y) || std::isinf(u) || std::isinf(v)) return kInfinitePsnr;
  // Chroma summed first so that swapping U and V is exact.
  return (6.0 * y + (u + v)) / 8.0;
}

inline double psnr_yuv(const QualityRecord& r) { return psnr_yuv(r.psnr_y, r.psnr_u, r.psnr_v); }

inline void check_comparable(const PlaneFormat& ref, const PlaneFormat& test) {
  if (ref.bit_depth != test.bit_depth) {
    throw DepthError("bit depth mismatch: reference is " + std::to_string(ref.bit_depth) + "-bit, test is " +
                     std::to_string(test.bit_depth) + "-bit");
  }
  if (ref.width != test.width || ref.height != test.height) {
    throw ValidationError("dimension mismatch: " + std::to_string(ref.width) + "x" + std::to_string(ref.height) +
                          " vs " + std::to_string(test.width) + "x" + std::to_string(test.height));
  }
}

inline QualityRecord frame_quality(const Frame& ref, const Frame& test) {
  check_comparable(ref.format(), test.format());
  const int depth = ref.format().bit_depth;
  QualityRecord r;
  r.psnr_y = psnr_plane(ref.plane(Plane::Y), test.plane(Plane::Y), depth);
  r.psnr_u = psnr_plane(ref.plane(Plane::U), test.plane(Plane::U), depth);
  r.psnr_v = psnr_plane(ref.plane(Plane::V), test.plane(Plane::V), depth);
  r.psnr_yuv = psnr_yuv(r);
  return r;
}

/// Accumulates per-frame plane PSNRs and averages them arithmetically.
/// Usable with streamed frames.
class QualityAccumulator {
 public:
  void add(const Frame& ref, const Frame& test) {
    const QualityRecord f = frame_quality(ref, test);
    sum_y_ += f.psnr_y;
    sum_u_ += f.psnr_u;
    sum_v_ += f.psnr_v;
    ++frames_;
  }

  std::size_t frames() const { return frames_; }

  QualityRecord result() const {
    if (frames_ == 0) {
      throw ValidationError("no frames to compare");
    }
    QualityRecord r;
    const double n = static_cast<double>(frames_);
    r.psnr_y = sum_y_ / n;
    r.psnr_u = sum_u_ / n;
    r.psnr_v = sum_v_ / n;
    r.psnr_yuv = psnr_yuv(r);
    return r;
  }

 private:
  double sum_y_ = 0.0;
  double sum_u_ = 0.0;
  double sum_v_ = 0.0;
  std::size_t frames_ = 0;
};

inline QualityRecord sequence_quality(const Sequence& ref, const Sequence& test) {
  check_comparable(ref.format(), test.format());
  if (ref.frame_count() != test.frame_count()) {
    throw ValidationError("frame count mismatch: " + std::to_string(ref.frame_count()) + " vs " +
                          std::to_string(test.frame_count()));
  }
  QualityAccumulator acc;
  for (std::size_t i = 0; i < ref.frame_count(); ++i) {
    acc.add(ref.frames()[i], test.frames()[i]);
  }
  return acc.result();
}

/// Streaming variant over two raw files of the same format.
inline QualityRecord file_quality(const std::filesystem::path& ref, const std::filesystem::path& test,
                                  const PlaneFormat& format) {
  FrameReader ref_reader(ref, format);
  FrameReader test_reader(test, format);
  if (ref_reader.frame_count() != test_reader.frame_count()) {
    throw ValidationError("frame count mismatch: " + std::to_string(ref_reader.frame_count()) + " vs " +
                          std::to_string(test_reader.frame_count()));
  }
  QualityAccumulator acc;
  while (auto a = ref_reader.next()) {
    acc.add(*a, *test_reader.next());
  }
  return acc.result();
}

inline constexpr double kExternalScoreMin = 0.0;
inline constexpr double kExternalScoreMax = 10.0;

/// Runs an external full-reference metric. `command_template` must contain
/// {REF} and {TEST}; they are replaced by shell-quoted paths. The command
/// must print one decimal score in [0, 10] on stdout.
inline double external_metric(const std::filesystem::path& ref, const std::filesystem::path& test,
                              const std::string& command_template) {
  if (command_template.find("{REF}") == std::string::npos || command_template.find("{TEST}") == std::string::npos) {
    throw ValidationError("metric command must contain {REF} and {TEST}: " + command_template);
  }
  const std::string cmd =
      expand_template(command_template, {{"REF", shell_quote(ref.string())}, {"TEST", shell_quote(test.string())}});
  ProcessOptions opts;
  opts.capture_stdout = true;
  ProcessResult res;
  {
    std::shared_lock lock(measurement_mutex());
    res = run_shell(cmd, opts);
  }
  if (res.exit_code != 0) {
    throw ProcessError("metric command exited with " + std::to_string(res.exit_code) + ": " + cmd, res.exit_code);
  }

  std::string_view text = res.stdout_text;
  const auto first = text.find_first_not_of(" \t\r\n");
  const auto last = text.find_last_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    throw ParseError("metric command printed nothing");
  }
  text = text.substr(first, last - first + 1);
  double score = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), score);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(score)) {
    throw ParseError("metric output is not a single decimal score: '" + std::string(text) + "'");
  }
  if (score < kExternalScoreMin || score > kExternalScoreMax) {
    throw ValidationError("metric score " + std::string(text) + " outside [0, 10]");
  }
  return score;
}

}  // namespace hdrbench
