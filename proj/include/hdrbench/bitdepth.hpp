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

// Linear 10-bit <-> 8-bit conversion applied identically to Y, U and V.
//
// Forward: [0,1023] is normalized to [0,1], scaled to [0,255] and rounded
// half-up. This is computed exactly in integers as (x*510 + 1023) / 2046.
// Inverse: two zero bits are appended (y*4).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>

#include "hdrbench/error.hpp"
#include "hdrbench/yuv_io.hpp"

namespace hdrbench {

inline constexpr Sample kMax10 = 1023;
inline constexpr Sample kMax8 = 255;

constexpr Sample tonemap_sample(Sample x) {
  return static_cast<Sample>((static_cast<std::uint32_t>(x) * 2 * kMax8 + kMax10) / (2 * kMax10));
}

constexpr Sample expand_sample(Sample y) { return static_cast<Sample>(y << 2); }

namespace detail {

template <typename SampleMap>
Frame map_frame(const Frame& in, int out_depth, SampleMap&& map) {
  Frame out(in.format().with_depth(out_depth));
  for (Plane p : kPlanes) {
    auto src = in.plane(p);
    auto dst = out.plane(p);
    std::transform(src.begin(), src.end(), dst.begin(), map);
  }
  return out;
}

}  // namespace detail

inline Frame tonemap_10_to_8(const Frame& frame) {
  if (frame.format().bit_depth != 10) {
    throw DepthError("tone mapping expects 10-bit input, got " + std::to_string(frame.format().bit_depth) + "-bit");
  }
  return detail::map_frame(frame, 8, [](Sample x) { return tonemap_sample(x); });
}

inline Frame expand_8_to_10(const Frame& frame) {
  if (frame.format().bit_depth != 8) {
    throw DepthError("expansion expects 8-bit input, got " + std::to_string(frame.format().bit_depth) + "-bit");
  }
  return detail::map_frame(frame, 10, [](Sample y) { return expand_sample(y); });
}

inline Sequence tonemap_10_to_8(const Sequence& seq) {
  if (seq.format().bit_depth != 10) {
    throw DepthError("tone mapping expects a 10-bit sequence, got " + std::to_string(seq.format().bit_depth) +
                     "-bit");
  }
  std::vector<Frame> frames;
  frames.reserve(seq.frame_count());
  for (const Frame& f : seq.frames()) {
    frames.push_back(tonemap_10_to_8(f));
  }
  return Sequence(seq.format().with_depth(8), seq.frame_rate(), std::move(frames));
}

inline Sequence expand_8_to_10(const Sequence& seq) {
  if (seq.format().bit_depth != 8) {
    throw DepthError("expansion expects an 8-bit sequence, got " + std::to_string(seq.format().bit_depth) + "-bit");
  }
  std::vector<Frame> frames;
  frames.reserve(seq.frame_count());
  for (const Frame& f : seq.frames()) {
    frames.push_back(expand_8_to_10(f));
  }
  return Sequence(seq.format().with_depth(10), seq.frame_rate(), std::move(frames));
}

/// Error of the 10 -> 8 -> 10 round trip swept over every 10-bit code with
/// uniform weight, all in squared 10-bit units.
struct NoiseReport {
  /// Against the real-valued inverse x' = (1023/255) * y.
  double mse_ideal_inverse = 0.0;
  /// Against the shift inverse x' = y << 2 that the pipeline actually uses.
  double mse_shift_inverse = 0.0;
  int max_abs_error_shift = 0;
  /// Codes where the rounded scale differs from a plain x >> 2.
  int shift_forward_divergences = 0;
  std::optional<int> first_shift_forward_divergence;
};

inline NoiseReport quantization_noise_report() {
  NoiseReport r;
  const double inverse_scale = static_cast<double>(kMax10) / kMax8;
  for (int x = 0; x <= kMax10; ++x) {
    const Sample y = tonemap_sample(static_cast<Sample>(x));
    const double ideal = x - inverse_scale * y;
    const int shift = x - expand_sample(y);
    r.mse_ideal_inverse += ideal * ideal;
    r.mse_shift_inverse += static_cast<double>(shift) * shift;
    r.max_abs_error_shift = std::max(r.max_abs_error_shift, std::abs(shift));
    if (y != (x >> 2)) {
      ++r.shift_forward_divergences;
      if (!r.first_shift_forward_divergence) r.first_shift_forward_divergence = x;
    }
  }
  r.mse_ideal_inverse /= kMax10 + 1;
  r.mse_shift_inverse /= kMax10 + 1;
  return r;
}

}  // namespace hdrbench
