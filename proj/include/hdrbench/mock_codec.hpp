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

// Stand-in codec for exercising the pipeline without a real encoder.
//
// The quantizing mode converts the input to the internal depth, quantizes
// every sample with a uniform step of 2^((qp - 4) / 6) (scaled by 4 at 10-bit
// internal depth), predicts each index from its left neighbour in raster
// order and writes the residuals as signed Exp-Golomb codes. Larger QPs
// therefore give smaller bitstreams and lower PSNR. The identity mode copies
// the input file verbatim. Neither mode depends on SIMD settings, so
// SIMD-on and SIMD-off runs produce identical bitstreams.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "hdrbench/error.hpp"
#include "hdrbench/yuv_io.hpp"

namespace hdrbench::mock {

inline constexpr char kMagic[4] = {'H', 'B', 'M', 'K'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 4 + 1 + 4 + 4 + 4 + 1 + 1;

inline double quant_step(int qp, int internal_depth) {
  return std::exp2((qp - 4) / 6.0) * static_cast<double>(1 << (internal_depth - 8));
}

class BitWriter {
 public:
  void put(std::uint32_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) {
      current_ = static_cast<std::uint8_t>((current_ << 1) | ((value >> i) & 1u));
      if (++filled_ == 8) flush_byte();
    }
  }

  void put_ue(std::uint32_t k) {
    const int len = std::bit_width(k + 1);
    put(0, len - 1);
    put(k + 1, len);
  }

  void put_se(std::int32_t v) { put_ue(v > 0 ? static_cast<std::uint32_t>(2 * v - 1) : static_cast<std::uint32_t>(-2 * v)); }

  std::vector<std::uint8_t> finish() {
    if (filled_ > 0) {
      current_ = static_cast<std::uint8_t>(current_ << (8 - filled_));
      flush_byte();
    }
    return std::move(bytes_);
  }

 private:
  void flush_byte() {
    bytes_.push_back(current_);
    current_ = 0;
    filled_ = 0;
  }

  std::vector<std::uint8_t> bytes_;
  std::uint8_t current_ = 0;
  int filled_ = 0;
};

class BitReader {
 public:
  BitReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint32_t get(int bits) {
    std::uint32_t v = 0;
    for (int i = 0; i < bits; ++i) {
      if (pos_ >= 8 * size_) throw ParseError("mock bitstream truncated");
      const std::uint32_t bit = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
      v = (v << 1) | bit;
      ++pos_;
    }
    return v;
  }

  std::uint32_t get_ue() {
    int zeros = 0;
    while (get(1) == 0) {
      if (++zeros > 31) throw ParseError("mock bitstream: bad Exp-Golomb prefix");
    }
    const std::uint32_t rest = get(zeros);
    return ((1u << zeros) | rest) - 1;
  }

  std::int32_t get_se() {
    const std::uint32_t k = get_ue();
    return (k & 1u) ? static_cast<std::int32_t>((k + 1) / 2) : -static_cast<std::int32_t>(k / 2);
  }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_all(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw IoError("cannot write " + path.string());
  }
}

}  // namespace detail

struct EncodeParams {
  PlaneFormat input;  // width, height and depth of the raw input
  int internal_depth = 10;
  int qp = 32;
};

/// Returns the bitstream size in bytes.
inline std::size_t encode(const std::filesystem::path& input, const std::filesystem::path& output,
                          const EncodeParams& params) {
  if (params.internal_depth != 8 && params.internal_depth != 10) {
    throw DepthError("mock encoder supports internal depths 8 and 10");
  }
  if (params.internal_depth < params.input.bit_depth) {
    throw DepthError("mock encoder cannot reduce the input depth");
  }
  if (params.qp < 0 || params.qp > 51) throw ValidationError("QP must be in [0, 51]");

  FrameReader reader(input, params.input);
  std::vector<std::uint8_t> header(kMagic, kMagic + 4);
  header.push_back(kVersion);
  detail::put_u32(header, static_cast<std::uint32_t>(params.input.width));
  detail::put_u32(header, static_cast<std::uint32_t>(params.input.height));
  detail::put_u32(header, static_cast<std::uint32_t>(reader.frame_count()));
  header.push_back(static_cast<std::uint8_t>(params.internal_depth));
  header.push_back(static_cast<std::uint8_t>(params.qp));

  const int up_shift = params.internal_depth - params.input.bit_depth;
  const double step = quant_step(params.qp, params.internal_depth);
  BitWriter bits;
  while (auto frame = reader.next()) {
    for (Plane p : kPlanes) {
      std::int32_t prev = 0;
      for (Sample s : frame->plane(p)) {
        const double x = static_cast<double>(s << up_shift);
        const auto index = static_cast<std::int32_t>(std::floor(x / step + 0.5));
        bits.put_se(index - prev);
        prev = index;
      }
    }
  }
  auto payload = bits.finish();
  header.insert(header.end(), payload.begin(), payload.end());
  detail::write_all(output, header);
  return header.size();
}

/// Writes the reconstruction at the internal depth and returns its format.
inline PlaneFormat decode(const std::filesystem::path& bitstream, const std::filesystem::path& output) {
  const auto bytes = detail::read_all(bitstream);
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError(bitstream.string() + " is not a mock bitstream");
  }
  if (bytes[4] != kVersion) throw ParseError("unsupported mock bitstream version");
  PlaneFormat format;
  format.width = static_cast<int>(detail::get_u32(&bytes[5]));
  format.height = static_cast<int>(detail::get_u32(&bytes[9]));
  const std::uint32_t frames = detail::get_u32(&bytes[13]);
  format.bit_depth = bytes[17];
  const int qp = bytes[18];
  format.validate();

  const double step = quant_step(qp, format.bit_depth);
  const double max_value = format.max_value();
  BitReader reader(bytes.data() + kHeaderBytes, bytes.size() - kHeaderBytes);
  FrameWriter writer(output, format);
  for (std::uint32_t f = 0; f < frames; ++f) {
    Frame frame(format);
    for (Plane p : kPlanes) {
      std::int32_t prev = 0;
      for (Sample& s : frame.plane(p)) {
        prev += reader.get_se();
        s = static_cast<Sample>(std::clamp(std::floor(prev * step + 0.5), 0.0, max_value));
      }
    }
    writer.write(frame);
  }
  writer.close();
  return format;
}

}  // namespace hdrbench::mock
