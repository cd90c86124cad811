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

// Raw planar 4:2:0 YUV files without header. Each frame is stored as the
// full Y plane followed by the U and V planes at quarter resolution.
// 8-bit samples take one byte, 10-bit samples one 16-bit little-endian
// word whose top six bits must be zero.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hdrbench/error.hpp"

namespace hdrbench {

using Sample = std::uint16_t;

struct PlaneFormat {
  int width = 0;
  int height = 0;
  int bit_depth = 8;

  void validate() const {
    if (width <= 0 || height <= 0) {
      throw ValidationError("frame dimensions must be positive, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
    if (width % 2 != 0 || height % 2 != 0) {
      throw ValidationError("4:2:0 needs even dimensions, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
    if (bit_depth != 8 && bit_depth != 10) {
      throw DepthError("unsupported bit depth " + std::to_string(bit_depth) + " (expected 8 or 10)");
    }
  }

  std::size_t luma_samples() const { return static_cast<std::size_t>(width) * height; }
  std::size_t chroma_samples() const { return luma_samples() / 4; }
  std::size_t samples_per_frame() const { return luma_samples() + 2 * chroma_samples(); }
  std::size_t bytes_per_sample() const { return bit_depth > 8 ? 2 : 1; }
  std::size_t frame_bytes() const { return samples_per_frame() * bytes_per_sample(); }
  Sample max_value() const { return static_cast<Sample>((1u << bit_depth) - 1); }

  PlaneFormat with_depth(int depth) const { return {width, height, depth}; }

  friend bool operator==(const PlaneFormat&, const PlaneFormat&) = default;
};

enum class Plane { Y = 0, U = 1, V = 2 };

inline constexpr Plane kPlanes[] = {Plane::Y, Plane::U, Plane::V};

inline const char* plane_name(Plane p) {
  switch (p) {
    case Plane::Y: return "Y";
    case Plane::U: return "U";
    case Plane::V: return "V";
  }
  return "?";
}

class Frame {
 public:
  Frame() = default;

  /// Zero-filled frame.
  explicit Frame(const PlaneFormat& format)
      : format_(format),
        y_(format.luma_samples()),
        u_(format.chroma_samples()),
        v_(format.chroma_samples()) {
    format_.validate();
  }

  Frame(const PlaneFormat& format, std::vector<Sample> y, std::vector<Sample> u, std::vector<Sample> v)
      : format_(format), y_(std::move(y)), u_(std::move(u)), v_(std::move(v)) {
    format_.validate();
    if (y_.size() != format_.luma_samples() || u_.size() != format_.chroma_samples() ||
        v_.size() != format_.chroma_samples()) {
      throw SizeMismatchError("plane sizes do not match " + std::to_string(format_.width) + "x" +
                              std::to_string(format_.height) + " 4:2:0");
    }
    std::size_t offset = 0;
    for (Plane p : kPlanes) {
      auto samples = plane(p);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i] > format_.max_value()) {
          throw SampleRangeError("sample " + std::to_string(offset + i) + " (" + plane_name(p) + " plane) has value " +
                                     std::to_string(samples[i]) + " above " + std::to_string(format_.max_value()) +
                                     " for " + std::to_string(format_.bit_depth) + "-bit",
                                 offset + i);
        }
      }
      offset += samples.size();
    }
  }

  const PlaneFormat& format() const { return format_; }

  std::span<const Sample> plane(Plane p) const {
    switch (p) {
      case Plane::Y: return y_;
      case Plane::U: return u_;
      case Plane::V: return v_;
    }
    return {};
  }

  std::span<Sample> plane(Plane p) {
    switch (p) {
      case Plane::Y: return y_;
      case Plane::U: return u_;
      case Plane::V: return v_;
    }
    return {};
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  PlaneFormat format_;
  std::vector<Sample> y_;
  std::vector<Sample> u_;
  std::vector<Sample> v_;
};

class Sequence {
 public:
  Sequence(const PlaneFormat& format, double frame_rate, std::vector<Frame> frames = {})
      : format_(format), frame_rate_(frame_rate), frames_(std::move(frames)) {
    format_.validate();
    if (!(frame_rate_ > 0.0)) {
      throw ValidationError("frame rate must be positive");
    }
    for (std::size_t i = 0; i < frames_.size(); ++i) {
      if (frames_[i].format() != format_) {
        throw ValidationError("frame " + std::to_string(i) + " does not share the sequence format");
      }
    }
  }

  const PlaneFormat& format() const { return format_; }
  double frame_rate() const { return frame_rate_; }
  const std::vector<Frame>& frames() const { return frames_; }
  std::size_t frame_count() const { return frames_.size(); }

  friend bool operator==(const Sequence&, const Sequence&) = default;

 private:
  PlaneFormat format_;
  double frame_rate_;
  std::vector<Frame> frames_;
};

/// Reads one frame at a time so that streaming tools keep memory at
/// O(frame).
class FrameReader {
 public:
  FrameReader(const std::filesystem::path& path, const PlaneFormat& format) : path_(path), format_(format) {
    format_.validate();
    std::error_code ec;
    auto size = std::filesystem::file_size(path, ec);
    if (ec) {
      throw IoError("cannot open " + path.string() + ": " + ec.message());
    }
    if (size % format_.frame_bytes() != 0) {
      throw SizeMismatchError(path.string() + ": size " + std::to_string(size) + " is not a multiple of the " +
                              std::to_string(format_.frame_bytes()) + "-byte frame size (truncated file?)");
    }
    frame_count_ = size / format_.frame_bytes();
    in_.open(path, std::ios::binary);
    if (!in_) {
      throw IoError("cannot open " + path.string());
    }
    buffer_.resize(format_.frame_bytes());
  }

  std::size_t frame_count() const { return frame_count_; }
  const PlaneFormat& format() const { return format_; }

  std::optional<Frame> next() {
    if (frames_read_ == frame_count_) {
      return std::nullopt;
    }
    if (!in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()))) {
      throw IoError("short read from " + path_.string());
    }
    Frame frame(format_);
    const std::size_t first_sample = frames_read_ * format_.samples_per_frame();
    std::size_t k = 0;
    for (Plane p : kPlanes) {
      for (Sample& s : frame.plane(p)) {
        Sample value;
        if (format_.bytes_per_sample() == 1) {
          value = buffer_[k];
        } else {
          value = static_cast<Sample>(buffer_[2 * k] | (buffer_[2 * k + 1] << 8));
        }
        if (value > format_.max_value()) {
          throw SampleRangeError(path_.string() + ": sample " + std::to_string(first_sample + k) + " (frame " +
                                     std::to_string(frames_read_) + ", " + plane_name(p) + " plane) has value " +
                                     std::to_string(value) + " above " + std::to_string(format_.max_value()),
                                 first_sample + k);
        }
        s = value;
        ++k;
      }
    }
    ++frames_read_;
    return frame;
  }

 private:
  std::filesystem::path path_;
  PlaneFormat format_;
  std::ifstream in_;
  std::vector<std::uint8_t> buffer_;
  std::size_t frame_count_ = 0;
  std::size_t frames_read_ = 0;
};

class FrameWriter {
 public:
  FrameWriter(const std::filesystem::path& path, const PlaneFormat& format)
      : path_(path), format_(format), out_(path, std::ios::binary | std::ios::trunc) {
    format_.validate();
    if (!out_) {
      throw IoError("cannot open " + path.string() + " for writing");
    }
    buffer_.resize(format_.frame_bytes());
  }

  void write(const Frame& frame) {
    if (frame.format() != format_) {
      throw ValidationError("frame format does not match writer format");
    }
    std::size_t k = 0;
    for (Plane p : kPlanes) {
      for (Sample s : frame.plane(p)) {
        if (format_.bytes_per_sample() == 1) {
          buffer_[k] = static_cast<std::uint8_t>(s);
        } else {
          buffer_[2 * k] = static_cast<std::uint8_t>(s & 0xFF);
          buffer_[2 * k + 1] = static_cast<std::uint8_t>(s >> 8);
        }
        ++k;
      }
    }
    if (!out_.write(reinterpret_cast<const char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()))) {
      throw IoError("write to " + path_.string() + " failed");
    }
  }

  void close() {
    out_.close();
    if (out_.fail()) {
      throw IoError("closing " + path_.string() + " failed");
    }
  }

 private:
  std::filesystem::path path_;
  PlaneFormat format_;
  std::ofstream out_;
  std::vector<std::uint8_t> buffer_;
};

inline Sequence read_sequence(const std::filesystem::path& path, const PlaneFormat& format, double frame_rate) {
  FrameReader reader(path, format);
  std::vector<Frame> frames;
  frames.reserve(reader.frame_count());
  while (auto frame = reader.next()) {
    frames.push_back(std::move(*frame));
  }
  return Sequence(format, frame_rate, std::move(frames));
}

inline void write_sequence(const Sequence& seq, const std::filesystem::path& path) {
  FrameWriter writer(path, seq.format());
  for (const Frame& f : seq.frames()) {
    writer.write(f);
  }
  writer.close();
}

}  // namespace hdrbench
