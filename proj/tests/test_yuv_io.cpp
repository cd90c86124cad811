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

#include <random>

#include "hdrbench/yuv_io.hpp"
#include "support/test_util.hpp"

using namespace hdrbench;
using hdrbench_test::TempDir;
using hdrbench_test::write_bytes;

TEST(YuvIo, Reads8BitBytesVerbatim) {
  TempDir dir;
  write_bytes(dir / "a.yuv", {0, 255, 128, 7, 3, 200});
  const auto seq = read_sequence(dir / "a.yuv", {2, 2, 8}, 25.0);
  ASSERT_EQ(seq.frame_count(), 1u);
  const auto& f = seq.frames()[0];
  EXPECT_EQ(std::vector<Sample>(f.plane(Plane::Y).begin(), f.plane(Plane::Y).end()),
            (std::vector<Sample>{0, 255, 128, 7}));
  EXPECT_EQ(f.plane(Plane::U)[0], 3);
  EXPECT_EQ(f.plane(Plane::V)[0], 200);
}

TEST(YuvIo, Reads10BitLittleEndian) {
  TempDir dir;
  write_bytes(dir / "a.yuv", {0xFF, 0x03, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  const auto seq = read_sequence(dir / "a.yuv", {2, 2, 10}, 25.0);
  EXPECT_EQ(seq.frames()[0].plane(Plane::Y)[0], 1023);
}

TEST(YuvIo, RejectsOutOfRangeSampleWithIndex) {
  TempDir dir;
  write_bytes(dir / "a.yuv", {0x00, 0x04, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  try {
    read_sequence(dir / "a.yuv", {2, 2, 10}, 25.0);
    FAIL() << "expected a range error";
  } catch (const SampleRangeError& e) {
    EXPECT_EQ(e.sample_index(), 0u);
  }
}

TEST(YuvIo, RangeErrorIndexCountsFromFileStart) {
  TempDir dir;
  std::vector<std::uint8_t> bytes(24, 0);
  bytes[12 + 2 * 5] = 0xFF;  // frame 1, U sample (index 4 + 1 = 5 within the frame)
  bytes[12 + 2 * 5 + 1] = 0xFF;
  write_bytes(dir / "a.yuv", bytes);
  try {
    read_sequence(dir / "a.yuv", {2, 2, 10}, 25.0);
    FAIL() << "expected a range error";
  } catch (const SampleRangeError& e) {
    EXPECT_EQ(e.sample_index(), 6u + 5u);
  }
}

TEST(YuvIo, TruncatedFileIsSizeMismatch) {
  TempDir dir;
  write_bytes(dir / "a.yuv", {1, 2, 3, 4, 5});
  EXPECT_THROW(read_sequence(dir / "a.yuv", {2, 2, 8}, 25.0), SizeMismatchError);
}

TEST(YuvIo, MissingFileIsIoError) {
  EXPECT_THROW(read_sequence("/nonexistent/x.yuv", {2, 2, 8}, 25.0), IoError);
}

TEST(YuvIo, Writes10BitLittleEndian) {
  TempDir dir;
  const PlaneFormat f{2, 2, 10};
  Frame frame(f, {512, 0, 0, 0}, {0}, {0});
  write_sequence(Sequence(f, 30.0, {frame}), dir / "a.yuv");
  const auto bytes = hdrbench_test::read_text(dir / "a.yuv");
  ASSERT_EQ(bytes.size(), 12u);
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[0]), 0x00);
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[1]), 0x02);
}

TEST(YuvIo, EmptySequenceGivesEmptyFile) {
  TempDir dir;
  write_sequence(Sequence({4, 4, 10}, 30.0), dir / "e.yuv");
  EXPECT_EQ(std::filesystem::file_size(dir / "e.yuv"), 0u);
  EXPECT_EQ(read_sequence(dir / "e.yuv", {4, 4, 10}, 30.0).frame_count(), 0u);
}

TEST(YuvIo, FrameBytes) {
  for (int depth : {8, 10}) {
    const PlaneFormat f{1920, 1080, depth};
    EXPECT_EQ(f.frame_bytes(), static_cast<std::size_t>(1920 * 1080 * 3 / 2) * (depth == 8 ? 1 : 2));
  }
}

TEST(YuvIo, RejectsBadFormats) {
  EXPECT_THROW((PlaneFormat{3, 2, 8}.validate()), ValidationError);
  EXPECT_THROW((PlaneFormat{0, 2, 8}.validate()), ValidationError);
  EXPECT_THROW((PlaneFormat{2, 2, 12}.validate()), ValidationError);
  EXPECT_THROW(Frame(PlaneFormat{2, 2, 8}, {0, 0, 0}, {0}, {0}), SizeMismatchError);
  EXPECT_THROW(Frame(PlaneFormat{2, 2, 8}, {0, 0, 0, 256}, {0}, {0}), SampleRangeError);
  EXPECT_THROW(Sequence(PlaneFormat{2, 2, 8}, 0.0), ValidationError);
  EXPECT_THROW(Sequence(PlaneFormat{2, 2, 8}, 25.0, {Frame(PlaneFormat{2, 2, 10})}), ValidationError);
}

TEST(YuvIo, RoundTripProperty) {
  TempDir dir;
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int depth = trial % 2 ? 10 : 8;
    const PlaneFormat f{2 * (1 + static_cast<int>(rng() % 12)), 2 * (1 + static_cast<int>(rng() % 12)), depth};
    std::vector<Frame> frames;
    const int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) frames.push_back(hdrbench_test::random_frame(f, rng));
    const Sequence seq(f, 24.0, frames);
    const auto path = dir / ("r" + std::to_string(trial) + ".yuv");
    write_sequence(seq, path);
    EXPECT_EQ(std::filesystem::file_size(path), f.frame_bytes() * frames.size());
    EXPECT_EQ(read_sequence(path, f, 24.0), seq);
  }
}
