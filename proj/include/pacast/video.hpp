// Copyright 2026 The pacast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pacast/types.hpp"

namespace pacast {

/// A single luma frame. Pixels are stored height x width, row = scanline.
struct Frame {
  Eigen::MatrixXd pixels;

  Frame() = default;
  Frame(int width, int height, double fill = 0.0);
  explicit Frame(Eigen::MatrixXd px);

  [[nodiscard]] int width() const { return static_cast<int>(pixels.cols()); }
  [[nodiscard]] int height() const { return static_cast<int>(pixels.rows()); }
};

/// Consecutive frames coded jointly; gop_size() is the temporal DCT length.
struct Gop {
  std::vector<Frame> frames;

  [[nodiscard]] int gop_size() const { return static_cast<int>(frames.size()); }
  [[nodiscard]] int width() const { return frames.front().width(); }
  [[nodiscard]] int height() const { return frames.front().height(); }
  [[nodiscard]] Dims dims() const { return {gop_size(), height(), width()}; }
};

struct PsnrResult {
  double mse = 0.0;
  double psnr_db = 0.0;
};

/// PSNR reported for identical frames.
inline constexpr double kPsnrCapDb = 99.0;

enum class VideoFormat { YOnly, Yuv420 };

[[nodiscard]] std::size_t frame_bytes(int width, int height, VideoFormat format);

/// Reads headerless 8-bit planar video. For yuv420 only the luma plane is kept.
std::vector<Frame> load_video(const std::filesystem::path& path, int width, int height,
                              VideoFormat format);

/// Writes frames as headerless y-only planar video (rounded and clamped like PGM).
void write_video(const std::vector<Frame>& frames, const std::filesystem::path& path);

/// Groups frames into GOPs; a short trailing group repeats its last frame.
std::vector<Gop> split_gops(const std::vector<Frame>& frames, int gop_size);

PsnrResult compute_psnr(const Frame& reference, const Frame& test);
PsnrResult psnr_from_mse(double mse);

/// Round-half-up then clamp to [0, 255].
std::uint8_t to_byte(double value);

/// Binary 8-bit PGM (P5).
void write_frame(const Frame& frame, const std::filesystem::path& path);
Frame read_pgm(const std::filesystem::path& path);

/// Mid-gray frame used as the reconstruction of a lost GOP.
Frame gray_frame(int width, int height);

/// Deterministic synthetic test sequence with natural-video statistics: a
/// panning textured background, a moving shaded ellipse and mild sensor noise.
/// Stands in for a standard sequence when none is on disk.
std::vector<Frame> synthesize_video(int width, int height, int frame_count,
                                    std::uint64_t seed = 1);

}  // namespace pacast
