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

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pacast/video.hpp"

namespace testing_support {

/// QCIF luma frames: the file named by PACAST_FOREMAN when set (y-only or
/// yuv420, chosen by file size), otherwise the built-in synthetic sequence.
inline std::vector<pacast::Frame> qcif_sequence(int frames) {
  if (const char* path = std::getenv("PACAST_FOREMAN"); path != nullptr && *path != '\0') {
    const auto bytes = std::filesystem::file_size(path);
    const auto format = bytes % pacast::frame_bytes(176, 144, pacast::VideoFormat::Yuv420) == 0 &&
                                bytes % pacast::frame_bytes(176, 144, pacast::VideoFormat::YOnly) != 0
                            ? pacast::VideoFormat::Yuv420
                            : pacast::VideoFormat::YOnly;
    auto all = pacast::load_video(path, 176, 144, format);
    if (static_cast<int>(all.size()) >= frames) {
      all.resize(static_cast<std::size_t>(frames));
      return all;
    }
  }
  return pacast::synthesize_video(176, 144, frames, 7);
}

inline pacast::Gop random_gop(int t, int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  pacast::Gop gop;
  for (int i = 0; i < t; ++i) {
    pacast::Frame f(w, h);
    for (Eigen::Index k = 0; k < f.pixels.size(); ++k) f.pixels.data()[k] = u(rng);
    gop.frames.push_back(std::move(f));
  }
  return gop;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pacast_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
