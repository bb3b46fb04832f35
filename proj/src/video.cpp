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

#include "pacast/video.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace pacast {

Frame::Frame(int width, int height, double fill) {
  if (width <= 0 || height <= 0) {
    throw InputError("frame dimensions must be positive");
  }
  pixels = Eigen::MatrixXd::Constant(height, width, fill);
}

Frame::Frame(Eigen::MatrixXd px) : pixels(std::move(px)) {
  if (pixels.rows() <= 0 || pixels.cols() <= 0) {
    throw InputError("frame dimensions must be positive");
  }
}

std::size_t frame_bytes(int width, int height, VideoFormat format) {
  const auto luma = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  switch (format) {
    case VideoFormat::YOnly:
      return luma;
    case VideoFormat::Yuv420:
      // Two chroma planes subsampled 2x2, rounded up for odd sizes.
      return luma + 2 * static_cast<std::size_t>((width + 1) / 2) *
                        static_cast<std::size_t>((height + 1) / 2);
  }
  return luma;
}

std::vector<Frame> load_video(const std::filesystem::path& path, int width, int height,
                              VideoFormat format) {
  if (width <= 0 || height <= 0) {
    throw InputError("video dimensions must be positive");
  }
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw InputError("video file not found: " + path.string());
  }
  const auto size = std::filesystem::file_size(path);
  const auto per_frame = frame_bytes(width, height, format);
  if (size == 0 || size % per_frame != 0) {
    std::ostringstream msg;
    msg << "truncated video file " << path.string() << ": expected a multiple of "
        << per_frame << " bytes per frame, got " << size << " bytes";
    throw InputError(msg.str());
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open video file: " + path.string());
  }
  const auto count = size / per_frame;
  std::vector<unsigned char> buffer(per_frame);
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::size_t f = 0; f < count; ++f) {
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(per_frame));
    if (!in) {
      throw InputError("short read from " + path.string());
    }
    Frame frame(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        frame.pixels(y, x) = buffer[static_cast<std::size_t>(y) * width + x];
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

void write_video(const std::vector<Frame>& frames, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write video file: " + path.string());
  }
  for (const auto& frame : frames) {
    for (int y = 0; y < frame.height(); ++y) {
      for (int x = 0; x < frame.width(); ++x) {
        out.put(static_cast<char>(to_byte(frame.pixels(y, x))));
      }
    }
  }
}

std::vector<Gop> split_gops(const std::vector<Frame>& frames, int gop_size) {
  if (gop_size < 1) {
    throw InputError("gop_size must be at least 1");
  }
  if (frames.empty()) {
    throw InputError("cannot split an empty frame list into GOPs");
  }
  const int w = frames.front().width();
  const int h = frames.front().height();
  std::vector<Gop> gops;
  for (std::size_t start = 0; start < frames.size(); start += static_cast<std::size_t>(gop_size)) {
    Gop gop;
    for (int k = 0; k < gop_size; ++k) {
      const auto idx = std::min(start + static_cast<std::size_t>(k), frames.size() - 1);
      const auto& f = frames[idx];
      if (f.width() != w || f.height() != h) {
        throw InputError("all frames must share dimensions");
      }
      gop.frames.push_back(f);
    }
    gops.push_back(std::move(gop));
  }
  return gops;
}

PsnrResult psnr_from_mse(double mse) {
  PsnrResult r;
  r.mse = mse;
  r.psnr_db = mse > 0.0 ? 20.0 * std::log10(255.0 / std::sqrt(mse)) : kPsnrCapDb;
  return r;
}

PsnrResult compute_psnr(const Frame& reference, const Frame& test) {
  if (reference.width() != test.width() || reference.height() != test.height()) {
    throw InputError("PSNR requires frames of identical dimensions");
  }
  const double mse = (reference.pixels - test.pixels).squaredNorm() /
                     static_cast<double>(reference.pixels.size());
  return psnr_from_mse(mse);
}

std::uint8_t to_byte(double value) {
  const double r = std::floor(value + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

void write_frame(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write frame: " + path.string());
  }
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      out.put(static_cast<char>(to_byte(frame.pixels(y, x))));
    }
  }
  if (!out) {
    throw InputError("write failed: " + path.string());
  }
}

namespace {

// Skips whitespace and '#' comments in a PGM header, then reads an integer.
int read_pgm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
    c = in.peek();
  }
  int v = 0;
  if (!(in >> v)) {
    throw InputError("malformed PGM header");
  }
  return v;
}

}  // namespace

Frame read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open PGM: " + path.string());
  }
  std::string magic;
  in >> magic;
  if (magic != "P5") {
    throw InputError("not a binary PGM: " + path.string());
  }
  const int w = read_pgm_int(in);
  const int h = read_pgm_int(in);
  const int maxval = read_pgm_int(in);
  if (maxval != 255) {
    throw InputError("only 8-bit PGM is supported");
  }
  in.get();
  Frame frame(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int c = in.get();
      if (c == EOF) {
        throw InputError("truncated PGM: " + path.string());
      }
      frame.pixels(y, x) = static_cast<unsigned char>(c);
    }
  }
  return frame;
}

Frame gray_frame(int width, int height) { return Frame(width, height, 128.0); }

namespace {

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  std::uint64_t h = seed ^ (static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ULL) ^
                    (static_cast<std::uint64_t>(iy) * 0xC2B2AE3D27D4EB4FULL);
  h ^= h >> 33;
  h *= 0xFF51AFD7ED558CCDULL;
  h ^= h >> 33;
  h *= 0xC4CEB9FE1A85EC53ULL;
  h ^= h >> 33;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Smoothly interpolated lattice noise in [0, 1).
double value_noise(double x, double y, double cell, std::uint64_t seed) {
  const double gx = x / cell;
  const double gy = y / cell;
  const auto ix = static_cast<std::int64_t>(std::floor(gx));
  const auto iy = static_cast<std::int64_t>(std::floor(gy));
  double fx = gx - std::floor(gx);
  double fy = gy - std::floor(gy);
  fx = fx * fx * (3.0 - 2.0 * fx);
  fy = fy * fy * (3.0 - 2.0 * fy);
  const double a = lattice(ix, iy, seed);
  const double b = lattice(ix + 1, iy, seed);
  const double c = lattice(ix, iy + 1, seed);
  const double d = lattice(ix + 1, iy + 1, seed);
  return (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy;
}

}  // namespace

std::vector<Frame> synthesize_video(int width, int height, int frame_count, std::uint64_t seed) {
  if (width <= 0 || height <= 0 || frame_count <= 0) {
    throw InputError("synthetic video dimensions must be positive");
  }
  constexpr double pi = std::numbers::pi;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> sensor(0.0, 1.5);
  const double sx = width / 176.0;
  const double sy = height / 144.0;

  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(frame_count));
  for (int t = 0; t < frame_count; ++t) {
    const double pan_x = 0.7 * t;
    const double pan_y = 3.0 * std::sin(t / 23.0);
    const double cx = width * 0.5 + 7.0 * sx * std::sin(t / 17.0);
    const double cy = height * 0.52 + 4.0 * sy * std::cos(t / 13.0);
    const double rx = 36.0 * sx;
    const double ry = 47.0 * sy;
    const double tilt = 0.12 * std::sin(t / 19.0);

    Frame frame(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double wx = x + pan_x;
        const double wy = y + pan_y;
        // Background: broad illumination, a brick-like structure and texture.
        double bg = 105.0 + 35.0 * std::sin(0.021 * wx + 0.9) * std::cos(0.017 * wy);
        const double brick_row = std::floor(wy / 14.0);
        const double brick_x = wx + (static_cast<std::int64_t>(brick_row) % 2 ? 11.0 : 0.0);
        const bool mortar = std::fmod(wy, 14.0) < 1.5 || std::fmod(brick_x, 22.0) < 1.5;
        if (wx > 60.0 && wx < 400.0 && wy < 0.45 * height + 20.0) {
          bg += mortar ? -30.0 : 18.0 * (lattice(static_cast<std::int64_t>(brick_x / 22.0),
                                                 static_cast<std::int64_t>(brick_row), seed) -
                                         0.5);
        }
        bg += 22.0 * (value_noise(wx, wy, 9.0, seed + 7) - 0.5);
        bg += 10.0 * (value_noise(wx, wy, 3.0, seed + 11) - 0.5);

        // Foreground head: shaded ellipse with features, anti-aliased edge.
        const double dx = x - cx;
        const double dy = y - cy;
        const double ux = (dx * std::cos(tilt) + dy * std::sin(tilt)) / rx;
        const double uy = (-dx * std::sin(tilt) + dy * std::cos(tilt)) / ry;
        const double r = std::sqrt(ux * ux + uy * uy);
        double fg = 150.0 + 55.0 * (1.0 - r * r) * (0.6 + 0.4 * ux) +
                    8.0 * (value_noise(x, y, 4.0, seed + 13) - 0.5);
        if (uy < -0.45) {
          fg = 60.0 + 20.0 * std::sin(6.0 * ux + t * 0.05);  // hair / helmet
        }
        for (double ex : {-0.38, 0.38}) {
          const double ed = std::hypot(ux - ex, (uy + 0.12) * 1.6);
          if (ed < 0.16) {
            fg = 40.0 + 200.0 * ed;
          }
        }
        if (std::abs(uy - 0.45) < 0.05 && std::abs(ux) < 0.3 * (1.0 + 0.1 * std::sin(t * 0.3))) {
          fg -= 60.0;  // mouth
        }
        const double alpha = std::clamp((1.0 - r) * rx * 0.8, 0.0, 1.0);
        double v = alpha * fg + (1.0 - alpha) * bg;
        v += 4.0 * std::sin(2.0 * pi * (x + 0.5 * y) / 64.0 + 0.1 * t);
        v += sensor(rng);
        frame.pixels(y, x) = std::clamp(v, 0.0, 255.0);
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace pacast
