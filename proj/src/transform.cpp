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

#include "pacast/transform.hpp"

#include <map>
#include <mutex>

namespace pacast {

namespace {

// DCT matrices are reused across every GOP of a run.
const Eigen::MatrixXd& cached_dct(int n) {
  static std::mutex mu;
  static std::map<int, Eigen::MatrixXd> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, dct_matrix<double>(n)).first;
  }
  return it->second;
}

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Applies `spatial_h` / `spatial_w` to every plane and `temporal` along time.
// Planes are row-major H x W blocks of the flat vector; the temporal axis is
// handled as a T x (H*W) row-major matrix.
RealVector separable_3d(const RealVector& in, Dims d, const Eigen::MatrixXd& temporal,
                        const Eigen::MatrixXd& spatial_h, const Eigen::MatrixXd& spatial_w) {
  const Eigen::Index plane = static_cast<Eigen::Index>(d.height) * d.width;
  RealVector out(in.size());
  for (int t = 0; t < d.time; ++t) {
    Eigen::Map<const RowMajorMatrix> src(in.data() + t * plane, d.height, d.width);
    Eigen::Map<RowMajorMatrix> dst(out.data() + t * plane, d.height, d.width);
    dst.noalias() = spatial_h * src * spatial_w.transpose();
  }
  if (d.time > 1) {
    Eigen::Map<RowMajorMatrix> cube(out.data(), d.time, plane);
    RowMajorMatrix mixed = temporal * cube;
    cube = mixed;
  }
  return out;
}

}  // namespace

RealVector flatten(const Gop& gop) {
  const Dims d = gop.dims();
  RealVector out(static_cast<Eigen::Index>(d.count()));
  const Eigen::Index plane = static_cast<Eigen::Index>(d.height) * d.width;
  for (int t = 0; t < d.time; ++t) {
    const auto& px = gop.frames[static_cast<std::size_t>(t)].pixels;
    if (px.rows() != d.height || px.cols() != d.width) {
      throw InputError("GOP frames must share dimensions");
    }
    Eigen::Map<RowMajorMatrix>(out.data() + t * plane, d.height, d.width) = px;
  }
  return out;
}

Gop unflatten(const RealVector& samples, Dims d) {
  if (static_cast<std::size_t>(samples.size()) != d.count()) {
    throw InputError("sample count does not match GOP dimensions");
  }
  const Eigen::Index plane = static_cast<Eigen::Index>(d.height) * d.width;
  Gop gop;
  for (int t = 0; t < d.time; ++t) {
    gop.frames.emplace_back(
        Eigen::MatrixXd(Eigen::Map<const RowMajorMatrix>(samples.data() + t * plane, d.height, d.width)));
  }
  return gop;
}

CoefficientCube dct3(const Gop& gop) {
  if (gop.frames.empty()) {
    throw InputError("cannot transform an empty GOP");
  }
  const Dims d = gop.dims();
  CoefficientCube cube;
  cube.dims = d;
  cube.coeffs = separable_3d(flatten(gop), d, cached_dct(d.time), cached_dct(d.height),
                             cached_dct(d.width));
  return cube;
}

Gop idct3(const CoefficientCube& cube) {
  const Dims d = cube.dims;
  if (static_cast<std::size_t>(cube.coeffs.size()) != d.count() || d.count() == 0) {
    throw InputError("coefficient cube size does not match its dimensions");
  }
  const RealVector px =
      separable_3d(cube.coeffs, d, cached_dct(d.time).transpose(), cached_dct(d.height).transpose(),
                   cached_dct(d.width).transpose());
  return unflatten(px, d);
}

double population_variance(const RealVector& samples) {
  if (samples.size() == 0) {
    return 0.0;
  }
  const double mean = samples.mean();
  return (samples.array() - mean).square().mean();
}

ChunkSet chunk(const CoefficientCube& cube, int num_chunks) {
  if (num_chunks < 1) {
    throw InputError("num_chunks must be at least 1");
  }
  const auto n = static_cast<Eigen::Index>(cube.coeffs.size());
  const Eigen::Index len = (n + num_chunks - 1) / num_chunks;
  RealVector padded = RealVector::Zero(len * num_chunks);
  padded.head(n) = cube.coeffs;

  ChunkSet set;
  set.dims = cube.dims;
  set.padding = static_cast<int>(len * num_chunks - n);
  set.chunks.reserve(static_cast<std::size_t>(num_chunks));
  for (int i = 0; i < num_chunks; ++i) {
    Chunk c;
    c.index = i;
    c.samples = padded.segment(i * len, len);
    c.variance = population_variance(c.samples);
    set.chunks.push_back(std::move(c));
  }
  return set;
}

CoefficientCube dechunk(const std::vector<Chunk>& chunks, Dims dims) {
  if (chunks.empty()) {
    throw InputError("dechunk needs at least one chunk");
  }
  const Eigen::Index len = chunks.front().samples.size();
  const auto n = static_cast<Eigen::Index>(dims.count());
  const Eigen::Index total = len * static_cast<Eigen::Index>(chunks.size());
  if (total < n || total - n >= static_cast<Eigen::Index>(chunks.size()) || n == 0) {
    throw InputError("chunk lengths are inconsistent with cube dimensions");
  }
  RealVector flat(total);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (chunks[i].samples.size() != len) {
      throw InputError("chunks must have equal length");
    }
    flat.segment(static_cast<Eigen::Index>(i) * len, len) = chunks[i].samples;
  }
  CoefficientCube cube;
  cube.dims = dims;
  cube.coeffs = flat.head(n);
  return cube;
}

void hadamard_across_segments(RealVector& v, int order) {
  const Eigen::Index len = v.size() / order;
  Eigen::Map<Eigen::MatrixXd> segments(v.data(), len, order);
  RealVector group(order);
  for (Eigen::Index i = 0; i < len; ++i) {
    group = segments.row(i).transpose();
    fwht_blocks(group, order);
    segments.row(i) = group.transpose();
  }
}

WhitenedPayload whiten(const RealVector& samples, int order) {
  if (!is_power_of_two(order)) {
    throw InputError("Hadamard order must be a power of two");
  }
  const Eigen::Index n = samples.size();
  const Eigen::Index padded = (n + order - 1) / order * order;
  WhitenedPayload out;
  out.hadamard_order = order;
  out.padding = static_cast<int>(padded - n);
  out.samples = RealVector::Zero(padded);
  out.samples.head(n) = samples;
  hadamard_across_segments(out.samples, order);
  return out;
}

RealVector unwhiten(const WhitenedPayload& payload) {
  if (!is_power_of_two(payload.hadamard_order) ||
      payload.samples.size() % payload.hadamard_order != 0 || payload.padding < 0 ||
      payload.padding > payload.samples.size()) {
    throw InputError("malformed whitened payload");
  }
  RealVector v = payload.samples;
  hadamard_across_segments(v, payload.hadamard_order);
  return v.head(v.size() - payload.padding);
}

}  // namespace pacast
