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

#include <cmath>
#include <vector>

#include "pacast/types.hpp"
#include "pacast/video.hpp"

namespace pacast {

/// 3D DCT coefficients stored in scan order: temporal plane 0 first, then
/// row-major within each plane. Index of (t, y, x) is (t * height + y) * width + x.
struct CoefficientCube {
  Dims dims;
  RealVector coeffs;

  [[nodiscard]] double& at(int t, int y, int x) {
    return coeffs[(static_cast<Eigen::Index>(t) * dims.height + y) * dims.width + x];
  }
  [[nodiscard]] double at(int t, int y, int x) const {
    return coeffs[(static_cast<Eigen::Index>(t) * dims.height + y) * dims.width + x];
  }
};

struct Chunk {
  int index = 0;
  RealVector samples;
  /// Population variance of `samples`.
  double variance = 0.0;
};

/// Equal-length chunks of a cube's scan order, plus the zero padding that was
/// appended to the last chunk to make the lengths equal.
struct ChunkSet {
  Dims dims;
  std::vector<Chunk> chunks;
  int padding = 0;

  [[nodiscard]] int chunk_length() const {
    return chunks.empty() ? 0 : static_cast<int>(chunks.front().samples.size());
  }
};

struct WhitenedPayload {
  RealVector samples;
  int hadamard_order = 0;
  /// Zeros appended to reach a multiple of hadamard_order.
  int padding = 0;
};

/// Orthonormal DCT-II matrix: row k is basis vector k.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dct_matrix(int n) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> c(n, n);
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  for (int k = 0; k < n; ++k) {
    const Scalar alpha = k == 0 ? std::sqrt(Scalar(1) / n) : std::sqrt(Scalar(2) / n);
    for (int i = 0; i < n; ++i) {
      c(k, i) = alpha * std::cos(pi * Scalar(2 * i + 1) * Scalar(k) / Scalar(2 * n));
    }
  }
  return c;
}

[[nodiscard]] inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place normalized fast Walsh-Hadamard transform (natural order) of each
/// consecutive block of `order` entries. H/sqrt(order) is symmetric and
/// orthogonal, so applying it twice is the identity.
template <typename Derived>
void fwht_blocks(Eigen::MatrixBase<Derived>& v, int order) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = Scalar(1) / std::sqrt(Scalar(order));
  for (Eigen::Index base = 0; base + order <= v.size(); base += order) {
    for (int len = 1; len < order; len <<= 1) {
      for (int i = 0; i < order; i += len << 1) {
        for (int j = i; j < i + len; ++j) {
          const Scalar a = v(base + j);
          const Scalar b = v(base + j + len);
          v(base + j) = a + b;
          v(base + j + len) = a - b;
        }
      }
    }
    v.segment(base, order) *= norm;
  }
}

CoefficientCube dct3(const Gop& gop);
Gop idct3(const CoefficientCube& cube);

/// Flattens pixels in the same (t, y, x) order as CoefficientCube.
RealVector flatten(const Gop& gop);
Gop unflatten(const RealVector& samples, Dims dims);

/// Splits the scan order into `num_chunks` equal contiguous chunks.
ChunkSet chunk(const CoefficientCube& cube, int num_chunks);
CoefficientCube dechunk(const std::vector<Chunk>& chunks, Dims dims);
inline CoefficientCube dechunk(const ChunkSet& set) { return dechunk(set.chunks, set.dims); }

double population_variance(const RealVector& samples);

/// Normalized Hadamard across `order` equal contiguous segments of `v`:
/// entry i of every segment forms one group. v.size() must be a multiple of
/// `order`. Self-inverse.
void hadamard_across_segments(RealVector& v, int order);
/// Zero-pads to a multiple of `order`, then mixes the segments with
/// hadamard_across_segments, so every group draws one sample from each part
/// of the payload and per-symbol power evens out.
WhitenedPayload whiten(const RealVector& samples, int order);
RealVector unwhiten(const WhitenedPayload& payload);

}  // namespace pacast
