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

#include <span>
#include <vector>

#include "pacast/transform.hpp"
#include "pacast/types.hpp"

namespace pacast {

/// Chunks whose variance falls below this floor get their gain from the floor.
inline constexpr double kVarianceFloor = 1e-6;

struct NormalizedPacket {
  RealVector samples;
  double mean = 0.0;
};

/// Per-chunk amplitude gains. `power_budget` is the average transmit power
/// per real sample: sum_i g_i^2 lambda_i n_i / N == power_budget. A complex
/// I/Q symbol built from two such samples carries twice that power.
struct GainVector {
  std::vector<double> gains;
  double power_budget = 0.0;
};

/// Removes the packet mean. The returned mean restores the input exactly.
NormalizedPacket normalize_packet(const RealVector& samples);

/// Gain rule g_i = c * lambda_i^(-1/4), with c fixed by the power
/// constraint. Throws DegenerateSourceError when every variance is zero.
GainVector allocate_gains(std::span<const double> variances, std::span<const int> lengths,
                          double power_budget);

/// Sample-wise g_i * x over the concatenated chunks.
RealVector scale(const std::vector<Chunk>& chunks, const GainVector& gains);

/// Linear MMSE estimate per chunk: x = g lambda / (g^2 lambda + sigma^2) * y.
/// `received` is split into gains.gains.size() equal chunks; sigma_sq == 0
/// gives the zero-forcing estimate y / g.
std::vector<Chunk> mmse_decode(const RealVector& received, const GainVector& gains,
                               std::span<const double> variances, const NoiseEstimate& noise);

/// Same, with a separate noise variance per received sample.
std::vector<Chunk> mmse_decode(const RealVector& received, const GainVector& gains,
                               std::span<const double> variances, const RealVector& noise_per_sample);

}  // namespace pacast
