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

#include "pacast/power.hpp"

#include <algorithm>
#include <cmath>

namespace pacast {

NormalizedPacket normalize_packet(const RealVector& samples) {
  if (samples.size() == 0) {
    throw InputError("cannot normalize an empty packet");
  }
  NormalizedPacket out;
  out.mean = samples.mean();
  out.samples = samples.array() - out.mean;
  return out;
}

GainVector allocate_gains(std::span<const double> variances, std::span<const int> lengths,
                          double power_budget) {
  if (variances.empty() || variances.size() != lengths.size()) {
    throw InputError("variances and lengths must be non-empty and aligned");
  }
  if (!(power_budget > 0.0)) {
    throw InputError("power budget must be positive");
  }
  double total_len = 0.0;
  bool any_signal = false;
  for (std::size_t i = 0; i < variances.size(); ++i) {
    if (variances[i] < 0.0 || !std::isfinite(variances[i])) {
      throw InputError("chunk variances must be finite and non-negative");
    }
    if (lengths[i] <= 0) {
      throw InputError("chunk lengths must be positive");
    }
    any_signal = any_signal || variances[i] > 0.0;
    total_len += lengths[i];
  }
  if (!any_signal) {
    throw DegenerateSourceError("all chunk variances are zero");
  }

  // g_i^2 lambda_i = c^2 lambda_i / sqrt(max(lambda_i, floor)).
  double weighted = 0.0;
  for (std::size_t i = 0; i < variances.size(); ++i) {
    const double lam = variances[i];
    weighted += lam / std::sqrt(std::max(lam, kVarianceFloor)) * (lengths[i] / total_len);
  }
  const double c = std::sqrt(power_budget / weighted);

  GainVector g;
  g.power_budget = power_budget;
  g.gains.reserve(variances.size());
  for (double lam : variances) {
    g.gains.push_back(c * std::pow(std::max(lam, kVarianceFloor), -0.25));
  }
  return g;
}

RealVector scale(const std::vector<Chunk>& chunks, const GainVector& gains) {
  if (chunks.size() != gains.gains.size()) {
    throw InputError("gain count does not match chunk count");
  }
  Eigen::Index total = 0;
  for (const auto& c : chunks) {
    total += c.samples.size();
  }
  RealVector out(total);
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto len = chunks[i].samples.size();
    out.segment(pos, len) = gains.gains[i] * chunks[i].samples;
    pos += len;
  }
  return out;
}

namespace {

double mmse_coefficient(double g, double lambda, double noise) {
  const double denom = g * g * lambda + noise;
  if (denom <= 0.0) {
    return 0.0;
  }
  return g * lambda / denom;
}

void check_alignment(const RealVector& received, const GainVector& gains,
                     std::span<const double> variances) {
  const auto k = static_cast<Eigen::Index>(gains.gains.size());
  if (k == 0 || static_cast<std::size_t>(k) != variances.size() || received.size() % k != 0) {
    throw InputError("received samples are not aligned with the chunk layout");
  }
}

}  // namespace

std::vector<Chunk> mmse_decode(const RealVector& received, const GainVector& gains,
                               std::span<const double> variances, const NoiseEstimate& noise) {
  if (noise.sigma_sq < 0.0) {
    throw InputError("noise variance must be non-negative");
  }
  return mmse_decode(received, gains, variances,
                     RealVector::Constant(received.size(), noise.sigma_sq));
}

std::vector<Chunk> mmse_decode(const RealVector& received, const GainVector& gains,
                               std::span<const double> variances,
                               const RealVector& noise_per_sample) {
  check_alignment(received, gains, variances);
  if (noise_per_sample.size() != received.size()) {
    throw InputError("noise profile length must match received length");
  }
  const auto k = static_cast<Eigen::Index>(gains.gains.size());
  const Eigen::Index len = received.size() / k;
  std::vector<Chunk> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const double g = gains.gains[static_cast<std::size_t>(i)];
    const double lam = variances[static_cast<std::size_t>(i)];
    Chunk c;
    c.index = static_cast<int>(i);
    c.samples.resize(len);
    for (Eigen::Index j = 0; j < len; ++j) {
      const Eigen::Index n = i * len + j;
      c.samples[j] = mmse_coefficient(g, lam, noise_per_sample[n]) * received[n];
    }
    c.variance = lam;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace pacast
