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

#include "pacast/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace pacast {

void ChannelParams::validate() const {
  if (taps.empty()) {
    throw InputError("channel needs at least one tap");
  }
  if (!noiseless && !(std::isfinite(snr_db) && gamma() > 0.0)) {
    throw InputError("channel SNR must be a finite positive ratio");
  }
  if (!(sample_rate > 0.0) || phase_noise_std < 0.0) {
    throw InputError("invalid channel parameters");
  }
}

ComplexVector complex_gaussian(Eigen::Index n, double power, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(power / 2.0));
  ComplexVector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    w[i] = Complex(re, im);
  }
  return w;
}

ComplexVector apply_channel(const ComplexVector& samples, const ChannelParams& params) {
  params.validate();
  const Eigen::Index n = samples.size();
  const auto taps = static_cast<Eigen::Index>(params.taps.size());
  ComplexVector y = ComplexVector::Zero(n + taps - 1);
  for (Eigen::Index k = 0; k < taps; ++k) {
    y.segment(k, n) += params.taps[static_cast<std::size_t>(k)] * samples;
  }

  if (params.cfo_hz != 0.0 || params.phase_noise_std > 0.0) {
    const double step = 2.0 * std::numbers::pi * params.cfo_hz / params.sample_rate;
    // Phase noise uses its own stream so the additive noise does not depend on it.
    std::mt19937_64 rng(params.seed ^ 0x5DEECE66DULL);
    std::normal_distribution<double> walk(0.0, params.phase_noise_std);
    double wiener = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (params.phase_noise_std > 0.0) {
        wiener += walk(rng);
      }
      y[i] *= std::polar(1.0, step * static_cast<double>(i) + wiener);
    }
  }

  if (!params.noiseless && n > 0) {
    const double signal_power = samples.squaredNorm() / static_cast<double>(n);
    y += complex_gaussian(y.size(), signal_power / params.gamma(), params.seed);
  }
  return y;
}

std::vector<Complex> rayleigh_taps(int count, double decay, std::uint64_t seed) {
  if (count < 1 || !(decay > 0.0)) {
    throw InputError("rayleigh taps need count >= 1 and positive decay");
  }
  const ComplexVector g = complex_gaussian(count, 1.0, seed);
  std::vector<Complex> taps(static_cast<std::size_t>(count));
  double energy = 0.0;
  for (int k = 0; k < count; ++k) {
    taps[static_cast<std::size_t>(k)] = g[k] * std::sqrt(std::pow(decay, k));
    energy += std::norm(taps[static_cast<std::size_t>(k)]);
  }
  for (auto& t : taps) {
    t /= std::sqrt(energy);
  }
  return taps;
}

NoiseEstimate measure_snr(const ComplexVector& rx_pilots, const ComplexVector& known_pilots,
                          const ComplexVector& channel_gains) {
  if (rx_pilots.size() != known_pilots.size() || rx_pilots.size() != channel_gains.size()) {
    throw InputError("pilot vectors must have equal length");
  }
  if (rx_pilots.size() < kMinPilotObservations) {
    throw EstimateRefused("fewer than 8 pilot observations");
  }
  const ComplexVector expected = channel_gains.cwiseProduct(known_pilots);
  const double n = static_cast<double>(rx_pilots.size());
  const double residual = (rx_pilots - expected).squaredNorm() / n;
  const double signal = expected.squaredNorm() / n;
  const double cap = db_to_linear(kMaxMeasuredSnrDb);
  NoiseEstimate est;
  est.sigma_sq = residual / 2.0;
  est.gamma = residual > 0.0 ? std::min(signal / residual, cap) : cap;
  return est;
}

}  // namespace pacast
