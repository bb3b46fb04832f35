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
#include <vector>

#include "pacast/types.hpp"

namespace pacast {

struct ChannelParams {
  /// Burst SNR: noise power per complex sample = mean transmitted power / gamma.
  double snr_db = 20.0;
  /// Skip noise entirely (infinite SNR).
  bool noiseless = false;
  /// Complex FIR impulse response, tap 0 first.
  std::vector<Complex> taps{Complex(1.0, 0.0)};
  double cfo_hz = 0.0;
  /// Standard deviation of the per-sample phase random walk, radians.
  double phase_noise_std = 0.0;
  double sample_rate = 20e6;
  std::uint64_t seed = 1;

  [[nodiscard]] double gamma() const { return db_to_linear(snr_db); }
  void validate() const;
};

/// y = rotate(FIR(x)) + w. Output length is input length + taps - 1.
/// The noise is drawn as a unit-power complex Gaussian sequence from `seed`
/// and then scaled, so two bursts sharing a seed see the same noise
/// realization up to a scale factor.
ComplexVector apply_channel(const ComplexVector& samples, const ChannelParams& params);

/// Block-fading multipath: `count` complex Gaussian taps with an exponential
/// power-delay profile (`decay` per tap), normalized to unit total energy.
std::vector<Complex> rayleigh_taps(int count, double decay, std::uint64_t seed);

/// Circularly-symmetric complex Gaussian samples with E|w|^2 = power.
ComplexVector complex_gaussian(Eigen::Index n, double power, std::uint64_t seed);

/// Pilot-residual SNR: sigma^2 per real dimension is mean|rx - H*known|^2 / 2,
/// gamma = mean|H*known|^2 / mean|rx - H*known|^2, capped at 60 dB.
/// Refuses with EstimateRefused below 8 observations.
NoiseEstimate measure_snr(const ComplexVector& rx_pilots, const ComplexVector& known_pilots,
                          const ComplexVector& channel_gains);

inline constexpr double kMaxMeasuredSnrDb = 60.0;
inline constexpr int kMinPilotObservations = 8;

}  // namespace pacast
