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

#include "pacast/channel.hpp"
#include "pacast/chain.hpp"
#include "pacast/meta.hpp"
#include "pacast/ofdm.hpp"
#include "pacast/power.hpp"
#include "pacast/transform.hpp"
#include "pacast/video.hpp"

namespace pacast {

struct AnalogConfig {
  int num_chunks = 64;
  /// 0 disables whitening.
  int hadamard_order = 64;
  /// Average transmit power per real payload sample.
  double power_budget = 1.0;
};

/// Transmit-side result of the pseudo-analog encoder for one GOP.
struct AnalogEncoding {
  PacketMeta meta;
  /// Real samples ready for I/Q pairing (scaled, whitened).
  RealVector payload;
  GainVector gains;
  /// Scaled chunk samples before whitening.
  RealVector scaled;
};

/// Pixel mean removal, 3D DCT, chunking with per-chunk mean removal,
/// variance-driven gains, Hadamard whitening. The variances, means and
/// power budget are rounded to float32 before use so the receiver, which
/// sees only the metadata, derives identical gains.
AnalogEncoding encode_gop(const Gop& gop, std::uint32_t gop_id, const AnalogConfig& config);

/// Inverse of encode_gop given received real samples and the noise variance
/// of each sample. Output pixels are clamped to [0, 255].
Gop decode_gop(const RealVector& received, const RealVector& noise_per_sample,
               const PacketMeta& meta);

/// Averages a per-sample noise profile over each whitening group (exact for
/// independent noise) and drops the padding.
RealVector unwhiten_noise(const RealVector& noise, int order, int padding);

/// OFDM settings whose training, pilots and header match the payload's RMS
/// bin amplitude sqrt(2 P).
OfdmConfig analog_ofdm_config(double power_budget);

/// Complex payload symbols the analog encoder emits for a GOP of `dims`.
std::size_t analog_payload_symbols(Dims dims, const AnalogConfig& config);

ChainResult run_analog_chain(const Gop& gop, std::uint32_t gop_id, const ChannelParams& channel,
                             const AnalogConfig& config, const ChainOptions& options = {});

}  // namespace pacast
