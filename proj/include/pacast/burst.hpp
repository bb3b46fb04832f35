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

#include <optional>
#include <string>

#include "pacast/meta.hpp"
#include "pacast/ofdm.hpp"
#include "pacast/sync.hpp"
#include "pacast/types.hpp"

namespace pacast {

/// OFDM symbols holding the coded signal field (32 bits, rate 1/3, tail).
inline constexpr int kSignalSymbols = 3;

/// Transmit-side burst: preamble, signal field, coded metadata, payload.
struct TxBurst {
  OfdmFrame frame;
  /// The metadata as sent, with payload_symbols, carrier_padding and
  /// iq_padding filled in from the payload.
  PacketMeta meta;
  int header_symbols = 0;
  int payload_symbols = 0;
};

/// The header (signal field + metadata) is BPSK at config.training_amplitude,
/// protected by the rate-1/3 convolutional code.
TxBurst transmit_burst(const PacketMeta& meta, const IqPayload& payload, const OfdmConfig& config);

enum class RxStatus { Ok, SyncFailure, MetadataFailure };

struct RxBurst {
  RxStatus status = RxStatus::SyncFailure;
  SyncResult sync;
  CfoEstimate cfo;
  ChannelEstimate channel;
  PacketMeta meta;
  IqPayload payload;
  /// Noise variance of each real payload sample (per real dimension) after
  /// equalization, including channel-estimation error. Erased carriers get
  /// the payload power instead.
  RealVector noise_per_real;
  /// Pilot-residual estimate over the payload symbols, for reporting.
  std::optional<NoiseEstimate> pilot_noise;
  /// Pilot SNR converted to the burst-level SNR convention of the channel
  /// (total sample power over noise power per complex sample).
  double measured_snr_db = 0.0;
  /// Same convention, from the long-training half difference that feeds the
  /// MMSE decoder.
  double training_snr_db = 0.0;
  std::string error;

  [[nodiscard]] bool ok() const { return status == RxStatus::Ok; }
};

/// Detection, CFO correction, channel estimation, header decoding, payload
/// equalization and serialization. Never throws on channel damage: failures
/// are reported through `status`.
RxBurst receive_burst(const ComplexVector& samples, const OfdmConfig& config,
                      const DetectorOptions& options = {});

}  // namespace pacast
