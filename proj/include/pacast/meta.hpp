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

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "pacast/types.hpp"

namespace pacast {

enum class Scheme : std::uint8_t { PseudoAnalog = 0, Digital = 1 };

/// Per-GOP side information the receiver needs to undo the transmit chain.
/// Byte layout is documented in docs/metadata_layout.md.
struct PacketMeta {
  Scheme scheme = Scheme::PseudoAnalog;
  std::uint32_t gop_id = 0;
  Dims dims;
  /// Zero coefficients appended so the chunks have equal length.
  std::uint32_t chunk_padding = 0;
  /// 0 when the payload is not whitened.
  std::uint16_t hadamard_order = 0;
  std::uint32_t whiten_padding = 0;
  /// 1 when the real payload had odd length and one zero was appended before I/Q pairing.
  std::uint8_t iq_padding = 0;
  /// Complex payload symbols carried on data carriers.
  std::uint32_t payload_symbols = 0;
  /// Empty data-carrier slots in the final payload OFDM symbol.
  std::uint32_t carrier_padding = 0;
  float power_budget = 0.0f;
  /// Mean removed from the GOP's pixels before the transform.
  float dc_mean = 0.0f;
  std::vector<float> chunk_variances;
  std::vector<float> chunk_means;
  /// Max |x - mean| per chunk; only the digital scheme sends these.
  std::vector<float> chunk_peaks;
  /// Quantizer depth per chunk (0 = not sent); only the digital scheme sends these.
  std::vector<std::uint8_t> chunk_bits;
  /// Set by decode_meta to the checksum that validated the packet.
  std::uint32_t crc = 0;

  [[nodiscard]] int num_chunks() const { return static_cast<int>(chunk_variances.size()); }

  /// Field equality; the crc is derived data and is not compared.
  bool operator==(const PacketMeta& o) const {
    return scheme == o.scheme && gop_id == o.gop_id && dims == o.dims &&
           chunk_padding == o.chunk_padding && hadamard_order == o.hadamard_order &&
           whiten_padding == o.whiten_padding && iq_padding == o.iq_padding &&
           payload_symbols == o.payload_symbols && carrier_padding == o.carrier_padding &&
           std::bit_cast<std::uint32_t>(power_budget) == std::bit_cast<std::uint32_t>(o.power_budget) &&
           std::bit_cast<std::uint32_t>(dc_mean) == std::bit_cast<std::uint32_t>(o.dc_mean) &&
           bitwise_equal(chunk_variances, o.chunk_variances) &&
           bitwise_equal(chunk_means, o.chunk_means) && bitwise_equal(chunk_peaks, o.chunk_peaks) &&
           chunk_bits == o.chunk_bits;
  }

 private:
  static bool bitwise_equal(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::bit_cast<std::uint32_t>(a[i]) != std::bit_cast<std::uint32_t>(b[i])) return false;
    }
    return true;
  }
};

inline constexpr std::uint8_t kMetaMagic = 0x5C;
inline constexpr std::uint8_t kMetaVersion = 1;
inline constexpr std::size_t kMetaFixedBytes = 48;

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Serialized bytes including the trailing CRC-32.
std::vector<std::uint8_t> encode_meta_bytes(const PacketMeta& meta);
PacketMeta decode_meta_bytes(std::span<const std::uint8_t> bytes);

/// Bit-level forms: bytes expanded LSB first.
Bits encode_meta(const PacketMeta& meta);
PacketMeta decode_meta(const Bits& bits);

Bits bytes_to_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bits_to_bytes(const Bits& bits);

/// Fixed 32-bit field that precedes the metadata on air: u16 metadata byte
/// length followed by the low 16 bits of the CRC-32 of those two bytes.
inline constexpr std::size_t kSignalFieldBits = 32;
Bits encode_signal_field(std::uint16_t meta_bytes);
/// Throws MetadataError when the check fails.
std::uint16_t decode_signal_field(const Bits& bits);

}  // namespace pacast
