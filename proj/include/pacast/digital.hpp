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

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pacast/chain.hpp"
#include "pacast/channel.hpp"
#include "pacast/meta.hpp"
#include "pacast/sync.hpp"
#include "pacast/types.hpp"
#include "pacast/video.hpp"

namespace pacast {

/// Rate-1/3, constraint length 7 feedforward code, generators 133/171/165 (octal).
struct ConvCode {
  static constexpr int constraint_length = 7;
  static constexpr int memory = constraint_length - 1;
  static constexpr int states = 1 << memory;
  static constexpr std::array<unsigned, 3> generators{0133, 0171, 0165};
  static constexpr int rate_inverse = 3;
};

/// Zero-terminated encoding: output has 3 * (bits.size() + 6) bits.
Bits conv_encode(const Bits& bits);

/// Maximum-likelihood decoding from soft values, one per coded bit. Positive
/// values favour bit 0; magnitude is confidence. Returns the information bits.
Bits viterbi_decode(std::span<const double> soft);

/// Hard-decision decoding (minimum Hamming distance).
Bits viterbi_decode(const Bits& hard);

/// Gray-coded 16-QAM with unit average energy. Bits b0 b1 select I, b2 b3 select Q;
/// per axis 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 (all divided by sqrt(10)).
struct QamMap {
  static constexpr int order = 16;
  static std::array<Complex, 16> constellation();
};

struct QamSymbols {
  ComplexVector symbols;
  /// Zero bits appended to reach a multiple of 4.
  int pad_bits = 0;
};

QamSymbols qam16_map(const Bits& bits);
/// Minimum-distance hard decisions. `noise_var` is accepted for interface
/// symmetry with soft demappers and does not change hard decisions.
Bits qam16_demap(const ComplexVector& symbols, double noise_var = 0.0);

/// Uniform midrise quantizer over [lo, hi], clamped. Indices are written MSB first.
Bits quantize(const RealVector& coeffs, int bits_per_coeff, std::pair<double, double> range);
RealVector dequantize(std::span<const std::uint8_t> bits, Eigen::Index count, int bits_per_coeff,
                      std::pair<double, double> range);

struct DigitalConfig {
  int num_chunks = 64;
  /// Deepest quantizer used for any chunk.
  int bits_per_coeff = 10;
  /// Fit the coded payload into `target_symbols` complex symbols by giving
  /// each chunk 0 or 2..bits_per_coeff bits (greedy distortion-per-bit). When
  /// false every chunk gets bits_per_coeff bits.
  bool bandwidth_parity = true;
  /// 0 means: match the pseudo-analog payload of the same GOP.
  std::size_t target_symbols = 0;
};

/// Quantizer interval of a chunk at a given depth: +/- min(peak, 1.5 * 2^(bits/2) * rms).
/// Shallow quantizers clip the tails instead of spending levels on them.
std::pair<double, double> chunk_quantizer_range(float second_moment, float peak, int bits);

/// Greedy per-chunk bit depths. Each step takes the (chunk, depth) upgrade
/// with the largest measured distortion reduction per spent bit.
std::vector<int> allocate_bits(std::span<const Chunk> chunks, std::span<const float> variances,
                               std::span<const float> peaks, std::size_t budget_bits, int max_bits);

/// Information bits that fit in `symbols` 16-QAM symbols after rate-1/3 coding.
std::size_t info_bit_budget(std::size_t symbols);

/// Transmit side of the digital codec for one GOP.
struct DigitalEncoding {
  PacketMeta meta;
  /// Quantizer output, chunk after chunk.
  Bits info_bits;
  QamSymbols qam;
};

/// Pixel-mean removal, 3D DCT, chunking, per-chunk uniform quantization
/// (depth and range from the metadata), rate-1/3 coding, 16-QAM.
DigitalEncoding encode_gop_digital(const Gop& gop, std::uint32_t gop_id, const DigitalConfig& config);

/// Dequantizes decoded information bits back to a GOP (clamped to [0, 255]).
Gop decode_gop_digital(const Bits& info_bits, const PacketMeta& meta);

/// Information bits described by the metadata's per-chunk depths.
std::size_t digital_info_bits(const PacketMeta& meta);

/// Encoder, OFDM burst at unit training amplitude, channel, hard-decision
/// demapping and Viterbi decoding, dequantization. Residual bit errors are
/// not concealed.
ChainResult run_digital_chain(const Gop& gop, std::uint32_t gop_id, const ChannelParams& channel,
                              const DigitalConfig& config, const ChainOptions& options = {});

}  // namespace pacast
