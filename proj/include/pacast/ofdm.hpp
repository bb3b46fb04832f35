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

#include <filesystem>
#include <optional>
#include <vector>

#include "pacast/types.hpp"

namespace pacast {

/// 802.11a-style numerology. Carrier indices are signed (-N/2 .. N/2-1);
/// bin() maps them onto FFT order.
struct OfdmConfig {
  int fft_size = 64;
  int cp_len = 16;
  std::vector<int> data_carriers;
  std::vector<int> pilot_carriers{-21, -7, 7, 21};
  /// Fixed polarity on every symbol (no per-symbol pilot scrambling).
  std::vector<double> pilot_values{1.0, 1.0, 1.0, -1.0};
  double sample_rate = 20e6;
  /// Amplitude of training bins, pilots and BPSK header symbols. Set to the
  /// payload's RMS bin amplitude so the whole burst has uniform power.
  double training_amplitude = 1.0;
  /// Optional hard clipper on time-domain magnitude (models D/A limits).
  std::optional<double> clip_amplitude;

  OfdmConfig();

  [[nodiscard]] int bin(int carrier) const { return (carrier + fft_size) % fft_size; }
  [[nodiscard]] int symbol_length() const { return fft_size + cp_len; }
  [[nodiscard]] int data_per_symbol() const { return static_cast<int>(data_carriers.size()); }
  [[nodiscard]] double subcarrier_spacing() const { return sample_rate / fft_size; }
  /// Throws InputError on overlapping or out-of-range carriers.
  void validate() const;
};

inline constexpr int kShortPeriod = 16;
inline constexpr int kShortRepeats = 10;
inline constexpr int kShortTrainingLength = kShortPeriod * kShortRepeats;  // 160
inline constexpr int kLongGuard = 32;
inline constexpr int kLongTrainingLength = kLongGuard + 2 * 64;  // 160
inline constexpr int kPreambleLength = kShortTrainingLength + kLongTrainingLength;

/// Complex payload before carrier allocation. `padded` marks a trailing zero
/// appended to an odd-length real input.
struct IqPayload {
  ComplexVector symbols;
  bool padded = false;
};

IqPayload map_iq(const RealVector& samples);
RealVector unmap_iq(const IqPayload& payload);

/// Unitary FFT helpers (energy preserving).
ComplexVector unitary_fft(const ComplexVector& time);
ComplexVector unitary_ifft(const ComplexVector& freq);

/// Frequency-domain training sequences in FFT bin order.
ComplexVector short_training_bins(const OfdmConfig& config);
ComplexVector long_training_bins(const OfdmConfig& config);
/// One 64-sample period of the long training in time domain.
ComplexVector long_training_symbol(const OfdmConfig& config);

/// 10 x 16-sample short training, then 32-sample guard and two 64-sample
/// long training periods.
ComplexVector build_preamble(const OfdmConfig& config);

/// Frequency-domain symbols for one burst: header symbols first (BPSK), then
/// payload symbols.
struct CarrierAllocation {
  std::vector<ComplexVector> symbols;
  int header_symbols = 0;
  int payload_symbols = 0;
  /// Unused data slots in the last payload symbol.
  int padding = 0;
};

[[nodiscard]] int symbols_for(std::size_t values, const OfdmConfig& config);

/// BPSK header bits (0 -> +A, 1 -> -A) on data carriers of the leading
/// symbols, then the payload on the data carriers of the following symbols.
/// Pilots carry pilot_values * A on every symbol; all other bins are zero.
CarrierAllocation allocate_carriers(const IqPayload& payload, const Bits& header_bits,
                                    const OfdmConfig& config);

struct FrameLayout {
  std::size_t short_training = 0;
  std::size_t long_training = 0;
  std::size_t header = 0;
  std::size_t payload = 0;
  std::size_t end = 0;
};

struct OfdmFrame {
  ComplexVector samples;
  FrameLayout layout;
};

/// Per symbol: unitary IFFT, cyclic prefix of the last cp_len samples.
ComplexVector modulate_symbol(const ComplexVector& bins, const OfdmConfig& config);

/// Prepends the preamble and modulates every symbol of the allocation.
OfdmFrame modulate(const CarrierAllocation& allocation, const OfdmConfig& config);

/// Peak-to-average power ratio of a complex burst, linear.
double papr(const ComplexVector& samples);

/// Interleaved little-endian float32 I/Q.
void write_iq_trace(const ComplexVector& samples, const std::filesystem::path& path);
ComplexVector read_iq_trace(const std::filesystem::path& path);

}  // namespace pacast
