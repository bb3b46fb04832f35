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

#include "pacast/meta.hpp"
#include "pacast/ofdm.hpp"
#include "pacast/types.hpp"

namespace pacast {

struct SyncResult {
  /// Index of the first short-training sample.
  std::size_t frame_start = 0;
  /// Largest timing metric inside the detected plateau, clamped to [0, 1].
  double coarse_metric_peak = 0.0;
  double cfo_hz = 0.0;
  bool detected = false;
};

struct DetectorOptions {
  double threshold = 0.8;
  /// Correlation window of the timing metric. The lag is always the
  /// 16-sample short-training period; longer windows trade plateau length
  /// for variance at low SNR.
  int window = kShortPeriod;
  /// Shortest above-threshold run (after merging) accepted as a preamble.
  int min_plateau = 32;
  /// Above-threshold samples closer than this are merged into one plateau.
  int merge_gap = 32;
  /// Half-width of the long-training cross-correlation search around the
  /// plateau-derived start.
  int refine_search = 32;
};

/// M(d) = |P(d)|^2 / R(d)^2 with P(d) = sum conj(r[d+m]) r[d+m+16] and
/// R(d) = sum |r[d+m+16]|^2 over m < window. Entry d is valid for
/// d + window + 16 <= samples.size().
RealVector timing_metric(const ComplexVector& samples, int window = kShortPeriod);

/// Schmidl & Cox detection: plateau midpoint of the metric, refined by
/// cross-correlation against the known long training.
SyncResult detect_frame(const ComplexVector& samples, const OfdmConfig& config,
                        double threshold = 0.8);
SyncResult detect_frame(const ComplexVector& samples, const OfdmConfig& config,
                        const DetectorOptions& options);

struct CfoEstimate {
  /// Short-training phase estimate, unambiguous within +/- fs / 32.
  double fine_hz = 0.0;
  /// Integer-bin correction from the long training (multiple of fs / 16).
  double coarse_hz = 0.0;
  /// Residual measured between the two long-training periods.
  double residual_hz = 0.0;

  [[nodiscard]] double total_hz() const { return fine_hz + coarse_hz + residual_hz; }
};

CfoEstimate estimate_cfo(const ComplexVector& samples, const SyncResult& sync,
                         const OfdmConfig& config);

/// Multiplies sample n by exp(-i 2 pi cfo n / fs).
ComplexVector correct_cfo(const ComplexVector& samples, double cfo_hz, double sample_rate);

struct ChannelEstimate {
  /// Complex gain per FFT bin; zero on unused bins. Least-squares fit of an
  /// impulse response no longer than the cyclic prefix (plus early-timing slack).
  ComplexVector h;
  std::vector<bool> used;
  /// From the difference of the two long-training periods, or from the fit
  /// residual once decoded symbols have been added.
  NoiseEstimate noise;
  /// Error variance of h relative to the per-bin noise over |reference|^2.
  double error_ratio = 0.5;
  /// Bins of every symbol the fit uses (phase-aligned) and their known content.
  std::vector<ComplexVector> observed;
  std::vector<ComplexVector> reference;
};

/// `long_training_rx` holds the two received 64-sample long-training periods.
ChannelEstimate estimate_channel(const ComplexVector& long_training_rx, const OfdmConfig& config);

/// Refits with symbols whose content became known after decoding. Each
/// observed symbol is derotated by its common phase before use.
void extend_channel_estimate(ChannelEstimate& est, std::span<const ComplexVector> observed,
                             std::span<const ComplexVector> reference,
                             std::span<const double> common_phase, const OfdmConfig& config);

/// CP removal and unitary FFT for `count` symbols whose first CP starts at `first`.
std::vector<ComplexVector> demodulate(const ComplexVector& samples, std::size_t first, int count,
                                      const OfdmConfig& config);
/// Symbols after the preamble, skipping `symbol_offset` symbols.
std::vector<ComplexVector> demodulate(const ComplexVector& samples, const SyncResult& sync,
                                      const OfdmConfig& config, int count, int symbol_offset = 0);

struct EqualizedSymbols {
  std::vector<ComplexVector> symbols;
  /// Bins whose channel gain is too small to invert; they are output as 0.
  std::vector<bool> erased;
  /// Common phase removed from each symbol using the pilots.
  std::vector<double> common_phase;
};

inline constexpr double kErasureThreshold = 1e-6;

/// Per-bin division by H, then a common phase per symbol from the pilots of
/// that symbol and up to `phase_span` symbols on either side.
EqualizedSymbols equalize(const std::vector<ComplexVector>& symbols, const ChannelEstimate& est,
                          const OfdmConfig& config, int phase_span = 8);

/// Data-carrier values of each symbol, in allocation order.
ComplexVector extract_data(const std::vector<ComplexVector>& symbols, const OfdmConfig& config);

/// Drops pilots and padding; output has meta.payload_symbols entries.
IqPayload serialize(const std::vector<ComplexVector>& symbols, const OfdmConfig& config,
                    const PacketMeta& meta);

}  // namespace pacast
