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

#include <cstddef>
#include <limits>
#include <string>

#include "pacast/burst.hpp"
#include "pacast/sync.hpp"
#include "pacast/transform.hpp"
#include "pacast/video.hpp"

namespace pacast {

struct ChainOptions {
  DetectorOptions detector;
  /// Keep the transmitted and received sample streams in the result.
  bool keep_iq = false;
};

/// Outcome of one GOP through encoder, OFDM burst, channel and receiver.
struct ChainResult {
  /// Decoded GOP; mid-gray frames when the burst was lost.
  Gop reconstructed;
  RxStatus status = RxStatus::SyncFailure;
  std::string error;
  SyncResult sync;
  /// Pilot-based SNR estimate (reporting).
  double measured_snr_db = std::numeric_limits<double>::quiet_NaN();
  /// Long-training SNR estimate (what the decoder used).
  double training_snr_db = std::numeric_limits<double>::quiet_NaN();
  /// Complex payload symbols on air (bandwidth used).
  std::size_t payload_symbols = 0;
  /// Post-decoding information bit errors (digital scheme only).
  std::size_t bit_errors = 0;
  std::size_t bits = 0;
  double burst_papr = 0.0;
  ComplexVector tx_samples;
  ComplexVector rx_samples;

  [[nodiscard]] bool lost() const { return status != RxStatus::Ok; }
};

/// Source side shared by both codecs: the GOP's pixel mean is removed, the
/// 3D DCT is chunked and each chunk's own mean is removed. The statistics
/// are float32 so they travel losslessly in the metadata.
struct SourceChunks {
  ChunkSet set;
  float dc_mean = 0.0f;
  std::vector<float> means;
  /// Second moment of each centered chunk.
  std::vector<float> variances;
};

SourceChunks source_chunks(const Gop& gop, int num_chunks);

/// A GOP of mid-gray frames shaped like `dims`.
Gop gray_gop(Dims dims);

}  // namespace pacast
