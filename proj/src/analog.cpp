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

#include "pacast/analog.hpp"

#include <algorithm>
#include <cmath>

namespace pacast {

namespace {

std::vector<double> widen(const std::vector<float>& v) { return {v.begin(), v.end()}; }

}  // namespace

OfdmConfig analog_ofdm_config(double power_budget) {
  OfdmConfig cfg;
  cfg.training_amplitude = std::sqrt(2.0 * power_budget);
  return cfg;
}

std::size_t analog_payload_symbols(Dims dims, const AnalogConfig& config) {
  const auto k = static_cast<std::size_t>(config.num_chunks);
  std::size_t n = (dims.count() + k - 1) / k * k;
  if (config.hadamard_order > 0) {
    const auto order = static_cast<std::size_t>(config.hadamard_order);
    n = (n + order - 1) / order * order;
  }
  return (n + 1) / 2;
}

AnalogEncoding encode_gop(const Gop& gop, std::uint32_t gop_id, const AnalogConfig& config) {
  if (config.num_chunks < 1 || !(config.power_budget > 0.0)) {
    throw InputError("analog encoder needs num_chunks >= 1 and a positive power budget");
  }
  if (config.hadamard_order != 0 && !is_power_of_two(config.hadamard_order)) {
    throw InputError("hadamard_order must be a power of two");
  }
  SourceChunks p = source_chunks(gop, config.num_chunks);

  AnalogEncoding enc;
  PacketMeta& m = enc.meta;
  m.scheme = Scheme::PseudoAnalog;
  m.gop_id = gop_id;
  m.dims = gop.dims();
  m.chunk_padding = static_cast<std::uint32_t>(p.set.padding);
  m.power_budget = static_cast<float>(config.power_budget);
  m.dc_mean = p.dc_mean;
  m.chunk_variances = p.variances;
  m.chunk_means = p.means;

  const std::vector<int> lengths(p.set.chunks.size(), p.set.chunk_length());
  const std::vector<double> lambda = widen(p.variances);
  enc.gains = allocate_gains(lambda, lengths, static_cast<double>(m.power_budget));
  enc.scaled = scale(p.set.chunks, enc.gains);

  if (config.hadamard_order > 0) {
    WhitenedPayload w = whiten(enc.scaled, config.hadamard_order);
    m.hadamard_order = static_cast<std::uint16_t>(config.hadamard_order);
    m.whiten_padding = static_cast<std::uint32_t>(w.padding);
    enc.payload = std::move(w.samples);
  } else {
    enc.payload = enc.scaled;
  }
  return enc;
}

RealVector unwhiten_noise(const RealVector& noise, int order, int padding) {
  if (order <= 0 || noise.size() % order != 0 || padding < 0 || padding > noise.size()) {
    throw InputError("noise profile does not match the whitening layout");
  }
  RealVector out = noise;
  const Eigen::Index len = out.size() / order;
  Eigen::Map<Eigen::MatrixXd> segments(out.data(), len, order);
  const RealVector group_mean = segments.rowwise().mean();
  segments.colwise() = group_mean;
  return out.head(out.size() - padding);
}

Gop decode_gop(const RealVector& received, const RealVector& noise_per_sample,
               const PacketMeta& meta) {
  if (meta.scheme != Scheme::PseudoAnalog) {
    throw InputError("metadata does not describe a pseudo-analog GOP");
  }
  if (received.size() != noise_per_sample.size()) {
    throw InputError("noise profile length does not match the payload");
  }
  RealVector y = received;
  RealVector noise = noise_per_sample;
  if (meta.hadamard_order > 0) {
    y = unwhiten({received, meta.hadamard_order, static_cast<int>(meta.whiten_padding)});
    noise = unwhiten_noise(noise_per_sample, meta.hadamard_order,
                           static_cast<int>(meta.whiten_padding));
  }

  const std::size_t k = meta.chunk_variances.size();
  const std::size_t total = meta.dims.count() + meta.chunk_padding;
  if (total % k != 0 || static_cast<std::size_t>(y.size()) != total) {
    throw InputError("payload length does not match the metadata");
  }
  const std::vector<int> lengths(k, static_cast<int>(total / k));
  const std::vector<double> lambda = widen(meta.chunk_variances);
  const GainVector gains = allocate_gains(lambda, lengths, static_cast<double>(meta.power_budget));
  std::vector<Chunk> chunks = mmse_decode(y, gains, lambda, noise);
  for (std::size_t i = 0; i < k; ++i) {
    chunks[i].samples.array() += static_cast<double>(meta.chunk_means[i]);
  }

  Gop gop = idct3(dechunk(chunks, meta.dims));
  for (auto& f : gop.frames) {
    f.pixels = (f.pixels.array() + static_cast<double>(meta.dc_mean)).cwiseMax(0.0).cwiseMin(255.0);
  }
  return gop;
}

ChainResult run_analog_chain(const Gop& gop, std::uint32_t gop_id, const ChannelParams& channel,
                             const AnalogConfig& config, const ChainOptions& options) {
  const AnalogEncoding enc = encode_gop(gop, gop_id, config);
  const OfdmConfig ofdm = analog_ofdm_config(static_cast<double>(enc.meta.power_budget));
  const TxBurst tx = transmit_burst(enc.meta, map_iq(enc.payload), ofdm);
  const ComplexVector rx_samples = apply_channel(tx.frame.samples, channel);
  const RxBurst rx = receive_burst(rx_samples, ofdm, options.detector);

  ChainResult out;
  out.status = rx.status;
  out.error = rx.error;
  out.sync = rx.sync;
  out.payload_symbols = tx.meta.payload_symbols;
  out.burst_papr = papr(tx.frame.samples);
  if (options.keep_iq) {
    out.tx_samples = tx.frame.samples;
    out.rx_samples = rx_samples;
  }
  if (!rx.ok()) {
    out.reconstructed = gray_gop(gop.dims());
    return out;
  }
  out.measured_snr_db = rx.measured_snr_db;
  out.training_snr_db = rx.training_snr_db;
  out.reconstructed = decode_gop(unmap_iq(rx.payload), rx.noise_per_real, rx.meta);
  return out;
}

}  // namespace pacast
