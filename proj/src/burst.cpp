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

#include "pacast/burst.hpp"

#include <algorithm>
#include <cmath>

#include "pacast/channel.hpp"
#include "pacast/digital.hpp"

namespace pacast {

namespace {

int coded_symbols(std::size_t info_bits, const OfdmConfig& config) {
  return symbols_for((info_bits + ConvCode::memory) * ConvCode::rate_inverse, config);
}

// Soft values for BPSK header carriers: Re(z) weighted by |H|^2 so weak
// carriers count less in the Viterbi metric.
std::vector<double> header_soft(const EqualizedSymbols& eq, const ChannelEstimate& est,
                                const OfdmConfig& config) {
  std::vector<double> soft;
  soft.reserve(eq.symbols.size() * config.data_carriers.size());
  for (const auto& z : eq.symbols) {
    for (int k : config.data_carriers) {
      const int b = config.bin(k);
      soft.push_back(z[b].real() * std::norm(est.h[b]));
    }
  }
  return soft;
}

// Transmitted bins of header symbols carrying `coded` bits.
std::vector<ComplexVector> known_header(const Bits& coded, const OfdmConfig& config) {
  return allocate_carriers(IqPayload{}, coded, config).symbols;
}

}  // namespace

TxBurst transmit_burst(const PacketMeta& meta, const IqPayload& payload, const OfdmConfig& config) {
  config.validate();
  TxBurst out;
  out.meta = meta;
  const auto n = static_cast<std::size_t>(payload.symbols.size());
  out.meta.payload_symbols = static_cast<std::uint32_t>(n);
  out.meta.carrier_padding = static_cast<std::uint32_t>(
      static_cast<std::size_t>(symbols_for(n, config)) * config.data_carriers.size() - n);
  out.meta.iq_padding = payload.padded ? 1 : 0;

  const auto meta_bytes = encode_meta_bytes(out.meta);
  if (meta_bytes.size() > 0xFFFF) {
    throw InputError("metadata too large for the signal field");
  }
  Bits header = conv_encode(encode_signal_field(static_cast<std::uint16_t>(meta_bytes.size())));
  header.resize(static_cast<std::size_t>(kSignalSymbols) * config.data_carriers.size(), 0);
  const Bits meta_coded = conv_encode(bytes_to_bits(meta_bytes));
  header.insert(header.end(), meta_coded.begin(), meta_coded.end());

  const CarrierAllocation alloc = allocate_carriers(payload, header, config);
  out.header_symbols = alloc.header_symbols;
  out.payload_symbols = alloc.payload_symbols;
  out.frame = modulate(alloc, config);
  return out;
}

RxBurst receive_burst(const ComplexVector& samples, const OfdmConfig& config,
                      const DetectorOptions& options) {
  RxBurst rx;
  if (samples.size() < kPreambleLength) {
    rx.error = "burst shorter than the preamble";
    return rx;
  }
  rx.sync = detect_frame(samples, config, options);
  if (!rx.sync.detected) {
    rx.error = "no preamble detected";
    return rx;
  }

  ComplexVector corrected;
  try {
    rx.cfo = estimate_cfo(samples, rx.sync, config);
    corrected = correct_cfo(samples, rx.cfo.total_hz(), config.sample_rate);
    const auto lt_start =
        static_cast<Eigen::Index>(rx.sync.frame_start) + kShortTrainingLength + kLongGuard;
    rx.channel = estimate_channel(corrected.segment(lt_start, 128), config);
  } catch (const InputError& e) {
    rx.error = e.what();
    return rx;
  }

  rx.status = RxStatus::MetadataFailure;
  int header_symbols = 0;
  try {
    const auto sig_raw = demodulate(corrected, rx.sync, config, kSignalSymbols);
    const auto sig_eq = equalize(sig_raw, rx.channel, config);
    auto soft = header_soft(sig_eq, rx.channel, config);
    soft.resize((kSignalFieldBits + ConvCode::memory) * ConvCode::rate_inverse);
    const Bits sig_bits = viterbi_decode(std::span<const double>(soft));
    const std::uint16_t meta_len = decode_signal_field(sig_bits);
    // The decoded signal field becomes extra training for the metadata.
    Bits sig_coded = conv_encode(sig_bits);
    sig_coded.resize(static_cast<std::size_t>(kSignalSymbols) * config.data_carriers.size(), 0);
    extend_channel_estimate(rx.channel, sig_raw, known_header(sig_coded, config), sig_eq.common_phase,
                            config);

    const std::size_t meta_bits = static_cast<std::size_t>(meta_len) * 8;
    const int meta_symbols = coded_symbols(meta_bits, config);
    const auto meta_raw = demodulate(corrected, rx.sync, config, meta_symbols, kSignalSymbols);
    const auto meta_eq = equalize(meta_raw, rx.channel, config);
    auto meta_soft = header_soft(meta_eq, rx.channel, config);
    meta_soft.resize((meta_bits + ConvCode::memory) * ConvCode::rate_inverse);
    const Bits meta_info = viterbi_decode(std::span<const double>(meta_soft));
    rx.meta = decode_meta(meta_info);
    // CRC passed: the metadata symbols refine the estimate for the payload.
    extend_channel_estimate(rx.channel, meta_raw, known_header(conv_encode(meta_info), config),
                            meta_eq.common_phase, config);
    header_symbols = kSignalSymbols + meta_symbols;
  } catch (const MetadataError& e) {
    rx.error = e.what();
    return rx;
  } catch (const InputError& e) {
    rx.error = e.what();
    return rx;
  }

  std::vector<ComplexVector> raw;
  try {
    raw = demodulate(corrected, rx.sync, config, symbols_for(rx.meta.payload_symbols, config),
                     header_symbols);
  } catch (const InputError& e) {
    rx.error = e.what();
    return rx;
  }
  const EqualizedSymbols eq = equalize(raw, rx.channel, config);
  try {
    rx.payload = serialize(eq.symbols, config, rx.meta);
  } catch (const InputError& e) {
    rx.error = e.what();
    return rx;
  }

  // Equalized noise per real dimension: sigma_c^2 / |H|^2 from the payload
  // bin itself plus the channel estimate's own error.
  const double sigma_c = 2.0 * rx.channel.noise.sigma_sq;
  const double a = config.training_amplitude;
  const int per = config.data_per_symbol();
  std::vector<double> carrier_noise(static_cast<std::size_t>(per));
  for (int c = 0; c < per; ++c) {
    const int b = config.bin(config.data_carriers[static_cast<std::size_t>(c)]);
    carrier_noise[static_cast<std::size_t>(c)] =
        eq.erased[static_cast<std::size_t>(b)] ? a * a / 2.0
                                               : 0.5 * (1.0 + rx.channel.error_ratio) * sigma_c / std::norm(rx.channel.h[b]);
  }
  const Eigen::Index n_sym = rx.payload.symbols.size();
  RealVector noise(2 * n_sym);
  for (Eigen::Index j = 0; j < n_sym; ++j) {
    noise[2 * j] = noise[2 * j + 1] = carrier_noise[static_cast<std::size_t>(j % per)];
  }
  rx.noise_per_real = rx.payload.padded ? RealVector(noise.head(noise.size() - 1)) : noise;

  // Pilot residuals after common-phase removal, for SNR reporting.
  const auto pilots = static_cast<Eigen::Index>(config.pilot_carriers.size());
  ComplexVector rx_p(static_cast<Eigen::Index>(raw.size()) * pilots);
  ComplexVector known(rx_p.size());
  ComplexVector gains(rx_p.size());
  for (std::size_t s = 0; s < raw.size(); ++s) {
    const Complex derotate = std::polar(1.0, -eq.common_phase[s]);
    for (Eigen::Index p = 0; p < pilots; ++p) {
      const int b = config.bin(config.pilot_carriers[static_cast<std::size_t>(p)]);
      const auto i = static_cast<Eigen::Index>(s) * pilots + p;
      rx_p[i] = raw[s][b] * derotate;
      known[i] = a * config.pilot_values[static_cast<std::size_t>(p)];
      gains[i] = rx.channel.h[b];
    }
  }
  // The burst occupies used/fft_size of the bins at the pilot power.
  const double occupancy =
      static_cast<double>(config.data_carriers.size() + config.pilot_carriers.size()) /
      config.fft_size;
  rx.training_snr_db =
      std::min(linear_to_db(rx.channel.noise.gamma * occupancy), kMaxMeasuredSnrDb);
  try {
    rx.pilot_noise = measure_snr(rx_p, known, gains);
    // The residual also carries the channel estimate's error.
    rx.measured_snr_db = std::min(
        linear_to_db(rx.pilot_noise->gamma * (1.0 + rx.channel.error_ratio) * occupancy),
        kMaxMeasuredSnrDb);
  } catch (const EstimateRefused&) {
    rx.measured_snr_db = rx.training_snr_db;
  }
  rx.status = RxStatus::Ok;
  return rx;
}

}  // namespace pacast
