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

#include "pacast/digital.hpp"

#include "pacast/analog.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace pacast {

namespace {

struct Trellis {
  // outputs[state][input] packs the three coded bits, generator 0 in bit 2.
  std::array<std::array<std::uint8_t, 2>, ConvCode::states> outputs{};

  Trellis() {
    for (unsigned s = 0; s < ConvCode::states; ++s) {
      for (unsigned in = 0; in < 2; ++in) {
        const unsigned reg = (in << ConvCode::memory) | s;
        std::uint8_t o = 0;
        for (unsigned g : ConvCode::generators) {
          o = static_cast<std::uint8_t>((o << 1) | (std::popcount(reg & g) & 1U));
        }
        outputs[s][in] = o;
      }
    }
  }

  static unsigned next(unsigned s, unsigned in) { return (in << (ConvCode::memory - 1)) | (s >> 1); }
};

const Trellis& trellis() {
  static const Trellis t;
  return t;
}

}  // namespace

Bits conv_encode(const Bits& bits) {
  const auto& t = trellis();
  Bits out;
  out.reserve((bits.size() + ConvCode::memory) * ConvCode::rate_inverse);
  unsigned state = 0;
  auto push = [&](unsigned in) {
    const std::uint8_t o = t.outputs[state][in];
    out.push_back((o >> 2) & 1U);
    out.push_back((o >> 1) & 1U);
    out.push_back(o & 1U);
    state = Trellis::next(state, in);
  };
  for (std::uint8_t b : bits) {
    push(b & 1U);
  }
  for (int i = 0; i < ConvCode::memory; ++i) {
    push(0);
  }
  return out;
}

Bits viterbi_decode(std::span<const double> soft) {
  constexpr int r = ConvCode::rate_inverse;
  if (soft.size() % r != 0 || soft.size() < static_cast<std::size_t>(r * ConvCode::memory)) {
    throw InputError("coded length must be 3 * (bits + 6)");
  }
  const auto& t = trellis();
  const std::size_t steps = soft.size() / r;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  std::array<double, ConvCode::states> metric;
  metric.fill(kNegInf);
  metric[0] = 0.0;
  std::array<double, ConvCode::states> next_metric{};
  std::vector<std::uint64_t> decisions(steps, 0);

  for (std::size_t step = 0; step < steps; ++step) {
    const double v0 = soft[step * r];
    const double v1 = soft[step * r + 1];
    const double v2 = soft[step * r + 2];
    // Score of each of the 8 possible output triples.
    std::array<double, 8> branch{};
    for (unsigned o = 0; o < 8; ++o) {
      branch[o] = ((o & 4U) ? -v0 : v0) + ((o & 2U) ? -v1 : v1) + ((o & 1U) ? -v2 : v2);
    }
    std::uint64_t dec = 0;
    double best = kNegInf;
    for (unsigned ns = 0; ns < ConvCode::states; ++ns) {
      const unsigned in = ns >> (ConvCode::memory - 1);
      const unsigned base = (ns << 1) & (ConvCode::states - 1);
      const unsigned s0 = base;
      const unsigned s1 = base | 1U;
      const double m0 = metric[s0] + branch[t.outputs[s0][in]];
      const double m1 = metric[s1] + branch[t.outputs[s1][in]];
      if (m1 > m0) {
        next_metric[ns] = m1;
        dec |= std::uint64_t{1} << ns;
      } else {
        next_metric[ns] = m0;
      }
      best = std::max(best, next_metric[ns]);
    }
    for (unsigned s = 0; s < ConvCode::states; ++s) {
      metric[s] = next_metric[s] - best;
    }
    decisions[step] = dec;
  }

  // Terminated code: trace back from the all-zero state.
  Bits decoded(steps);
  unsigned state = 0;
  for (std::size_t step = steps; step-- > 0;) {
    decoded[step] = static_cast<std::uint8_t>(state >> (ConvCode::memory - 1));
    const unsigned low = (decisions[step] >> state) & 1U;
    state = ((state << 1) & (ConvCode::states - 1)) | low;
  }
  decoded.resize(steps - ConvCode::memory);
  return decoded;
}

Bits viterbi_decode(const Bits& hard) {
  std::vector<double> soft(hard.size());
  std::transform(hard.begin(), hard.end(), soft.begin(),
                 [](std::uint8_t b) { return b ? -1.0 : 1.0; });
  return viterbi_decode(std::span<const double>(soft));
}

namespace {

constexpr std::array<double, 4> kGrayLevel{-3.0, -1.0, 3.0, 1.0};  // index = b0 b1

std::uint8_t level_to_bits(double v) {
  // Decision regions on the unscaled axis: < -2, [-2, 0), [0, 2), >= 2.
  if (v < -2.0) return 0b00;
  if (v < 0.0) return 0b01;
  if (v < 2.0) return 0b11;
  return 0b10;
}

}  // namespace

std::array<Complex, 16> QamMap::constellation() {
  std::array<Complex, 16> pts{};
  const double norm = 1.0 / std::sqrt(10.0);
  for (unsigned v = 0; v < 16; ++v) {
    pts[v] = Complex(kGrayLevel[v >> 2], kGrayLevel[v & 3U]) * norm;
  }
  return pts;
}

QamSymbols qam16_map(const Bits& bits) {
  QamSymbols out;
  out.pad_bits = static_cast<int>((4 - bits.size() % 4) % 4);
  const std::size_t total = bits.size() + static_cast<std::size_t>(out.pad_bits);
  out.symbols.resize(static_cast<Eigen::Index>(total / 4));
  const auto pts = QamMap::constellation();
  auto bit = [&](std::size_t i) -> unsigned { return i < bits.size() ? (bits[i] & 1U) : 0U; };
  for (std::size_t s = 0; s < total / 4; ++s) {
    const unsigned v = (bit(4 * s) << 3) | (bit(4 * s + 1) << 2) | (bit(4 * s + 2) << 1) |
                       bit(4 * s + 3);
    out.symbols[static_cast<Eigen::Index>(s)] = pts[v];
  }
  return out;
}

Bits qam16_demap(const ComplexVector& symbols, double /*noise_var*/) {
  Bits out;
  out.reserve(static_cast<std::size_t>(symbols.size()) * 4);
  const double scale = std::sqrt(10.0);
  for (const auto& s : symbols) {
    const std::uint8_t i = level_to_bits(s.real() * scale);
    const std::uint8_t q = level_to_bits(s.imag() * scale);
    out.push_back((i >> 1) & 1U);
    out.push_back(i & 1U);
    out.push_back((q >> 1) & 1U);
    out.push_back(q & 1U);
  }
  return out;
}

namespace {

void check_quantizer(int bits_per_coeff, std::pair<double, double> range) {
  if (bits_per_coeff < 2 || bits_per_coeff > 16) {
    throw InputError("bits_per_coeff must be in [2, 16]");
  }
  if (!(range.first < range.second)) {
    throw InputError("quantizer range is degenerate (min >= max)");
  }
}

}  // namespace

Bits quantize(const RealVector& coeffs, int bits_per_coeff, std::pair<double, double> range) {
  check_quantizer(bits_per_coeff, range);
  const auto levels = static_cast<std::int64_t>(1) << bits_per_coeff;
  const double step = (range.second - range.first) / static_cast<double>(levels);
  Bits out;
  out.reserve(static_cast<std::size_t>(coeffs.size()) * static_cast<std::size_t>(bits_per_coeff));
  for (double x : coeffs) {
    const auto idx = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor((x - range.first) / step)), 0, levels - 1);
    for (int b = bits_per_coeff - 1; b >= 0; --b) {
      out.push_back(static_cast<std::uint8_t>((idx >> b) & 1));
    }
  }
  return out;
}

RealVector dequantize(std::span<const std::uint8_t> bits, Eigen::Index count, int bits_per_coeff,
                      std::pair<double, double> range) {
  check_quantizer(bits_per_coeff, range);
  if (bits.size() != static_cast<std::size_t>(count) * static_cast<std::size_t>(bits_per_coeff)) {
    throw InputError("bit count does not match coefficient count");
  }
  const double step =
      (range.second - range.first) / static_cast<double>(std::int64_t{1} << bits_per_coeff);
  RealVector out(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    std::int64_t idx = 0;
    for (int b = 0; b < bits_per_coeff; ++b) {
      idx = (idx << 1) | (bits[static_cast<std::size_t>(i * bits_per_coeff + b)] & 1);
    }
    out[i] = range.first + (static_cast<double>(idx) + 0.5) * step;
  }
  return out;
}

std::size_t info_bit_budget(std::size_t symbols) {
  const std::size_t coded = 4 * symbols;
  const std::size_t steps = coded / ConvCode::rate_inverse;
  return steps > static_cast<std::size_t>(ConvCode::memory) ? steps - ConvCode::memory : 0;
}

std::pair<double, double> chunk_quantizer_range(float second_moment, float peak, int bits) {
  const double rms = std::sqrt(std::max(0.0, static_cast<double>(second_moment)));
  double w = static_cast<double>(peak);
  const double clip = 1.5 * std::ldexp(1.0, bits / 2) * rms;
  if (clip > 0.0) {
    w = std::min(w, clip);
  }
  return {-w, w};
}

namespace {

double quantization_mse(const RealVector& x, int bits, std::pair<double, double> range) {
  const auto levels = static_cast<std::int64_t>(1) << bits;
  const double step = (range.second - range.first) / static_cast<double>(levels);
  double acc = 0.0;
  for (double v : x) {
    const auto idx = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor((v - range.first) / step)), 0, levels - 1);
    const double e = v - (range.first + (static_cast<double>(idx) + 0.5) * step);
    acc += e * e;
  }
  return acc;
}

}  // namespace

std::vector<int> allocate_bits(std::span<const Chunk> chunks, std::span<const float> variances,
                               std::span<const float> peaks, std::size_t budget_bits, int max_bits) {
  const std::size_t k = chunks.size();
  if (variances.size() != k || peaks.size() != k || max_bits < 2 || max_bits > 16) {
    throw InputError("invalid bit allocation request");
  }
  // dist[i][b]: summed squared error of chunk i at depth b (b = 1 unused).
  std::vector<std::vector<double>> dist(k, std::vector<double>(static_cast<std::size_t>(max_bits) + 1));
  for (std::size_t i = 0; i < k; ++i) {
    dist[i][0] = chunks[i].samples.squaredNorm();
    if (!(peaks[i] > 0.0f)) {
      continue;
    }
    for (int b = 2; b <= max_bits; ++b) {
      dist[i][static_cast<std::size_t>(b)] =
          quantization_mse(chunks[i].samples, b, chunk_quantizer_range(variances[i], peaks[i], b));
    }
  }
  std::vector<int> depth(k, 0);
  std::size_t remaining = budget_bits;
  while (true) {
    double best_ratio = 0.0;
    std::size_t best = k;
    int best_depth = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(peaks[i] > 0.0f)) {
        continue;
      }
      const auto len = static_cast<std::size_t>(chunks[i].samples.size());
      const double now = dist[i][static_cast<std::size_t>(depth[i])];
      for (int b = std::max(2, depth[i] + 1); b <= max_bits; ++b) {
        const std::size_t cost = len * static_cast<std::size_t>(b - depth[i]);
        if (cost > remaining) {
          break;
        }
        const double ratio = (now - dist[i][static_cast<std::size_t>(b)]) / static_cast<double>(cost);
        if (ratio > best_ratio) {
          best_ratio = ratio;
          best = i;
          best_depth = b;
        }
      }
    }
    if (best == k) {
      break;
    }
    remaining -= static_cast<std::size_t>(chunks[best].samples.size()) *
                 static_cast<std::size_t>(best_depth - depth[best]);
    depth[best] = best_depth;
  }
  return depth;
}

}  // namespace pacast

namespace pacast {

namespace {

std::pair<double, double> chunk_range(const PacketMeta& meta, std::size_t i, int bits) {
  return chunk_quantizer_range(meta.chunk_variances[i], meta.chunk_peaks[i], bits);
}

}  // namespace

std::size_t digital_info_bits(const PacketMeta& meta) {
  const std::size_t k = meta.chunk_variances.size();
  const std::size_t len = (meta.dims.count() + meta.chunk_padding) / k;
  std::size_t total = 0;
  for (std::uint8_t b : meta.chunk_bits) {
    total += len * b;
  }
  return total;
}

DigitalEncoding encode_gop_digital(const Gop& gop, std::uint32_t gop_id, const DigitalConfig& config) {
  if (config.num_chunks < 1 || config.bits_per_coeff < 2 || config.bits_per_coeff > 16) {
    throw InputError("digital encoder needs num_chunks >= 1 and bits_per_coeff in [2, 16]");
  }
  const SourceChunks src = source_chunks(gop, config.num_chunks);
  const std::size_t k = src.set.chunks.size();

  DigitalEncoding enc;
  PacketMeta& m = enc.meta;
  m.scheme = Scheme::Digital;
  m.gop_id = gop_id;
  m.dims = gop.dims();
  m.chunk_padding = static_cast<std::uint32_t>(src.set.padding);
  m.dc_mean = src.dc_mean;
  m.chunk_variances = src.variances;
  m.chunk_means = src.means;
  for (const auto& c : src.set.chunks) {
    m.chunk_peaks.push_back(static_cast<float>(c.samples.cwiseAbs().maxCoeff()));
  }

  std::vector<int> depth;
  if (config.bandwidth_parity) {
    AnalogConfig twin;
    twin.num_chunks = config.num_chunks;
    const std::size_t target =
        config.target_symbols > 0 ? config.target_symbols : analog_payload_symbols(m.dims, twin);
    depth = allocate_bits(src.set.chunks, m.chunk_variances, m.chunk_peaks, info_bit_budget(target),
                          config.bits_per_coeff);
  } else {
    depth.assign(k, config.bits_per_coeff);
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(m.chunk_peaks[i] > 0.0f)) {
      depth[i] = 0;
    }
    m.chunk_bits.push_back(static_cast<std::uint8_t>(depth[i]));
    if (depth[i] > 0) {
      const Bits q = quantize(src.set.chunks[i].samples, depth[i], chunk_range(m, i, depth[i]));
      enc.info_bits.insert(enc.info_bits.end(), q.begin(), q.end());
    }
  }
  enc.qam = qam16_map(conv_encode(enc.info_bits));
  return enc;
}

Gop decode_gop_digital(const Bits& info_bits, const PacketMeta& meta) {
  if (meta.scheme != Scheme::Digital) {
    throw InputError("metadata does not describe a digital GOP");
  }
  if (info_bits.size() != digital_info_bits(meta)) {
    throw InputError("decoded bit count does not match the metadata");
  }
  const std::size_t k = meta.chunk_variances.size();
  const auto len = static_cast<Eigen::Index>((meta.dims.count() + meta.chunk_padding) / k);
  std::vector<Chunk> chunks(k);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const int b = meta.chunk_bits[i];
    chunks[i].index = static_cast<int>(i);
    if (b == 0) {
      chunks[i].samples = RealVector::Zero(len);
    } else {
      const auto n = static_cast<std::size_t>(len) * static_cast<std::size_t>(b);
      chunks[i].samples = dequantize(std::span(info_bits).subspan(pos, n), len, b, chunk_range(meta, i, b));
      pos += n;
    }
    chunks[i].samples.array() += static_cast<double>(meta.chunk_means[i]);
  }
  Gop gop = idct3(dechunk(chunks, meta.dims));
  for (auto& f : gop.frames) {
    f.pixels = (f.pixels.array() + static_cast<double>(meta.dc_mean)).cwiseMax(0.0).cwiseMin(255.0);
  }
  return gop;
}

ChainResult run_digital_chain(const Gop& gop, std::uint32_t gop_id, const ChannelParams& channel,
                              const DigitalConfig& config, const ChainOptions& options) {
  const DigitalEncoding enc = encode_gop_digital(gop, gop_id, config);
  const OfdmConfig ofdm;
  const TxBurst tx = transmit_burst(enc.meta, IqPayload{enc.qam.symbols, false}, ofdm);
  const ComplexVector rx_samples = apply_channel(tx.frame.samples, channel);
  const RxBurst rx = receive_burst(rx_samples, ofdm, options.detector);

  ChainResult out;
  out.status = rx.status;
  out.error = rx.error;
  out.sync = rx.sync;
  out.payload_symbols = tx.meta.payload_symbols;
  out.burst_papr = papr(tx.frame.samples);
  out.bits = enc.info_bits.size();
  if (options.keep_iq) {
    out.tx_samples = tx.frame.samples;
    out.rx_samples = rx_samples;
  }
  if (!rx.ok()) {
    out.bit_errors = out.bits;
    out.reconstructed = gray_gop(gop.dims());
    return out;
  }
  out.measured_snr_db = rx.measured_snr_db;
  out.training_snr_db = rx.training_snr_db;

  const std::size_t info = digital_info_bits(rx.meta);
  Bits coded = qam16_demap(rx.payload.symbols);
  coded.resize((info + ConvCode::memory) * ConvCode::rate_inverse);
  const Bits decoded = viterbi_decode(coded);
  for (std::size_t i = 0; i < std::min(decoded.size(), enc.info_bits.size()); ++i) {
    out.bit_errors += decoded[i] != enc.info_bits[i] ? 1U : 0U;
  }
  out.reconstructed = decode_gop_digital(decoded, rx.meta);
  return out;
}

}  // namespace pacast
