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

#include "pacast/ofdm.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include <unsupported/Eigen/FFT>

namespace pacast {

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

// Short training: nonzero on every 4th carrier, which gives a 16-sample period.
constexpr std::array<std::pair<int, int>, 12> kShortSeed{{{-24, 1},
                                                          {-20, -1},
                                                          {-16, 1},
                                                          {-12, -1},
                                                          {-8, -1},
                                                          {-4, 1},
                                                          {4, -1},
                                                          {8, -1},
                                                          {12, 1},
                                                          {16, 1},
                                                          {20, 1},
                                                          {24, 1}}};

// Long training BPSK values on carriers -26..26 (index 26 is DC, unused).
constexpr std::array<int, 53> kLongSeed{1,  1,  -1, -1, 1,  1,  -1, 1,  -1, 1,  1,  1,  1, 1,
                                        1,  -1, -1, 1,  1,  -1, 1,  -1, 1,  1,  1,  1,  0, 1,
                                        -1, -1, 1,  1,  -1, 1,  -1, 1,  -1, -1, -1, -1, -1, 1,
                                        1,  -1, -1, 1,  -1, 1,  -1, 1,  1,  1,  1};

}  // namespace

OfdmConfig::OfdmConfig() {
  for (int k = -26; k <= 26; ++k) {
    if (k == 0 || k == -21 || k == -7 || k == 7 || k == 21) {
      continue;
    }
    data_carriers.push_back(k);
  }
}

void OfdmConfig::validate() const {
  if (fft_size != 64) {
    throw InputError("only the 64-point numerology is supported");
  }
  if (cp_len <= 0 || cp_len > fft_size) {
    throw InputError("cyclic prefix length out of range");
  }
  if (pilot_values.size() != pilot_carriers.size()) {
    throw InputError("pilot values must match pilot carriers");
  }
  std::set<int> used;
  auto check = [&](int k) {
    if (k == 0 || k < -fft_size / 2 || k >= fft_size / 2) {
      throw InputError("carrier index out of range or on DC");
    }
    if (!used.insert(k).second) {
      throw InputError("data and pilot carriers overlap");
    }
  };
  for (int k : data_carriers) check(k);
  for (int k : pilot_carriers) check(k);
  if (data_carriers.empty() || !(sample_rate > 0.0) || !(training_amplitude > 0.0)) {
    throw InputError("invalid OFDM configuration");
  }
}

IqPayload map_iq(const RealVector& samples) {
  IqPayload out;
  const Eigen::Index n = samples.size();
  out.padded = (n % 2) != 0;
  out.symbols.resize((n + 1) / 2);
  for (Eigen::Index i = 0; i < out.symbols.size(); ++i) {
    const double re = samples[2 * i];
    const double im = 2 * i + 1 < n ? samples[2 * i + 1] : 0.0;
    out.symbols[i] = Complex(re, im);
  }
  return out;
}

RealVector unmap_iq(const IqPayload& payload) {
  const Eigen::Index pairs = payload.symbols.size();
  if (payload.padded && pairs == 0) {
    throw InputError("padded I/Q payload cannot be empty");
  }
  RealVector out(2 * pairs - (payload.padded ? 1 : 0));
  for (Eigen::Index i = 0; i < pairs; ++i) {
    out[2 * i] = payload.symbols[i].real();
    if (2 * i + 1 < out.size()) {
      out[2 * i + 1] = payload.symbols[i].imag();
    }
  }
  return out;
}

ComplexVector unitary_fft(const ComplexVector& time) {
  ComplexVector freq;
  fft_engine().fwd(freq, time);
  return freq / std::sqrt(static_cast<double>(time.size()));
}

ComplexVector unitary_ifft(const ComplexVector& freq) {
  ComplexVector time;
  fft_engine().inv(time, freq);
  return time * std::sqrt(static_cast<double>(freq.size()));
}

ComplexVector short_training_bins(const OfdmConfig& config) {
  ComplexVector bins = ComplexVector::Zero(config.fft_size);
  const double a = config.training_amplitude * std::sqrt(13.0 / 6.0);
  for (const auto& [k, s] : kShortSeed) {
    bins[config.bin(k)] = Complex(a * s, a * s);
  }
  return bins;
}

ComplexVector long_training_bins(const OfdmConfig& config) {
  ComplexVector bins = ComplexVector::Zero(config.fft_size);
  for (int k = -26; k <= 26; ++k) {
    bins[config.bin(k)] = config.training_amplitude * kLongSeed[static_cast<std::size_t>(k + 26)];
  }
  return bins;
}

ComplexVector long_training_symbol(const OfdmConfig& config) {
  return unitary_ifft(long_training_bins(config));
}

ComplexVector build_preamble(const OfdmConfig& config) {
  config.validate();
  const ComplexVector st = unitary_ifft(short_training_bins(config));
  const ComplexVector lt = long_training_symbol(config);
  ComplexVector out(kPreambleLength);
  for (int i = 0; i < kShortTrainingLength; ++i) {
    out[i] = st[i % config.fft_size];
  }
  out.segment(kShortTrainingLength, kLongGuard) = lt.tail(kLongGuard);
  out.segment(kShortTrainingLength + kLongGuard, 64) = lt;
  out.segment(kShortTrainingLength + kLongGuard + 64, 64) = lt;
  return out;
}

int symbols_for(std::size_t values, const OfdmConfig& config) {
  const auto per = static_cast<std::size_t>(config.data_per_symbol());
  return static_cast<int>((values + per - 1) / per);
}

namespace {

ComplexVector empty_symbol(const OfdmConfig& config) {
  ComplexVector bins = ComplexVector::Zero(config.fft_size);
  for (std::size_t p = 0; p < config.pilot_carriers.size(); ++p) {
    bins[config.bin(config.pilot_carriers[p])] = config.training_amplitude * config.pilot_values[p];
  }
  return bins;
}

}  // namespace

CarrierAllocation allocate_carriers(const IqPayload& payload, const Bits& header_bits,
                                    const OfdmConfig& config) {
  config.validate();
  CarrierAllocation out;
  const int per = config.data_per_symbol();
  out.header_symbols = symbols_for(header_bits.size(), config);
  out.payload_symbols = symbols_for(static_cast<std::size_t>(payload.symbols.size()), config);
  out.padding = out.payload_symbols * per - static_cast<int>(payload.symbols.size());
  out.symbols.reserve(static_cast<std::size_t>(out.header_symbols + out.payload_symbols));

  const double a = config.training_amplitude;
  for (int s = 0; s < out.header_symbols; ++s) {
    ComplexVector bins = empty_symbol(config);
    for (int c = 0; c < per; ++c) {
      const std::size_t idx = static_cast<std::size_t>(s) * per + c;
      if (idx < header_bits.size()) {
        bins[config.bin(config.data_carriers[static_cast<std::size_t>(c)])] =
            header_bits[idx] ? -a : a;
      }
    }
    out.symbols.push_back(std::move(bins));
  }
  for (int s = 0; s < out.payload_symbols; ++s) {
    ComplexVector bins = empty_symbol(config);
    for (int c = 0; c < per; ++c) {
      const Eigen::Index idx = static_cast<Eigen::Index>(s) * per + c;
      if (idx < payload.symbols.size()) {
        bins[config.bin(config.data_carriers[static_cast<std::size_t>(c)])] = payload.symbols[idx];
      }
    }
    out.symbols.push_back(std::move(bins));
  }
  return out;
}

ComplexVector modulate_symbol(const ComplexVector& bins, const OfdmConfig& config) {
  if (bins.size() != config.fft_size) {
    throw InputError("OFDM symbol must have fft_size bins");
  }
  const ComplexVector t = unitary_ifft(bins);
  ComplexVector out(config.symbol_length());
  out.head(config.cp_len) = t.tail(config.cp_len);
  out.tail(config.fft_size) = t;
  return out;
}

OfdmFrame modulate(const CarrierAllocation& allocation, const OfdmConfig& config) {
  const ComplexVector preamble = build_preamble(config);
  const auto sym_len = static_cast<std::size_t>(config.symbol_length());
  OfdmFrame frame;
  frame.layout.short_training = 0;
  frame.layout.long_training = kShortTrainingLength;
  frame.layout.header = kPreambleLength;
  frame.layout.payload =
      frame.layout.header + static_cast<std::size_t>(allocation.header_symbols) * sym_len;
  frame.layout.end = kPreambleLength + allocation.symbols.size() * sym_len;

  frame.samples.resize(static_cast<Eigen::Index>(frame.layout.end));
  frame.samples.head(kPreambleLength) = preamble;
  Eigen::Index pos = kPreambleLength;
  for (const auto& bins : allocation.symbols) {
    frame.samples.segment(pos, config.symbol_length()) = modulate_symbol(bins, config);
    pos += config.symbol_length();
  }
  if (config.clip_amplitude) {
    const double limit = *config.clip_amplitude;
    for (auto& s : frame.samples) {
      const double mag = std::abs(s);
      if (mag > limit) {
        s *= limit / mag;
      }
    }
  }
  return frame;
}

double papr(const ComplexVector& samples) {
  if (samples.size() == 0) {
    return 0.0;
  }
  const double mean = samples.squaredNorm() / static_cast<double>(samples.size());
  if (mean <= 0.0) {
    return 0.0;
  }
  return samples.cwiseAbs2().maxCoeff() / mean;
}

void write_iq_trace(const ComplexVector& samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write IQ trace: " + path.string());
  }
  auto put = [&](float v) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    const char b[4] = {static_cast<char>(u), static_cast<char>(u >> 8), static_cast<char>(u >> 16),
                       static_cast<char>(u >> 24)};
    out.write(b, 4);
  };
  for (const auto& s : samples) {
    put(static_cast<float>(s.real()));
    put(static_cast<float>(s.imag()));
  }
}

ComplexVector read_iq_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open IQ trace: " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) {
    throw InputError("IQ trace length is not a multiple of 8 bytes");
  }
  auto get = [&](std::size_t off) {
    const std::uint32_t u = bytes[off] | (bytes[off + 1] << 8) | (bytes[off + 2] << 16) |
                            (static_cast<std::uint32_t>(bytes[off + 3]) << 24);
    return static_cast<double>(std::bit_cast<float>(u));
  };
  ComplexVector out(static_cast<Eigen::Index>(bytes.size() / 8));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const auto off = static_cast<std::size_t>(i) * 8;
    out[i] = Complex(get(off), get(off + 4));
  }
  return out;
}

}  // namespace pacast
