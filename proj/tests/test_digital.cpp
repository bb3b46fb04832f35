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

#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pacast/analog.hpp"
#include "pacast/digital.hpp"
#include "support.hpp"

using namespace pacast;

namespace {

Bits random_bits(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bits b(n);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1U);
  return b;
}

double mean_psnr(const Gop& a, const Gop& b) {
  double acc = 0.0;
  for (int t = 0; t < a.gop_size(); ++t) {
    acc += compute_psnr(a.frames[static_cast<std::size_t>(t)], b.frames[static_cast<std::size_t>(t)]).psnr_db;
  }
  return acc / a.gop_size();
}

const std::vector<Gop>& qcif_gops() {
  static const std::vector<Gop> gops = split_gops(testing_support::qcif_sequence(8), 4);
  return gops;
}

}  // namespace

TEST_SUITE("digital") {

TEST_CASE("quantize examples") {
  const std::pair<double, double> range{-1.0, 1.0};
  const RealVector mid{{0.0}};
  const RealVector back = dequantize(quantize(mid, 8, range), 1, 8, range);
  CHECK(std::abs(back[0]) <= 2.0 / 512.0 + 1e-15);

  const RealVector low{{-5.0}};
  const Bits q = quantize(low, 8, range);
  CHECK(q == Bits(8, 0));
  CHECK(dequantize(q, 1, 8, range)[0] == doctest::Approx(-1.0 + 1.0 / 256.0));
  const RealVector high{{7.0}};
  CHECK(quantize(high, 3, range) == Bits{1, 1, 1});

  // MSB first.
  const RealVector x{{-1.0 + 5.5 * 2.0 / 16.0}};
  CHECK(quantize(x, 4, range) == Bits{0, 1, 0, 1});

  CHECK_THROWS_AS(quantize(mid, 1, range), InputError);
  CHECK_THROWS_AS(quantize(mid, 17, range), InputError);
  CHECK_THROWS_AS(quantize(mid, 8, {1.0, 1.0}), InputError);
  CHECK_THROWS_AS(dequantize(Bits(7, 0), 1, 8, range), InputError);
}

TEST_CASE("quantization noise matches step^2 / 12") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.0, 2.0);
  RealVector x(200000);
  for (auto& v : x) v = d(rng);
  const std::pair<double, double> range{x.minCoeff(), x.maxCoeff()};
  const double step = (range.second - range.first) / 4096.0;
  const RealVector back = dequantize(quantize(x, 12, range), x.size(), 12, range);
  const double mse = (back - x).squaredNorm() / static_cast<double>(x.size());
  CHECK(mse <= step * step / 12.0 * 1.01);
  CHECK((back - x).cwiseAbs().maxCoeff() <= step / 2.0 + 1e-12);
}

TEST_CASE("chunk quantizer range clips shallow depths") {
  const auto r2 = chunk_quantizer_range(4.0f, 100.0f, 2);
  CHECK(r2.second == doctest::Approx(1.5 * 2.0 * 2.0));
  CHECK(r2.first == -r2.second);
  const auto r16 = chunk_quantizer_range(4.0f, 10.0f, 16);
  CHECK(r16.second == doctest::Approx(10.0));
}

TEST_CASE("conv_encode of zeros is zeros") {
  const Bits zeros(57, 0);
  const Bits coded = conv_encode(zeros);
  CHECK(coded.size() == 3 * (57 + 6));
  CHECK(coded == Bits(coded.size(), 0));
}

TEST_CASE("conv_encode impulse response follows the generators") {
  const Bits coded = conv_encode(Bits{1});
  REQUIRE(coded.size() == 21);
  // Output j at step t is bit (6 - t) of generator j.
  for (int t = 0; t < 7; ++t) {
    for (int j = 0; j < 3; ++j) {
      const unsigned g = ConvCode::generators[static_cast<std::size_t>(j)];
      CHECK(coded[static_cast<std::size_t>(3 * t + j)] == ((g >> (6 - t)) & 1U));
    }
  }
}

TEST_CASE("conv code is linear") {
  const Bits a = random_bits(200, 1);
  const Bits b = random_bits(200, 2);
  Bits x(200);
  for (std::size_t i = 0; i < 200; ++i) x[i] = a[i] ^ b[i];
  const Bits ca = conv_encode(a);
  const Bits cb = conv_encode(b);
  const Bits cx = conv_encode(x);
  for (std::size_t i = 0; i < cx.size(); ++i) CHECK(cx[i] == (ca[i] ^ cb[i]));
}

TEST_CASE("Viterbi inverts the encoder on clean input") {
  for (std::size_t n : {0u, 1u, 2u, 7u, 64u, 1000u}) {
    const Bits x = random_bits(n, 10 + n);
    const Bits c = conv_encode(x);
    CHECK(viterbi_decode(c) == x);
    std::vector<double> soft(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) soft[i] = c[i] ? -1.0 : 1.0;
    CHECK(viterbi_decode(soft) == x);
  }
  CHECK_THROWS_AS(viterbi_decode(Bits(20, 0)), InputError);
}

TEST_CASE("any two flipped bits in a 300-bit codeword are corrected") {
  const Bits x = random_bits(94, 77);
  const Bits c = conv_encode(x);
  REQUIRE(c.size() == 300);
  int failures = 0;
  Bits damaged = c;
  for (std::size_t i = 0; i < c.size(); ++i) {
    damaged[i] ^= 1;
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      damaged[j] ^= 1;
      if (viterbi_decode(damaged) != x) ++failures;
      damaged[j] ^= 1;
    }
    damaged[i] ^= 1;
  }
  CHECK(failures == 0);
}

TEST_CASE("soft decoding corrects weak errors") {
  const Bits x = random_bits(300, 5);
  const Bits c = conv_encode(x);
  std::vector<double> soft(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) soft[i] = c[i] ? -1.0 : 1.0;
  for (std::size_t i = 0; i < soft.size(); i += 4) soft[i] = -0.3 * soft[i];
  CHECK(viterbi_decode(soft) == x);
}

TEST_CASE("16-QAM constellation") {
  const auto pts = QamMap::constellation();
  const auto ref = oracle::gray_qam16();
  double energy = 0.0;
  for (int i = 0; i < 16; ++i) {
    energy += std::norm(pts[static_cast<std::size_t>(i)]);
    CHECK(std::abs(pts[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(i)]) < 1e-15);
  }
  CHECK(energy / 16.0 == doctest::Approx(1.0).epsilon(1e-15));

  const auto zero = qam16_map(Bits{0, 0, 0, 0});
  REQUIRE(zero.symbols.size() == 1);
  CHECK(std::abs(zero.symbols[0] - Complex(-3.0, -3.0) / std::sqrt(10.0)) < 1e-15);

  // Gray: nearest neighbours differ in exactly one bit.
  const double d = 2.0 / std::sqrt(10.0);
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      if (std::abs(std::abs(ref[static_cast<std::size_t>(a)] - ref[static_cast<std::size_t>(b)]) - d) < 1e-12) {
        CHECK(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
      }
    }
  }
}

TEST_CASE("16-QAM map and demap round-trip") {
  for (std::size_t n : {4u, 5u, 400u, 1001u}) {
    const Bits b = random_bits(n, n);
    const QamSymbols q = qam16_map(b);
    CHECK(q.pad_bits == static_cast<int>((4 - n % 4) % 4));
    CHECK(q.symbols.size() == static_cast<Eigen::Index>((n + 3) / 4));
    Bits back = qam16_demap(q.symbols, 0.1);
    REQUIRE(back.size() == n + static_cast<std::size_t>(q.pad_bits));
    back.resize(n);
    CHECK(back == b);
  }
  // Small perturbations do not change decisions.
  const Bits b = random_bits(64, 9);
  ComplexVector s = qam16_map(b).symbols;
  s.array() += Complex(0.05, -0.05);
  CHECK(qam16_demap(s) == b);
}

TEST_CASE("coder and mapper chain inverts on clean symbols") {
  for (std::size_t n : {1u, 10u, 333u}) {
    const Bits x = random_bits(n, 100 + n);
    const Bits c = conv_encode(x);
    const QamSymbols q = qam16_map(c);
    Bits demapped = qam16_demap(q.symbols);
    demapped.resize(c.size());
    CHECK(viterbi_decode(demapped) == x);
  }
}

TEST_CASE("info_bit_budget") {
  CHECK(info_bit_budget(0) == 0);
  CHECK(info_bit_budget(3) == 0);
  CHECK(info_bit_budget(30) == 34);
  // Coded bits never exceed the symbol capacity.
  for (std::size_t s : {100u, 777u, 50688u}) CHECK(3 * (info_bit_budget(s) + 6) <= 4 * s);
}

TEST_CASE("allocate_bits respects budget and depth limits") {
  const Gop& gop = qcif_gops()[0];
  const SourceChunks src = source_chunks(gop, 64);
  std::vector<float> peaks;
  for (const auto& c : src.set.chunks) peaks.push_back(static_cast<float>(c.samples.cwiseAbs().maxCoeff()));
  const std::size_t len = static_cast<std::size_t>(src.set.chunk_length());
  for (std::size_t budget : {std::size_t{0}, len * 2, len * 37, len * 640}) {
    const auto depth = allocate_bits(src.set.chunks, src.variances, peaks, budget, 10);
    std::size_t used = 0;
    for (int d : depth) {
      CHECK((d == 0 || (d >= 2 && d <= 10)));
      used += static_cast<std::size_t>(d) * len;
    }
    CHECK(used <= budget);
  }
  const auto full = allocate_bits(src.set.chunks, src.variances, peaks, len * 640, 10);
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (peaks[i] > 0.0f) CHECK(full[i] == 10);
  }
}

TEST_CASE("digital payload matches the pseudo-analog bandwidth within 5%") {
  const Gop& gop = qcif_gops()[0];
  const AnalogConfig analog;
  DigitalConfig dc;
  dc.target_symbols = analog_payload_symbols(gop.dims(), analog);
  const DigitalEncoding enc = encode_gop_digital(gop, 0, dc);
  const double ratio = static_cast<double>(enc.qam.symbols.size()) / static_cast<double>(dc.target_symbols);
  CHECK(ratio <= 1.0);
  CHECK(ratio >= 0.95);
  CHECK(enc.info_bits.size() == digital_info_bits(enc.meta));
  // Clean decode of the information bits.
  const Gop back = decode_gop_digital(enc.info_bits, enc.meta);
  CHECK(mean_psnr(gop, back) > 25.0);
}

TEST_CASE("noiseless digital chain at 10 bits per coefficient") {
  DigitalConfig dc;
  dc.bits_per_coeff = 10;
  dc.bandwidth_parity = false;
  ChannelParams ch;
  ch.noiseless = true;
  for (std::size_t g = 0; g < qcif_gops().size(); ++g) {
    const Gop& gop = qcif_gops()[g];
    const ChainResult r = run_digital_chain(gop, static_cast<std::uint32_t>(g), ch, dc);
    REQUIRE(r.status == RxStatus::Ok);
    CHECK(r.bit_errors == 0);
    CHECK(mean_psnr(gop, r.reconstructed) >= 40.0);
  }
}

TEST_CASE("digital cliff: clean well above it, collapse well below") {
  const Gop& gop = qcif_gops()[0];
  DigitalConfig dc;
  dc.target_symbols = analog_payload_symbols(gop.dims(), AnalogConfig{});
  ChannelParams clean;
  clean.noiseless = true;
  const double ceiling = mean_psnr(gop, run_digital_chain(gop, 0, clean, dc).reconstructed);

  // Locate the cliff: lowest SNR on a 1 dB grid with no residual bit errors.
  double cliff = 30.0;
  for (double snr = 0.0; snr <= 20.0; snr += 1.0) {
    ChannelParams ch;
    ch.snr_db = snr;
    ch.seed = 31;
    const ChainResult r = run_digital_chain(gop, 0, ch, dc);
    if (r.status == RxStatus::Ok && r.bit_errors == 0) {
      cliff = snr;
      break;
    }
  }
  REQUIRE(cliff < 30.0);
  MESSAGE("digital cliff near ", cliff, " dB, ceiling ", ceiling, " dB");

  ChannelParams below;
  below.snr_db = cliff - 5.0;
  below.seed = 32;
  const double collapsed = mean_psnr(gop, run_digital_chain(gop, 0, below, dc).reconstructed);
  CHECK(ceiling - collapsed >= 10.0);

  ChannelParams above;
  above.snr_db = cliff + 10.0;
  above.seed = 33;
  const ChainResult high = run_digital_chain(gop, 0, above, dc);
  CHECK(high.bit_errors == 0);
  CHECK(mean_psnr(gop, high.reconstructed) == doctest::Approx(ceiling).epsilon(1e-9));
}

TEST_CASE("decode_gop_digital validates its input") {
  const Gop& gop = qcif_gops()[0];
  DigitalConfig dc;
  dc.bandwidth_parity = false;
  const DigitalEncoding enc = encode_gop_digital(gop, 0, dc);
  CHECK_THROWS_AS(decode_gop_digital(Bits(enc.info_bits.size() - 1, 0), enc.meta), InputError);
  PacketMeta analog_meta = enc.meta;
  analog_meta.scheme = Scheme::PseudoAnalog;
  CHECK_THROWS_AS(decode_gop_digital(enc.info_bits, analog_meta), InputError);
}

}
