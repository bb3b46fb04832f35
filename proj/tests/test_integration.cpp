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

#include "pacast/analog.hpp"
#include "pacast/burst.hpp"
#include "pacast/digital.hpp"
#include "pacast/experiment.hpp"
#include "support.hpp"

using namespace pacast;

namespace {

double payload_papr(const Gop& gop, int hadamard_order) {
  AnalogConfig cfg;
  cfg.hadamard_order = hadamard_order;
  const AnalogEncoding enc = encode_gop(gop, 0, cfg);
  const TxBurst tx = transmit_burst(enc.meta, map_iq(enc.payload), analog_ofdm_config(1.0));
  const auto& l = tx.frame.layout;
  return papr(tx.frame.samples.segment(static_cast<Eigen::Index>(l.payload),
                                       static_cast<Eigen::Index>(l.end - l.payload)));
}

double gop_psnr(const Gop& a, const Gop& b) {
  double mse = 0.0;
  for (int i = 0; i < a.gop_size(); ++i) mse += compute_psnr(a.frames[i], b.frames[i]).mse;
  return psnr_from_mse(mse / a.gop_size()).psnr_db;
}

}  // namespace

TEST_SUITE("integration") {

TEST_CASE("noiseless analog loopback recovers the transmitted samples") {
  const auto frames = testing_support::qcif_sequence(8);
  for (const Gop& gop : split_gops(frames, 4)) {
    const AnalogEncoding enc = encode_gop(gop, 3, AnalogConfig{});
    const OfdmConfig ofdm = analog_ofdm_config(1.0);
    const TxBurst tx = transmit_burst(enc.meta, map_iq(enc.payload), ofdm);
    ComplexVector air = ComplexVector::Zero(tx.frame.samples.size() + 300);
    air.segment(200, tx.frame.samples.size()) = tx.frame.samples;
    const RxBurst rx = receive_burst(air, ofdm);
    REQUIRE(rx.ok());
    CHECK(rx.sync.frame_start == 200);
    CHECK(rx.meta == tx.meta);
    const RealVector got = unmap_iq(rx.payload);
    REQUIRE(got.size() == enc.payload.size());
    const double rms = std::sqrt(enc.payload.squaredNorm() / static_cast<double>(enc.payload.size()));
    CHECK((got - enc.payload).cwiseAbs().maxCoeff() / rms < 1e-9);
  }
}

TEST_CASE("analog chain quality grows with SNR") {
  const Gop gop = split_gops(testing_support::qcif_sequence(4), 4).front();
  // The low-SNR detector settings the experiment runs with.
  ChainOptions opts;
  opts.detector.threshold = RunConfig{}.sync_threshold;
  opts.detector.window = RunConfig{}.sync_window;
  double previous = 0.0;
  for (double snr : {0.0, 10.0, 20.0}) {
    ChannelParams ch;
    ch.snr_db = snr;
    ch.seed = 5;
    const ChainResult r = run_analog_chain(gop, 0, ch, AnalogConfig{}, opts);
    REQUIRE_FALSE(r.lost());
    const double q = gop_psnr(gop, r.reconstructed);
    CHECK(q > previous);
    previous = q;
    CHECK(std::abs(r.training_snr_db - snr) < 1.5);
  }
  CHECK(previous > 35.0);
}

TEST_CASE("noiseless chains reproduce the GOP") {
  const Gop gop = split_gops(testing_support::qcif_sequence(4), 4).front();
  ChannelParams ch;
  ch.noiseless = true;
  const ChainResult a = run_analog_chain(gop, 0, ch, AnalogConfig{});
  REQUIRE_FALSE(a.lost());
  CHECK(gop_psnr(gop, a.reconstructed) > 100.0);
  const ChainResult d = run_digital_chain(gop, 0, ch, DigitalConfig{});
  REQUIRE_FALSE(d.lost());
  CHECK(d.bit_errors == 0);
  CHECK(d.payload_symbols <= a.payload_symbols);
  CHECK(gop_psnr(gop, d.reconstructed) > 25.0);
}

TEST_CASE("whitening lowers the payload PAPR on natural video") {
  const auto frames = testing_support::qcif_sequence(16);
  double whitened = 0.0;
  double plain = 0.0;
  for (const Gop& gop : split_gops(frames, 4)) {
    whitened += payload_papr(gop, 64);
    plain += payload_papr(gop, 0);
  }
  CHECK(whitened < plain);
}

TEST_CASE("IQ trace replay decodes like the live stream") {
  const Gop gop = split_gops(testing_support::qcif_sequence(4), 4).front();
  ChannelParams ch;
  ch.snr_db = 25.0;
  ch.seed = 9;
  ChainOptions opts;
  opts.keep_iq = true;
  const ChainResult live = run_analog_chain(gop, 0, ch, AnalogConfig{}, opts);
  REQUIRE_FALSE(live.lost());
  const auto dir = testing_support::scratch_dir("iq_replay");
  write_iq_trace(live.rx_samples, dir / "rx.iq");
  const ComplexVector replay = read_iq_trace(dir / "rx.iq");
  REQUIRE(replay.size() == live.rx_samples.size());
  const RxBurst rx = receive_burst(replay, analog_ofdm_config(1.0));
  REQUIRE(rx.ok());
  const Gop decoded = decode_gop(unmap_iq(rx.payload), rx.noise_per_real, rx.meta);
  // float32 storage costs far less than the channel noise.
  CHECK(std::abs(gop_psnr(gop, decoded) - gop_psnr(gop, live.reconstructed)) < 0.05);
}

TEST_CASE("chains survive multipath and frequency offset") {
  const Gop gop = split_gops(testing_support::qcif_sequence(4), 4).front();
  ChannelParams ch;
  ch.snr_db = 25.0;
  ch.seed = 13;
  ch.taps = rayleigh_taps(4, 0.5, 21);
  ch.cfo_hz = 60e3;
  const ChainResult a = run_analog_chain(gop, 0, ch, AnalogConfig{});
  REQUIRE_FALSE(a.lost());
  CHECK(gop_psnr(gop, a.reconstructed) > 25.0);
  const ChainResult d = run_digital_chain(gop, 0, ch, DigitalConfig{});
  REQUIRE_FALSE(d.lost());
  CHECK(gop_psnr(gop, d.reconstructed) > 15.0);
}

TEST_CASE("a burst buried in noise is reported lost, not thrown") {
  const Gop gop = split_gops(testing_support::qcif_sequence(4), 4).front();
  ChannelParams ch;
  ch.snr_db = -20.0;
  ch.seed = 2;
  ChainResult r;
  CHECK_NOTHROW(r = run_analog_chain(gop, 0, ch, AnalogConfig{}));
  if (r.lost()) CHECK(gop_psnr(gop, r.reconstructed) == doctest::Approx(gop_psnr(gop, gray_gop(gop.dims()))));
}

}
