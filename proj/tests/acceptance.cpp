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

// Runs the eight acceptance criteria at their stated tolerances and budgets.
// Prints one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "pacast/analog.hpp"
#include "pacast/burst.hpp"
#include "pacast/digital.hpp"
#include "pacast/experiment.hpp"
#include "pacast/power.hpp"
#include "pacast/theory.hpp"
#include "support.hpp"

using namespace pacast;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

Verdict analog_opta() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (double snr_db : {0.0, 5.0, 10.0, 20.0}) {
    const double gamma = db_to_linear(snr_db);
    const double d = monte_carlo_analog(1.0, 1.0, 1.0 / gamma, 1'000'000, 2026);
    const double expect = 1.0 / (1.0 + gamma);
    const double rel = std::abs(d - expect) / expect;
    ok = ok && rel < 0.02;
    detail += format("%gdB:%.4f%% ", snr_db, 100.0 * rel);
  }
  const double t = seconds_since(t0);
  return {ok && t < 30.0, detail + format("time=%.2fs (limit 30s)", t)};
}

Verdict opta_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> log_lam(-3.0, 3.0);
  std::uniform_real_distribution<double> log_gamma(-3.0, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double lam = std::pow(10.0, log_lam(rng));
    const double gamma = std::pow(10.0, log_gamma(rng));
    const double err = std::abs(rate_distortion(lam, lam / (1.0 + gamma)) - 0.5 * std::log2(1.0 + gamma));
    worst = std::max(worst, err);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 1.0, format("max_abs_error=%.3g time=%.3fs (limit 1s)", worst, t)};
}

Verdict loopback() {
  const auto frames = testing_support::qcif_sequence(16);
  const auto t0 = Clock::now();
  double worst = 0.0;
  bool ok = true;
  std::uint32_t id = 0;
  for (const Gop& gop : split_gops(frames, 4)) {
    const AnalogEncoding enc = encode_gop(gop, id++, AnalogConfig{});
    const OfdmConfig ofdm = analog_ofdm_config(1.0);
    const TxBurst tx = transmit_burst(enc.meta, map_iq(enc.payload), ofdm);
    ChannelParams ch;
    ch.noiseless = true;
    const RxBurst rx = receive_burst(apply_channel(tx.frame.samples, ch), ofdm);
    if (!rx.ok()) {
      ok = false;
      continue;
    }
    const RealVector got = unmap_iq(rx.payload);
    if (got.size() != enc.payload.size()) {
      ok = false;
      continue;
    }
    const double rms = std::sqrt(enc.payload.squaredNorm() / static_cast<double>(enc.payload.size()));
    worst = std::max(worst, (got - enc.payload).cwiseAbs().maxCoeff() / rms);
  }
  const double t = seconds_since(t0);
  return {ok && worst < 1e-9 && t < 10.0,
          format("gops=4 max_rel_error=%.3g time=%.2fs (limit 10s)", worst, t)};
}

Verdict synchronization() {
  const auto t0 = Clock::now();
  SyncBenchConfig timing;
  timing.snr_db = 10.0;
  timing.trials = 1000;
  timing.seed = 41;
  const auto ts = summarize(run_sync_bench(timing), OfdmConfig{});

  const OfdmConfig ofdm;
  SyncBenchConfig cfo;
  cfo.snr_db = 20.0;
  cfo.seed = 43;
  cfo.cfo_hz.clear();
  for (int i = -10; i <= 10; ++i) cfo.cfo_hz.push_back(0.25 * i * ofdm.subcarrier_spacing());
  cfo.trials = 20 * static_cast<int>(cfo.cfo_hz.size());
  const auto cs = summarize(run_sync_bench(cfo), ofdm);

  const double t = seconds_since(t0);
  const double timing_rate = static_cast<double>(ts.timing_ok) / ts.trials;
  const bool ok = timing_rate >= 0.99 && cs.detected == cs.trials && cs.max_cfo_error_spacing < 0.01 &&
                  t < 120.0;
  return {ok, format("timing_within_1=%d/%d cfo_trials=%d/%d max_cfo_error=%.0fHz (%.3f%% of spacing) "
                     "time=%.1fs (limit 120s)",
                     ts.timing_ok, ts.trials, cs.detected, cs.trials, cs.max_abs_cfo_error_hz,
                     100.0 * cs.max_cfo_error_spacing, t)};
}

// The sweep feeds criteria 5 and 8.
struct Sweep {
  LinkReport report;
  std::vector<SummaryRow> summary;
  double ceiling = 0.0;
  double seconds = 0.0;
};

Sweep run_sweep() {
  const auto frames = testing_support::qcif_sequence(32);
  RunConfig cfg;
  cfg.scheme = SchemeSelection::Both;
  cfg.snr_list_db.clear();
  for (int i = 0; i <= 10; ++i) cfg.snr_list_db.push_back(2.5 * i);
  cfg.trials = 3;
  cfg.seed = 5;
  const auto t0 = Clock::now();
  Sweep s;
  s.report = run_experiment(cfg, frames);
  s.summary = sweep_summary(s.report);
  s.seconds = seconds_since(t0);

  // Clean-decode ceiling: the same digital codec over a noiseless channel.
  ChannelParams clean;
  clean.noiseless = true;
  double mse = 0.0;
  int n = 0;
  for (const Gop& gop : split_gops(frames, cfg.gop_size)) {
    DigitalConfig dc;
    dc.target_symbols = analog_payload_symbols(gop.dims(), AnalogConfig{});
    const ChainResult r = run_digital_chain(gop, 0, clean, dc);
    for (int i = 0; i < gop.gop_size(); ++i) {
      mse += compute_psnr(gop.frames[i], r.reconstructed.frames[i]).mse;
      ++n;
    }
  }
  s.ceiling = psnr_from_mse(mse / n).psnr_db;
  return s;
}

Verdict degradation(const Sweep& s) {
  double worst_drop = 0.0;
  for (std::size_t i = 1; i < s.summary.size(); ++i) {
    worst_drop = std::max(worst_drop, *s.summary[i - 1].analog_mean_psnr - *s.summary[i].analog_mean_psnr);
  }
  double best_gain = -1e9;
  double best_snr = 0.0;
  for (const auto& r : s.summary) {
    if (*r.gain_db > best_gain) {
      best_gain = *r.gain_db;
      best_snr = r.snr_db;
    }
  }
  const double top = *s.summary.back().digital_mean_psnr;
  const bool ok = worst_drop <= 0.5 && best_gain >= 5.0 && s.ceiling - top <= 3.0 && s.seconds < 900.0;
  std::string curve;
  for (const auto& r : s.summary) {
    curve += format("%g:%.2f/%.2f ", r.snr_db, *r.analog_mean_psnr, *r.digital_mean_psnr);
  }
  return {ok, format("max_analog_drop=%.3fdB best_gain=%.2fdB@%gdB digital_top=%.2fdB ceiling=%.2fdB "
                     "time=%.0fs (limit 900s) analog/digital: ",
                     worst_drop, best_gain, best_snr, top, s.ceiling, s.seconds) +
                  curve};
}

Verdict transforms() {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dim(1, 24);
  std::uniform_int_distribution<int> order_pick(0, 6);
  double worst_parseval = 0.0;
  double worst_roundtrip = 0.0;
  double worst_whiten = 0.0;
  for (int c = 0; c < 1000; ++c) {
    const Gop gop = testing_support::random_gop(dim(rng) % 8 + 1, dim(rng), dim(rng), rng);
    const RealVector x = flatten(gop);
    const CoefficientCube cube = dct3(gop);
    worst_parseval = std::max(worst_parseval, std::abs(cube.coeffs.squaredNorm() - x.squaredNorm()) /
                                                  x.squaredNorm());
    worst_roundtrip =
        std::max(worst_roundtrip, (flatten(idct3(cube)) - x).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff());
    const int order = 1 << order_pick(rng);
    const RealVector back = unwhiten(whiten(cube.coeffs, order));
    worst_whiten = std::max(worst_whiten, (back - cube.coeffs).cwiseAbs().maxCoeff() /
                                              cube.coeffs.cwiseAbs().maxCoeff());
  }

  const auto frames = testing_support::qcif_sequence(300);
  double papr_whitened = 0.0;
  double papr_plain = 0.0;
  int gops = 0;
  for (const Gop& gop : split_gops(frames, 4)) {
    for (int order : {64, 0}) {
      AnalogConfig cfg;
      cfg.hadamard_order = order;
      const AnalogEncoding enc = encode_gop(gop, 0, cfg);
      const TxBurst tx = transmit_burst(enc.meta, map_iq(enc.payload), analog_ofdm_config(1.0));
      (order > 0 ? papr_whitened : papr_plain) += linear_to_db(papr(tx.frame.samples));
    }
    ++gops;
  }
  papr_whitened /= gops;
  papr_plain /= gops;
  const bool ok = worst_parseval < 1e-6 && worst_roundtrip < 1e-9 && worst_whiten < 1e-9 &&
                  papr_whitened < papr_plain;
  return {ok, format("cases=1000 parseval=%.2g roundtrip=%.2g whiten_roundtrip=%.2g gops=%d "
                     "mean_papr whitened=%.2fdB plain=%.2fdB",
                     worst_parseval, worst_roundtrip, worst_whiten, gops, papr_whitened, papr_plain)};
}

Verdict power_allocation() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> count(2, 64);
  std::uniform_real_distribution<double> log_var(-2.0, 4.0);
  std::uniform_int_distribution<int> len(16, 4096);
  std::uniform_real_distribution<double> budget(0.1, 10.0);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const int k = count(rng);
    std::vector<double> lambda(k);
    std::vector<int> lengths(k);
    for (int i = 0; i < k; ++i) {
      lambda[i] = std::pow(10.0, log_var(rng));
      lengths[i] = len(rng);
    }
    const double power = budget(rng);
    const GainVector g = allocate_gains(lambda, lengths, power);
    // High SNR: noise far below the smallest per-chunk power.
    double min_power = 1e300;
    for (int i = 0; i < k; ++i) min_power = std::min(min_power, g.gains[i] * g.gains[i] * lambda[i]);
    const std::vector<double> ref = oracle::optimal_gains(lambda, lengths, power, 1e-6 * min_power);
    for (int i = 0; i < k; ++i) worst = std::max(worst, std::abs(g.gains[i] - ref[i]) / ref[i]);
  }
  const double t = seconds_since(t0);
  return {worst < 1e-3 && t < 60.0, format("sets=100 max_rel_gain_error=%.3g time=%.2fs (limit 60s)", worst, t)};
}

Verdict digital_sanity(const Sweep& s) {
  std::mt19937_64 rng(29);
  std::bernoulli_distribution coin(0.5);
  Bits info(1'000'000);
  for (auto& b : info) b = coin(rng) ? 1 : 0;
  Bits decoded = viterbi_decode(conv_encode(info));
  decoded.resize(info.size());
  const bool exact = decoded == info;

  // Monte Carlo tolerance: three binomial standard errors on the lower-SNR point.
  auto bits_at = [&](double snr) {
    std::size_t bits = 0;
    for (const auto& r : s.report.rows) {
      if (r.scheme == Scheme::Digital && r.snr_db == snr && r.frame % s.report.config.gop_size == 0) {
        bits += r.bits;
      }
    }
    return static_cast<double>(bits);
  };
  bool monotone = true;
  std::string curve;
  for (std::size_t i = 0; i < s.summary.size(); ++i) {
    const double b = s.summary[i].digital_ber.value_or(1.0);
    curve += format("%g:%.3g(%.2gbits) ", s.summary[i].snr_db, b, bits_at(s.summary[i].snr_db));
    if (i == 0) continue;
    const double prev = s.summary[i - 1].digital_ber.value_or(1.0);
    const double se = std::sqrt(prev * (1.0 - prev) / bits_at(s.summary[i - 1].snr_db));
    monotone = monotone && b <= prev + 3.0 * se;
  }
  return {exact && monotone,
          format("viterbi_1e6_exact=%s ber_monotone=%s ber: ", exact ? "yes" : "no", monotone ? "yes" : "no") +
              curve};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };

  report(1, "analog OPTA", analog_opta);
  report(2, "OPTA identity", opta_identity);
  report(3, "loopback exactness", loopback);
  report(4, "synchronization", synchronization);
  std::optional<Sweep> sweep;
  std::string sweep_error;
  try {
    sweep = run_sweep();
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  auto with_sweep = [&](Verdict (*f)(const Sweep&)) {
    return [&, f]() -> Verdict {
      if (!sweep) return {false, "sweep failed: " + sweep_error};
      return f(*sweep);
    };
  };
  report(5, "graceful degradation vs cliff", with_sweep(degradation));
  report(6, "transform and whitening", transforms);
  report(7, "power allocation optimality", power_allocation);
  report(8, "digital baseline sanity", with_sweep(digital_sanity));
  std::printf("%s: %d of 8 criteria failed\n", failures == 0 ? "PASS" : "FAIL", failures);
  return failures == 0 ? 0 : 1;
}
