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

// Command-line front end: simulate, theory, sync-bench, synth-video.

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pacast/experiment.hpp"
#include "pacast/theory.hpp"
#include "pacast/video.hpp"

namespace {

using nlohmann::json;

int fail(const std::string& message, const std::vector<std::string>& problems = {}, int code = 1) {
  json err{{"error", message}};
  if (!problems.empty()) err["problems"] = problems;
  std::cerr << err.dump() << "\n";
  return code;
}

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

void print_summary(const pacast::LinkReport& report) {
  const auto summary = pacast::sweep_summary(report);
  pacast::write_summary_csv(report, summary, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pacast: pseudo-analog video over a simulated OFDM link"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run pseudo-analog and/or digital sweeps over SNR");
  std::string config_path;
  sim->add_option("--config", config_path, "key=value configuration file");
  std::map<std::string, std::string> field_values;
  std::map<std::string, CLI::Option*> field_options;
  for (const auto& key : pacast::RunConfig::keys()) {
    field_options[key] =
        sim->add_option("--" + dashed(key), field_values[key], "Override '" + key + "'");
  }

  // theory
  auto* theory = app.add_subcommand("theory", "Closed-form OPTA table, optional Monte Carlo check");
  double lambda = 1.0;
  std::vector<double> theory_snr{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  std::size_t mc_samples = 0;
  std::uint64_t theory_seed = 1;
  theory->add_option("--lambda", lambda, "Source variance")->capture_default_str();
  theory->add_option("--snr-db", theory_snr, "SNR points in dB")->delimiter(',')->capture_default_str();
  theory->add_option("--mc-samples", mc_samples, "Monte Carlo samples per point (0 = skip)");
  theory->add_option("--seed", theory_seed, "Monte Carlo seed")->capture_default_str();

  // sync-bench
  auto* bench = app.add_subcommand("sync-bench", "Monte Carlo of frame detection and CFO estimation");
  pacast::SyncBenchConfig bc;
  std::vector<double> cfo_spacings;
  std::string bench_csv;
  std::string replay_iq;
  bench->add_option("--snr-db", bc.snr_db, "Channel SNR")->capture_default_str();
  bench->add_option("--trials", bc.trials, "Number of bursts")->capture_default_str();
  bench->add_option("--cfo-hz", bc.cfo_hz, "Injected offsets, used round-robin")->delimiter(',');
  bench->add_option("--cfo-spacings", cfo_spacings, "Injected offsets in subcarrier spacings")
      ->delimiter(',');
  bench->add_option("--payload-symbols", bc.payload_symbols, "OFDM symbols after the preamble")
      ->capture_default_str();
  bench->add_option("--threshold", bc.detector.threshold, "Detection threshold")->capture_default_str();
  bench->add_option("--window", bc.detector.window, "Timing metric window")->capture_default_str();
  bench->add_option("--seed", bc.seed, "Seed")->capture_default_str();
  bench->add_option("--output", bench_csv, "Per-trial diagnostics CSV");
  bench->add_option("--iq", replay_iq, "Run the detector on an IQ trace instead of the Monte Carlo");

  // synth-video
  auto* synth = app.add_subcommand("synth-video", "Write the synthetic test sequence as raw Y frames");
  std::string synth_out;
  int synth_frames = 32;
  int synth_w = 176;
  int synth_h = 144;
  std::uint64_t synth_seed = 7;
  synth->add_option("--output", synth_out, "Output file")->required();
  synth->add_option("--frames", synth_frames)->capture_default_str();
  synth->add_option("--width", synth_w)->capture_default_str();
  synth->add_option("--height", synth_h)->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(e.what(), {}, 2);
  }

  try {
    if (*sim) {
      std::vector<std::pair<std::string, std::string>> overrides;
      for (const auto& key : pacast::RunConfig::keys()) {
        if (field_options[key]->count() > 0) overrides.emplace_back(key, field_values[key]);
      }
      std::istringstream empty;
      const pacast::RunConfig cfg = config_path.empty()
                                        ? pacast::parse_config(empty, overrides)
                                        : pacast::load_config(config_path, overrides);
      print_summary(pacast::run_experiment(cfg));
    } else if (*theory) {
      std::cout << "snr_db,gamma,rate_bits,capacity_bits,d_digital,d_analog";
      if (mc_samples > 0) std::cout << ",d_monte_carlo";
      std::cout << "\n" << std::setprecision(10);
      for (double snr : theory_snr) {
        const double gamma = pacast::db_to_linear(snr);
        const auto p = pacast::theory_point(lambda, gamma);
        std::cout << snr << ',' << gamma << ',' << p.rate << ',' << p.capacity << ','
                  << p.d_digital << ',' << p.d_analog;
        if (mc_samples > 0) {
          std::cout << ','
                    << pacast::monte_carlo_analog(lambda, gamma, 1.0, mc_samples, theory_seed);
        }
        std::cout << "\n";
      }
    } else if (*bench) {
      const pacast::OfdmConfig ofdm;
      if (!replay_iq.empty()) {
        const pacast::ComplexVector rx = pacast::read_iq_trace(replay_iq);
        const pacast::SyncResult s = pacast::detect_frame(rx, ofdm, bc.detector);
        std::cout << "frame_start,cfo_hz,peak,detected\n";
        const double cfo = s.detected ? pacast::estimate_cfo(rx, s, ofdm).total_hz() : 0.0;
        std::cout << s.frame_start << ',' << cfo << ',' << s.coarse_metric_peak << ','
                  << int(s.detected) << "\n";
        return 0;
      }
      for (double k : cfo_spacings) {
        if (bc.cfo_hz.size() == 1 && bc.cfo_hz.front() == 0.0) bc.cfo_hz.clear();
        bc.cfo_hz.push_back(k * ofdm.subcarrier_spacing());
      }
      const auto trials = pacast::run_sync_bench(bc);
      if (!bench_csv.empty()) {
        std::ofstream out(bench_csv);
        pacast::write_sync_csv(trials, out);
        if (!out) return fail("cannot write " + bench_csv);
      }
      const auto s = pacast::summarize(trials, ofdm);
      std::cout << "trials=" << s.trials << "\n"
                << "detected=" << s.detected << "\n"
                << "timing_within_1=" << s.timing_ok << "\n"
                << "timing_within_1_fraction=" << static_cast<double>(s.timing_ok) / s.trials << "\n"
                << "max_cfo_error_hz=" << s.max_abs_cfo_error_hz << "\n"
                << "max_cfo_error_spacings=" << s.max_cfo_error_spacing << "\n";
    } else if (*synth) {
      pacast::write_video(pacast::synthesize_video(synth_w, synth_h, synth_frames, synth_seed),
                          synth_out);
    }
  } catch (const pacast::ConfigError& e) {
    return fail("invalid configuration", e.problems(), 2);
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return 0;
}
