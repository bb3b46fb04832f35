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

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pacast/chain.hpp"
#include "pacast/channel.hpp"
#include "pacast/meta.hpp"
#include "pacast/ofdm.hpp"
#include "pacast/sync.hpp"
#include "pacast/types.hpp"
#include "pacast/video.hpp"

namespace pacast {

enum class SchemeSelection { PseudoAnalog, Digital, Both };

/// Every problem found while parsing or validating a configuration.
class ConfigError : public InputError {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct RunConfig {
  /// Empty: use the built-in synthetic test sequence.
  std::string input;
  int width = 176;
  int height = 144;
  VideoFormat format = VideoFormat::YOnly;
  /// Frames to use from the start of the input; 0 = all (32 for synthetic input).
  int frames = 0;
  int gop_size = 4;
  int num_chunks = 64;
  int hadamard_order = 64;
  double power_budget = 1.0;
  std::vector<double> snr_list_db{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  /// Explicit multipath taps; ignored when rayleigh_taps > 0.
  std::vector<std::complex<double>> taps{{1.0, 0.0}};
  /// Random block-fading taps drawn once per run from the seed.
  int rayleigh_taps = 0;
  double rayleigh_decay = 0.5;
  double cfo_hz = 0.0;
  double phase_noise_std = 0.0;
  SchemeSelection scheme = SchemeSelection::Both;
  int trials = 10;
  std::uint64_t seed = 1;
  /// Empty: no files are written.
  std::string output_dir;
  int bits_per_coeff = 10;
  bool bandwidth_parity = true;
  /// Preamble detector used by the receiver. The long window keeps the
  /// metric usable near 0 dB, where its noiseless value drops to 0.25.
  double sync_threshold = 0.15;
  int sync_window = 64;
  /// "default" (first and middle frame of each GOP at the lowest and highest
  /// SNR, trial 0), "none", or a comma-separated list of frame indices.
  std::string dump_frames = "default";
  /// Write transmitted and received IQ traces of GOP 0, trial 0.
  bool iq_traces = false;
  /// Worker threads for the (SNR, trial) grid; 0 = hardware concurrency.
  int threads = 0;

  /// Sets one field from its text form. Throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);
  /// Throws ConfigError listing every invalid field.
  void validate() const;
  /// key=value lines in a stable order, used for provenance headers.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> entries() const;
  [[nodiscard]] static const std::vector<std::string>& keys();
};

/// Flat key=value text ('#' starts a comment). All problems are collected
/// before throwing. Overrides are applied after the file.
RunConfig parse_config(std::istream& in, const std::vector<std::pair<std::string, std::string>>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides = {});

struct FrameRow {
  Scheme scheme = Scheme::PseudoAnalog;
  double snr_db = 0.0;
  int trial = 0;
  int frame = 0;
  int gop = 0;
  double psnr_db = 0.0;
  double mse = 0.0;
  double measured_snr_db = 0.0;
  double training_snr_db = 0.0;
  bool sync_failure = false;
  bool meta_failure = false;
  bool lost = false;
  std::size_t bit_errors = 0;
  std::size_t bits = 0;
  std::size_t payload_symbols = 0;
  std::size_t frame_start = 0;
  double cfo_hz = 0.0;
  double metric_peak = 0.0;
};

struct LinkReport {
  RunConfig config;
  /// One row per (scheme, snr, trial, frame), sorted in that order.
  std::vector<FrameRow> rows;
  /// Mean pixel variance of the input around each GOP's mean; the source
  /// variance for the closed-form theory columns.
  double source_variance = 0.0;
  /// Input frame count actually used (before GOP padding).
  int frames = 0;
};

/// Channel of one (SNR, trial, GOP) cell. Both schemes use it unchanged.
ChannelParams cell_channel(const RunConfig& config, int snr_index, int trial, std::size_t gop);

/// Encode, transmit and decode every GOP at every (scheme, SNR, trial).
/// Per-GOP failures are recorded, never fatal. Writes report.csv,
/// summary.csv and frame dumps when config.output_dir is set.
LinkReport run_experiment(const RunConfig& config);
/// Same, on frames already in memory.
LinkReport run_experiment(const RunConfig& config, const std::vector<Frame>& frames);

struct SummaryRow {
  double snr_db = 0.0;
  std::optional<double> analog_mean_psnr;
  std::optional<double> analog_min_psnr;
  std::optional<double> digital_mean_psnr;
  std::optional<double> digital_min_psnr;
  /// Pseudo-analog minus digital mean PSNR; empty unless both schemes ran.
  std::optional<double> gain_db;
  std::optional<double> digital_ber;
  int lost_frames = 0;
  double theory_d_analog = 0.0;
  double theory_d_digital = 0.0;
  double theory_psnr_db = 0.0;
};

std::vector<SummaryRow> sweep_summary(const LinkReport& report);

/// CSV writers. Both start with '# key=value' provenance lines.
void write_report_csv(const LinkReport& report, std::ostream& out);
void write_summary_csv(const LinkReport& report, const std::vector<SummaryRow>& summary,
                       std::ostream& out);

/// Frames named by config.dump_frames for one (snr, trial) cell.
std::vector<int> frames_to_dump(const RunConfig& config, double snr_db, int trial, int frame_count);

[[nodiscard]] std::string scheme_name(Scheme scheme);

/// Monte Carlo of the preamble detector and CFO estimator on short bursts
/// (preamble plus a few random payload symbols) placed at a random offset in
/// AWGN.
struct SyncBenchConfig {
  double snr_db = 10.0;
  int trials = 1000;
  /// Trial i injects cfo_hz[i % cfo_hz.size()].
  std::vector<double> cfo_hz{0.0};
  int payload_symbols = 4;
  DetectorOptions detector;
  std::uint64_t seed = 1;
};

struct SyncTrial {
  int trial = 0;
  std::size_t true_start = 0;
  bool detected = false;
  std::size_t frame_start = 0;
  long timing_error = 0;
  double cfo_true_hz = 0.0;
  double cfo_est_hz = 0.0;
  double metric_peak = 0.0;
  double snr_est_db = 0.0;
};

struct SyncBenchSummary {
  int trials = 0;
  int detected = 0;
  /// Detected with |timing error| <= 1 sample.
  int timing_ok = 0;
  double max_abs_cfo_error_hz = 0.0;
  /// Worst CFO error relative to the subcarrier spacing.
  double max_cfo_error_spacing = 0.0;
};

std::vector<SyncTrial> run_sync_bench(const SyncBenchConfig& config);
SyncBenchSummary summarize(const std::vector<SyncTrial>& trials, const OfdmConfig& ofdm);
/// Sync diagnostics rows: trial, frame_start, cfo, peak, snr_est, ...
void write_sync_csv(const std::vector<SyncTrial>& trials, std::ostream& out);

}  // namespace pacast
