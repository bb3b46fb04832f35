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

#include <sstream>

#include "pacast/analog.hpp"
#include "pacast/digital.hpp"
#include "pacast/experiment.hpp"
#include "support.hpp"

using namespace pacast;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.frames = 8;
  c.snr_list_db = {0.0, 5.0, 10.0};
  c.trials = 1;
  c.gop_size = 4;
  c.scheme = SchemeSelection::PseudoAnalog;
  c.threads = 1;
  return c;
}

std::string report_text(const LinkReport& r) {
  std::ostringstream os;
  write_report_csv(r, os);
  write_summary_csv(r, sweep_summary(r), os);
  return os.str();
}

std::size_t data_lines(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t n = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++n;
  }
  return n;
}

FrameRow row(Scheme s, double snr, int trial, int frame, double psnr) {
  FrameRow r;
  r.scheme = s;
  r.snr_db = snr;
  r.trial = trial;
  r.frame = frame;
  r.psnr_db = psnr;
  return r;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("three SNR points, one trial, eight frames give 24 rows") {
  const auto frames = synthesize_video(176, 144, 8, 7);
  const LinkReport r = run_experiment(small_config(), frames);
  CHECK(r.rows.size() == 24);
  CHECK(r.frames == 8);
  std::ostringstream os;
  write_report_csv(r, os);
  CHECK(data_lines(os.str()) == 24);
  const auto summary = sweep_summary(r);
  REQUIRE(summary.size() == 3);
  for (const auto& s : summary) {
    CHECK(s.analog_mean_psnr.has_value());
    CHECK_FALSE(s.digital_mean_psnr.has_value());
    CHECK_FALSE(s.gain_db.has_value());
    CHECK(s.theory_d_analog == doctest::Approx(s.theory_d_digital));
  }
  // Rows sorted by (scheme, snr, trial, frame).
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const auto& a = r.rows[i - 1];
    const auto& b = r.rows[i];
    CHECK(std::tie(a.snr_db, a.trial, a.frame) < std::tie(b.snr_db, b.trial, b.frame));
  }
  CHECK(summary[0].analog_mean_psnr < summary[2].analog_mean_psnr);
}

TEST_CASE("same configuration and seed give byte-identical CSV") {
  const auto frames = synthesize_video(176, 144, 8, 7);
  RunConfig c = small_config();
  c.scheme = SchemeSelection::Both;
  c.snr_list_db = {5.0, 15.0};
  const std::string first = report_text(run_experiment(c, frames));
  CHECK(first == report_text(run_experiment(c, frames)));
  c.threads = 3;
  const std::string threaded = report_text(run_experiment(c, frames));
  // Thread count is part of the provenance lines only.
  auto body = [](const std::string& s) {
    std::istringstream in(s);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
      if (line.rfind("# ", 0) != 0) out += line + '\n';
    }
    return out;
  };
  CHECK(body(threaded) == body(first));
  c.seed = 2;
  CHECK(body(report_text(run_experiment(c, frames))) != body(first));
}

TEST_CASE("both schemes see the same channel noise") {
  const auto frames = synthesize_video(176, 144, 4, 7);
  const Gop gop = split_gops(frames, 4).front();
  RunConfig c = small_config();
  const ChannelParams ch = cell_channel(c, 1, 0, 0);
  CHECK(ch.snr_db == 5.0);
  CHECK(ch.seed == cell_channel(c, 1, 0, 0).seed);
  CHECK(ch.seed != cell_channel(c, 1, 1, 0).seed);
  CHECK(ch.seed != cell_channel(c, 2, 0, 0).seed);
  CHECK(ch.seed != cell_channel(c, 1, 0, 1).seed);

  ChainOptions opts;
  opts.keep_iq = true;
  const ChainResult a = run_analog_chain(gop, 0, ch, AnalogConfig{}, opts);
  DigitalConfig dc;
  dc.target_symbols = analog_payload_symbols(gop.dims(), AnalogConfig{});
  const ChainResult d = run_digital_chain(gop, 0, ch, dc, opts);

  ChannelParams clean = ch;
  clean.noiseless = true;
  const ComplexVector wa = a.rx_samples - apply_channel(a.tx_samples, clean);
  const ComplexVector wd = d.rx_samples - apply_channel(d.tx_samples, clean);
  const Eigen::Index n = std::min(wa.size(), wd.size());
  REQUIRE(n > 1000);
  // Same realization up to the per-burst noise level.
  const double scale = wa.head(n).norm() / wd.head(n).norm();
  CHECK((wa.head(n) - scale * wd.head(n)).norm() < 1e-9 * wa.head(n).norm());
}

TEST_CASE("sweep_summary examples") {
  LinkReport one;
  one.config.gop_size = 1;
  one.rows = {row(Scheme::Digital, 10.0, 0, 0, 20.0), row(Scheme::Digital, 10.0, 1, 0, 22.0)};
  const auto s1 = sweep_summary(one);
  REQUIRE(s1.size() == 1);
  CHECK_FALSE(s1[0].gain_db.has_value());
  CHECK(*s1[0].digital_mean_psnr == doctest::Approx(21.0));
  CHECK(*s1[0].digital_min_psnr == 20.0);

  LinkReport equal;
  equal.config.gop_size = 1;
  for (int t = 0; t < 5; ++t) equal.rows.push_back(row(Scheme::PseudoAnalog, 3.0, t, 0, 31.5));
  CHECK(*sweep_summary(equal)[0].analog_mean_psnr == doctest::Approx(31.5).epsilon(1e-15));

  LinkReport both;
  both.config.gop_size = 1;
  both.rows = {row(Scheme::PseudoAnalog, 12.0, 0, 0, 27.36), row(Scheme::Digital, 12.0, 0, 0, 21.11)};
  const auto s3 = sweep_summary(both);
  REQUIRE(s3[0].gain_db.has_value());
  CHECK(*s3[0].gain_db == doctest::Approx(6.25).epsilon(1e-12));

  std::ostringstream os;
  write_summary_csv(both, s3, os);
  CHECK(os.str().find("gain_db") != std::string::npos);
  CHECK(os.str().find("# plane=luma") != std::string::npos);
}

TEST_CASE("configuration parsing") {
  std::istringstream in(
      "# comment\n"
      "gop_size = 8\n"
      "snr_list_db = 0:10:2.5\n"
      "scheme = digital\n"
      "taps = 1, 0.5-0.25j\n"
      "bandwidth_parity = false\n");
  const RunConfig c = parse_config(in, {{"trials", "3"}, {"gop_size", "2"}});
  CHECK(c.gop_size == 2);
  CHECK(c.trials == 3);
  CHECK(c.snr_list_db == std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0});
  CHECK(c.scheme == SchemeSelection::Digital);
  REQUIRE(c.taps.size() == 2);
  CHECK(c.taps[1] == std::complex<double>(0.5, -0.25));
  CHECK_FALSE(c.bandwidth_parity);

  RunConfig d;
  CHECK(d.gop_size == 4);
  CHECK(d.num_chunks == 64);
  CHECK(d.hadamard_order == 64);
  CHECK(d.trials == 10);
  CHECK(RunConfig::keys().size() == d.entries().size());
}

TEST_CASE("configuration errors are reported all at once") {
  std::istringstream in(
      "gop_size = 0\n"
      "trials = -1\n"
      "colour = red\n"
      "no equals sign\n"
      "power_budget = abc\n");
  try {
    parse_config(in);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.problems().size() >= 5);
  }
  std::istringstream empty;
  CHECK_THROWS_AS(parse_config(empty, {{"snr_list_db", ""}}), ConfigError);
  CHECK_THROWS_AS(parse_config(empty, {{"hadamard_order", "48"}}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/pacast.cfg"), ConfigError);
  std::istringstream ok;
  CHECK_NOTHROW(parse_config(ok, {{"hadamard_order", "0"}}));
}

TEST_CASE("every frame appears, lost or not") {
  const auto frames = synthesize_video(176, 144, 6, 7);
  RunConfig c = small_config();
  c.scheme = SchemeSelection::Both;
  c.snr_list_db = {-15.0, 20.0};
  c.trials = 2;
  const LinkReport r = run_experiment(c, frames);
  CHECK(r.rows.size() == 2u * 2u * 2u * 6u);
  for (int f = 0; f < 6; ++f) {
    int seen = 0;
    for (const auto& row : r.rows) seen += row.frame == f ? 1 : 0;
    CHECK(seen == 8);
  }
  for (const auto& row : r.rows) {
    if (row.lost) CHECK((row.sync_failure || row.meta_failure));
  }
}

TEST_CASE("outputs on disk") {
  const auto dir = testing_support::scratch_dir("experiment_out");
  RunConfig c = small_config();
  c.snr_list_db = {5.0, 20.0};
  c.frames = 4;
  c.output_dir = dir.string();
  c.iq_traces = true;
  run_experiment(c);
  CHECK(fs::exists(dir / "report.csv"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "frames" / "original_f0.pgm"));
  CHECK(fs::exists(dir / "frames" / "original_f2.pgm"));
  int pgm = 0;
  int iq = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    pgm += e.path().extension() == ".pgm" ? 1 : 0;
    iq += e.path().extension() == ".iq" ? 1 : 0;
  }
  // Originals plus frames 0 and 2 at both SNRs.
  CHECK(pgm == 2 + 2 * 2);
  CHECK(iq == 4);
  const Frame f = read_pgm(dir / "frames" / "original_f0.pgm");
  CHECK(f.width() == 176);
}

TEST_CASE("frames_to_dump") {
  RunConfig c;
  c.output_dir = "x";
  c.snr_list_db = {0.0, 10.0, 20.0};
  c.gop_size = 4;
  CHECK(frames_to_dump(c, 0.0, 0, 10) == std::vector<int>{0, 2, 4, 6, 8});
  CHECK(frames_to_dump(c, 10.0, 0, 10).empty());
  CHECK(frames_to_dump(c, 20.0, 1, 10).empty());
  c.dump_frames = "7,2,2,30";
  CHECK(frames_to_dump(c, 10.0, 0, 10) == std::vector<int>{2, 7});
  c.dump_frames = "none";
  CHECK(frames_to_dump(c, 0.0, 0, 10).empty());
}

TEST_CASE("sync bench summary") {
  SyncBenchConfig b;
  b.trials = 20;
  b.snr_db = 15.0;
  b.cfo_hz = {0.0, 50e3};
  const auto trials = run_sync_bench(b);
  REQUIRE(trials.size() == 20);
  CHECK(trials[1].cfo_true_hz == 50e3);
  const auto s = summarize(trials, OfdmConfig{});
  CHECK(s.trials == 20);
  CHECK(s.detected == 20);
  CHECK(s.timing_ok == 20);
  CHECK(s.max_cfo_error_spacing < 0.01);
  std::ostringstream os;
  write_sync_csv(trials, os);
  CHECK(data_lines(os.str()) == 20);
  b.cfo_hz.clear();
  CHECK_THROWS_AS(run_sync_bench(b), InputError);
}

}
