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

#include "pacast/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "pacast/analog.hpp"
#include "pacast/channel.hpp"
#include "pacast/digital.hpp"
#include "pacast/theory.hpp"

namespace pacast {

namespace {

constexpr std::uint64_t kSyntheticSeed = 7;
constexpr int kSyntheticFrames = 32;
constexpr std::uint64_t kFadingStream = 0xFADE;

std::string join_problems(const std::vector<std::string>& problems) {
  std::string msg = "invalid configuration";
  for (const auto& p : problems) {
    msg += "; " + p;
  }
  return msg;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw ConfigError({key + ": expected a number, got '" + v + "'"});
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw ConfigError({key + ": expected an integer, got '" + v + "'"});
  }
  return out;
}

int parse_small_int(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError({key + ": value out of range"});
  }
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError({key + ": expected true/false, got '" + v + "'"});
}

// "0,5,10" or "start:stop:step" (inclusive stop).
std::vector<double> parse_snr_list(const std::string& key, const std::string& v) {
  const auto parts = split(v, ':');
  if (parts.size() == 3 && v.find(',') == std::string::npos) {
    const double a = parse_double(key, parts[0]);
    const double b = parse_double(key, parts[1]);
    const double step = parse_double(key, parts[2]);
    if (!(step > 0.0) || b < a) {
      throw ConfigError({key + ": range needs start <= stop and a positive step"});
    }
    std::vector<double> out;
    const auto n = static_cast<int>(std::floor((b - a) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(a + step * i);
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(v, ',')) out.push_back(parse_double(key, p));
  return out;
}

// Accepts "1", "0.5j", "0.3-0.1j", "-2e-3+1i".
std::complex<double> parse_complex(const std::string& key, const std::string& v) {
  if (v.empty()) throw ConfigError({key + ": empty tap"});
  const char last = v.back();
  if (last != 'j' && last != 'i') {
    return {parse_double(key, v), 0.0};
  }
  const std::string body = v.substr(0, v.size() - 1);
  std::size_t split_at = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split_at = i;
      break;
    }
  }
  if (split_at == std::string::npos) {
    return {0.0, parse_double(key, body.empty() || body == "+" ? "1" : body == "-" ? "-1" : body)};
  }
  std::string imag = body.substr(split_at);
  if (imag == "+" || imag == "-") imag += "1";
  return {parse_double(key, body.substr(0, split_at)), parse_double(key, imag)};
}

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

std::string short_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string format_name(VideoFormat f) { return f == VideoFormat::YOnly ? "y" : "yuv420"; }

std::string selection_name(SchemeSelection s) {
  switch (s) {
    case SchemeSelection::PseudoAnalog: return "pseudo-analog";
    case SchemeSelection::Digital: return "digital";
    case SchemeSelection::Both: return "both";
  }
  return "both";
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"input", [](RunConfig& c, const std::string&, const std::string& v) { c.input = v; }},
      {"width", [](RunConfig& c, const std::string& k, const std::string& v) { c.width = parse_small_int(k, v); }},
      {"height", [](RunConfig& c, const std::string& k, const std::string& v) { c.height = parse_small_int(k, v); }},
      {"format",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "y" || v == "y-only" || v == "yonly") c.format = VideoFormat::YOnly;
         else if (v == "yuv420" || v == "yuv420p") c.format = VideoFormat::Yuv420;
         else throw ConfigError({k + ": expected y or yuv420, got '" + v + "'"});
       }},
      {"frames", [](RunConfig& c, const std::string& k, const std::string& v) { c.frames = parse_small_int(k, v); }},
      {"gop_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.gop_size = parse_small_int(k, v); }},
      {"num_chunks", [](RunConfig& c, const std::string& k, const std::string& v) { c.num_chunks = parse_small_int(k, v); }},
      {"hadamard_order", [](RunConfig& c, const std::string& k, const std::string& v) { c.hadamard_order = parse_small_int(k, v); }},
      {"power_budget", [](RunConfig& c, const std::string& k, const std::string& v) { c.power_budget = parse_double(k, v); }},
      {"snr_list_db", [](RunConfig& c, const std::string& k, const std::string& v) { c.snr_list_db = parse_snr_list(k, v); }},
      {"taps",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.taps.clear();
         for (const auto& t : split(v, ',')) c.taps.push_back(parse_complex(k, t));
       }},
      {"rayleigh_taps", [](RunConfig& c, const std::string& k, const std::string& v) { c.rayleigh_taps = parse_small_int(k, v); }},
      {"rayleigh_decay", [](RunConfig& c, const std::string& k, const std::string& v) { c.rayleigh_decay = parse_double(k, v); }},
      {"cfo_hz", [](RunConfig& c, const std::string& k, const std::string& v) { c.cfo_hz = parse_double(k, v); }},
      {"phase_noise_std", [](RunConfig& c, const std::string& k, const std::string& v) { c.phase_noise_std = parse_double(k, v); }},
      {"scheme",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "pseudo-analog" || v == "analog") c.scheme = SchemeSelection::PseudoAnalog;
         else if (v == "digital") c.scheme = SchemeSelection::Digital;
         else if (v == "both") c.scheme = SchemeSelection::Both;
         else throw ConfigError({k + ": expected pseudo-analog, digital or both, got '" + v + "'"});
       }},
      {"trials", [](RunConfig& c, const std::string& k, const std::string& v) { c.trials = parse_small_int(k, v); }},
      {"seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long s = parse_int(k, v);
         if (s < 0) throw ConfigError({k + ": must be non-negative"});
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"output_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"bits_per_coeff", [](RunConfig& c, const std::string& k, const std::string& v) { c.bits_per_coeff = parse_small_int(k, v); }},
      {"bandwidth_parity", [](RunConfig& c, const std::string& k, const std::string& v) { c.bandwidth_parity = parse_bool(k, v); }},
      {"sync_threshold", [](RunConfig& c, const std::string& k, const std::string& v) { c.sync_threshold = parse_double(k, v); }},
      {"sync_window", [](RunConfig& c, const std::string& k, const std::string& v) { c.sync_window = parse_small_int(k, v); }},
      {"dump_frames", [](RunConfig& c, const std::string&, const std::string& v) { c.dump_frames = v; }},
      {"iq_traces", [](RunConfig& c, const std::string& k, const std::string& v) { c.iq_traces = parse_bool(k, v); }},
      {"threads", [](RunConfig& c, const std::string& k, const std::string& v) { c.threads = parse_small_int(k, v); }},
  };
  return table;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : InputError(join_problems(problems)), problems_(std::move(problems)) {}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [name, setter] : setters()) out.push_back(name);
    return out;
  }();
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      setter(*this, key, trim(value));
      return;
    }
  }
  throw ConfigError({"unknown key '" + key + "'"});
}

void RunConfig::validate() const {
  std::vector<std::string> p;
  if (width <= 0) p.push_back("width must be positive");
  if (height <= 0) p.push_back("height must be positive");
  if (frames < 0) p.push_back("frames must be non-negative");
  if (gop_size < 1) p.push_back("gop_size must be at least 1");
  if (num_chunks < 1) p.push_back("num_chunks must be at least 1");
  if (num_chunks > 0xFFFF) p.push_back("num_chunks must fit in 16 bits");
  if ((hadamard_order != 0 && !is_power_of_two(hadamard_order)) || hadamard_order > 0x8000) {
    p.push_back("hadamard_order must be 0 (off) or a power of two up to 32768");
  }
  if (!(power_budget > 0.0) || !std::isfinite(power_budget)) p.push_back("power_budget must be positive");
  if (snr_list_db.empty()) p.push_back("snr_list_db must not be empty");
  for (double s : snr_list_db) {
    if (!std::isfinite(s)) p.push_back("snr_list_db entries must be finite");
  }
  if (taps.empty()) p.push_back("taps must not be empty");
  if (rayleigh_taps < 0) p.push_back("rayleigh_taps must be non-negative");
  if (!(rayleigh_decay > 0.0)) p.push_back("rayleigh_decay must be positive");
  if (!std::isfinite(cfo_hz)) p.push_back("cfo_hz must be finite");
  if (!(phase_noise_std >= 0.0)) p.push_back("phase_noise_std must be non-negative");
  if (trials < 1) p.push_back("trials must be at least 1");
  if (bits_per_coeff < 2 || bits_per_coeff > 16) p.push_back("bits_per_coeff must be in [2, 16]");
  if (!(sync_threshold > 0.0 && sync_threshold < 1.0)) p.push_back("sync_threshold must be in (0, 1)");
  if (sync_window < 1) p.push_back("sync_window must be positive");
  if (threads < 0) p.push_back("threads must be non-negative");
  if (dump_frames != "default" && dump_frames != "none") {
    for (const auto& f : split(dump_frames, ',')) {
      try {
        if (parse_int("dump_frames", f) < 0) p.push_back("dump_frames indices must be non-negative");
      } catch (const ConfigError& e) {
        p.push_back(e.problems().front());
      }
    }
  }
  if (width > 0 && height > 0 && gop_size > 0 && num_chunks > 0 &&
      static_cast<long long>(num_chunks) > static_cast<long long>(width) * height * gop_size) {
    p.push_back("num_chunks exceeds the coefficients per GOP");
  }
  if (!p.empty()) throw ConfigError(p);
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> e;
  std::string snr;
  for (double s : snr_list_db) snr += (snr.empty() ? "" : ",") + short_number(s);
  std::string tap_text;
  for (const auto& t : taps) {
    std::ostringstream os;
    os << short_number(t.real());
    if (t.imag() != 0.0) os << (t.imag() < 0 ? "" : "+") << short_number(t.imag()) << "j";
    tap_text += (tap_text.empty() ? "" : ",") + os.str();
  }
  e.emplace_back("input", input.empty() ? "synthetic" : input);
  e.emplace_back("width", std::to_string(width));
  e.emplace_back("height", std::to_string(height));
  e.emplace_back("format", format_name(format));
  e.emplace_back("frames", std::to_string(frames));
  e.emplace_back("gop_size", std::to_string(gop_size));
  e.emplace_back("num_chunks", std::to_string(num_chunks));
  e.emplace_back("hadamard_order", std::to_string(hadamard_order));
  e.emplace_back("power_budget", short_number(power_budget));
  e.emplace_back("snr_list_db", snr);
  e.emplace_back("taps", tap_text);
  e.emplace_back("rayleigh_taps", std::to_string(rayleigh_taps));
  e.emplace_back("rayleigh_decay", short_number(rayleigh_decay));
  e.emplace_back("cfo_hz", short_number(cfo_hz));
  e.emplace_back("phase_noise_std", short_number(phase_noise_std));
  e.emplace_back("scheme", selection_name(scheme));
  e.emplace_back("trials", std::to_string(trials));
  e.emplace_back("seed", std::to_string(seed));
  e.emplace_back("output_dir", output_dir);
  e.emplace_back("bits_per_coeff", std::to_string(bits_per_coeff));
  e.emplace_back("bandwidth_parity", bandwidth_parity ? "true" : "false");
  e.emplace_back("sync_threshold", short_number(sync_threshold));
  e.emplace_back("sync_window", std::to_string(sync_window));
  e.emplace_back("dump_frames", dump_frames);
  e.emplace_back("iq_traces", iq_traces ? "true" : "false");
  e.emplace_back("threads", std::to_string(threads));
  return e;
}

RunConfig parse_config(std::istream& in,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  std::vector<std::string> problems;
  auto apply = [&](const std::string& key, const std::string& value, const std::string& where) {
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      for (const auto& p : e.problems()) problems.push_back(where + p);
    }
  };
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(number) + ": ";
    if (eq == std::string::npos) {
      problems.push_back(where + "expected key=value");
      continue;
    }
    apply(trim(line.substr(0, eq)), line.substr(eq + 1), where);
  }
  for (const auto& [k, v] : overrides) apply(k, v, "override: ");
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  }
  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError({"cannot read config file " + path.string()});
  }
  return parse_config(in, overrides);
}

std::string scheme_name(Scheme scheme) {
  return scheme == Scheme::PseudoAnalog ? "pseudo-analog" : "digital";
}

std::vector<int> frames_to_dump(const RunConfig& config, double snr_db, int trial, int frame_count) {
  std::vector<int> out;
  if (config.output_dir.empty() || config.dump_frames == "none" || trial != 0) {
    return out;
  }
  if (config.dump_frames == "default") {
    const auto [lo, hi] = std::minmax_element(config.snr_list_db.begin(), config.snr_list_db.end());
    if (snr_db != *lo && snr_db != *hi) return out;
    for (int g = 0; g * config.gop_size < frame_count; ++g) {
      const int first = g * config.gop_size;
      const int middle = first + config.gop_size / 2;
      out.push_back(first);
      if (middle != first && middle < frame_count) out.push_back(middle);
    }
    return out;
  }
  for (const auto& f : split(config.dump_frames, ',')) {
    const auto idx = static_cast<int>(parse_int("dump_frames", f));
    if (idx < frame_count) out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::vector<Frame> load_input(const RunConfig& config) {
  if (config.input.empty()) {
    const int n = config.frames > 0 ? config.frames : kSyntheticFrames;
    return synthesize_video(config.width, config.height, n, kSyntheticSeed);
  }
  std::vector<Frame> frames = load_video(config.input, config.width, config.height, config.format);
  if (config.frames > 0 && static_cast<std::size_t>(config.frames) < frames.size()) {
    frames.resize(static_cast<std::size_t>(config.frames));
  }
  return frames;
}

std::string snr_tag(double snr_db) {
  std::ostringstream os;
  os << std::setprecision(6) << snr_db;
  return os.str();
}

struct Cell {
  int snr_index = 0;
  int trial = 0;
};

}  // namespace

ChannelParams cell_channel(const RunConfig& config, int snr_index, int trial, std::size_t gop) {
  ChannelParams ch;
  ch.snr_db = config.snr_list_db.at(static_cast<std::size_t>(snr_index));
  ch.cfo_hz = config.cfo_hz;
  ch.phase_noise_std = config.phase_noise_std;
  if (config.rayleigh_taps > 0) {
    ch.taps = rayleigh_taps(config.rayleigh_taps, config.rayleigh_decay,
                            derive_seed({config.seed, kFadingStream}));
  } else {
    ch.taps.assign(config.taps.begin(), config.taps.end());
  }
  // No scheme in the derivation: both schemes see the same noise.
  ch.seed = derive_seed({config.seed, static_cast<std::uint64_t>(snr_index),
                         static_cast<std::uint64_t>(trial), gop});
  return ch;
}

LinkReport run_experiment(const RunConfig& config) {
  config.validate();
  return run_experiment(config, load_input(config));
}

LinkReport run_experiment(const RunConfig& config, const std::vector<Frame>& frames) {
  config.validate();
  if (frames.empty()) {
    throw InputError("no input frames");
  }
  LinkReport report;
  report.config = config;
  report.frames = static_cast<int>(frames.size());
  const std::vector<Gop> gops = split_gops(frames, config.gop_size);

  double var_sum = 0.0;
  for (const auto& g : gops) {
    const RealVector px = flatten(g);
    var_sum += population_variance(px);
  }
  report.source_variance = var_sum / static_cast<double>(gops.size());

  std::vector<Scheme> schemes;
  if (config.scheme != SchemeSelection::Digital) schemes.push_back(Scheme::PseudoAnalog);
  if (config.scheme != SchemeSelection::PseudoAnalog) schemes.push_back(Scheme::Digital);

  AnalogConfig analog;
  analog.num_chunks = config.num_chunks;
  analog.hadamard_order = config.hadamard_order;
  analog.power_budget = config.power_budget;
  DigitalConfig digital;
  digital.num_chunks = config.num_chunks;
  digital.bits_per_coeff = config.bits_per_coeff;
  digital.bandwidth_parity = config.bandwidth_parity;

  ChainOptions options;
  options.detector.threshold = config.sync_threshold;
  options.detector.window = config.sync_window;

  const std::filesystem::path out_dir = config.output_dir;
  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    if (config.dump_frames != "none") std::filesystem::create_directories(out_dir / "frames");
    if (config.iq_traces) std::filesystem::create_directories(out_dir / "iq");
  }

  std::vector<Cell> cells;
  for (int s = 0; s < static_cast<int>(config.snr_list_db.size()); ++s) {
    for (int t = 0; t < config.trials; ++t) cells.push_back({s, t});
  }
  std::vector<std::vector<FrameRow>> results(cells.size());
  std::vector<std::string> errors(cells.size());

  auto run_cell = [&](std::size_t ci) {
    const Cell cell = cells[ci];
    const double snr_db = config.snr_list_db[static_cast<std::size_t>(cell.snr_index)];
    const std::vector<int> dumps = frames_to_dump(config, snr_db, cell.trial, report.frames);
    std::vector<FrameRow>& rows = results[ci];
    for (std::size_t g = 0; g < gops.size(); ++g) {
      const ChannelParams ch = cell_channel(config, cell.snr_index, cell.trial, g);
      DigitalConfig parity = digital;
      parity.target_symbols = analog_payload_symbols(gops[g].dims(), analog);
      for (Scheme scheme : schemes) {
        ChainOptions opts = options;
        opts.keep_iq = config.iq_traces && g == 0 && cell.trial == 0 && !config.output_dir.empty();
        ChainResult res;
        try {
          res = scheme == Scheme::PseudoAnalog
                    ? run_analog_chain(gops[g], static_cast<std::uint32_t>(g), ch, analog, opts)
                    : run_digital_chain(gops[g], static_cast<std::uint32_t>(g), ch, parity, opts);
        } catch (const Error& e) {
          res = ChainResult{};
          res.status = RxStatus::MetadataFailure;
          res.error = e.what();
          res.reconstructed = gray_gop(gops[g].dims());
        }
        if (opts.keep_iq) {
          const std::string stem = scheme_name(scheme) + "_snr" + snr_tag(snr_db);
          write_iq_trace(res.tx_samples, out_dir / "iq" / (stem + "_tx.iq"));
          write_iq_trace(res.rx_samples, out_dir / "iq" / (stem + "_rx.iq"));
        }
        for (int t = 0; t < gops[g].gop_size(); ++t) {
          const int frame = static_cast<int>(g) * config.gop_size + t;
          if (frame >= report.frames) break;  // padding frames of a partial GOP
          FrameRow row;
          row.scheme = scheme;
          row.snr_db = snr_db;
          row.trial = cell.trial;
          row.frame = frame;
          row.gop = static_cast<int>(g);
          const auto& decoded = res.reconstructed.frames[static_cast<std::size_t>(t)];
          const PsnrResult q = compute_psnr(frames[static_cast<std::size_t>(frame)], decoded);
          row.psnr_db = q.psnr_db;
          row.mse = q.mse;
          row.measured_snr_db = res.measured_snr_db;
          row.training_snr_db = res.training_snr_db;
          row.sync_failure = res.status == RxStatus::SyncFailure;
          row.meta_failure = res.status == RxStatus::MetadataFailure;
          row.lost = res.lost();
          row.bit_errors = res.bit_errors;
          row.bits = res.bits;
          row.payload_symbols = res.payload_symbols;
          row.frame_start = res.sync.frame_start;
          row.cfo_hz = res.sync.cfo_hz;
          row.metric_peak = res.sync.coarse_metric_peak;
          rows.push_back(row);
          if (std::find(dumps.begin(), dumps.end(), frame) != dumps.end()) {
            write_frame(decoded, out_dir / "frames" /
                                     (scheme_name(scheme) + "_snr" + snr_tag(snr_db) + "_t" +
                                      std::to_string(cell.trial) + "_f" + std::to_string(frame) +
                                      ".pgm"));
          }
        }
      }
    }
  };

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t ci = next++; ci < cells.size(); ci = next++) {
      try {
        run_cell(ci);
      } catch (const std::exception& e) {
        errors[ci] = e.what();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("experiment failed: " + e);
  }

  for (auto& r : results) report.rows.insert(report.rows.end(), r.begin(), r.end());
  std::sort(report.rows.begin(), report.rows.end(), [](const FrameRow& a, const FrameRow& b) {
    return std::tie(a.scheme, a.snr_db, a.trial, a.frame) <
           std::tie(b.scheme, b.snr_db, b.trial, b.frame);
  });

  if (!config.output_dir.empty()) {
    if (config.dump_frames != "none") {
      for (int f : frames_to_dump(config, config.snr_list_db.front(), 0, report.frames)) {
        write_frame(frames[static_cast<std::size_t>(f)],
                    out_dir / "frames" / ("original_f" + std::to_string(f) + ".pgm"));
      }
    }
    std::ofstream rep(out_dir / "report.csv");
    write_report_csv(report, rep);
    std::ofstream sum(out_dir / "summary.csv");
    write_summary_csv(report, sweep_summary(report), sum);
    if (!rep || !sum) {
      throw InputError("cannot write reports under " + config.output_dir);
    }
  }
  return report;
}

std::vector<SummaryRow> sweep_summary(const LinkReport& report) {
  std::vector<double> snrs;
  for (const auto& r : report.rows) snrs.push_back(r.snr_db);
  std::sort(snrs.begin(), snrs.end());
  snrs.erase(std::unique(snrs.begin(), snrs.end()), snrs.end());

  const int gop = std::max(1, report.config.gop_size);
  std::vector<SummaryRow> out;
  for (double snr : snrs) {
    SummaryRow row;
    row.snr_db = snr;
    for (Scheme scheme : {Scheme::PseudoAnalog, Scheme::Digital}) {
      double sum = 0.0;
      double min = std::numeric_limits<double>::infinity();
      std::size_t n = 0;
      std::size_t errors = 0;
      std::size_t bits = 0;
      for (const auto& r : report.rows) {
        if (r.scheme != scheme || r.snr_db != snr) continue;
        sum += r.psnr_db;
        min = std::min(min, r.psnr_db);
        ++n;
        row.lost_frames += r.lost ? 1 : 0;
        if (r.frame % gop == 0) {
          errors += r.bit_errors;
          bits += r.bits;
        }
      }
      if (n == 0) continue;
      const double mean = sum / static_cast<double>(n);
      if (scheme == Scheme::PseudoAnalog) {
        row.analog_mean_psnr = mean;
        row.analog_min_psnr = min;
      } else {
        row.digital_mean_psnr = mean;
        row.digital_min_psnr = min;
        if (bits > 0) row.digital_ber = static_cast<double>(errors) / static_cast<double>(bits);
      }
    }
    if (row.analog_mean_psnr && row.digital_mean_psnr) {
      row.gain_db = *row.analog_mean_psnr - *row.digital_mean_psnr;
    }
    if (report.source_variance > 0.0) {
      const double gamma = db_to_linear(snr);
      row.theory_d_digital = min_distortion_digital(report.source_variance, gamma);
      row.theory_d_analog = analog_distortion(report.source_variance, gamma);
      row.theory_psnr_db = psnr_from_mse(row.theory_d_analog).psnr_db;
    }
    out.push_back(row);
  }
  return out;
}

namespace {

void write_provenance(const LinkReport& report, std::ostream& out) {
  out << "# plane=luma (PSNR over the Y plane only; chroma is not coded)\n";
  for (const auto& [k, v] : report.config.entries()) {
    out << "# " << k << "=" << v << "\n";
  }
  out << "# frames_used=" << report.frames << "\n";
  out << "# source_variance=" << fmt(report.source_variance) << "\n";
}

}  // namespace

void write_report_csv(const LinkReport& report, std::ostream& out) {
  write_provenance(report, out);
  out << "scheme,snr_db,trial,frame,gop,psnr_db,mse,measured_snr_db,training_snr_db,"
         "sync_failure,meta_crc_failure,lost,bit_errors,bits,payload_symbols,frame_start,cfo_hz,"
         "metric_peak\n";
  for (const auto& r : report.rows) {
    out << scheme_name(r.scheme) << ',' << short_number(r.snr_db) << ',' << r.trial << ','
        << r.frame << ',' << r.gop << ',' << fmt(r.psnr_db) << ',' << fmt(r.mse) << ','
        << fmt(r.measured_snr_db) << ',' << fmt(r.training_snr_db) << ',' << int(r.sync_failure)
        << ',' << int(r.meta_failure) << ',' << int(r.lost) << ',' << r.bit_errors << ','
        << r.bits << ',' << r.payload_symbols << ',' << r.frame_start << ',' << fmt(r.cfo_hz)
        << ',' << fmt(r.metric_peak) << '\n';
  }
}

void write_summary_csv(const LinkReport& report, const std::vector<SummaryRow>& summary,
                       std::ostream& out) {
  write_provenance(report, out);
  out << "snr_db,analog_mean_psnr_db,analog_min_psnr_db,digital_mean_psnr_db,digital_min_psnr_db,"
         "gain_db,digital_ber,lost_frames,theory_d_analog,theory_d_digital,theory_psnr_db\n";
  for (const auto& r : summary) {
    out << short_number(r.snr_db) << ',' << fmt(r.analog_mean_psnr) << ','
        << fmt(r.analog_min_psnr) << ',' << fmt(r.digital_mean_psnr) << ','
        << fmt(r.digital_min_psnr) << ',' << fmt(r.gain_db) << ',' << fmt(r.digital_ber) << ','
        << r.lost_frames << ',' << fmt(r.theory_d_analog) << ',' << fmt(r.theory_d_digital) << ','
        << fmt(r.theory_psnr_db) << '\n';
  }
}

std::vector<SyncTrial> run_sync_bench(const SyncBenchConfig& config) {
  if (config.trials < 1 || config.payload_symbols < 1 || config.cfo_hz.empty()) {
    throw InputError("sync bench needs trials >= 1, payload_symbols >= 1 and a CFO list");
  }
  const OfdmConfig ofdm;
  const double gamma = db_to_linear(config.snr_db);
  std::vector<SyncTrial> out;
  out.reserve(static_cast<std::size_t>(config.trials));
  for (int t = 0; t < config.trials; ++t) {
    const auto ts = static_cast<std::uint64_t>(t);
    std::mt19937_64 rng(derive_seed({config.seed, ts, 1}));
    std::uniform_int_distribution<int> offset_dist(100, 400);

    SyncTrial tr;
    tr.trial = t;
    tr.true_start = static_cast<std::size_t>(offset_dist(rng));
    tr.cfo_true_hz = config.cfo_hz[static_cast<std::size_t>(t) % config.cfo_hz.size()];

    IqPayload payload;
    payload.symbols = complex_gaussian(config.payload_symbols * ofdm.data_per_symbol(), 1.0,
                                       derive_seed({config.seed, ts, 2}));
    const OfdmFrame frame = modulate(allocate_carriers(payload, {}, ofdm), ofdm);

    ChannelParams clean;
    clean.noiseless = true;
    clean.cfo_hz = tr.cfo_true_hz;
    clean.sample_rate = ofdm.sample_rate;
    const ComplexVector burst = apply_channel(frame.samples, clean);
    const double power = frame.samples.squaredNorm() / static_cast<double>(frame.samples.size());

    const auto lead = static_cast<Eigen::Index>(tr.true_start);
    ComplexVector rx = ComplexVector::Zero(lead + burst.size() + 200);
    rx.segment(lead, burst.size()) = burst;
    rx += complex_gaussian(rx.size(), power / gamma, derive_seed({config.seed, ts, 3}));

    const SyncResult sync = detect_frame(rx, ofdm, config.detector);
    tr.detected = sync.detected;
    if (sync.detected) {
      tr.frame_start = sync.frame_start;
      tr.timing_error = static_cast<long>(sync.frame_start) - static_cast<long>(tr.true_start);
      tr.cfo_est_hz = estimate_cfo(rx, sync, ofdm).total_hz();
      tr.metric_peak = sync.coarse_metric_peak;
      const auto lt = static_cast<Eigen::Index>(sync.frame_start) + kShortTrainingLength + kLongGuard;
      if (lt + 128 <= rx.size()) {
        const ComplexVector corrected = correct_cfo(rx, tr.cfo_est_hz, ofdm.sample_rate);
        tr.snr_est_db = linear_to_db(estimate_channel(corrected.segment(lt, 128), ofdm).noise.gamma *
                                     52.0 / ofdm.fft_size);
      }
    }
    out.push_back(tr);
  }
  return out;
}

SyncBenchSummary summarize(const std::vector<SyncTrial>& trials, const OfdmConfig& ofdm) {
  SyncBenchSummary s;
  s.trials = static_cast<int>(trials.size());
  for (const auto& t : trials) {
    if (!t.detected) continue;
    ++s.detected;
    if (std::abs(t.timing_error) <= 1) ++s.timing_ok;
    const double err = std::abs(t.cfo_est_hz - t.cfo_true_hz);
    s.max_abs_cfo_error_hz = std::max(s.max_abs_cfo_error_hz, err);
  }
  s.max_cfo_error_spacing = s.max_abs_cfo_error_hz / ofdm.subcarrier_spacing();
  return s;
}

void write_sync_csv(const std::vector<SyncTrial>& trials, std::ostream& out) {
  out << "trial,true_start,detected,frame_start,timing_error,cfo_true_hz,cfo_hz,peak,snr_est_db\n";
  for (const auto& t : trials) {
    out << t.trial << ',' << t.true_start << ',' << int(t.detected) << ',' << t.frame_start << ','
        << t.timing_error << ',' << fmt(t.cfo_true_hz) << ',' << fmt(t.cfo_est_hz) << ','
        << fmt(t.metric_peak) << ',' << fmt(t.snr_est_db) << '\n';
  }
}

}  // namespace pacast
