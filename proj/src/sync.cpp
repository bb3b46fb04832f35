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

#include "pacast/sync.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "pacast/channel.hpp"

namespace pacast {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Long-training windows are taken this many samples early (inside the guard)
// so a slightly late timing estimate stays within the periodic region.
constexpr int kLtBackoff = 8;
constexpr int kLtFirst = kShortTrainingLength + kLongGuard;  // 192
constexpr int kCoarseBinRange = 8;

Complex rotated(const ComplexVector& r, Eigen::Index n, double cfo_hz, double fs) {
  return r[n] * std::polar(1.0, -kTwoPi * cfo_hz * static_cast<double>(n) / fs);
}

ComplexVector rotated_window(const ComplexVector& r, Eigen::Index start, int len, double cfo_hz,
                             double fs) {
  ComplexVector w(len);
  for (int i = 0; i < len; ++i) {
    w[i] = rotated(r, start + i, cfo_hz, fs);
  }
  return w;
}

bool has_samples(const ComplexVector& r, std::ptrdiff_t start, std::ptrdiff_t len) {
  return start >= 0 && start + len <= r.size();
}

// CFO estimate assuming the short training starts at `s`. Returns false when
// the burst is too short to hold the preamble at that position.
bool estimate_cfo_at(const ComplexVector& r, std::ptrdiff_t s, const OfdmConfig& config,
                     CfoEstimate& out) {
  if (!has_samples(r, s, kPreambleLength)) {
    return false;
  }
  const double fs = config.sample_rate;

  // Fine: lag-16 phase over periods 2..10 of the short training.
  Complex p(0.0, 0.0);
  for (std::ptrdiff_t n = s + kShortPeriod; n < s + kShortTrainingLength - kShortPeriod; ++n) {
    p += std::conj(r[n]) * r[n + kShortPeriod];
  }
  out.fine_hz = std::arg(p) * fs / (kTwoPi * kShortPeriod);

  // Coarse: the fine stage is ambiguous modulo fs / 16, i.e. fft_size / 16
  // bins. Differential correlation against the known long training is
  // insensitive to the timing offset.
  const ComplexVector x = long_training_bins(config);
  const ComplexVector y =
      unitary_fft(rotated_window(r, s + kLtFirst - kLtBackoff, 64, out.fine_hz, fs)) +
      unitary_fft(rotated_window(r, s + kLtFirst + 64 - kLtBackoff, 64, out.fine_hz, fs));
  const int step = config.fft_size / kShortPeriod;
  double best = -1.0;
  int best_k = 0;
  for (int k = -kCoarseBinRange; k <= kCoarseBinRange; k += step) {
    Complex acc(0.0, 0.0);
    for (int c = -config.fft_size / 2; c < config.fft_size / 2 - 1; ++c) {
      const Complex xa = x[config.bin(c)];
      const Complex xb = x[config.bin(c + 1)];
      if (xa == Complex(0.0) || xb == Complex(0.0)) {
        continue;
      }
      const int ya = ((c + k) % config.fft_size + config.fft_size) % config.fft_size;
      const int yb = ((c + k + 1) % config.fft_size + config.fft_size) % config.fft_size;
      acc += y[ya] * std::conj(y[yb]) * std::conj(xa * std::conj(xb));
    }
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_k = k;
    }
  }
  out.coarse_hz = best_k * config.subcarrier_spacing();

  // Residual: lag-64 phase between the long-training periods.
  const double so_far = out.fine_hz + out.coarse_hz;
  Complex q(0.0, 0.0);
  for (std::ptrdiff_t m = s + kLtFirst - kLtBackoff; m < s + kLtFirst - kLtBackoff + 64; ++m) {
    q += std::conj(rotated(r, m, so_far, fs)) * rotated(r, m + 64, so_far, fs);
  }
  out.residual_hz = std::arg(q) * fs / (kTwoPi * 64.0);
  return true;
}

}  // namespace

RealVector timing_metric(const ComplexVector& samples, int window) {
  if (window < 1) {
    throw InputError("timing metric window must be positive");
  }
  const Eigen::Index count = samples.size() - window - kShortPeriod + 1;
  if (count <= 0) {
    return RealVector();
  }
  RealVector m(count);
  for (Eigen::Index d = 0; d < count; ++d) {
    Complex p(0.0, 0.0);
    double r = 0.0;
    for (int k = 0; k < window; ++k) {
      const Complex a = samples[d + k];
      const Complex b = samples[d + k + kShortPeriod];
      p += std::conj(a) * b;
      r += std::norm(b);
    }
    m[d] = r > 1e-300 ? std::norm(p) / (r * r) : 0.0;
  }
  return m;
}

SyncResult detect_frame(const ComplexVector& samples, const OfdmConfig& config, double threshold) {
  DetectorOptions opts;
  opts.threshold = threshold;
  return detect_frame(samples, config, opts);
}

SyncResult detect_frame(const ComplexVector& samples, const OfdmConfig& config,
                        const DetectorOptions& options) {
  config.validate();
  if (samples.size() < kPreambleLength) {
    throw InputError("input shorter than the preamble");
  }
  const RealVector metric = timing_metric(samples, options.window);
  const int nominal_plateau = kShortTrainingLength - options.window - kShortPeriod;
  const ComplexVector lt = long_training_symbol(config);

  SyncResult result;
  Eigen::Index d = 0;
  while (d < metric.size()) {
    if (metric[d] <= options.threshold) {
      ++d;
      continue;
    }
    Eigen::Index first = d;
    Eigen::Index last = d;
    double peak = metric[d];
    for (Eigen::Index e = d + 1; e < metric.size() && e - last <= options.merge_gap; ++e) {
      if (metric[e] > options.threshold) {
        last = e;
        peak = std::max(peak, metric[e]);
      }
    }
    d = last + 1;
    if (last - first + 1 < options.min_plateau) {
      continue;
    }

    const auto mid = (first + last) / 2;
    const std::ptrdiff_t coarse = std::max<std::ptrdiff_t>(0, mid - nominal_plateau / 2);
    CfoEstimate cfo;
    if (!estimate_cfo_at(samples, coarse, config, cfo)) {
      continue;
    }

    // Refine against the long training.
    double best = -1.0;
    std::ptrdiff_t best_start = coarse;
    for (int delta = -options.refine_search; delta <= options.refine_search; ++delta) {
      const std::ptrdiff_t s = coarse + delta;
      if (!has_samples(samples, s + kLtFirst, 128)) {
        continue;
      }
      Complex c1(0.0, 0.0);
      Complex c2(0.0, 0.0);
      for (int k = 0; k < 64; ++k) {
        c1 += rotated(samples, s + kLtFirst + k, cfo.total_hz(), config.sample_rate) *
              std::conj(lt[k]);
        c2 += rotated(samples, s + kLtFirst + 64 + k, cfo.total_hz(), config.sample_rate) *
              std::conj(lt[k]);
      }
      const double score = std::norm(c1) + std::norm(c2);
      if (score > best) {
        best = score;
        best_start = s;
      }
    }

    result.detected = true;
    result.frame_start = static_cast<std::size_t>(best_start);
    result.coarse_metric_peak = std::clamp(peak, 0.0, 1.0);
    CfoEstimate refined;
    result.cfo_hz = estimate_cfo_at(samples, best_start, config, refined) ? refined.total_hz()
                                                                           : cfo.total_hz();
    return result;
  }
  return result;
}

CfoEstimate estimate_cfo(const ComplexVector& samples, const SyncResult& sync,
                         const OfdmConfig& config) {
  if (!sync.detected) {
    throw InputError("CFO estimation needs a detected frame");
  }
  CfoEstimate est;
  if (!estimate_cfo_at(samples, static_cast<std::ptrdiff_t>(sync.frame_start), config, est)) {
    throw InputError("burst too short for CFO estimation");
  }
  return est;
}

ComplexVector correct_cfo(const ComplexVector& samples, double cfo_hz, double sample_rate) {
  if (cfo_hz == 0.0) {
    return samples;
  }
  ComplexVector out(samples.size());
  for (Eigen::Index n = 0; n < samples.size(); ++n) {
    out[n] = rotated(samples, n, cfo_hz, sample_rate);
  }
  return out;
}

namespace {

// Delay window of the fitted impulse response: the cyclic prefix plus a few
// taps of early timing.
constexpr int kEarlyTaps = 8;

double delay_taps(const OfdmConfig& config) { return config.cp_len + kEarlyTaps; }

// Least-squares impulse response over the delay window, fitted to the
// per-bin averages of every training observation.
void fit_channel(ChannelEstimate& est, const OfdmConfig& config) {
  std::vector<int> bins;
  for (int b = 0; b < config.fft_size; ++b) {
    if (est.used[static_cast<std::size_t>(b)]) bins.push_back(b);
  }
  const auto used = static_cast<Eigen::Index>(bins.size());
  ComplexVector cross = ComplexVector::Zero(config.fft_size);
  RealVector energy = RealVector::Zero(config.fft_size);
  for (std::size_t s = 0; s < est.observed.size(); ++s) {
    for (int b : bins) {
      cross[b] += est.observed[s][b] * std::conj(est.reference[s][b]);
      energy[b] += std::norm(est.reference[s][b]);
    }
  }
  const auto taps = static_cast<Eigen::Index>(delay_taps(config));
  Eigen::MatrixXcd basis(used, taps);
  ComplexVector obs(used);
  for (Eigen::Index r = 0; r < used; ++r) {
    const int b = bins[static_cast<std::size_t>(r)];
    obs[r] = cross[b] / energy[b];
    for (Eigen::Index t = 0; t < taps; ++t) {
      basis(r, t) = std::polar(1.0, -2.0 * std::numbers::pi * b * static_cast<double>(t - kEarlyTaps) /
                                        config.fft_size);
    }
  }
  const ComplexVector fit = basis * basis.colPivHouseholderQr().solve(obs);
  est.h.setZero(config.fft_size);
  for (Eigen::Index r = 0; r < used; ++r) {
    est.h[bins[static_cast<std::size_t>(r)]] = fit[r];
  }
  est.error_ratio = static_cast<double>(taps) /
                    (static_cast<double>(used) * static_cast<double>(est.observed.size()));
}

double mean_signal(const ChannelEstimate& est, const ComplexVector& reference) {
  double signal = 0.0;
  int used = 0;
  for (Eigen::Index b = 0; b < est.h.size(); ++b) {
    if (est.used[static_cast<std::size_t>(b)]) {
      signal += std::norm(est.h[b] * reference[b]);
      ++used;
    }
  }
  return signal / used;
}

void set_noise(ChannelEstimate& est, double sigma_c, double signal) {
  est.noise.sigma_sq = sigma_c / 2.0;
  const double cap = db_to_linear(kMaxMeasuredSnrDb);
  est.noise.gamma = sigma_c > 0.0 ? std::min(signal / sigma_c, cap) : cap;
}

}  // namespace

ChannelEstimate estimate_channel(const ComplexVector& long_training_rx, const OfdmConfig& config) {
  if (long_training_rx.size() != 128) {
    throw InputError("channel estimation expects two 64-sample long-training periods");
  }
  const ComplexVector x = long_training_bins(config);
  const ComplexVector y1 = unitary_fft(long_training_rx.head(64));
  const ComplexVector y2 = unitary_fft(long_training_rx.tail(64));

  ChannelEstimate est;
  est.used.assign(static_cast<std::size_t>(config.fft_size), false);
  double diff = 0.0;
  int used = 0;
  for (int b = 0; b < config.fft_size; ++b) {
    if (x[b] == Complex(0.0)) {
      continue;
    }
    est.used[static_cast<std::size_t>(b)] = true;
    diff += std::norm(y1[b] - y2[b]);
    ++used;
  }
  est.observed = {y1, y2};
  est.reference = {x, x};
  fit_channel(est, config);
  // E|y1 - y2|^2 = 2 sigma_c^2 per bin; sigma^2 per real dimension is half that.
  set_noise(est, diff / (2.0 * used), mean_signal(est, x));
  return est;
}

void extend_channel_estimate(ChannelEstimate& est, std::span<const ComplexVector> observed,
                             std::span<const ComplexVector> reference,
                             std::span<const double> common_phase, const OfdmConfig& config) {
  if (observed.size() != reference.size() || observed.size() != common_phase.size()) {
    throw InputError("training observations, references and phases must have equal counts");
  }
  if (est.observed.empty()) {
    throw InputError("channel estimate has no long-training fit to extend");
  }
  const ComplexVector lt = est.reference.front();
  for (std::size_t s = 0; s < observed.size(); ++s) {
    if (observed[s].size() != config.fft_size || reference[s].size() != config.fft_size) {
      throw InputError("training symbol size does not match the FFT size");
    }
    est.observed.push_back(observed[s] * std::polar(1.0, -common_phase[s]));
    est.reference.push_back(reference[s]);
  }
  fit_channel(est, config);
  // Residual power over every observation, corrected for the fitted taps.
  double residual = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < est.observed.size(); ++s) {
    for (Eigen::Index b = 0; b < est.h.size(); ++b) {
      if (est.used[static_cast<std::size_t>(b)] && est.reference[s][b] != Complex(0.0)) {
        residual += std::norm(est.observed[s][b] - est.h[b] * est.reference[s][b]);
        ++count;
      }
    }
  }
  const double dof = static_cast<double>(count) - delay_taps(config);
  set_noise(est, dof > 0.0 ? residual / dof : est.noise.sigma_sq * 2.0, mean_signal(est, lt));
}

std::vector<ComplexVector> demodulate(const ComplexVector& samples, std::size_t first, int count,
                                      const OfdmConfig& config) {
  const auto sym = static_cast<std::size_t>(config.symbol_length());
  if (count < 0 ||
      first + static_cast<std::size_t>(count) * sym > static_cast<std::size_t>(samples.size())) {
    throw InputError("insufficient samples for the declared symbol count");
  }
  std::vector<ComplexVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto start = static_cast<Eigen::Index>(first + static_cast<std::size_t>(i) * sym +
                                                 static_cast<std::size_t>(config.cp_len));
    out.push_back(unitary_fft(samples.segment(start, config.fft_size)));
  }
  return out;
}

std::vector<ComplexVector> demodulate(const ComplexVector& samples, const SyncResult& sync,
                                      const OfdmConfig& config, int count, int symbol_offset) {
  if (!sync.detected) {
    throw InputError("demodulation needs a detected frame");
  }
  const std::size_t first = sync.frame_start + kPreambleLength +
                            static_cast<std::size_t>(symbol_offset) *
                                static_cast<std::size_t>(config.symbol_length());
  return demodulate(samples, first, count, config);
}

EqualizedSymbols equalize(const std::vector<ComplexVector>& symbols, const ChannelEstimate& est,
                          const OfdmConfig& config, int phase_span) {
  if (phase_span < 0) {
    throw InputError("phase_span must be non-negative");
  }
  if (est.h.size() != config.fft_size) {
    throw InputError("channel estimate does not match the FFT size");
  }
  EqualizedSymbols out;
  out.erased.assign(static_cast<std::size_t>(config.fft_size), false);
  std::vector<int> active;
  for (int k : config.data_carriers) active.push_back(config.bin(k));
  for (int k : config.pilot_carriers) active.push_back(config.bin(k));
  for (int b : active) {
    out.erased[static_cast<std::size_t>(b)] = std::abs(est.h[b]) < kErasureThreshold;
  }

  out.symbols.reserve(symbols.size());
  std::vector<Complex> pilot_corr;
  pilot_corr.reserve(symbols.size());
  for (const auto& y : symbols) {
    if (y.size() != config.fft_size) {
      throw InputError("symbol size does not match the FFT size");
    }
    ComplexVector z = ComplexVector::Zero(config.fft_size);
    for (int b : active) {
      if (!out.erased[static_cast<std::size_t>(b)]) {
        z[b] = y[b] / est.h[b];
      }
    }
    Complex acc(0.0, 0.0);
    for (std::size_t p = 0; p < config.pilot_carriers.size(); ++p) {
      const int b = config.bin(config.pilot_carriers[p]);
      acc += z[b] * std::conj(config.training_amplitude * config.pilot_values[p]);
    }
    pilot_corr.push_back(acc);
    out.symbols.push_back(std::move(z));
  }
  // Residual frequency offset shows up as a steady phase step per symbol;
  // it is taken from consecutive pilot correlations over the whole block.
  const auto n = static_cast<std::ptrdiff_t>(symbols.size());
  Complex step_acc(0.0, 0.0);
  for (std::ptrdiff_t s = 1; s < n; ++s) {
    step_acc += pilot_corr[static_cast<std::size_t>(s)] * std::conj(pilot_corr[static_cast<std::size_t>(s - 1)]);
  }
  const double step = std::abs(step_acc) > 0.0 ? std::arg(step_acc) : 0.0;
  // Around that ramp, pilot correlations are summed over neighbouring symbols.
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const std::ptrdiff_t reach = std::min<std::ptrdiff_t>({phase_span, s, n - 1 - s});
    Complex acc(0.0, 0.0);
    for (std::ptrdiff_t j = s - reach; j <= s + reach; ++j) {
      acc += pilot_corr[static_cast<std::size_t>(j)] * std::polar(1.0, -step * static_cast<double>(j - s));
    }
    const double theta = std::abs(acc) > 0.0 ? std::arg(acc) : 0.0;
    out.symbols[static_cast<std::size_t>(s)] *= std::polar(1.0, -theta);
    out.common_phase.push_back(theta);
  }
  return out;
}

ComplexVector extract_data(const std::vector<ComplexVector>& symbols, const OfdmConfig& config) {
  const int per = config.data_per_symbol();
  ComplexVector out(static_cast<Eigen::Index>(symbols.size()) * per);
  Eigen::Index pos = 0;
  for (const auto& s : symbols) {
    for (int k : config.data_carriers) {
      out[pos++] = s[config.bin(k)];
    }
  }
  return out;
}

IqPayload serialize(const std::vector<ComplexVector>& symbols, const OfdmConfig& config,
                    const PacketMeta& meta) {
  const int expected = symbols_for(meta.payload_symbols, config);
  if (static_cast<int>(symbols.size()) != expected ||
      static_cast<std::uint32_t>(expected * config.data_per_symbol()) - meta.payload_symbols !=
          meta.carrier_padding) {
    throw InputError("metadata is inconsistent with the received symbol count");
  }
  IqPayload out;
  out.symbols = extract_data(symbols, config).head(meta.payload_symbols);
  out.padded = meta.iq_padding != 0;
  return out;
}

}  // namespace pacast
