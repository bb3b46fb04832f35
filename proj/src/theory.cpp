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

#include "pacast/theory.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

namespace pacast {

namespace {

constexpr int kShards = 8;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(what) + " must be positive and finite");
  }
}

void require_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InputError("gamma must be non-negative and finite");
  }
}

}  // namespace

double rate_distortion(double lambda, double distortion) {
  require_positive(lambda, "lambda");
  require_positive(distortion, "distortion");
  return distortion < lambda ? 0.5 * std::log2(lambda / distortion) : 0.0;
}

double awgn_capacity(double gamma) {
  require_gamma(gamma);
  return 0.5 * std::log2(1.0 + gamma);
}

double min_distortion_digital(double lambda, double gamma) {
  require_positive(lambda, "lambda");
  require_gamma(gamma);
  return lambda / (1.0 + gamma);
}

double analog_distortion(double lambda, double gamma) {
  require_positive(lambda, "lambda");
  require_gamma(gamma);
  // Unit noise, power gamma: gain G = sqrt(gamma / lambda). The estimator
  // a = G lambda / (G^2 lambda + 1) leaves E[(x - a y)^2] =
  // lambda (1 - a G)^2 + a^2.
  const double g = std::sqrt(gamma / lambda);
  const double a = g * lambda / (g * g * lambda + 1.0);
  return lambda * (1.0 - a * g) * (1.0 - a * g) + a * a;
}

TheoryPoint theory_point(double lambda, double gamma) {
  TheoryPoint p;
  p.lambda = lambda;
  p.gamma = gamma;
  p.d_digital = min_distortion_digital(lambda, gamma);
  p.d_analog = analog_distortion(lambda, gamma);
  p.rate = rate_distortion(lambda, p.d_digital);
  p.capacity = awgn_capacity(gamma);
  return p;
}

double monte_carlo_analog(double lambda, double power, double sigma_sq, std::size_t n,
                          std::uint64_t seed, double coefficient_scale) {
  require_positive(lambda, "lambda");
  if (power < 0.0 || sigma_sq < 0.0) {
    throw InputError("power and noise variance must be non-negative");
  }
  if (n < kMinMonteCarloSamples) {
    throw InputError("Monte Carlo needs at least 10^4 samples");
  }
  const double g = std::sqrt(power / lambda);
  const double denom = g * g * lambda + sigma_sq;
  const double coeff = denom > 0.0 ? coefficient_scale * g * lambda / denom : 0.0;

  std::vector<double> sums(kShards, 0.0);
  auto shard = [&](int s) {
    const std::size_t begin = n * static_cast<std::size_t>(s) / kShards;
    const std::size_t end = n * static_cast<std::size_t>(s + 1) / kShards;
    std::mt19937_64 rng(derive_seed({seed, static_cast<std::uint64_t>(s)}));
    std::normal_distribution<double> source(0.0, std::sqrt(lambda));
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = std::sqrt(sigma_sq);
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double x = source(rng);
      const double y = g * x + sigma * noise(rng);
      const double e = x - coeff * y;
      acc += e * e;
    }
    sums[static_cast<std::size_t>(s)] = acc;
  };
  std::vector<std::thread> workers;
  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  if (hw == 1) {
    for (int s = 0; s < kShards; ++s) shard(s);
  } else {
    for (int s = 0; s < kShards; ++s) workers.emplace_back(shard, s);
    for (auto& w : workers) w.join();
  }
  double total = 0.0;
  for (double v : sums) total += v;
  return total / static_cast<double>(n);
}

}  // namespace pacast
