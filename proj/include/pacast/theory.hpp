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

#include <cstdint>

#include "pacast/types.hpp"

namespace pacast {

/// Closed-form operating point of a Gaussian source over an AWGN channel.
/// Rates and capacities are in bits.
struct TheoryPoint {
  double lambda = 0.0;
  double gamma = 0.0;
  double rate = 0.0;
  double capacity = 0.0;
  double d_digital = 0.0;
  double d_analog = 0.0;
};

/// 0.5 log2(lambda / d) for d <= lambda, else 0.
double rate_distortion(double lambda, double distortion);
/// 0.5 log2(1 + gamma).
double awgn_capacity(double gamma);
/// Distortion at which the rate-distortion function meets capacity.
double min_distortion_digital(double lambda, double gamma);
/// Residual error of the linear MMSE estimate of a scaled source, computed
/// from the estimator itself rather than from the closed form.
double analog_distortion(double lambda, double gamma);

TheoryPoint theory_point(double lambda, double gamma);

inline constexpr std::size_t kMinMonteCarloSamples = 10000;

/// Empirical MSE of x ~ N(0, lambda) sent as y = G x + w, G = sqrt(P / lambda),
/// w ~ N(0, sigma_sq), estimated by x = G lambda / (G^2 lambda + sigma_sq) y.
/// `coefficient_scale` multiplies the estimator (1 = MMSE). Work is split
/// into fixed shards with derived seeds, so the result depends only on the
/// arguments.
double monte_carlo_analog(double lambda, double power, double sigma_sq, std::size_t n,
                          std::uint64_t seed, double coefficient_scale = 1.0);

}  // namespace pacast
