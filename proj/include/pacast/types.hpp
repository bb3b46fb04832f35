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

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pacast {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// One bit per element, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, malformed files or inconsistent lengths.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Packet metadata failed its CRC or could not be parsed.
class MetadataError : public Error {
 public:
  using Error::Error;
};

/// Every chunk variance is zero; there is nothing to allocate power to.
class DegenerateSourceError : public Error {
 public:
  using Error::Error;
};

/// Too few observations to produce a trustworthy estimate.
class EstimateRefused : public Error {
 public:
  using Error::Error;
};

/// Temporal, vertical and horizontal extent of a coefficient cube.
struct Dims {
  int time = 0;
  int height = 0;
  int width = 0;

  [[nodiscard]] std::size_t count() const {
    return static_cast<std::size_t>(time) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  bool operator==(const Dims&) const = default;
};

/// Noise power per real dimension (I or Q) and the matching linear SNR.
struct NoiseEstimate {
  double sigma_sq = 0.0;
  double gamma = 0.0;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Deterministic 64-bit seed from a base seed and stream coordinates.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace pacast
