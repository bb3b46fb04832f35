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

#include "pacast/chain.hpp"

#include "pacast/power.hpp"

namespace pacast {

SourceChunks source_chunks(const Gop& gop, int num_chunks) {
  SourceChunks p;
  const NormalizedPacket packet = normalize_packet(flatten(gop));
  p.dc_mean = static_cast<float>(packet.mean);
  const RealVector centered =
      packet.samples.array() + (packet.mean - static_cast<double>(p.dc_mean));
  p.set = chunk(dct3(unflatten(centered, gop.dims())), num_chunks);
  for (auto& c : p.set.chunks) {
    const auto mean = static_cast<float>(c.samples.mean());
    c.samples.array() -= static_cast<double>(mean);
    const auto lambda =
        static_cast<float>(c.samples.squaredNorm() / static_cast<double>(c.samples.size()));
    c.variance = static_cast<double>(lambda);
    p.means.push_back(mean);
    p.variances.push_back(lambda);
  }
  return p;
}

Gop gray_gop(Dims dims) {
  Gop gop;
  for (int t = 0; t < dims.time; ++t) {
    gop.frames.push_back(gray_frame(dims.width, dims.height));
  }
  return gop;
}

}  // namespace pacast
