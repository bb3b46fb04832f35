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

#include "pacast/meta.hpp"

#include <bit>
#include <cstring>

#include <zlib.h>

namespace pacast {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v));
    u16(static_cast<std::uint16_t>(v >> 16));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : buf_(b) {}
  std::uint8_t u8() {
    if (pos_ >= buf_.size()) {
      throw MetadataError("metadata truncated");
    }
    return buf_[pos_++];
  }
  std::uint16_t u16() {
    const std::uint16_t lo = u8();
    return static_cast<std::uint16_t>(lo | (u8() << 8));
  }
  std::uint32_t u32() {
    const std::uint32_t lo = u16();
    return lo | (static_cast<std::uint32_t>(u16()) << 16);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  [[nodiscard]] std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

void validate(const PacketMeta& m) {
  const auto k = m.chunk_variances.size();
  if (k == 0 || k > 0xFFFF) {
    throw InputError("invalid metadata: chunk variance list must be non-empty");
  }
  if (m.chunk_means.size() != k) {
    throw InputError("invalid metadata: chunk means must match chunk count");
  }
  if (!m.chunk_peaks.empty() && m.chunk_peaks.size() != k) {
    throw InputError("invalid metadata: chunk peaks must be empty or match chunk count");
  }
  if (!m.chunk_bits.empty() && m.chunk_bits.size() != k) {
    throw InputError("invalid metadata: chunk bit depths must be empty or match chunk count");
  }
  for (std::uint8_t b : m.chunk_bits) {
    if (b == 1 || b > 16) {
      throw InputError("invalid metadata: chunk bit depth must be 0 or 2..16");
    }
  }
  if (m.dims.time <= 0 || m.dims.height <= 0 || m.dims.width <= 0 || m.dims.time > 0xFFFF ||
      m.dims.height > 0xFFFF || m.dims.width > 0xFFFF) {
    throw InputError("invalid metadata: dimensions out of range");
  }
  if (m.scheme != Scheme::PseudoAnalog && m.scheme != Scheme::Digital) {
    throw InputError("invalid metadata: unknown scheme");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_meta_bytes(const PacketMeta& meta) {
  validate(meta);
  Writer w;
  w.u8(kMetaMagic);
  w.u8(kMetaVersion);
  w.u8(static_cast<std::uint8_t>(meta.scheme));
  w.u8(meta.iq_padding);
  w.u32(meta.gop_id);
  w.u16(static_cast<std::uint16_t>(meta.dims.time));
  w.u16(static_cast<std::uint16_t>(meta.dims.height));
  w.u16(static_cast<std::uint16_t>(meta.dims.width));
  w.u16(static_cast<std::uint16_t>(meta.chunk_variances.size()));
  w.u32(meta.chunk_padding);
  w.u32(meta.whiten_padding);
  w.u32(meta.payload_symbols);
  w.u32(meta.carrier_padding);
  w.u16(meta.hadamard_order);
  w.u16(static_cast<std::uint16_t>(meta.chunk_peaks.size()));
  w.u16(static_cast<std::uint16_t>(meta.chunk_bits.size()));
  w.u16(0);
  w.f32(meta.power_budget);
  w.f32(meta.dc_mean);
  for (float v : meta.chunk_variances) w.f32(v);
  for (float v : meta.chunk_means) w.f32(v);
  for (float v : meta.chunk_peaks) w.f32(v);
  for (std::uint8_t b : meta.chunk_bits) w.u8(b);
  auto& bytes = w.bytes();
  const std::uint32_t crc = crc32(bytes);
  w.u32(crc);
  return bytes;
}

PacketMeta decode_meta_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMetaFixedBytes + 4) {
    throw MetadataError("metadata too short");
  }
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  const std::uint32_t stored = tail.u32();
  if (crc32(body) != stored) {
    throw MetadataError("metadata CRC mismatch");
  }

  Reader r(body);
  if (r.u8() != kMetaMagic || r.u8() != kMetaVersion) {
    throw MetadataError("metadata magic/version mismatch");
  }
  PacketMeta m;
  m.scheme = static_cast<Scheme>(r.u8());
  m.iq_padding = r.u8();
  m.gop_id = r.u32();
  m.dims.time = r.u16();
  m.dims.height = r.u16();
  m.dims.width = r.u16();
  const std::uint16_t k = r.u16();
  m.chunk_padding = r.u32();
  m.whiten_padding = r.u32();
  m.payload_symbols = r.u32();
  m.carrier_padding = r.u32();
  m.hadamard_order = r.u16();
  const std::uint16_t peaks = r.u16();
  const std::uint16_t depths = r.u16();
  if (r.u16() != 0) {
    throw MetadataError("metadata reserved field is not zero");
  }
  m.power_budget = r.f32();
  m.dc_mean = r.f32();
  m.chunk_variances.resize(k);
  m.chunk_means.resize(k);
  m.chunk_peaks.resize(peaks);
  m.chunk_bits.resize(depths);
  for (auto& v : m.chunk_variances) v = r.f32();
  for (auto& v : m.chunk_means) v = r.f32();
  for (auto& v : m.chunk_peaks) v = r.f32();
  for (auto& b : m.chunk_bits) b = r.u8();
  if (r.pos() != body.size()) {
    throw MetadataError("metadata length does not match its chunk count");
  }
  m.crc = stored;
  try {
    validate(m);
  } catch (const InputError& e) {
    throw MetadataError(e.what());
  }
  return m;
}

Bits bytes_to_bits(std::span<const std::uint8_t> bytes) {
  Bits bits;
  bits.reserve(bytes.size() * 8);
  for (std::uint8_t b : bytes) {
    for (int i = 0; i < 8; ++i) {
      bits.push_back(static_cast<std::uint8_t>((b >> i) & 1U));
    }
  }
  return bits;
}

std::vector<std::uint8_t> bits_to_bytes(const Bits& bits) {
  if (bits.size() % 8 != 0) {
    throw InputError("bit count must be a multiple of 8");
  }
  std::vector<std::uint8_t> bytes(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bytes[i / 8] = static_cast<std::uint8_t>(bytes[i / 8] | ((bits[i] & 1U) << (i % 8)));
  }
  return bytes;
}

Bits encode_meta(const PacketMeta& meta) { return bytes_to_bits(encode_meta_bytes(meta)); }

PacketMeta decode_meta(const Bits& bits) {
  if (bits.size() % 8 != 0) {
    throw MetadataError("metadata bit count must be a multiple of 8");
  }
  return decode_meta_bytes(bits_to_bytes(bits));
}

Bits encode_signal_field(std::uint16_t meta_bytes) {
  const std::uint8_t len[2] = {static_cast<std::uint8_t>(meta_bytes),
                               static_cast<std::uint8_t>(meta_bytes >> 8)};
  const auto check = static_cast<std::uint16_t>(crc32(len));
  const std::uint8_t field[4] = {len[0], len[1], static_cast<std::uint8_t>(check),
                                 static_cast<std::uint8_t>(check >> 8)};
  return bytes_to_bits(field);
}

std::uint16_t decode_signal_field(const Bits& bits) {
  if (bits.size() != kSignalFieldBits) {
    throw MetadataError("signal field must be 32 bits");
  }
  const auto bytes = bits_to_bytes(bits);
  const std::uint8_t len[2] = {bytes[0], bytes[1]};
  const auto check = static_cast<std::uint16_t>(crc32(len));
  if (bytes[2] != static_cast<std::uint8_t>(check) ||
      bytes[3] != static_cast<std::uint8_t>(check >> 8)) {
    throw MetadataError("signal field check failed");
  }
  return static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
}

}  // namespace pacast
