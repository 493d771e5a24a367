// Copyright (c) the tlrc project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian byte serialization plus the checksum/digest primitives used
// by the container formats.

#ifndef TLRC_BYTES_H_
#define TLRC_BYTES_H_

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "tlrc/errors.h"

namespace tlrc {

using Bytes = std::vector<uint8_t>;

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) { le(v, 2); }
  void u32(uint32_t v) { le(v, 4); }
  void u64(uint64_t v) { le(v, 8); }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void raw(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void raw(const Bytes& b) { raw(b.data(), b.size()); }
  void str(const std::string& s) {
    u16(static_cast<uint16_t>(s.size()));
    raw(reinterpret_cast<const uint8_t*>(s.data()), s.size());
  }
  void blob(const Bytes& b) {
    u64(b.size());
    raw(b);
  }

  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }
  size_t size() const { return buf_.size(); }

 private:
  void le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  Bytes buf_;
};

class ByteReader {
 public:
  ByteReader(const uint8_t* p, size_t n) : p_(p), n_(n) {}
  explicit ByteReader(const Bytes& b) : ByteReader(b.data(), b.size()) {}

  uint8_t u8() { return static_cast<uint8_t>(le(1)); }
  uint16_t u16() { return static_cast<uint16_t>(le(2)); }
  uint32_t u32() { return static_cast<uint32_t>(le(4)); }
  uint64_t u64() { return le(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    size_t n = u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(p_ + pos_), n);
    pos_ += n;
    return s;
  }
  Bytes blob() {
    uint64_t n = u64();
    need(n);
    Bytes b(p_ + pos_, p_ + pos_ + n);
    pos_ += n;
    return b;
  }
  void raw(uint8_t* dst, size_t n) {
    need(n);
    std::memcpy(dst, p_ + pos_, n);
    pos_ += n;
  }

  size_t pos() const { return pos_; }
  size_t remaining() const { return n_ - pos_; }
  bool done() const { return pos_ == n_; }

 private:
  void need(size_t n) const {
    if (pos_ + n > n_) throw MalformedContainer("unexpected end of data");
  }
  uint64_t le(int n) {
    need(n);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(p_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  const uint8_t* p_;
  size_t n_;
  size_t pos_ = 0;
};

// CRC-32 (IEEE 802.3 polynomial, reflected).
uint32_t crc32(const uint8_t* data, size_t n, uint32_t seed = 0);
inline uint32_t crc32(const Bytes& b, uint32_t seed = 0) {
  return crc32(b.data(), b.size(), seed);
}

// SHA-256; used for file digests and model identity hashes.
std::array<uint8_t, 32> sha256(const uint8_t* data, size_t n);
inline std::array<uint8_t, 32> sha256(const Bytes& b) { return sha256(b.data(), b.size()); }
std::string hex(const uint8_t* data, size_t n);
inline std::string hex(const std::array<uint8_t, 32>& d) { return hex(d.data(), d.size()); }

Bytes read_file(const std::string& path);
void write_file(const std::string& path, const Bytes& data);

}  // namespace tlrc

#endif  // TLRC_BYTES_H_
