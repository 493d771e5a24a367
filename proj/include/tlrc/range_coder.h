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

// Byte-oriented range coder over 16-bit quantized CDFs. Integer-only state:
// identical symbol/CDF sequences produce identical bytes on every platform.
// All probability modeling happens upstream; the coder sees only QuantizedCdf.

#ifndef TLRC_RANGE_CODER_H_
#define TLRC_RANGE_CODER_H_

#include <cstdint>
#include <vector>

#include "tlrc/bytes.h"
#include "tlrc/errors.h"

namespace tlrc {

inline constexpr uint32_t kCdfTotal = 1u << 16;
// Symbols per alphabet are capped a little below the CDF total so every
// symbol can keep a nonzero width.
inline constexpr uint32_t kCdfAlphabetGuard = 64;

// Cumulative counts over a contiguous integer alphabet starting at
// min_symbol. cum has size()+1 entries: cum[0] = 0, cum.back() = 2^16,
// strictly increasing (every symbol width >= 1).
struct QuantizedCdf {
  int32_t min_symbol = 0;
  std::vector<uint32_t> cum;

  int size() const { return static_cast<int>(cum.size()) - 1; }
  uint32_t width(int i) const { return cum[i + 1] - cum[i]; }
};

// Largest-remainder quantization of a pmf to total 2^16 with per-symbol
// floor 1. pmf entries must be >= 0 and sum to 1 within 1e-6.
QuantizedCdf quantize_cdf(const std::vector<double>& pmf, int32_t min_symbol = 0);

class RangeEncoder {
 public:
  // Encodes alphabet index `index` (0-based) under `cdf`.
  void encode(int index, const QuantizedCdf& cdf);
  // Seals the stream. No encode() calls are allowed afterwards.
  Bytes finish();

  size_t size_bound() const { return out_.size() + 16; }

 private:
  void shift_low();

  unsigned __int128 low_ = 0;
  uint64_t range_ = ~0ull;
  uint8_t cache_ = 0;
  uint64_t ff_run_ = 0;
  bool has_cache_ = false;
  Bytes out_;
};

class RangeDecoder {
 public:
  RangeDecoder(const uint8_t* data, size_t size);
  explicit RangeDecoder(const Bytes& b) : RangeDecoder(b.data(), b.size()) {}

  // Decodes and returns the alphabet index of the next symbol under `cdf`.
  // The caller must supply the same CDF sequence the encoder used.
  int decode(const QuantizedCdf& cdf);

  size_t consumed() const { return pos_; }

 private:
  uint8_t next_byte();

  const uint8_t* p_;
  size_t n_;
  size_t pos_ = 0;
  int overread_ = 0;
  uint64_t range_ = ~0ull;
  uint64_t code_ = 0;
};

}  // namespace tlrc

#endif  // TLRC_RANGE_CODER_H_
