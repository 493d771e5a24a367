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

#include "tlrc/range_coder.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace tlrc {

namespace {

using u128 = unsigned __int128;

// Renormalization bound. range stays in [2^48, 2^64); with 16-bit CDF totals
// the interval split (range * cum) >> 16 keeps 32 bits of headroom per
// symbol, so the coding loss beyond -log2(width/2^16) is negligible and the
// stream tail costs 3 bytes.
constexpr uint64_t kRenormBound = 1ull << 48;

inline uint64_t scale(uint64_t range, uint32_t cum16) {
  return static_cast<uint64_t>((static_cast<u128>(range) * cum16) >> 16);
}

}  // namespace

QuantizedCdf quantize_cdf(const std::vector<double>& pmf, int32_t min_symbol) {
  const size_t m = pmf.size();
  if (m == 0) throw AlphabetTooLarge("empty alphabet");
  if (m > kCdfTotal - kCdfAlphabetGuard) throw AlphabetTooLarge("alphabet exceeds CDF precision");

  std::vector<uint32_t> w(m);
  std::vector<std::pair<double, size_t>> rem(m);
  uint64_t total = 0;
  for (size_t i = 0; i < m; ++i) {
    double ideal = std::max(pmf[i], 0.0) * kCdfTotal;
    double flo = std::floor(ideal);
    w[i] = static_cast<uint32_t>(std::min(flo, double(kCdfTotal)));
    rem[i] = {ideal - flo, i};
    total += w[i];
  }
  // Largest remainder first; ties resolved by index for determinism.
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  uint64_t deficit = (total > kCdfTotal) ? 0 : kCdfTotal - total;
  for (uint64_t j = 0; j < deficit; ++j) w[rem[j % m].second] += 1;
  if (total > kCdfTotal) {
    // pmf summed slightly above 1; trim from the largest bucket.
    for (uint64_t excess = total - kCdfTotal; excess > 0;) {
      size_t k = size_t(std::max_element(w.begin(), w.end()) - w.begin());
      uint32_t cut = static_cast<uint32_t>(std::min<uint64_t>(excess, w[k] > 1 ? w[k] - 1 : 0));
      if (cut == 0) throw AlphabetTooLarge("pmf mass exceeds representable total");
      w[k] -= cut;
      excess -= cut;
    }
  }
  // Per-symbol floor of 1, stolen from the widest buckets.
  auto cmp = [&](size_t a, size_t b) {
    if (w[a] != w[b]) return w[a] < w[b];
    return a > b;
  };
  std::priority_queue<size_t, std::vector<size_t>, decltype(cmp)> widest(cmp);
  bool heap_built = false;
  for (size_t i = 0; i < m; ++i) {
    if (w[i] != 0) continue;
    if (!heap_built) {
      for (size_t k = 0; k < m; ++k)
        if (w[k] > 1) widest.push(k);
      heap_built = true;
    }
    size_t k = widest.top();
    widest.pop();
    w[k] -= 1;
    w[i] = 1;
    if (w[k] > 1) widest.push(k);
  }

  QuantizedCdf cdf;
  cdf.min_symbol = min_symbol;
  cdf.cum.resize(m + 1);
  cdf.cum[0] = 0;
  for (size_t i = 0; i < m; ++i) cdf.cum[i + 1] = cdf.cum[i] + w[i];
  return cdf;
}

void RangeEncoder::shift_low() {
  const uint64_t win = static_cast<uint64_t>(low_);
  const uint32_t carry = static_cast<uint32_t>(low_ >> 64);
  if (carry || (win >> 56) != 0xFF) {
    if (has_cache_) out_.push_back(static_cast<uint8_t>(cache_ + carry));
    for (; ff_run_ > 0; --ff_run_) out_.push_back(static_cast<uint8_t>(0xFF + carry));
    cache_ = static_cast<uint8_t>(win >> 56);
    has_cache_ = true;
  } else {
    ++ff_run_;
  }
  low_ = static_cast<u128>(win << 8);
}

void RangeEncoder::encode(int index, const QuantizedCdf& cdf) {
  const uint64_t lo = scale(range_, cdf.cum[index]);
  const uint64_t hi = scale(range_, cdf.cum[index + 1]);
  low_ += lo;
  range_ = hi - lo;
  while (range_ < kRenormBound) {
    shift_low();
    range_ <<= 8;
  }
}

Bytes RangeEncoder::finish() {
  // Round low up to a multiple of 2^40; range >= 2^48 guarantees the rounded
  // value stays inside [low, low+range), so a decoder that zero-pads past the
  // stream tail reconstructs it exactly. Only its top 3 bytes are emitted.
  const u128 step = static_cast<u128>(1) << 40;
  low_ = (low_ + step - 1) & ~(step - 1);
  for (int i = 0; i < 3; ++i) shift_low();
  if (has_cache_) out_.push_back(cache_);
  for (; ff_run_ > 0; --ff_run_) out_.push_back(0xFF);
  has_cache_ = false;
  return std::move(out_);
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t size) : p_(data), n_(size) {
  for (int i = 0; i < 8; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  if (pos_ < n_) return p_[pos_++];
  // The encoder's tail is 3 bytes shorter than the decoder's 8-byte code
  // window, so a valid stream runs out exactly 5 reads early.
  if (++overread_ > 8) throw StreamCorrupt("range decoder ran past end of stream");
  return 0;
}

int RangeDecoder::decode(const QuantizedCdf& cdf) {
  // Largest s with scale(range, cum[s]) <= code.
  int lo = 0, hi = cdf.size();
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (scale(range_, cdf.cum[mid]) <= code_)
      lo = mid;
    else
      hi = mid;
  }
  const uint64_t start = scale(range_, cdf.cum[lo]);
  const uint64_t end = scale(range_, cdf.cum[lo + 1]);
  code_ -= start;
  range_ = end - start;
  while (range_ < kRenormBound) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  return lo;
}

}  // namespace tlrc
