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

#include "tlrc/distributions.h"

namespace tlrc {

const QuantizedCdf& escape_offset_cdf() {
  static const QuantizedCdf cdf = [] {
    QuantizedCdf c;
    c.min_symbol = 0;
    c.cum.resize(8192 + 1);
    for (size_t i = 0; i < c.cum.size(); ++i) c.cum[i] = uint32_t(i * 8);
    return c;
  }();
  return cdf;
}

void encode_windowed(RangeEncoder& enc, const WindowedCdf& wc, int v) {
  const SymbolWindow& w = wc.window;
  if (v < wc.alpha_lo || v > wc.alpha_hi) throw OutOfRange("symbol outside alphabet");
  if (v <= w.lo) {
    enc.encode(0, wc.cdf);
    // The low edge doubles as an escape unless it is the alphabet edge.
    if (w.lo > wc.alpha_lo) enc.encode(w.lo - v, escape_offset_cdf());
  } else if (v >= w.hi) {
    enc.encode(w.hi - w.lo, wc.cdf);
    if (w.hi < wc.alpha_hi) enc.encode(v - w.hi, escape_offset_cdf());
  } else {
    enc.encode(v - w.lo, wc.cdf);
  }
}

int decode_windowed(RangeDecoder& dec, const WindowedCdf& wc) {
  const SymbolWindow& w = wc.window;
  int idx = dec.decode(wc.cdf);
  int v = w.lo + idx;
  if (v == w.lo && w.lo > wc.alpha_lo) {
    v = w.lo - dec.decode(escape_offset_cdf());
  } else if (v == w.hi && w.hi < wc.alpha_hi) {
    v = w.hi + dec.decode(escape_offset_cdf());
  }
  if (v < wc.alpha_lo || v > wc.alpha_hi) throw StreamCorrupt("decoded symbol outside alphabet");
  return v;
}

}  // namespace tlrc
