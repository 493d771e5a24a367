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

// Unit-bin discretizations of the modeled densities (Gaussian, logistic,
// logistic mixture, Laplace) with tail absorption at alphabet edges, their
// analytic derivatives for training, and construction of windowed quantized
// CDFs for the range coder.

#ifndef TLRC_DISTRIBUTIONS_H_
#define TLRC_DISTRIBUTIONS_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "tlrc/range_coder.h"

namespace tlrc {

// Probability floor per coded symbol (and per modeled symbol in rate math).
inline constexpr double kProbFloor = 1.0 / 65536.0;
inline const double kLog2E = 1.4426950408889634;

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double sigmoid_deriv(double x) {
  double s = sigmoid(x);
  return s * (1.0 - s);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014327;
}

// Value and derivatives of one discretized bin probability.
struct BinProb {
  double p = 0;
  double d_v = 0;      // d p / d value (noisy-latent relaxation path)
  double d_mu = 0;     // d p / d mean
  double d_scale = 0;  // d p / d scale
};

// P(v) = Phi((v+.5-mu)/sigma) - Phi((v-.5-mu)/sigma), the lower/upper
// alphabet edge absorbing its tail. Pass lo/hi = +-1e30 to disable.
inline BinProb gaussian_bin(double v, double mu, double sigma, double lo = -1e30,
                            double hi = 1e30) {
  BinProb r;
  const bool absorb_lo = v <= lo;
  const bool absorb_hi = v >= hi;
  const double a = (v - mu + 0.5) / sigma;  // upper bin edge
  const double b = (v - mu - 0.5) / sigma;  // lower bin edge
  double p;
  if (absorb_lo && absorb_hi)
    p = 1.0;
  else if (absorb_lo)
    p = std_normal_cdf(a);
  else if (absorb_hi)
    p = std_normal_cdf(-b);
  else if (v > mu)  // evaluate in the small-CDF tail to dodge 1-1 cancellation
    p = std_normal_cdf(-b) - std_normal_cdf(-a);
  else
    p = std_normal_cdf(a) - std_normal_cdf(b);
  const double pa = absorb_hi ? 0.0 : std_normal_pdf(a);
  const double pb = absorb_lo ? 0.0 : std_normal_pdf(b);
  r.p = std::max(p, 0.0);
  r.d_v = (pa - pb) / sigma;
  r.d_mu = -r.d_v;
  r.d_scale = -(a * pa - b * pb) / sigma;
  return r;
}

// Logistic CDF version of the same bin.
inline BinProb logistic_bin(double v, double mu, double s, double lo = -1e30, double hi = 1e30) {
  BinProb r;
  const bool absorb_lo = v <= lo;
  const bool absorb_hi = v >= hi;
  const double a = (v - mu + 0.5) / s;
  const double b = (v - mu - 0.5) / s;
  double p;
  if (absorb_lo && absorb_hi)
    p = 1.0;
  else if (absorb_lo)
    p = sigmoid(a);
  else if (absorb_hi)
    p = sigmoid(-b);
  else if (v > mu)
    p = sigmoid(-b) - sigmoid(-a);
  else
    p = sigmoid(a) - sigmoid(b);
  const double pa = absorb_hi ? 0.0 : sigmoid_deriv(a);
  const double pb = absorb_lo ? 0.0 : sigmoid_deriv(b);
  r.p = std::max(p, 0.0);
  r.d_v = (pa - pb) / s;
  r.d_mu = -r.d_v;
  r.d_scale = -(a * pa - b * pb) / s;
  return r;
}

inline double laplace_cdf(double x, double mu, double b) {
  double t = (x - mu) / b;
  return t < 0 ? 0.5 * std::exp(t) : 1.0 - 0.5 * std::exp(-t);
}

inline BinProb laplace_bin(double v, double mu, double b, double lo = -1e30, double hi = 1e30) {
  BinProb r;
  const bool absorb_lo = v <= lo;
  const bool absorb_hi = v >= hi;
  double xa = v + 0.5 - mu, xb = v - 0.5 - mu;
  double ca = absorb_hi ? 1.0 : laplace_cdf(v + 0.5, mu, b);
  double cb = absorb_lo ? 0.0 : laplace_cdf(v - 0.5, mu, b);
  // density of Laplace(0, b) at x
  auto dens = [&](double x) { return 0.5 * std::exp(-std::abs(x) / b) / b; };
  double pa = absorb_hi ? 0.0 : dens(xa);
  double pb = absorb_lo ? 0.0 : dens(xb);
  r.p = ca - cb;
  r.d_v = pa - pb;
  r.d_mu = -(pa - pb);
  // dF(x;b)/db = -(x/b) * density(x)
  double da = absorb_hi ? 0.0 : -(xa / b) * dens(xa);
  double db_ = absorb_lo ? 0.0 : -(xb / b) * dens(xb);
  r.d_scale = da - db_;
  return r;
}

// K-component discretized logistic mixture pmf at integer v. pi must sum to 1.
inline double logistic_mixture_pmf(int v, const double* pi, const double* mu, const double* s,
                                   int k_comps, int lo, int hi) {
  double p = 0;
  for (int k = 0; k < k_comps; ++k)
    p += pi[k] * logistic_bin(double(v), mu[k], s[k], double(lo), double(hi)).p;
  return p;
}

// ---------------------------------------------------------------------------
// Windowed alphabets for coding.
//
// Alphabets are thousands of symbols wide, but the modeled mass concentrates
// in a narrow window. The coder quantizes a CDF over that window only; the
// window edges carry the off-window tail mass and act as escapes followed by
// a fixed-rate offset, so any in-range integer stays decodable.

struct SymbolWindow {
  int lo = 0, hi = 0;  // inclusive, within the alphabet
};

// Tail quantiles: mass beyond the window is far below the 2^-16 CDF floor.
inline constexpr double kGaussianWindowSigmas = 9.0;
inline constexpr double kLogisticWindowScales = 25.0;
inline constexpr double kMixtureWeightCutoff = 1.0 / (1 << 24);

inline SymbolWindow clip_window(double lo, double hi, int alpha_lo, int alpha_hi) {
  SymbolWindow w;
  w.lo = int(std::max(double(alpha_lo), std::floor(lo)));
  w.hi = int(std::min(double(alpha_hi), std::ceil(hi)));
  if (w.lo > w.hi) {  // degenerate; keep at least two symbols when possible
    w.lo = std::clamp(w.lo, alpha_lo, alpha_hi);
    w.hi = w.lo;
  }
  if (w.hi == w.lo) {
    if (w.hi < alpha_hi)
      ++w.hi;
    else if (w.lo > alpha_lo)
      --w.lo;
  }
  return w;
}

inline SymbolWindow gaussian_window(double mu, double sigma, int alpha_lo, int alpha_hi) {
  double half = kGaussianWindowSigmas * sigma + 1.0;
  return clip_window(mu - half, mu + half, alpha_lo, alpha_hi);
}

inline SymbolWindow logistic_mixture_window(const double* pi, const double* mu, const double* s,
                                            int k_comps, int alpha_lo, int alpha_hi) {
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (int k = 0; k < k_comps; ++k) {
    if (pi[k] < kMixtureWeightCutoff) continue;
    double half = kLogisticWindowScales * s[k] + 1.0;
    lo = std::min(lo, mu[k] - half);
    hi = std::max(hi, mu[k] + half);
  }
  if (lo > hi) {  // all weights below cutoff: extremely peaked softmax
    lo = mu[0] - 2;
    hi = mu[0] + 2;
  }
  return clip_window(lo, hi, alpha_lo, alpha_hi);
}

// Quantized CDF over a window. F is the cumulative distribution at real
// arguments; edge symbols absorb everything beyond them.
struct WindowedCdf {
  SymbolWindow window;
  int alpha_lo = 0, alpha_hi = 0;
  QuantizedCdf cdf;
};

template <typename CdfFn>
WindowedCdf build_windowed_cdf(const SymbolWindow& win, int alpha_lo, int alpha_hi, CdfFn&& cdf_at) {
  WindowedCdf out;
  out.window = win;
  out.alpha_lo = alpha_lo;
  out.alpha_hi = alpha_hi;
  const int m = win.hi - win.lo + 1;
  std::vector<double> pmf(m);
  double prev = 0.0;  // cumulative below lowest bin, absorbed by the edge
  for (int i = 0; i < m - 1; ++i) {
    double c = cdf_at(double(win.lo + i) + 0.5);
    pmf[i] = std::max(c - prev, 0.0);
    prev = c;
  }
  pmf[m - 1] = std::max(1.0 - prev, 0.0);
  out.cdf = quantize_cdf(pmf, win.lo);
  return out;
}

// Escape offsets are coded raw under a fixed uniform CDF (13 bits); the
// alphabets used here span at most 8191 symbols.
const QuantizedCdf& escape_offset_cdf();

// Encodes integer v (within [alpha_lo, alpha_hi]) under a windowed CDF.
void encode_windowed(RangeEncoder& enc, const WindowedCdf& wc, int v);
int decode_windowed(RangeDecoder& dec, const WindowedCdf& wc);

}  // namespace tlrc

#endif  // TLRC_DISTRIBUTIONS_H_
