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

#include "tlrc/residual_codec.h"

#include <algorithm>

namespace tlrc {

void autoregress_means(MixtureSiteParams& p, int comp,
                       const std::array<const int32_t*, 2>& prev) {
  const int k = p.mixtures;
  for (int i = 0; i < comp; ++i) {
    if (!prev[i])
      throw ComponentOrderViolation("mean update requested before earlier component decoded");
    // Coding-order slot layout: comp 1 uses beta[0] on r0; comp 2 uses
    // beta[1] on r0 and beta[2] on r1.
    const std::vector<double>& b = p.beta[i + comp - 1];
    for (int kk = 0; kk < k; ++kk)
      for (int c = 0; c < 64; ++c) p.mu[kk * 64 + c] += b[kk * 64 + c] * double(prev[i][c]);
  }
}

MixtureSiteParams activate_site_params(const double* block, int mixtures) {
  MixtureSiteParams p;
  const int k = mixtures;
  p.mixtures = k;
  p.pi.resize(k);
  p.mu.resize(k * 64);
  p.s.resize(k * 64);
  for (auto& b : p.beta) b.resize(k * 64);

  double max_logit = block[0];
  for (int i = 1; i < k; ++i) max_logit = std::max(max_logit, block[i]);
  double denom = 0;
  for (int i = 0; i < k; ++i) {
    p.pi[i] = std::exp(block[i] - max_logit);
    denom += p.pi[i];
  }
  for (int i = 0; i < k; ++i) p.pi[i] /= denom;

  const double* mu = block + k;
  const double* log_s = mu + k * 64;
  const double* beta = log_s + k * 64;
  for (int i = 0; i < k * 64; ++i) {
    p.mu[i] = mu[i];
    double ls = std::clamp(log_s[i], kLogScaleMin, kLogScaleMax);
    p.s[i] = std::max(std::exp(ls), kMixtureScaleFloor);
  }
  // tanh saturates to exactly +-1 in floating point; keep the interval open.
  for (int slot = 0; slot < 3; ++slot)
    for (int i = 0; i < k * 64; ++i)
      p.beta[slot][i] = std::clamp(std::tanh(beta[slot * k * 64 + i]), -0.999999, 0.999999);
  return p;
}

namespace {

// Shared per-site evaluation used by encode, decode, and the rate check.
// Double accumulators in fixed loop order keep encoder and decoder
// arithmetic identical.
class SiteEvaluator {
 public:
  SiteEvaluator(ResidualNets<float>& nets, const NormStats& stats,
                const Tensor<float>& x_hat_int)
      : nets_(nets), stats_(stats) {
    Tensor<float> x_hat_norm = normalize(x_hat_int, stats);
    u_ = nets.forward_recon(x_hat_norm);
    h_ = x_hat_int.h();
    w_ = x_hat_int.w();
    channels_ = x_hat_int.c();
  }

  int h() const { return h_; }
  int w() const { return w_; }
  int components() const { return channels_ / 64; }

  // Causal context features at (i, j) from the scaled residual.
  std::array<double, 64> ctx_at(const Tensor<float>& r_scaled, int i, int j) const {
    const Tensor<float>& wt = nets_.ctx_conv.weight.value;
    std::array<double, 64> hidden;
    for (int co = 0; co < 64; ++co) {
      double acc = double(nets_.ctx_conv.bias.value.data()[co]);
      for (int ci = 0; ci < channels_; ++ci) {
        for (int kh = 0; kh < 5; ++kh) {
          int ih = i - 2 + kh;
          if (ih < 0 || ih >= h_ || kh > 2) continue;
          for (int kw = 0; kw < 5; ++kw) {
            if (kh == 2 && kw >= 2) break;  // strict-past mask
            int iw = j - 2 + kw;
            if (iw < 0 || iw >= w_) continue;
            acc += double(wt(co, ci, kh, kw)) * double(r_scaled(0, ci, ih, iw));
          }
        }
      }
      hidden[co] = acc >= 0 ? acc : 0.01 * acc;
    }
    std::array<double, 64> out;
    for (int co = 0; co < 64; ++co) {
      double acc = double(nets_.ctx_proj.bias.value.data()[co]);
      for (int ci = 0; ci < 64; ++ci)
        acc += double(nets_.ctx_proj.weight.value(co, ci, 0, 0)) * hidden[ci];
      out[co] = acc;
    }
    return out;
  }

  // Entropy parameter network at one site (1x1 convs are per-site affine).
  std::vector<double> ep_at(const std::array<double, 64>& ct, int i, int j) const {
    std::array<double, kEpHidden> in;
    for (int c = 0; c < 64; ++c) in[c] = double(u_(0, c, i, j));
    for (int c = 0; c < 64; ++c) in[64 + c] = ct[c];
    std::array<double, kEpHidden> h1, h2;
    affine(nets_.ep1, in.data(), kEpHidden, h1.data(), kEpHidden, true);
    affine(nets_.ep2, h1.data(), kEpHidden, h2.data(), kEpHidden, true);
    std::vector<double> out(size_t(nets_.ep3.weight.value.n()));
    affine(nets_.ep3, h2.data(), kEpHidden, out.data(), int(out.size()), false);
    return out;
  }

 private:
  static void affine(const Conv2d<float>& layer, const double* in, int n_in, double* out,
                     int n_out, bool leaky) {
    for (int o = 0; o < n_out; ++o) {
      double acc = double(layer.bias.value.data()[o]);
      for (int c = 0; c < n_in; ++c) acc += double(layer.weight.value(o, c, 0, 0)) * in[c];
      out[o] = (leaky && acc < 0) ? 0.01 * acc : acc;
    }
  }

  ResidualNets<float>& nets_;
  const NormStats& stats_;
  Tensor<float> u_;
  int h_, w_, channels_;
};

// Mixture-of-logistics CDF at a real argument (for CDF quantization).
struct MixtureCdf {
  const MixtureSiteParams* p;
  int channel;
  bool laplace;

  double operator()(double x) const {
    double c = 0;
    for (int k = 0; k < p->mixtures; ++k) {
      double mu = p->mu[k * 64 + channel], s = p->s[k * 64 + channel];
      c += p->pi[k] * (laplace ? laplace_cdf(x, mu, s) : sigmoid((x - mu) / s));
    }
    return c;
  }
};

WindowedCdf channel_cdf(const MixtureSiteParams& p, int channel, bool laplace) {
  const int k = p.mixtures;
  std::vector<double> mu(k), s(k);
  for (int kk = 0; kk < k; ++kk) {
    mu[kk] = p.mu[kk * 64 + channel];
    s[kk] = p.s[kk * 64 + channel];
  }
  SymbolWindow win =
      logistic_mixture_window(p.pi.data(), mu.data(), s.data(), k, kResidualMin, kResidualMax);
  return build_windowed_cdf(win, kResidualMin, kResidualMax,
                            MixtureCdf{&p, channel, laplace});
}

double channel_model_bits(const MixtureSiteParams& p, int channel, int v, bool laplace) {
  double prob = 0;
  for (int k = 0; k < p.mixtures; ++k) {
    double mu = p.mu[k * 64 + channel], s = p.s[k * 64 + channel];
    BinProb bp = laplace ? laplace_bin(v, mu, s, kResidualMin, kResidualMax)
                         : logistic_bin(v, mu, s, kResidualMin, kResidualMax);
    prob += p.pi[k] * bp.p;
  }
  return -std::log2(std::max(prob, kProbFloor));
}

enum class Mode { kEncode, kDecode, kRate };

// One driver for all three passes keeps the decode contract (one entropy
// network evaluation per site, causal context only) in a single place.
double run_residual_pass(ResidualNets<float>& nets, const NormStats& stats,
                         Tensor<float>* r_inout, const Tensor<float>& x_hat_int, Mode mode,
                         RangeEncoder* enc, RangeDecoder* dec) {
  const bool laplace = nets.cfg.direct_mode;
  const int n_comp = nets.cfg.components;
  if (x_hat_int.c() != n_comp * 64) throw ShapeError("component count mismatch");
  SiteEvaluator eval(nets, stats, x_hat_int);
  const int h = eval.h(), w = eval.w();

  Tensor<float> r_known = (mode == Mode::kDecode)
                              ? Tensor<float>(1, n_comp * 64, h, w)
                              : *r_inout;
  if (mode != Mode::kDecode) check_same_shape(r_known, x_hat_int, "residual pass");
  // Scaled copy for the context convolution, maintained incrementally.
  Tensor<float> r_scaled = (mode == Mode::kDecode) ? Tensor<float>(1, n_comp * 64, h, w)
                                                   : scale_residual(r_known, stats);

  double bits = 0;
  std::array<int32_t, 2 * 64> prev_storage{};
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      std::array<double, 64> ct = eval.ctx_at(r_scaled, i, j);
      std::vector<double> ep = eval.ep_at(ct, i, j);
      const int block = ep_block_channels(nets.cfg.mixtures);
      std::array<const int32_t*, 2> prev = {nullptr, nullptr};
      for (int comp = 0; comp < n_comp; ++comp) {
        MixtureSiteParams params = activate_site_params(ep.data() + comp * block,
                                                        nets.cfg.mixtures);
        autoregress_means(params, comp, prev);
        for (int c = 0; c < 64; ++c) {
          const int ch = comp * 64 + c;
          if (mode == Mode::kRate) {
            bits += channel_model_bits(params, c, int(r_known(0, ch, i, j)), laplace);
            continue;
          }
          WindowedCdf wc = channel_cdf(params, c, laplace);
          if (mode == Mode::kEncode) {
            encode_windowed(*enc, wc, int(r_known(0, ch, i, j)));
          } else {
            int v = decode_windowed(*dec, wc);
            r_known(0, ch, i, j) = float(v);
            // must match scale_residual's float arithmetic exactly
            r_scaled(0, ch, i, j) = float(v) / float(stats.std[ch]);
          }
        }
        int32_t* slot = prev_storage.data() + comp * 64;
        for (int c = 0; c < 64; ++c) slot[c] = int32_t(r_known(0, comp * 64 + c, i, j));
        if (comp < 2) prev[comp] = slot;
      }
    }
  }
  if (mode == Mode::kDecode) *r_inout = std::move(r_known);
  return bits;
}

}  // namespace

Bytes encode_residual(ResidualNets<float>& nets, const NormStats& stats, const Tensor<float>& r,
                      const Tensor<float>& x_hat_int) {
  RangeEncoder enc;
  Tensor<float> rr = r;
  run_residual_pass(nets, stats, &rr, x_hat_int, Mode::kEncode, &enc, nullptr);
  return enc.finish();
}

Tensor<float> decode_residual(ResidualNets<float>& nets, const NormStats& stats,
                              const Bytes& stream, const Tensor<float>& x_hat_int) {
  RangeDecoder dec(stream);
  Tensor<float> r;
  run_residual_pass(nets, stats, &r, x_hat_int, Mode::kDecode, nullptr, &dec);
  return r;
}

double residual_rate_bits(ResidualNets<float>& nets, const NormStats& stats,
                          const Tensor<float>& r, const Tensor<float>& x_hat_int) {
  Tensor<float> rr = r;
  return run_residual_pass(nets, stats, &rr, x_hat_int, Mode::kRate, nullptr, nullptr);
}

}  // namespace tlrc
