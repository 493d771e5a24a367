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

// Lossless residual coding: masked-convolution causal context, reconstruction
// features, a 1x1-conv entropy parameter network, cross-component mean
// autoregression, and discretized logistic mixture likelihoods. The direct
// ablation mode codes the original coefficients under a Laplace head instead.

#ifndef TLRC_RESIDUAL_CODEC_H_
#define TLRC_RESIDUAL_CODEC_H_

#include <array>
#include <string>
#include <vector>

#include "tlrc/dct_image.h"
#include "tlrc/distributions.h"
#include "tlrc/layers.h"

namespace tlrc {

inline constexpr int kResidualMin = -4095;
inline constexpr int kResidualMax = 4095;
inline constexpr int kEpHidden = 128;
inline constexpr double kLogScaleMin = -7.0;
inline constexpr double kLogScaleMax = 15.0;
inline constexpr double kMixtureScaleFloor = 1e-2;

// Per-component entropy parameter block: [pi: K][mu: K*64][log_s: K*64]
// [beta0: K*64][beta1: K*64][beta2: K*64], each slice K-major (k*64 + c).
inline int ep_block_channels(int mixtures) { return mixtures * (1 + 2 * 64 + 3 * 64); }

struct ResidualConfig {
  int components = 1;  // jointly coded components (group size)
  int mixtures = 5;    // K
  bool direct_mode = false;
};

// One site, one component: activated mixture parameters.
struct MixtureSiteParams {
  int mixtures = 0;
  std::vector<double> pi;                    // K, softmax-normalized
  std::vector<double> mu;                    // K*64
  std::vector<double> s;                     // K*64, >= kMixtureScaleFloor
  std::array<std::vector<double>, 3> beta;   // K*64 each, tanh-activated
};

// Cross-component mean update for component `comp` in coding order:
//   comp 1: mu += beta[0] * r0
//   comp 2: mu += beta[1] * r0 + beta[2] * r1
// applied per mixture k and per DCT channel c. prev[i] points at the 64
// already-known residuals of earlier component i at this site.
void autoregress_means(MixtureSiteParams& p, int comp, const std::array<const int32_t*, 2>& prev);

template <typename S>
struct ResidualNets {
  ResidualConfig cfg;
  Conv2d<S> recon1, recon2;  // k3 s1 p1
  LeakyReLU<S> recon_act1, recon_act2;
  MaskedConv2d<S> ctx_conv;  // k5 strict-past
  LeakyReLU<S> ctx_act;
  Conv2d<S> ctx_proj;        // 1x1
  Conv2d<S> ep1, ep2, ep3;   // 1x1 chain
  LeakyReLU<S> ep_act1, ep_act2;

  ResidualNets(const std::string& prefix, const ResidualConfig& config, Rng& rng)
      : cfg(config),
        recon1(prefix + "re0", config.components * 64, 64, 3, 1, 1, rng),
        recon2(prefix + "re1", 64, 64, 3, 1, 1, rng),
        ctx_conv(prefix + "cx0", config.components * 64, 64, 5, rng),
        ctx_proj(prefix + "cx1", 64, 64, 1, 1, 0, rng),
        ep1(prefix + "ep0", kEpHidden, kEpHidden, 1, 1, 0, rng),
        ep2(prefix + "ep1", kEpHidden, kEpHidden, 1, 1, 0, rng),
        ep3(prefix + "ep2", kEpHidden, config.components * ep_block_channels(config.mixtures), 1,
            1, 0, rng) {
    // Start scale predictions moderate so initial coding windows stay narrow.
    const int block = ep_block_channels(cfg.mixtures);
    const int k = cfg.mixtures;
    for (int comp = 0; comp < cfg.components; ++comp) {
      for (int i = 0; i < k * 64; ++i)
        ep3.bias.value.data()[comp * block + k + k * 64 + i] = S(-0.5);
    }
  }

  // u from the integer reconstruction; identical on encoder and decoder.
  Tensor<S> forward_recon(const Tensor<S>& x_hat_norm) {
    return recon_act2.forward(recon2.forward(recon_act1.forward(recon1.forward(x_hat_norm))));
  }

  // CT_r from the (std-scaled) residual; strictly raster-causal.
  Tensor<S> forward_ctx(const Tensor<S>& r_scaled) {
    return ctx_proj.forward(ctx_act.forward(ctx_conv.forward(r_scaled)));
  }

  Tensor<S> forward_ep(const Tensor<S>& u, const Tensor<S>& ct) {
    return ep3.forward(ep_act2.forward(ep2.forward(ep_act1.forward(ep1.forward(concat_channels(u, ct))))));
  }

  // Reverse pass for the whole residual branch; input gradients stop at the
  // integer reconstruction and the residual, both training constants.
  void backward_all(const Tensor<S>& g_ep_out) {
    Tensor<S> g = ep1.backward(ep_act1.backward(ep2.backward(ep_act2.backward(ep3.backward(g_ep_out)))));
    Tensor<S> gu = slice_channels(g, 0, 64);
    Tensor<S> gct = slice_channels(g, 64, 64);
    recon1.backward(recon_act1.backward(recon2.backward(recon_act2.backward(gu))));
    ctx_conv.backward(ctx_act.backward(ctx_proj.backward(gct)));
  }

  void collect(std::vector<Parameter<S>*>& out) {
    recon1.collect(out);
    recon2.collect(out);
    ctx_conv.collect(out);
    ctx_proj.collect(out);
    ep1.collect(out);
    ep2.collect(out);
    ep3.collect(out);
  }
};

// Activates one component's raw entropy-parameter block (length
// ep_block_channels(K)) into mixture parameters.
MixtureSiteParams activate_site_params(const double* block, int mixtures);

// Residual scaling applied before the context convolution: channel std from
// the tower statistics (means are not subtracted; residuals are centered).
template <typename S>
Tensor<S> scale_residual(const Tensor<S>& r, const NormStats& stats) {
  if (r.c() != stats.channels()) throw StatsMismatch("residual channel count mismatch");
  Tensor<S> out = r;
  for (int n = 0; n < r.n(); ++n) {
    auto m = out.sites_by_channels(n);
    for (int c = 0; c < r.c(); ++c) m.col(c) /= S(stats.std[c]);
  }
  return out;
}

// Streaming interface. r and x_hat_int are (1, n*64, H, W) integer-valued
// tensors in coding order; decode returns r given the identical x_hat_int.
Bytes encode_residual(ResidualNets<float>& nets, const NormStats& stats, const Tensor<float>& r,
                      const Tensor<float>& x_hat_int);
Tensor<float> decode_residual(ResidualNets<float>& nets, const NormStats& stats,
                              const Bytes& stream, const Tensor<float>& x_hat_int);

// -log2 likelihood of r under the factorized site/component/channel model
// (per-symbol probability floor), same per-site arithmetic as coding.
double residual_rate_bits(ResidualNets<float>& nets, const NormStats& stats,
                          const Tensor<float>& r, const Tensor<float>& x_hat_int);

}  // namespace tlrc

#endif  // TLRC_RESIDUAL_CODEC_H_
