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

// Learned lossy coder over normalized DCT images: analysis/synthesis
// transforms, hyperprior side channel, quantization, rate estimation, and
// integer reconstruction for residual formation.

#ifndef TLRC_LOSSY_CODEC_H_
#define TLRC_LOSSY_CODEC_H_

#include <memory>
#include <string>

#include "tlrc/dct_image.h"
#include "tlrc/distributions.h"
#include "tlrc/layers.h"

namespace tlrc {

// Quantized latents are clamped to this symbol range before coding.
inline constexpr int kLatentMin = -2047;
inline constexpr int kLatentMax = 2047;
// Scale floor shared by the Gaussian conditional and the hyper-latent prior.
inline constexpr double kScaleFloor = 0.01;

// Total spatial downsampling: analysis 4x, hyper path another 4x. Inputs are
// replicate-padded to a multiple of 16 sites before entering the transforms.
inline constexpr int kAnalysisStride = 4;
inline constexpr int kPadMultiple = 16;

struct LossyConfig {
  int input_channels = 64;
  int latent_channels = 192;  // M
  int hyper_channels = 128;   // N
  double lambda = 0.03;
};

inline double softplus(double x) {
  if (x > 30) return x;
  if (x < -30) return std::exp(x);
  return std::log1p(std::exp(x));
}

// Analysis: conv k5s2 + GDN, conv k5s2 + GDN, conv k3s1.
// Synthesis mirrors with IGDN and transposed convs. Hyper path: two conv
// stages down, two transposed stages up, leaky ReLU between.
template <typename S>
struct LossyNets {
  LossyConfig cfg;
  Sequential<S> analysis, synthesis, hyper_analysis, hyper_synthesis;
  Parameter<S> z_prior_mu;         // per hyper channel
  Parameter<S> z_prior_scale_raw;  // softplus-mapped, floor kScaleFloor

  LossyNets(const std::string& prefix, const LossyConfig& config, Rng& rng) : cfg(config) {
    const int in = cfg.input_channels, m = cfg.latent_channels, n = cfg.hyper_channels;
    analysis.add(std::make_unique<Conv2d<S>>(prefix + "an0", in, m, 5, 2, 2, rng));
    analysis.add(std::make_unique<Gdn<S>>(prefix + "an1", m, false, rng));
    analysis.add(std::make_unique<Conv2d<S>>(prefix + "an2", m, m, 5, 2, 2, rng));
    analysis.add(std::make_unique<Gdn<S>>(prefix + "an3", m, false, rng));
    analysis.add(std::make_unique<Conv2d<S>>(prefix + "an4", m, m, 3, 1, 1, rng));

    synthesis.add(std::make_unique<ConvTranspose2d<S>>(prefix + "sy0", m, m, 3, 1, 1, 0, rng));
    synthesis.add(std::make_unique<Gdn<S>>(prefix + "sy1", m, true, rng));
    synthesis.add(std::make_unique<ConvTranspose2d<S>>(prefix + "sy2", m, m, 5, 2, 2, 1, rng));
    synthesis.add(std::make_unique<Gdn<S>>(prefix + "sy3", m, true, rng));
    synthesis.add(std::make_unique<ConvTranspose2d<S>>(prefix + "sy4", m, in, 5, 2, 2, 1, rng));

    hyper_analysis.add(std::make_unique<Conv2d<S>>(prefix + "ha0", m, n, 5, 2, 2, rng));
    hyper_analysis.add(std::make_unique<LeakyReLU<S>>());
    hyper_analysis.add(std::make_unique<Conv2d<S>>(prefix + "ha1", n, n, 5, 2, 2, rng));

    hyper_synthesis.add(std::make_unique<ConvTranspose2d<S>>(prefix + "hs0", n, n, 5, 2, 2, 1, rng));
    hyper_synthesis.add(std::make_unique<LeakyReLU<S>>());
    hyper_synthesis.add(
        std::make_unique<ConvTranspose2d<S>>(prefix + "hs1", n, 2 * m, 5, 2, 2, 1, rng));

    z_prior_mu.init(prefix + "zp.mu", 1, n, 1, 1);
    z_prior_scale_raw.init(prefix + "zp.scale_raw", 1, n, 1, 1);
  }

  void collect(std::vector<Parameter<S>*>& out) {
    analysis.collect(out);
    synthesis.collect(out);
    hyper_analysis.collect(out);
    hyper_synthesis.collect(out);
    out.push_back(&z_prior_mu);
    out.push_back(&z_prior_scale_raw);
  }

  double z_prior_scale(int channel) const {
    return kScaleFloor + softplus(double(z_prior_scale_raw.value.data()[channel]));
  }
};

// Splits a hyper-synthesis output into (mu, sigma) with
// sigma = kScaleFloor + softplus(raw).
template <typename S>
void split_gaussian_params(const Tensor<S>& hs_out, Tensor<S>& mu, Tensor<S>& sigma) {
  const int m = hs_out.c() / 2;
  mu = slice_channels(hs_out, 0, m);
  sigma = slice_channels(hs_out, m, m);
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    sigma.array()[i] = S(kScaleFloor + softplus(double(sigma.array()[i])));
}

// Replicate-pads spatial dims up to a multiple of `multiple`.
template <typename S>
Tensor<S> pad_replicate(const Tensor<S>& x, int multiple) {
  int ph = (x.h() + multiple - 1) / multiple * multiple;
  int pw = (x.w() + multiple - 1) / multiple * multiple;
  if (ph == x.h() && pw == x.w()) return x;
  Tensor<S> out(x.n(), x.c(), ph, pw);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int i = 0; i < ph; ++i)
        for (int j = 0; j < pw; ++j)
          out(n, c, i, j) = x(n, c, std::min(i, x.h() - 1), std::min(j, x.w() - 1));
  return out;
}

template <typename S>
Tensor<S> crop(const Tensor<S>& x, int h, int w) {
  if (h > x.h() || w > x.w()) throw ShapeError("crop larger than tensor");
  Tensor<S> out(x.n(), x.c(), h, w);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) out(n, c, i, j) = x(n, c, i, j);
  return out;
}

// Rounds a denormalized reconstruction to integers and clamps each channel
// to its JPEG coefficient range (zigzag channel 0 is DC).
template <typename S>
Tensor<S> clamp_coeff_range(const Tensor<S>& x) {
  Tensor<S> out = x;
  for (int n = 0; n < x.n(); ++n) {
    auto m = out.sites_by_channels(n);
    for (int c = 0; c < x.c(); ++c) {
      S lo = (c % 64 == 0) ? S(-2048) : S(-1023);
      S hi = (c % 64 == 0) ? S(2047) : S(1023);
      m.col(c) = m.col(c).cwiseMax(lo).cwiseMin(hi);
    }
  }
  return out;
}

// denormalize + round-half-even + clamp: the integer reconstruction that the
// residual is formed against.
template <typename S>
Tensor<S> reconstruct_int(const Tensor<S>& x_hat_norm, const NormStats& stats) {
  return clamp_coeff_range(quantize_round(denormalize(x_hat_norm, stats)));
}

// Quantized latents plus their predicted distribution parameters.
template <typename S>
struct LatentBundle {
  Tensor<S> y, y_hat;
  Tensor<S> z, z_hat;
  Tensor<S> mu_y, sigma_y;
};

// ROUND-mode forward pass: analysis, hyper path, rounding with clamps.
LatentBundle<float> lossy_forward_round(LossyNets<float>& nets, const Tensor<float>& x_norm);

struct LatentStreams {
  Bytes z_stream, y_stream;
};

// z first under its channel prior, then y under Gaussian(mu, sigma) from the
// decoded z. decode is the exact mirror.
LatentStreams encode_latents(LossyNets<float>& nets, const LatentBundle<float>& bundle);
LatentBundle<float> decode_latents(LossyNets<float>& nets, const Bytes& z_stream,
                                   const Bytes& y_stream, int y_h, int y_w);

// Ideal code lengths in bits under the ROUND-mode model (floored at 2^-16
// per symbol): first = y bits, second = z bits.
std::pair<double, double> latent_rate_bits(const LossyNets<float>& nets,
                                           const LatentBundle<float>& bundle);

}  // namespace tlrc

#endif  // TLRC_LOSSY_CODEC_H_
