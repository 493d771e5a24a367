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

#include "tlrc/lossy_codec.h"

namespace tlrc {

namespace {

float round_clamp_latent(float v) {
  double r = std::nearbyint(double(v));
  return float(std::clamp(r, double(kLatentMin), double(kLatentMax)));
}

Tensor<float> round_clamp(const Tensor<float>& x) {
  Tensor<float> out = x;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.array()[i] = round_clamp_latent(x.array()[i]);
  return out;
}

}  // namespace

LatentBundle<float> lossy_forward_round(LossyNets<float>& nets, const Tensor<float>& x_norm) {
  LatentBundle<float> b;
  b.y = nets.analysis.forward(x_norm);
  b.z = nets.hyper_analysis.forward(b.y);
  b.z_hat = round_clamp(b.z);
  Tensor<float> hs = nets.hyper_synthesis.forward(b.z_hat);
  split_gaussian_params(hs, b.mu_y, b.sigma_y);
  b.y_hat = round_clamp(b.y);
  return b;
}

LatentStreams encode_latents(LossyNets<float>& nets, const LatentBundle<float>& bundle) {
  LatentStreams out;
  {
    RangeEncoder enc;
    // Per-channel CDFs are reused across all sites of the channel.
    for (int c = 0; c < bundle.z_hat.c(); ++c) {
      double mu = double(nets.z_prior_mu.value.data()[c]);
      double s = nets.z_prior_scale(c);
      const double one = 1.0;
      SymbolWindow win = logistic_mixture_window(&one, &mu, &s, 1, kLatentMin, kLatentMax);
      WindowedCdf wc = build_windowed_cdf(win, kLatentMin, kLatentMax, [&](double x) {
        return sigmoid((x - mu) / s);
      });
      for (int n = 0; n < bundle.z_hat.n(); ++n)
        for (int i = 0; i < bundle.z_hat.h(); ++i)
          for (int j = 0; j < bundle.z_hat.w(); ++j)
            encode_windowed(enc, wc, int(bundle.z_hat(n, c, i, j)));
    }
    out.z_stream = enc.finish();
  }
  {
    RangeEncoder enc;
    for (int n = 0; n < bundle.y_hat.n(); ++n) {
      for (int c = 0; c < bundle.y_hat.c(); ++c) {
        for (int i = 0; i < bundle.y_hat.h(); ++i) {
          for (int j = 0; j < bundle.y_hat.w(); ++j) {
            double mu = double(bundle.mu_y(n, c, i, j));
            double sigma = double(bundle.sigma_y(n, c, i, j));
            SymbolWindow win = gaussian_window(mu, sigma, kLatentMin, kLatentMax);
            WindowedCdf wc = build_windowed_cdf(win, kLatentMin, kLatentMax, [&](double x) {
              return std_normal_cdf((x - mu) / sigma);
            });
            encode_windowed(enc, wc, int(bundle.y_hat(n, c, i, j)));
          }
        }
      }
    }
    out.y_stream = enc.finish();
  }
  return out;
}

LatentBundle<float> decode_latents(LossyNets<float>& nets, const Bytes& z_stream,
                                   const Bytes& y_stream, int y_h, int y_w) {
  if (y_h % kAnalysisStride != 0 || y_w % kAnalysisStride != 0)
    throw ShapeError("latent dims must be multiples of the hyper stride");
  const int m = nets.cfg.latent_channels, n_ch = nets.cfg.hyper_channels;
  LatentBundle<float> b;
  b.z_hat = Tensor<float>(1, n_ch, y_h / 4, y_w / 4);
  {
    RangeDecoder dec(z_stream);
    for (int c = 0; c < n_ch; ++c) {
      double mu = double(nets.z_prior_mu.value.data()[c]);
      double s = nets.z_prior_scale(c);
      const double one = 1.0;
      SymbolWindow win = logistic_mixture_window(&one, &mu, &s, 1, kLatentMin, kLatentMax);
      WindowedCdf wc = build_windowed_cdf(win, kLatentMin, kLatentMax, [&](double x) {
        return sigmoid((x - mu) / s);
      });
      for (int i = 0; i < b.z_hat.h(); ++i)
        for (int j = 0; j < b.z_hat.w(); ++j)
          b.z_hat(0, c, i, j) = float(decode_windowed(dec, wc));
    }
  }
  Tensor<float> hs = nets.hyper_synthesis.forward(b.z_hat);
  split_gaussian_params(hs, b.mu_y, b.sigma_y);
  if (b.mu_y.h() != y_h || b.mu_y.w() != y_w)
    throw StreamCorrupt("hyper-synthesis geometry mismatch");
  b.y_hat = Tensor<float>(1, m, y_h, y_w);
  {
    RangeDecoder dec(y_stream);
    for (int c = 0; c < m; ++c) {
      for (int i = 0; i < y_h; ++i) {
        for (int j = 0; j < y_w; ++j) {
          double mu = double(b.mu_y(0, c, i, j));
          double sigma = double(b.sigma_y(0, c, i, j));
          SymbolWindow win = gaussian_window(mu, sigma, kLatentMin, kLatentMax);
          WindowedCdf wc = build_windowed_cdf(win, kLatentMin, kLatentMax, [&](double x) {
            return std_normal_cdf((x - mu) / sigma);
          });
          b.y_hat(0, c, i, j) = float(decode_windowed(dec, wc));
        }
      }
    }
  }
  return b;
}

std::pair<double, double> latent_rate_bits(const LossyNets<float>& nets,
                                           const LatentBundle<float>& bundle) {
  double bits_y = 0, bits_z = 0;
  for (int n = 0; n < bundle.y_hat.n(); ++n)
    for (int c = 0; c < bundle.y_hat.c(); ++c)
      for (int i = 0; i < bundle.y_hat.h(); ++i)
        for (int j = 0; j < bundle.y_hat.w(); ++j) {
          double p = gaussian_bin(double(bundle.y_hat(n, c, i, j)),
                                  double(bundle.mu_y(n, c, i, j)),
                                  double(bundle.sigma_y(n, c, i, j)), kLatentMin, kLatentMax)
                         .p;
          bits_y -= std::log2(std::max(p, kProbFloor));
        }
  for (int n = 0; n < bundle.z_hat.n(); ++n)
    for (int c = 0; c < bundle.z_hat.c(); ++c) {
      double mu = double(nets.z_prior_mu.value.data()[c]);
      double s = nets.z_prior_scale(c);
      for (int i = 0; i < bundle.z_hat.h(); ++i)
        for (int j = 0; j < bundle.z_hat.w(); ++j) {
          double p =
              logistic_bin(double(bundle.z_hat(n, c, i, j)), mu, s, kLatentMin, kLatentMax).p;
          bits_z -= std::log2(std::max(p, kProbFloor));
        }
    }
  return {bits_y, bits_z};
}

}  // namespace tlrc
