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

// One training step: forward passes, rate/distortion heads with analytic
// derivatives, and the chained backward sweep. Templated on scalar so the
// same code runs in float for training and double for finite-difference
// verification.

#ifndef TLRC_TRAIN_STEP_H_
#define TLRC_TRAIN_STEP_H_

#include "tlrc/lossy_codec.h"
#include "tlrc/residual_codec.h"

namespace tlrc {

enum class TrainPhase { kLossyPretrain, kJoint };

struct StepStats {
  double bits_y = 0, bits_z = 0, bits_r = 0;  // per element
  double d_lossy = 0;                         // MSE per element, physical units
  double loss = 0;
};

// Scalar training objective: rates in bits per element plus weighted MSE.
inline double joint_loss(double rate_yz, double rate_r, double d_lossy, double lambda) {
  return rate_yz + rate_r + lambda * d_lossy;
}

// Residual-branch forward + mixture NLL head + gradient packing. The
// residual and the integer reconstruction are training constants; gradients
// flow only into the networks. Returns total bits; fills g_ep when training.
template <typename S>
double residual_branch(ResidualNets<S>& nets, const NormStats& stats, const Tensor<S>& x_int,
                       const Tensor<S>& x_hat_int, bool laplace_head, Tensor<S>* g_ep_out,
                       double grad_scale) {
  const int n_comp = nets.cfg.components;
  const int kmix = nets.cfg.mixtures;
  const int block = ep_block_channels(kmix);

  Tensor<S> r = x_int;
  r.array() -= x_hat_int.array();
  Tensor<S> u = nets.forward_recon(normalize(x_hat_int, stats));
  Tensor<S> ct = nets.forward_ctx(scale_residual(r, stats));
  Tensor<S> ep = nets.forward_ep(u, ct);

  if (g_ep_out) *g_ep_out = Tensor<S>(ep.n(), ep.c(), ep.h(), ep.w());

  double bits = 0;
  std::vector<double> raw(size_t(block), 0.0), d_block(size_t(block), 0.0);
  std::vector<BinProb> bp(size_t(kmix), BinProb{});
  std::vector<double> d_pi(size_t(kmix), 0.0);
  for (int n = 0; n < ep.n(); ++n) {
    for (int i = 0; i < ep.h(); ++i) {
      for (int j = 0; j < ep.w(); ++j) {
        for (int comp = 0; comp < n_comp; ++comp) {
          for (int b = 0; b < block; ++b) raw[size_t(b)] = double(ep(n, comp * block + b, i, j));
          MixtureSiteParams params = activate_site_params(raw.data(), kmix);
          std::array<int32_t, 128> prev_vals{};
          std::array<const int32_t*, 2> prev = {nullptr, nullptr};
          for (int pc = 0; pc < comp && pc < 2; ++pc) {
            for (int c = 0; c < 64; ++c)
              prev_vals[size_t(pc) * 64 + size_t(c)] = int32_t(r(n, pc * 64 + c, i, j));
            prev[size_t(pc)] = prev_vals.data() + size_t(pc) * 64;
          }
          autoregress_means(params, comp, prev);

          std::fill(d_block.begin(), d_block.end(), 0.0);
          std::fill(d_pi.begin(), d_pi.end(), 0.0);
          for (int c = 0; c < 64; ++c) {
            const int v = int(r(n, comp * 64 + c, i, j));
            double prob = 0;
            for (int k = 0; k < kmix; ++k) {
              double mu = params.mu[size_t(k) * 64 + size_t(c)];
              double s = params.s[size_t(k) * 64 + size_t(c)];
              bp[size_t(k)] = laplace_head ? laplace_bin(v, mu, s, kResidualMin, kResidualMax)
                                           : logistic_bin(v, mu, s, kResidualMin, kResidualMax);
              prob += params.pi[size_t(k)] * bp[size_t(k)].p;
            }
            const bool floored = prob <= kProbFloor;
            bits += -std::log2(std::max(prob, kProbFloor));
            if (!g_ep_out || floored) continue;
            const double dnll_dp = -1.0 / (prob * M_LN2);
            for (int k = 0; k < kmix; ++k) {
              d_pi[size_t(k)] += dnll_dp * bp[size_t(k)].p;
              const double d_mu_eff = dnll_dp * params.pi[size_t(k)] * bp[size_t(k)].d_mu;
              const double d_s = dnll_dp * params.pi[size_t(k)] * bp[size_t(k)].d_scale;
              d_block[size_t(kmix + k * 64 + c)] += d_mu_eff;
              // log-scale chain: s = exp(clamp(raw)) with a hard floor
              const double raw_ls = raw[size_t(kmix + kmix * 64 + k * 64 + c)];
              if (raw_ls > std::log(kMixtureScaleFloor) && raw_ls < kLogScaleMax)
                d_block[size_t(kmix + kmix * 64 + k * 64 + c)] +=
                    d_s * params.s[size_t(k) * 64 + size_t(c)];
              // beta chain through the mean updates: comp 1 slot 0 on r0,
              // comp 2 slots 1,2 on r0,r1. Earlier residuals are constants.
              for (int pc = 0; pc < comp; ++pc) {
                const int slot = pc + comp - 1;
                const double beta = params.beta[size_t(slot)][size_t(k) * 64 + size_t(c)];
                const double d_beta_raw =
                    d_mu_eff * double(prev[size_t(pc)][c]) * (1.0 - beta * beta);
                d_block[size_t(kmix + 2 * kmix * 64 + slot * kmix * 64 + k * 64 + c)] +=
                    d_beta_raw;
              }
            }
          }
          if (!g_ep_out) continue;
          double dot = 0;
          for (int k = 0; k < kmix; ++k) dot += d_pi[size_t(k)] * params.pi[size_t(k)];
          for (int k = 0; k < kmix; ++k)
            d_block[size_t(k)] += params.pi[size_t(k)] * (d_pi[size_t(k)] - dot);
          for (int b = 0; b < block; ++b)
            (*g_ep_out)(n, comp * block + b, i, j) += S(d_block[size_t(b)] * grad_scale);
        }
      }
    }
  }
  return bits;
}

template <typename S>
StepStats joint_step(LossyNets<S>& nets, ResidualNets<S>& residual, const NormStats& stats,
                     const Tensor<S>& x_int, TrainPhase phase, double lambda, Rng& noise_rng) {
  const double n_elems = double(x_int.size());

  Tensor<S> x_norm = normalize(x_int, stats);
  Tensor<S> y = nets.analysis.forward(x_norm);
  Tensor<S> z = nets.hyper_analysis.forward(y);
  Tensor<S> z_t = quantize_noise(z, noise_rng);
  Tensor<S> hs = nets.hyper_synthesis.forward(z_t);
  const int m = nets.cfg.latent_channels;
  Tensor<S> mu_y = slice_channels(hs, 0, m);
  Tensor<S> sigma_raw = slice_channels(hs, m, m);
  Tensor<S> y_t = quantize_noise(y, noise_rng);
  Tensor<S> x_hat_norm = nets.synthesis.forward(y_t);
  Tensor<S> x_hat_den = denormalize(x_hat_norm, stats);

  StepStats out;
  for (Eigen::Index i = 0; i < x_hat_den.size(); ++i) {
    double d = double(x_hat_den.array()[i]) - double(x_int.array()[i]);
    out.d_lossy += d * d;
  }
  out.d_lossy /= n_elems;

  // R_y head: Gaussian bins at the noisy latents.
  Tensor<S> g_y_t(y_t.n(), y_t.c(), y_t.h(), y_t.w());
  Tensor<S> g_hs(hs.n(), hs.c(), hs.h(), hs.w());
  const double rate_scale = 1.0 / n_elems;
  for (int n = 0; n < y_t.n(); ++n)
    for (int c = 0; c < y_t.c(); ++c)
      for (int i = 0; i < y_t.h(); ++i)
        for (int j = 0; j < y_t.w(); ++j) {
          double sraw = double(sigma_raw(n, c, i, j));
          double sigma = kScaleFloor + softplus(sraw);
          BinProb bp = gaussian_bin(double(y_t(n, c, i, j)), double(mu_y(n, c, i, j)), sigma);
          out.bits_y += -std::log2(std::max(bp.p, kProbFloor));
          if (bp.p > kProbFloor) {
            double dnll_dp = -1.0 / (bp.p * M_LN2) * rate_scale;
            g_y_t(n, c, i, j) += S(dnll_dp * bp.d_v);
            g_hs(n, c, i, j) += S(dnll_dp * bp.d_mu);
            g_hs(n, m + c, i, j) += S(dnll_dp * bp.d_scale * sigmoid(sraw));
          }
        }

  // R_z head: per-channel logistic prior.
  Tensor<S> g_z_t(z_t.n(), z_t.c(), z_t.h(), z_t.w());
  for (int n = 0; n < z_t.n(); ++n)
    for (int c = 0; c < z_t.c(); ++c) {
      double mu = double(nets.z_prior_mu.value.data()[c]);
      double sraw = double(nets.z_prior_scale_raw.value.data()[c]);
      double s = kScaleFloor + softplus(sraw);
      for (int i = 0; i < z_t.h(); ++i)
        for (int j = 0; j < z_t.w(); ++j) {
          BinProb bp = logistic_bin(double(z_t(n, c, i, j)), mu, s);
          out.bits_z += -std::log2(std::max(bp.p, kProbFloor));
          if (bp.p > kProbFloor) {
            double dnll_dp = -1.0 / (bp.p * M_LN2) * rate_scale;
            g_z_t(n, c, i, j) += S(dnll_dp * bp.d_v);
            nets.z_prior_mu.grad.data()[c] += S(dnll_dp * bp.d_mu);
            nets.z_prior_scale_raw.grad.data()[c] += S(dnll_dp * bp.d_scale * sigmoid(sraw));
          }
        }
    }
  out.bits_y /= n_elems;
  out.bits_z /= n_elems;

  if (phase == TrainPhase::kJoint) {
    Tensor<S> x_hat_int = clamp_coeff_range(quantize_round(x_hat_den));
    Tensor<S> g_ep;
    out.bits_r = residual_branch(residual, stats, x_int, x_hat_int, false, &g_ep, rate_scale);
    out.bits_r /= n_elems;
    residual.backward_all(g_ep);
  }

  // Distortion gradient through synthesis (physical -> normalized units).
  Tensor<S> g_x_hat_norm(x_hat_norm.n(), x_hat_norm.c(), x_hat_norm.h(), x_hat_norm.w());
  for (int n = 0; n < g_x_hat_norm.n(); ++n) {
    auto gm = g_x_hat_norm.sites_by_channels(n);
    auto hd = x_hat_den.sites_by_channels(n);
    auto xi = x_int.sites_by_channels(n);
    for (int c = 0; c < g_x_hat_norm.c(); ++c)
      gm.col(c) = (hd.col(c) - xi.col(c)) * S(2.0 * lambda / n_elems * stats.std[c]);
  }
  Tensor<S> g_y = nets.synthesis.backward(g_x_hat_norm);
  g_y.array() += g_y_t.array();  // noise relaxation passes gradients through

  Tensor<S> g_z = nets.hyper_synthesis.backward(g_hs);
  g_z.array() += g_z_t.array();
  g_y.array() += nets.hyper_analysis.backward(g_z).array();
  nets.analysis.backward(g_y);

  out.loss = joint_loss(out.bits_y + out.bits_z, out.bits_r, out.d_lossy, lambda);
  return out;
}

template <typename S>
StepStats direct_step(ResidualNets<S>& residual, const NormStats& stats,
                      const Tensor<S>& x_int) {
  const double n_elems = double(x_int.size());
  Tensor<S> zero(x_int.n(), x_int.c(), x_int.h(), x_int.w());
  Tensor<S> g_ep;
  StepStats out;
  out.bits_r = residual_branch(residual, stats, x_int, zero, true, &g_ep, 1.0 / n_elems);
  out.bits_r /= n_elems;
  residual.backward_all(g_ep);
  out.loss = out.bits_r;
  return out;
}

}  // namespace tlrc

#endif  // TLRC_TRAIN_STEP_H_
