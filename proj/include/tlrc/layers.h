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

// Minimal reverse-mode network layers: strided/transposed/masked/1x1
// convolution, leaky ReLU, GDN/IGDN, quantizers, Adam. Forward caches what
// backward needs; backward accumulates parameter gradients and returns the
// input gradient. im2col + GEMM does the heavy lifting.

#ifndef TLRC_LAYERS_H_
#define TLRC_LAYERS_H_

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "tlrc/tensor.h"

namespace tlrc {

template <typename S>
struct Parameter {
  std::string name;
  Tensor<S> value;
  Tensor<S> grad;
  bool trainable = true;

  void init(const std::string& n, int d0, int d1, int d2, int d3) {
    name = n;
    value = Tensor<S>(d0, d1, d2, d3);
    grad = Tensor<S>(d0, d1, d2, d3);
  }
  void zero_grad() { grad.set_zero(); }
};

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Raw convolution plumbing.

inline int conv_out_size(int in, int k, int stride, int pad) {
  int span = in + 2 * pad - k;
  if (span < 0) throw ShapeError("kernel larger than padded input");
  return span / stride + 1;
}

// Patch matrix: rows = ci*k*k, cols = output sites (row-major oh*Wo+ow).
template <typename S>
Matrix<S> im2col(const Tensor<S>& x, int n, int k, int stride, int pad, int ho, int wo) {
  const int ci = x.c(), h = x.h(), w = x.w();
  Matrix<S> cols = Matrix<S>::Zero(Eigen::Index(ci) * k * k, Eigen::Index(ho) * wo);
  for (int c = 0; c < ci; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        Eigen::Index row = (Eigen::Index(c) * k + kh) * k + kw;
        for (int oh = 0; oh < ho; ++oh) {
          int ih = oh * stride - pad + kh;
          if (ih < 0 || ih >= h) continue;
          for (int ow = 0; ow < wo; ++ow) {
            int iw = ow * stride - pad + kw;
            if (iw < 0 || iw >= w) continue;
            cols(row, Eigen::Index(oh) * wo + ow) = x(n, c, ih, iw);
          }
        }
      }
    }
  }
  return cols;
}

// Scatter-add transpose of im2col.
template <typename S>
void col2im_add(const Matrix<S>& cols, Tensor<S>& x, int n, int k, int stride, int pad, int ho,
                int wo) {
  const int ci = x.c(), h = x.h(), w = x.w();
  for (int c = 0; c < ci; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        Eigen::Index row = (Eigen::Index(c) * k + kh) * k + kw;
        for (int oh = 0; oh < ho; ++oh) {
          int ih = oh * stride - pad + kh;
          if (ih < 0 || ih >= h) continue;
          for (int ow = 0; ow < wo; ++ow) {
            int iw = ow * stride - pad + kw;
            if (iw < 0 || iw >= w) continue;
            x(n, c, ih, iw) += cols(row, Eigen::Index(oh) * wo + ow);
          }
        }
      }
    }
  }
}

// weight layout (co, ci, k, k); bias length co (may be null).
template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& weight, const Tensor<S>* bias, int stride,
                 int pad) {
  const int co = weight.n(), ci = weight.c(), k = weight.h();
  if (weight.w() != k) throw ShapeError("conv kernel must be square");
  if (x.c() != ci) throw ShapeError("conv input channel mismatch");
  const int ho = conv_out_size(x.h(), k, stride, pad);
  const int wo = conv_out_size(x.w(), k, stride, pad);
  Tensor<S> y(x.n(), co, ho, wo);
  Eigen::Map<const Matrix<S>> wmat(weight.data(), Eigen::Index(ci) * k * k, co);
  for (int n = 0; n < x.n(); ++n) {
    Matrix<S> cols = im2col(x, n, k, stride, pad, ho, wo);
    // weight storage is row-major (co, ci*k*k); map it column-major as
    // (ci*k*k, co) and multiply transposed.
    Eigen::Map<Matrix<S>> out(y.data() + Eigen::Index(n) * co * ho * wo, Eigen::Index(ho) * wo,
                              co);
    out.noalias() = cols.transpose() * wmat;
    if (bias) {
      for (int c = 0; c < co; ++c) out.col(c).array() += bias->data()[c];
    }
  }
  // out written as (sites, co) column-major == (co, sites) planes? No:
  // column c of `out` is channel c's plane, contiguous at offset c*ho*wo. OK.
  return y;
}

template <typename S>
void conv2d_backward(const Tensor<S>& x, const Tensor<S>& weight, const Tensor<S>& gy, int stride,
                     int pad, Tensor<S>* gx, Tensor<S>* gweight, Tensor<S>* gbias) {
  const int co = weight.n(), ci = weight.c(), k = weight.h();
  const int ho = gy.h(), wo = gy.w();
  Eigen::Map<const Matrix<S>> wmat(weight.data(), Eigen::Index(ci) * k * k, co);
  Eigen::Map<Matrix<S>> gwmat(gweight ? gweight->data() : nullptr,
                              gweight ? Eigen::Index(ci) * k * k : 0, gweight ? co : 0);
  for (int n = 0; n < x.n(); ++n) {
    Eigen::Map<const Matrix<S>> gout(gy.data() + Eigen::Index(n) * co * ho * wo,
                                     Eigen::Index(ho) * wo, co);
    if (gweight) {
      Matrix<S> cols = im2col(x, n, k, stride, pad, ho, wo);
      gwmat.noalias() += cols * gout;
    }
    if (gbias) {
      for (int c = 0; c < co; ++c) gbias->data()[c] += gout.col(c).sum();
    }
    if (gx) {
      Matrix<S> dcols(Eigen::Index(ci) * k * k, Eigen::Index(ho) * wo);
      dcols.noalias() = wmat * gout.transpose();
      col2im_add(dcols, *gx, n, k, stride, pad, ho, wo);
    }
  }
}

// Transposed convolution as the exact adjoint of conv2d: for shared weights
// <conv2d(a), b> == <a, conv2d_transpose(b)>. weight layout (cin, cout, k, k)
// where cin is this op's input channel count.
template <typename S>
Tensor<S> conv2d_transpose(const Tensor<S>& x, const Tensor<S>& weight, const Tensor<S>* bias,
                           int stride, int pad, int out_pad) {
  const int cin = weight.n(), cout = weight.c(), k = weight.h();
  if (x.c() != cin) throw ShapeError("transposed conv input channel mismatch");
  if (out_pad < 0 || out_pad >= stride)
    throw ShapeError("output padding must be in [0, stride)");
  const int ho = (x.h() - 1) * stride - 2 * pad + k + out_pad;
  const int wo = (x.w() - 1) * stride - 2 * pad + k + out_pad;
  if (ho <= 0 || wo <= 0) throw ShapeError("transposed conv output collapses");
  Tensor<S> y(x.n(), cout, ho, wo);
  Eigen::Map<const Matrix<S>> wmat(weight.data(), Eigen::Index(cout) * k * k, cin);
  for (int n = 0; n < x.n(); ++n) {
    Eigen::Map<const Matrix<S>> xin(x.data() + Eigen::Index(n) * cin * x.h() * x.w(),
                                    Eigen::Index(x.h()) * x.w(), cin);
    Matrix<S> dcols(Eigen::Index(cout) * k * k, Eigen::Index(x.h()) * x.w());
    dcols.noalias() = wmat * xin.transpose();
    col2im_add(dcols, y, n, k, stride, pad, x.h(), x.w());
    if (bias) {
      auto planes = y.sites_by_channels(n);
      for (int c = 0; c < cout; ++c) planes.col(c).array() += bias->data()[c];
    }
  }
  return y;
}

template <typename S>
void conv2d_transpose_backward(const Tensor<S>& x, const Tensor<S>& weight, const Tensor<S>& gy,
                               int stride, int pad, Tensor<S>* gx, Tensor<S>* gweight,
                               Tensor<S>* gbias) {
  const int cin = weight.n(), cout = weight.c(), k = weight.h();
  Eigen::Map<const Matrix<S>> wmat(weight.data(), Eigen::Index(cout) * k * k, cin);
  for (int n = 0; n < x.n(); ++n) {
    // gx = conv2d(gy) with the same weight read in conv orientation.
    Matrix<S> cols = im2col(gy, n, k, stride, pad, x.h(), x.w());
    if (gx) {
      Eigen::Map<Matrix<S>> gxm(gx->data() + Eigen::Index(n) * cin * x.h() * x.w(),
                                Eigen::Index(x.h()) * x.w(), cin);
      gxm.noalias() += cols.transpose() * wmat;
    }
    if (gweight) {
      Eigen::Map<const Matrix<S>> xin(x.data() + Eigen::Index(n) * cin * x.h() * x.w(),
                                      Eigen::Index(x.h()) * x.w(), cin);
      Eigen::Map<Matrix<S>> gwmat(gweight->data(), Eigen::Index(cout) * k * k, cin);
      gwmat.noalias() += cols * xin;
    }
    if (gbias) {
      auto gplanes = gy.sites_by_channels(n);
      for (int c = 0; c < cout; ++c) gbias->data()[c] += gplanes.col(c).sum();
    }
  }
}

// ---------------------------------------------------------------------------
// Layers.

template <typename S>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<S> forward(const Tensor<S>& x) = 0;
  virtual Tensor<S> backward(const Tensor<S>& gy) = 0;
  virtual void collect(std::vector<Parameter<S>*>&) {}
};

template <typename S>
class Conv2d : public Layer<S> {
 public:
  Conv2d(const std::string& name, int in_ch, int out_ch, int k, int stride, int pad, Rng& rng)
      : stride_(stride), pad_(pad) {
    weight.init(name + ".weight", out_ch, in_ch, k, k);
    bias.init(name + ".bias", 1, out_ch, 1, 1);
    double bound = std::sqrt(1.0 / (double(in_ch) * k * k));
    weight.value.fill_uniform(rng, -bound, bound);
  }

  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    return conv2d(x, weight.value, &bias.value, stride_, pad_);
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx(x_.n(), x_.c(), x_.h(), x_.w());
    conv2d_backward(x_, weight.value, gy, stride_, pad_, &gx, &weight.grad, &bias.grad);
    return gx;
  }

  void collect(std::vector<Parameter<S>*>& out) override {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  Parameter<S> weight, bias;

 private:
  int stride_, pad_;
  Tensor<S> x_;
};

template <typename S>
class ConvTranspose2d : public Layer<S> {
 public:
  ConvTranspose2d(const std::string& name, int in_ch, int out_ch, int k, int stride, int pad,
                  int out_pad, Rng& rng)
      : stride_(stride), pad_(pad), out_pad_(out_pad) {
    weight.init(name + ".weight", in_ch, out_ch, k, k);
    bias.init(name + ".bias", 1, out_ch, 1, 1);
    double bound = std::sqrt(1.0 / (double(in_ch) * k * k));
    weight.value.fill_uniform(rng, -bound, bound);
  }

  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    return conv2d_transpose(x, weight.value, &bias.value, stride_, pad_, out_pad_);
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx(x_.n(), x_.c(), x_.h(), x_.w());
    conv2d_transpose_backward(x_, weight.value, gy, stride_, pad_, &gx, &weight.grad, &bias.grad);
    return gx;
  }

  void collect(std::vector<Parameter<S>*>& out) override {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  Parameter<S> weight, bias;

 private:
  int stride_, pad_, out_pad_;
  Tensor<S> x_;
};

// Raster-causal mask: kernel taps at and after the center are zero, so the
// output at a site sees only strictly-past sites (all their channels).
template <typename S>
Tensor<S> strict_past_mask(int out_ch, int in_ch, int k) {
  Tensor<S> mask(out_ch, in_ch, k, k);
  int mid = k / 2;
  for (int co = 0; co < out_ch; ++co)
    for (int ci = 0; ci < in_ch; ++ci)
      for (int kh = 0; kh < k; ++kh)
        for (int kw = 0; kw < k; ++kw)
          mask(co, ci, kh, kw) = (kh < mid || (kh == mid && kw < mid)) ? S(1) : S(0);
  return mask;
}

template <typename S>
class MaskedConv2d : public Layer<S> {
 public:
  MaskedConv2d(const std::string& name, int in_ch, int out_ch, int k, Rng& rng)
      : pad_(k / 2), mask_(strict_past_mask<S>(out_ch, in_ch, k)) {
    weight.init(name + ".weight", out_ch, in_ch, k, k);
    bias.init(name + ".bias", 1, out_ch, 1, 1);
    double bound = std::sqrt(1.0 / (double(in_ch) * k * k));
    weight.value.fill_uniform(rng, -bound, bound);
  }

  Tensor<S> masked_weight() const {
    Tensor<S> w = weight.value;
    w.array() *= mask_.array();
    return w;
  }

  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    Tensor<S> w = masked_weight();
    return conv2d(x, w, &bias.value, 1, pad_);
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx(x_.n(), x_.c(), x_.h(), x_.w());
    Tensor<S> w = masked_weight();
    Tensor<S> gw(weight.value.n(), weight.value.c(), weight.value.h(), weight.value.w());
    conv2d_backward(x_, w, gy, 1, pad_, &gx, &gw, &bias.grad);
    weight.grad.array() += gw.array() * mask_.array();
    return gx;
  }

  void collect(std::vector<Parameter<S>*>& out) override {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  Parameter<S> weight, bias;

 private:
  int pad_;
  Tensor<S> mask_;
  Tensor<S> x_;
};

template <typename S>
class LeakyReLU : public Layer<S> {
 public:
  explicit LeakyReLU(double slope = 0.01) : slope_(S(slope)) {}

  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    Tensor<S> y = x;
    y.array() = (x.array() >= S(0)).select(x.array(), x.array() * slope_);
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx = gy;
    gx.array() = (x_.array() >= S(0)).select(gy.array(), gy.array() * slope_);
    return gx;
  }

 private:
  S slope_;
  Tensor<S> x_;
};

// Generalized divisive normalization across channels:
//   gdn:  y_c = x_c / sqrt(beta_c + sum_j gamma_{cj} x_j^2)
//   igdn: y_c = x_c * sqrt(beta_c + sum_j gamma_{cj} x_j^2)
// Positivity by reparameterization: beta = beta_r^2 + 1e-6, gamma = gamma_r^2.
template <typename S>
class Gdn : public Layer<S> {
 public:
  Gdn(const std::string& name, int channels, bool inverse, Rng& rng)
      : channels_(channels), inverse_(inverse) {
    (void)rng;
    beta_r.init(name + ".beta_r", 1, channels, 1, 1);
    gamma_r.init(name + ".gamma_r", channels, channels, 1, 1);
    for (int c = 0; c < channels; ++c) {
      beta_r.value.data()[c] = S(1);
      for (int j = 0; j < channels; ++j) {
        double g = (c == j) ? 0.1 : 1e-4;
        gamma_r.value(c, j, 0, 0) = S(std::sqrt(g));
      }
    }
  }

  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    Tensor<S> y(x.n(), x.c(), x.h(), x.w());
    denom_ = Tensor<S>(x.n(), x.c(), x.h(), x.w());
    Matrix<S> gamma = gamma_matrix();
    for (int n = 0; n < x.n(); ++n) {
      auto xin = x.sites_by_channels(n);
      auto dn = denom_.sites_by_channels(n);
      auto out = y.sites_by_channels(n);
      Matrix<S> sq = xin.array().square().matrix();
      dn.noalias() = sq * gamma.transpose();
      for (int c = 0; c < channels_; ++c) {
        S beta = beta_r.value.data()[c] * beta_r.value.data()[c] + S(1e-6);
        dn.col(c).array() += beta;
      }
      if (inverse_)
        out.array() = xin.array() * dn.array().sqrt();
      else
        out.array() = xin.array() / dn.array().sqrt();
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx(x_.n(), x_.c(), x_.h(), x_.w());
    Matrix<S> gamma = gamma_matrix();
    Matrix<S> ggamma = Matrix<S>::Zero(channels_, channels_);
    Eigen::Matrix<S, Eigen::Dynamic, 1> gbeta = Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(channels_);
    for (int n = 0; n < x_.n(); ++n) {
      auto xin = x_.sites_by_channels(n);
      auto dn = denom_.sites_by_channels(n);
      auto g = gy.sites_by_channels(n);
      auto gxm = gx.sites_by_channels(n);
      Matrix<S> sq = xin.array().square().matrix();
      Matrix<S> gd;
      if (inverse_) {
        gxm.array() = g.array() * dn.array().sqrt();
        gd = (g.array() * xin.array() * S(0.5) / dn.array().sqrt()).matrix();
      } else {
        gxm.array() = g.array() / dn.array().sqrt();
        gd = (g.array() * xin.array() * S(-0.5) / (dn.array() * dn.array().sqrt())).matrix();
      }
      gbeta += gd.colwise().sum().transpose();
      ggamma.noalias() += gd.transpose() * sq;
      Matrix<S> gsq;
      gsq.noalias() = gd * gamma;
      gxm.array() += S(2) * xin.array() * gsq.array();
    }
    for (int c = 0; c < channels_; ++c) {
      beta_r.grad.data()[c] += S(2) * beta_r.value.data()[c] * gbeta[c];
      for (int j = 0; j < channels_; ++j)
        gamma_r.grad(c, j, 0, 0) += S(2) * gamma_r.value(c, j, 0, 0) * ggamma(c, j);
    }
    return gx;
  }

  void collect(std::vector<Parameter<S>*>& out) override {
    out.push_back(&beta_r);
    out.push_back(&gamma_r);
  }

  Parameter<S> beta_r, gamma_r;

 private:
  Matrix<S> gamma_matrix() const {
    Matrix<S> g(channels_, channels_);
    for (int c = 0; c < channels_; ++c)
      for (int j = 0; j < channels_; ++j) {
        S r = gamma_r.value(c, j, 0, 0);
        g(c, j) = r * r;
      }
    return g;
  }

  int channels_;
  bool inverse_;
  Tensor<S> x_, denom_;
};

template <typename S>
class Sequential {
 public:
  void add(std::unique_ptr<Layer<S>> layer) { layers_.push_back(std::move(layer)); }

  Tensor<S> forward(const Tensor<S>& x) {
    Tensor<S> cur = x;
    for (auto& l : layers_) {
      cur = l->forward(cur);
#ifndef NDEBUG
      if (!cur.all_finite()) throw NonFiniteLoss("non-finite activation");
#endif
    }
    return cur;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    Tensor<S> cur = gy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
  }

  void collect(std::vector<Parameter<S>*>& out) {
    for (auto& l : layers_) l->collect(out);
  }

  std::vector<std::unique_ptr<Layer<S>>>& layers() { return layers_; }

 private:
  std::vector<std::unique_ptr<Layer<S>>> layers_;
};

// ---------------------------------------------------------------------------
// Quantizers.

enum class QuantizeMode { kNoise, kRound, kRoundSte };

// Round half to even, elementwise.
template <typename S>
Tensor<S> quantize_round(const Tensor<S>& x) {
  Tensor<S> y = x;
  for (Eigen::Index i = 0; i < y.size(); ++i) y.array()[i] = S(std::nearbyint(double(x.array()[i])));
  return y;
}

template <typename S>
Tensor<S> quantize_noise(const Tensor<S>& x, Rng& rng) {
  Tensor<S> y = x;
  for (Eigen::Index i = 0; i < y.size(); ++i) y.array()[i] += S(rng.uniform() - 0.5);
  return y;
}

// Straight-through rounding as a layer: round forward, identity backward.
template <typename S>
class RoundSte : public Layer<S> {
 public:
  Tensor<S> forward(const Tensor<S>& x) override { return quantize_round(x); }
  Tensor<S> backward(const Tensor<S>& gy) override { return gy; }
};

// kRoundSte rounds forward; its backward is the identity, which in this
// explicit-chain setup means passing the output gradient straight through.
template <typename S>
Tensor<S> quantize(const Tensor<S>& x, QuantizeMode mode, Rng* rng = nullptr) {
  switch (mode) {
    case QuantizeMode::kNoise:
      if (!rng) throw Error("noise quantizer requires a generator");
      return quantize_noise(x, *rng);
    case QuantizeMode::kRound:
    case QuantizeMode::kRoundSte:
      return quantize_round(x);
  }
  throw Error("bad quantize mode");
}

// ---------------------------------------------------------------------------
// Adam.

template <typename S>
struct AdamState {
  int64_t step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<Tensor<S>> m, v;

  void ensure(const std::vector<Parameter<S>*>& params) {
    if (!m.empty()) return;
    for (auto* p : params) {
      m.emplace_back(p->value.n(), p->value.c(), p->value.h(), p->value.w());
      v.emplace_back(p->value.n(), p->value.c(), p->value.h(), p->value.w());
    }
  }
};

template <typename S>
void adam_step(std::vector<Parameter<S>*>& params, AdamState<S>& state, double lr) {
  state.ensure(params);
  if (state.m.size() != params.size()) throw ShapeError("Adam state/parameter count mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter<S>& p = *params[i];
    if (!p.trainable) continue;
    if (p.grad.size() != p.value.size()) throw ShapeError("gradient shape mismatch");
    auto& m = state.m[i].array();
    auto& v = state.v[i].array();
    m = S(state.beta1) * m + S(1.0 - state.beta1) * p.grad.array();
    v = S(state.beta2) * v + S(1.0 - state.beta2) * p.grad.array().square();
    p.value.array() -=
        S(lr) * (m / S(bc1)) / ((v / S(bc2)).sqrt() + S(state.eps));
  }
}

// ---------------------------------------------------------------------------
// Channel concat/split helpers.

template <typename S>
Tensor<S> concat_channels(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
    throw ShapeError("concat requires matching spatial dims");
  Tensor<S> out(a.n(), a.c() + b.c(), a.h(), a.w());
  for (int n = 0; n < a.n(); ++n) {
    out.sites_by_channels(n).leftCols(a.c()) = a.sites_by_channels(n);
    out.sites_by_channels(n).rightCols(b.c()) = b.sites_by_channels(n);
  }
  return out;
}

template <typename S>
Tensor<S> slice_channels(const Tensor<S>& x, int first, int count) {
  if (first < 0 || first + count > x.c()) throw ShapeError("channel slice out of range");
  Tensor<S> out(x.n(), count, x.h(), x.w());
  for (int n = 0; n < x.n(); ++n)
    out.sites_by_channels(n) = x.sites_by_channels(n).middleCols(first, count);
  return out;
}

}  // namespace tlrc

#endif  // TLRC_LAYERS_H_
