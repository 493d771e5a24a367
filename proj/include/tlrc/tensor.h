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

// Dense NCHW tensor on Eigen storage, templated on scalar so the same
// network code runs in single precision for training and double precision
// for finite-difference checks.

#ifndef TLRC_TENSOR_H_
#define TLRC_TENSOR_H_

#include <Eigen/Core>
#include <cmath>

#include "tlrc/errors.h"
#include "tlrc/rng.h"

namespace tlrc {

template <typename S>
class Tensor {
 public:
  using Storage = Eigen::Array<S, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>>;
  using ConstMatrixMap = Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>>;

  Tensor() = default;
  Tensor(int n, int c, int h, int w) : n_(n), c_(c), h_(h), w_(w) {
    if (n < 0 || c < 0 || h < 0 || w < 0) throw ShapeError("negative tensor dimension");
    data_ = Storage::Zero(Eigen::Index(n) * c * h * w);
  }

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  Eigen::Index size() const { return data_.size(); }
  Eigen::Index plane_size() const { return Eigen::Index(h_) * w_; }

  bool same_shape(const Tensor& o) const {
    return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }

  S& operator()(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
  S operator()(int n, int c, int h, int w) const { return data_[index(n, c, h, w)]; }

  Storage& array() { return data_; }
  const Storage& array() const { return data_; }
  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }

  // Sample n viewed as an (H*W) x C column-major matrix: column c is the
  // contiguous channel plane.
  MatrixMap sites_by_channels(int n) {
    return MatrixMap(data_.data() + Eigen::Index(n) * c_ * plane_size(), plane_size(), c_);
  }
  ConstMatrixMap sites_by_channels(int n) const {
    return ConstMatrixMap(data_.data() + Eigen::Index(n) * c_ * plane_size(), plane_size(), c_);
  }

  void set_zero() { data_.setZero(); }

  void fill_uniform(Rng& rng, double lo, double hi) {
    for (Eigen::Index i = 0; i < data_.size(); ++i) data_[i] = S(rng.uniform(lo, hi));
  }
  void fill_normal(Rng& rng, double stddev) {
    for (Eigen::Index i = 0; i < data_.size(); ++i) data_[i] = S(rng.normal() * stddev);
  }

  bool all_finite() const { return data_.isFinite().all(); }

  template <typename T>
  Tensor<T> cast() const {
    Tensor<T> out(n_, c_, h_, w_);
    out.array() = data_.template cast<T>();
    return out;
  }

 private:
  Eigen::Index index(int n, int c, int h, int w) const {
    return ((Eigen::Index(n) * c_ + c) * h_ + h) * w_ + w;
  }

  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  Storage data_;
};

template <typename S>
void check_same_shape(const Tensor<S>& a, const Tensor<S>& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string("shape mismatch in ") + what);
}

}  // namespace tlrc

#endif  // TLRC_TENSOR_H_
