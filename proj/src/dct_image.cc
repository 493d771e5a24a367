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

#include "tlrc/dct_image.h"

#include <array>
#include <cmath>

#include "tlrc/errors.h"

namespace tlrc {

namespace {

struct ZigzagTables {
  std::array<std::pair<int, int>, 64> to_rc;
  std::array<int, 64> from_rc;

  ZigzagTables() {
    // Diagonal walk from DC toward the highest frequency.
    int r = 0, c = 0;
    for (int k = 0; k < 64; ++k) {
      to_rc[k] = {r, c};
      from_rc[r * 8 + c] = k;
      if ((r + c) % 2 == 0) {  // moving up-right
        if (c == 7)
          ++r;
        else if (r == 0)
          ++c;
        else {
          --r;
          ++c;
        }
      } else {  // moving down-left
        if (r == 7)
          ++c;
        else if (c == 0)
          ++r;
        else {
          ++r;
          --c;
        }
      }
    }
  }
};

const ZigzagTables& tables() {
  static const ZigzagTables t;
  return t;
}

}  // namespace

std::pair<int, int> zigzag_index(int k) {
  if (k < 0 || k > 63) throw OutOfRange("zigzag index outside 0..63");
  return tables().to_rc[k];
}

int inverse_zigzag(int row, int col) {
  if (row < 0 || row > 7 || col < 0 || col > 7)
    throw OutOfRange("zigzag position outside 8x8 grid");
  return tables().from_rc[row * 8 + col];
}

DctImage blocks_to_dct_image(const CoeffMatrix& plane, int component_id) {
  if (plane.rows() % 8 != 0 || plane.cols() % 8 != 0 || plane.rows() == 0 || plane.cols() == 0)
    throw ShapeError("coefficient plane dimensions must be nonzero multiples of 8");
  DctImage img;
  img.component_id = component_id;
  img.height = int(plane.rows()) / 8;
  img.width = int(plane.cols()) / 8;
  img.data.resize(Eigen::Index(img.height) * img.width, 64);
  for (int i = 0; i < img.height; ++i) {
    for (int j = 0; j < img.width; ++j) {
      Eigen::Index site = Eigen::Index(i) * img.width + j;
      for (int k = 0; k < 64; ++k) {
        auto [r, c] = tables().to_rc[k];
        img.data(site, k) = plane(i * 8 + r, j * 8 + c);
      }
    }
  }
  return img;
}

CoeffMatrix dct_image_to_blocks(const DctImage& img) {
  if (img.data.rows() != Eigen::Index(img.height) * img.width || img.height <= 0 ||
      img.width <= 0)
    throw ShapeError("DCT image data does not match its dimensions");
  CoeffMatrix plane(img.height * 8, img.width * 8);
  for (int i = 0; i < img.height; ++i) {
    for (int j = 0; j < img.width; ++j) {
      Eigen::Index site = Eigen::Index(i) * img.width + j;
      for (int k = 0; k < 64; ++k) {
        auto [r, c] = tables().to_rc[k];
        plane(i * 8 + r, j * 8 + c) = img.data(site, k);
      }
    }
  }
  return plane;
}

template <typename S>
Tensor<S> stack_to_tensor(const std::vector<const DctImage*>& images) {
  if (images.empty()) throw ShapeError("cannot stack zero DCT images");
  int h = images[0]->height, w = images[0]->width;
  for (const DctImage* im : images)
    if (im->height != h || im->width != w)
      throw ShapeError("stacked DCT images must share dimensions");
  Tensor<S> t(1, int(images.size()) * 64, h, w);
  for (size_t m = 0; m < images.size(); ++m) {
    for (int c = 0; c < 64; ++c) {
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
          t(0, int(m) * 64 + c, i, j) = S(images[m]->data(Eigen::Index(i) * w + j, c));
        }
      }
    }
  }
  return t;
}

template <typename S>
Tensor<S> normalize(const Tensor<S>& t, const NormStats& stats) {
  if (t.c() != stats.channels()) throw StatsMismatch("normalization channel count mismatch");
  Tensor<S> out(t.n(), t.c(), t.h(), t.w());
  for (int n = 0; n < t.n(); ++n) {
    auto src = t.sites_by_channels(n);
    auto dst = out.sites_by_channels(n);
    for (int c = 0; c < t.c(); ++c)
      dst.col(c) = (src.col(c).array() - S(stats.mean[c])) / S(stats.std[c]);
  }
  return out;
}

template <typename S>
Tensor<S> denormalize(const Tensor<S>& t, const NormStats& stats) {
  if (t.c() != stats.channels()) throw StatsMismatch("normalization channel count mismatch");
  Tensor<S> out(t.n(), t.c(), t.h(), t.w());
  for (int n = 0; n < t.n(); ++n) {
    auto src = t.sites_by_channels(n);
    auto dst = out.sites_by_channels(n);
    for (int c = 0; c < t.c(); ++c)
      dst.col(c) = src.col(c).array() * S(stats.std[c]) + S(stats.mean[c]);
  }
  return out;
}

NormStats compute_norm_stats(const std::vector<std::vector<const DctImage*>>& corpus) {
  if (corpus.empty()) throw EmptyCorpus("no images for statistics");
  size_t n_comp = corpus[0].size();
  int channels = int(n_comp) * 64;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(channels);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(channels);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(channels);
  for (const auto& group : corpus) {
    if (group.size() != n_comp) throw ShapeError("inconsistent component count in corpus");
    for (size_t m = 0; m < n_comp; ++m) {
      const DctImage& im = *group[m];
      for (int c = 0; c < 64; ++c) {
        int ch = int(m) * 64 + c;
        // Integer-valued sums stay exact in double, so accumulation order
        // cannot change the result.
        double s = 0, s2 = 0;
        for (Eigen::Index site = 0; site < im.data.rows(); ++site) {
          double v = im.data(site, c);
          s += v;
          s2 += v * v;
        }
        sum[ch] += s;
        sum_sq[ch] += s2;
        count[ch] += double(im.data.rows());
      }
    }
  }
  NormStats stats;
  stats.mean.resize(channels);
  stats.std.resize(channels);
  for (int ch = 0; ch < channels; ++ch) {
    if (count[ch] == 0) throw EmptyCorpus("no sites for statistics");
    double mean = sum[ch] / count[ch];
    double var = sum_sq[ch] / count[ch] - mean * mean;
    stats.mean[ch] = mean;
    stats.std[ch] = std::max(std::sqrt(std::max(var, 0.0)), kNormStdFloor);
  }
  return stats;
}

template Tensor<float> stack_to_tensor<float>(const std::vector<const DctImage*>&);
template Tensor<double> stack_to_tensor<double>(const std::vector<const DctImage*>&);
template Tensor<float> normalize<float>(const Tensor<float>&, const NormStats&);
template Tensor<double> normalize<double>(const Tensor<double>&, const NormStats&);
template Tensor<float> denormalize<float>(const Tensor<float>&, const NormStats&);
template Tensor<double> denormalize<double>(const Tensor<double>&, const NormStats&);

}  // namespace tlrc
