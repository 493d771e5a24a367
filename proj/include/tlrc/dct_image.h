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

// Conversion between block-layout coefficient planes and frequency-channel
// DCT images: one channel per zigzag index, one spatial site per 8x8 block.

#ifndef TLRC_DCT_IMAGE_H_
#define TLRC_DCT_IMAGE_H_

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "tlrc/tensor.h"

namespace tlrc {

using CoeffMatrix = Eigen::Matrix<int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Zigzag index k (0..63) <-> (row, col) on the 8x8 frequency grid.
std::pair<int, int> zigzag_index(int k);
int inverse_zigzag(int row, int col);

struct DctImage {
  int component_id = 0;
  int height = 0;  // sites (blocks)
  int width = 0;
  // Row = site in raster order, column = zigzag channel.
  Eigen::Matrix<int32_t, Eigen::Dynamic, 64, Eigen::RowMajor> data;

  int32_t& at(int i, int j, int c) { return data(Eigen::Index(i) * width + j, c); }
  int32_t at(int i, int j, int c) const { return data(Eigen::Index(i) * width + j, c); }
};

DctImage blocks_to_dct_image(const CoeffMatrix& plane, int component_id = 0);
CoeffMatrix dct_image_to_blocks(const DctImage& img);

// Per-channel input scaling for the networks. Channel count is 64 times the
// number of jointly coded components.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  int channels() const { return int(mean.size()); }
};

inline constexpr double kNormStdFloor = 1e-3;

// Stacks equal-sized DCT images channel-wise into a (1, n*64, H, W) tensor.
template <typename S>
Tensor<S> stack_to_tensor(const std::vector<const DctImage*>& images);

// (v - mean_c) / std_c per channel; denormalize is the exact inverse.
template <typename S>
Tensor<S> normalize(const Tensor<S>& t, const NormStats& stats);
template <typename S>
Tensor<S> denormalize(const Tensor<S>& t, const NormStats& stats);

NormStats compute_norm_stats(const std::vector<std::vector<const DctImage*>>& corpus);

}  // namespace tlrc

#endif  // TLRC_DCT_IMAGE_H_
