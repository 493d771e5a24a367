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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.h"
#include "tlrc/dct_image.h"
#include "tlrc/errors.h"

using namespace tlrc;
using namespace tlrc::testing;

// The standard zigzag traversal, row*8+col per zigzag index. Held here as an
// independent cross-check of the computed tables.
static const int kZigzagReference[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

TEST_CASE("zigzag endpoints and early entries") {
  CHECK(zigzag_index(0) == std::pair<int, int>{0, 0});
  CHECK(zigzag_index(63) == std::pair<int, int>{7, 7});
  CHECK(zigzag_index(1) == std::pair<int, int>{0, 1});
  CHECK(zigzag_index(2) == std::pair<int, int>{1, 0});
  CHECK(zigzag_index(5) == std::pair<int, int>{0, 2});
}

TEST_CASE("zigzag agrees with the reference table and is a bijection") {
  for (int k = 0; k < 64; ++k) {
    auto [r, c] = zigzag_index(k);
    CHECK(r * 8 + c == kZigzagReference[k]);
    CHECK(inverse_zigzag(r, c) == k);
  }
  CHECK_THROWS_AS(zigzag_index(64), OutOfRange);
  CHECK_THROWS_AS(zigzag_index(-1), OutOfRange);
  CHECK_THROWS_AS(inverse_zigzag(8, 0), OutOfRange);
}

TEST_CASE("blocks_to_dct_image shape and zigzag gather") {
  CoeffPlane plane = CoeffPlane::Zero(16, 16);
  DctImage img = blocks_to_dct_image(plane);
  CHECK(img.height == 2);
  CHECK(img.width == 2);
  CHECK(img.data.rows() == 4);

  plane(0, 1) = 7;  // block (0,0), natural position (0,1) = zigzag 1
  img = blocks_to_dct_image(plane);
  CHECK(img.data(0, 1) == 7);
  int nonzero = 0;
  for (int s = 0; s < 4; ++s)
    for (int c = 0; c < 64; ++c)
      if (img.data(s, c) != 0) ++nonzero;
  CHECK(nonzero == 1);

  CoeffPlane zeros = CoeffPlane::Zero(8, 24);
  DctImage zimg = blocks_to_dct_image(zeros);
  CHECK((zimg.data.array() == 0).all());
}

TEST_CASE("dct_image_to_blocks inverts blocks_to_dct_image") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    int bh = 1 + int(rng.uniform_int(0, 4));
    int bw = 1 + int(rng.uniform_int(0, 4));
    CoeffPlane plane = random_plane(rng, bh, bw, 0.4);
    DctImage img = blocks_to_dct_image(plane, 1);
    CHECK(dct_image_to_blocks(img) == plane);
    CHECK(blocks_to_dct_image(dct_image_to_blocks(img), 1).data == img.data);
  }
}

TEST_CASE("single-site DC placement") {
  DctImage img;
  img.component_id = 0;
  img.height = 1;
  img.width = 1;
  img.data.setZero(1, 64);
  img.data(0, 0) = -5;
  CoeffMatrix plane = dct_image_to_blocks(img);
  CHECK(plane.rows() == 8);
  CHECK(plane(0, 0) == -5);
  CHECK(plane.cwiseAbs().sum() == 5);
}

TEST_CASE("malformed shapes raise ShapeError") {
  CoeffPlane bad(12, 16);
  CHECK_THROWS_AS(blocks_to_dct_image(bad), ShapeError);
  DctImage img;
  img.height = 2;
  img.width = 2;
  img.data.setZero(3, 64);  // 3 != 2*2
  CHECK_THROWS_AS(dct_image_to_blocks(img), ShapeError);
}

TEST_CASE("normalize: identity stats and exact inverse") {
  Rng rng(11);
  Tensor<float> t(1, 64, 4, 4);
  t.fill_uniform(rng, -100, 100);

  NormStats identity;
  identity.mean = Eigen::VectorXd::Zero(64);
  identity.std = Eigen::VectorXd::Ones(64);
  Tensor<float> same = normalize(t, identity);
  CHECK(float((same.array() - t.array()).abs().maxCoeff()) == 0.0f);

  NormStats stats;
  stats.mean = Eigen::VectorXd::Random(64) * 50.0;
  stats.std = Eigen::VectorXd::Random(64).cwiseAbs() * 10.0 +
              Eigen::VectorXd::Constant(64, 0.5);
  Tensor<double> td = t.cast<double>();
  Tensor<double> round = denormalize(normalize(td, stats), stats);
  CHECK(double((round.array() - td.array()).abs().maxCoeff()) < 1e-9);
}

TEST_CASE("normalize rejects mismatched channel counts") {
  NormStats stats;
  stats.mean = Eigen::VectorXd::Zero(64);
  stats.std = Eigen::VectorXd::Ones(64);
  Tensor<float> t(1, 128, 2, 2);
  CHECK_THROWS_AS(normalize(t, stats), StatsMismatch);
}

TEST_CASE("compute_norm_stats: floor, two-point distribution, permutation invariance") {
  DctImage a;
  a.height = 1;
  a.width = 2;
  a.data.setZero(2, 64);
  std::vector<std::vector<const DctImage*>> zeros = {{&a}};
  NormStats s0 = compute_norm_stats(zeros);
  CHECK(s0.mean[0] == 0.0);
  CHECK(s0.std[0] == kNormStdFloor);

  DctImage b = a;
  b.data(0, 0) = -1;
  b.data(1, 0) = 1;
  NormStats s1 = compute_norm_stats({{&b}});
  CHECK(s1.mean[0] == 0.0);
  CHECK(s1.std[0] == 1.0);  // population convention

  Rng rng(3);
  DctImage c = a, d = a;
  for (int site = 0; site < 2; ++site)
    for (int ch = 0; ch < 64; ++ch) {
      c.data(site, ch) = int32_t(rng.uniform_int(-500, 500));
      d.data(site, ch) = int32_t(rng.uniform_int(-500, 500));
    }
  NormStats fwd = compute_norm_stats({{&c}, {&d}});
  NormStats rev = compute_norm_stats({{&d}, {&c}});
  CHECK(fwd.mean == rev.mean);
  CHECK(fwd.std == rev.std);

  CHECK_THROWS_AS(compute_norm_stats({}), EmptyCorpus);
}

TEST_CASE("stack_to_tensor lays out components channel-major") {
  DctImage a, b;
  a.height = b.height = 1;
  a.width = b.width = 1;
  a.data.setZero(1, 64);
  b.data.setZero(1, 64);
  a.data(0, 3) = 11;
  b.data(0, 5) = -7;
  Tensor<float> t = stack_to_tensor<float>({&a, &b});
  CHECK(t.c() == 128);
  CHECK(t(0, 3, 0, 0) == 11.0f);
  CHECK(t(0, 64 + 5, 0, 0) == -7.0f);
}
