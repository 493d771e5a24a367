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

// The ".tlrm" model file: codec configuration, per-tower normalization
// statistics and named parameter tensors, training metadata, checksum.
//
// A tower is the set of networks for one jointly-coded component group size
// (1, 2, or 3 components). Direct towers carry only the residual branch and
// code original coefficients under a Laplace head.

#ifndef TLRC_MODEL_H_
#define TLRC_MODEL_H_

#include <memory>
#include <optional>
#include <vector>

#include "tlrc/lossy_codec.h"
#include "tlrc/residual_codec.h"

namespace tlrc {

struct Tower {
  int group_size = 1;
  bool direct = false;
  NormStats stats;
  std::unique_ptr<LossyNets<float>> lossy;        // absent in direct towers
  std::unique_ptr<ResidualNets<float>> residual;

  void collect(std::vector<Parameter<float>*>& out) {
    if (lossy) lossy->collect(out);
    residual->collect(out);
  }
};

struct TrainMeta {
  uint64_t pretrain_steps = 0;
  uint64_t joint_steps = 0;
  uint64_t seed = 0;
  double lambda = 0.03;
  std::array<uint8_t, 32> corpus_digest{};
};

struct CodecModel {
  int latent_channels = 192;
  int hyper_channels = 128;
  int mixtures = 5;
  double lambda = 0.03;
  TrainMeta meta;
  std::vector<Tower> towers;

  Tower* find_tower(int group_size, bool direct);
  const Tower* find_tower(int group_size, bool direct) const;

  // Deterministically initialized towers for the given group sizes (each with
  // a full and a direct variant), statistics set to identity until training.
  static CodecModel fresh(int latent_channels, int hyper_channels, int mixtures, double lambda,
                          const std::vector<int>& group_sizes, uint64_t seed);
};

Bytes write_model(const CodecModel& model);
CodecModel read_model(const Bytes& bytes);

// Identity hashes stored in containers so decode can refuse a mismatched
// model (a wrong-weights autoregressive decode desyncs silently otherwise).
std::array<uint8_t, 32> model_digest(const Bytes& model_bytes);
std::array<uint8_t, 32> stats_digest(const CodecModel& model);

}  // namespace tlrc

#endif  // TLRC_MODEL_H_
