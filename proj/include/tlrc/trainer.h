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

// Corpus ingestion, the two-phase training loop (lossy pretrain, then joint
// lossy + residual), and the per-step loss assembly.

#ifndef TLRC_TRAINER_H_
#define TLRC_TRAINER_H_

#include <functional>
#include <string>
#include <vector>

#include "tlrc/model.h"
#include "tlrc/pipeline.h"
#include "tlrc/train_step.h"

namespace tlrc {

struct TrainConfig {
  TrainPhase phase = TrainPhase::kJoint;
  double lambda = 0.03;
  int batch_size = 4;    // reference regime uses 16
  int tile_size = 32;    // DCT sites; must be a multiple of 16
  int steps = 2000;
  double lr_initial = 1e-4;
  double lr_decayed = 1e-5;
  double decay_point = 0.9;  // fraction of steps at which lr decays
  uint64_t seed = 1;
  std::string corpus_dir;
  std::string resume_path;   // pretrain checkpoint for the joint phase
  bool from_scratch = false;
  bool train_direct = false;  // also train the direct (no-lossy) towers
  int latent_channels = 192;
  int hyper_channels = 128;
  int mixtures = 5;
  int log_every = 100;
  std::function<void(const std::string&)> log;  // optional sink
};

struct Dataset {
  struct GroupSet {
    int group_size = 1;
    std::vector<Tensor<float>> images;  // integer-valued (1, n*64, H, W)
    NormStats stats;
  };
  std::vector<GroupSet> groups;
  int skipped_files = 0;
  int used_files = 0;
  std::array<uint8_t, 32> corpus_digest{};
};

// Parses every baseline JPEG in dir (sorted order), packing component groups.
// Unsupported files are skipped and counted. Throws EmptyCorpus if nothing
// usable remains.
Dataset ingest_corpus(const std::string& dir);

// Uniform image pick, then an aligned tile crop; images smaller than the
// tile are replicate-padded at the far edges.
Tensor<float> sample_tile(const Dataset::GroupSet& set, int tile, Rng& rng);

// Runs the configured phase over every tower the corpus supports and returns
// the trained model. Resume semantics: the joint phase loads resume_path
// unless from_scratch is set.
CodecModel train(const TrainConfig& config);

}  // namespace tlrc

#endif  // TLRC_TRAINER_H_
