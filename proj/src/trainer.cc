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

#include "tlrc/trainer.h"

#include <algorithm>
#include <filesystem>
#include <iostream>

namespace tlrc {

namespace {

namespace fs = std::filesystem;

bool is_jpeg_name(const fs::path& p) {
  std::string ext = p.extension().string();
  for (auto& ch : ext) ch = char(std::tolower(ch));
  return ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

Dataset ingest_corpus(const std::string& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw DataError("corpus directory not found: " + dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_jpeg_name(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  Dataset ds;
  ByteWriter digest_acc;
  auto group_set = [&](int g) -> Dataset::GroupSet& {
    for (auto& s : ds.groups)
      if (s.group_size == g) return s;
    ds.groups.push_back({g, {}, {}});
    return ds.groups.back();
  };

  std::vector<std::vector<std::vector<DctImage>>> keep_alive(4);
  for (const auto& f : files) {
    Bytes bytes = read_file(f.string());
    JpegImage img;
    try {
      img = parse_jpeg(bytes);
    } catch (const UnsupportedJpeg&) {
      ++ds.skipped_files;
      continue;
    } catch (const CorruptStream&) {
      ++ds.skipped_files;
      continue;
    }
    ++ds.used_files;
    digest_acc.raw(img.original_file_digest.data(), 32);
    for (const ComponentGroup& group : derive_groups(img)) {
      const int g = int(group.comp_indices.size());
      group_set(g).images.push_back(group_tensor(img, group));
      std::vector<DctImage> dct;
      for (int idx : group.comp_indices)
        dct.push_back(blocks_to_dct_image(img.coeff_planes[idx], img.frame.components[idx].id));
      keep_alive[size_t(g)].push_back(std::move(dct));
    }
  }
  if (ds.used_files == 0) throw EmptyCorpus("no usable JPEG files in " + dir);
  ds.corpus_digest = sha256(digest_acc.bytes());

  for (auto& set : ds.groups) {
    std::vector<std::vector<const DctImage*>> corpus;
    for (auto& dct : keep_alive[size_t(set.group_size)]) {
      std::vector<const DctImage*> ptrs;
      for (auto& d : dct) ptrs.push_back(&d);
      corpus.push_back(std::move(ptrs));
    }
    set.stats = compute_norm_stats(corpus);
  }
  std::sort(ds.groups.begin(), ds.groups.end(),
            [](const auto& a, const auto& b) { return a.group_size < b.group_size; });
  return ds;
}

Tensor<float> sample_tile(const Dataset::GroupSet& set, int tile, Rng& rng) {
  if (set.images.empty()) throw EmptyCorpus("no images in group set");
  const Tensor<float>& img =
      set.images[size_t(rng.uniform_int(0, int64_t(set.images.size()) - 1))];
  const Tensor<float>* src = &img;
  Tensor<float> padded;
  if (img.h() < tile || img.w() < tile) {
    padded = pad_replicate(img, tile);
    src = &padded;
  }
  int max_i = src->h() - tile, max_j = src->w() - tile;
  int oi = int(rng.uniform_int(0, max_i));
  int oj = int(rng.uniform_int(0, max_j));
  Tensor<float> out(1, src->c(), tile, tile);
  for (int c = 0; c < src->c(); ++c)
    for (int i = 0; i < tile; ++i)
      for (int j = 0; j < tile; ++j) out(0, c, i, j) = (*src)(0, c, oi + i, oj + j);
  return out;
}

namespace {

void train_tower(Tower& tower, const Dataset::GroupSet& set, const TrainConfig& cfg,
                 const std::function<void(const std::string&)>& log) {
  std::vector<Parameter<float>*> params;
  if (tower.direct) {
    tower.residual->collect(params);
  } else if (cfg.phase == TrainPhase::kLossyPretrain) {
    tower.lossy->collect(params);
  } else {
    tower.lossy->collect(params);
    tower.residual->collect(params);
  }
  AdamState<float> adam;
  Rng rng(cfg.seed ^ (uint64_t(tower.group_size) << 32) ^ (tower.direct ? 0x9e3779b9 : 0));

  std::vector<Tensor<float>> snapshot;
  auto take_snapshot = [&] {
    snapshot.clear();
    for (auto* p : params) snapshot.push_back(p->value);
  };
  take_snapshot();

  const int decay_step = int(cfg.decay_point * cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    Tensor<float> batch(cfg.batch_size, set.group_size * 64, cfg.tile_size, cfg.tile_size);
    for (int b = 0; b < cfg.batch_size; ++b) {
      Tensor<float> tile = sample_tile(set, cfg.tile_size, rng);
      for (int c = 0; c < batch.c(); ++c)
        for (int i = 0; i < cfg.tile_size; ++i)
          for (int j = 0; j < cfg.tile_size; ++j) batch(b, c, i, j) = tile(0, c, i, j);
    }
    for (auto* p : params) p->zero_grad();
    StepStats stats = tower.direct
                          ? direct_step(*tower.residual, tower.stats, batch)
                          : joint_step(*tower.lossy, *tower.residual, tower.stats, batch,
                                       cfg.phase, cfg.lambda, rng);
    if (!std::isfinite(stats.loss)) {
      for (size_t i = 0; i < params.size(); ++i) params[i]->value = snapshot[i];
      throw NonFiniteLoss("non-finite loss at step " + std::to_string(step));
    }
    double lr = step < decay_step ? cfg.lr_initial : cfg.lr_decayed;
    adam_step(params, adam, lr);
    if (log && cfg.log_every > 0 && (step % cfg.log_every == 0 || step + 1 == cfg.steps)) {
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "tower g%d%s step %d/%d loss %.4f (y %.4f z %.4f r %.4f D %.2f)",
                    tower.group_size, tower.direct ? " direct" : "", step + 1, cfg.steps,
                    stats.loss, stats.bits_y, stats.bits_z, stats.bits_r, stats.d_lossy);
      log(buf);
      take_snapshot();
    }
  }
}

}  // namespace

CodecModel train(const TrainConfig& cfg) {
  if (cfg.tile_size % kPadMultiple != 0)
    throw DataError("tile size must be a multiple of 16 sites");
  Dataset ds = ingest_corpus(cfg.corpus_dir);

  CodecModel model;
  if (!cfg.resume_path.empty()) {
    model = read_model(read_file(cfg.resume_path));
  } else {
    if (cfg.phase == TrainPhase::kJoint && !cfg.from_scratch)
      throw DataError(
          "joint phase requires a pretrain checkpoint or an explicit from-scratch run");
    std::vector<int> group_sizes;
    for (const auto& s : ds.groups) group_sizes.push_back(s.group_size);
    model = CodecModel::fresh(cfg.latent_channels, cfg.hyper_channels, cfg.mixtures, cfg.lambda,
                              group_sizes, cfg.seed);
    for (const auto& s : ds.groups) {
      model.find_tower(s.group_size, false)->stats = s.stats;
      model.find_tower(s.group_size, true)->stats = s.stats;
    }
  }

  auto log = cfg.log ? cfg.log : [](const std::string& s) { std::cerr << s << "\n"; };
  for (const auto& set : ds.groups) {
    if (cfg.train_direct && cfg.phase == TrainPhase::kJoint) {
      Tower* direct = model.find_tower(set.group_size, true);
      if (direct) train_tower(*direct, set, cfg, log);
    }
    Tower* full = model.find_tower(set.group_size, false);
    if (full) train_tower(*full, set, cfg, log);
  }

  if (cfg.phase == TrainPhase::kLossyPretrain)
    model.meta.pretrain_steps += uint64_t(cfg.steps);
  else
    model.meta.joint_steps += uint64_t(cfg.steps);
  model.meta.seed = cfg.seed;
  model.meta.lambda = cfg.lambda;
  model.meta.corpus_digest = ds.corpus_digest;
  model.lambda = cfg.lambda;
  return model;
}

}  // namespace tlrc
