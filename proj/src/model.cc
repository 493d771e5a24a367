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

#include "tlrc/model.h"

#include <cstring>

namespace tlrc {

namespace {

constexpr char kMagic[4] = {'T', 'L', 'R', 'M'};
constexpr uint16_t kVersion = 1;

std::string tower_prefix(int group_size, bool direct) {
  return "g" + std::to_string(group_size) + (direct ? "d." : ".");
}

Tower make_tower(int group_size, bool direct, int latent_channels, int hyper_channels,
                 int mixtures, Rng& rng) {
  Tower t;
  t.group_size = group_size;
  t.direct = direct;
  const int channels = group_size * 64;
  t.stats.mean = Eigen::VectorXd::Zero(channels);
  t.stats.std = Eigen::VectorXd::Ones(channels);
  std::string prefix = tower_prefix(group_size, direct);
  if (!direct) {
    LossyConfig lc;
    lc.input_channels = channels;
    lc.latent_channels = latent_channels;
    lc.hyper_channels = hyper_channels;
    t.lossy = std::make_unique<LossyNets<float>>(prefix + "lo.", lc, rng);
  }
  ResidualConfig rc;
  rc.components = group_size;
  rc.mixtures = direct ? 1 : mixtures;
  rc.direct_mode = direct;
  t.residual = std::make_unique<ResidualNets<float>>(prefix + "rs.", rc, rng);
  return t;
}

}  // namespace

Tower* CodecModel::find_tower(int group_size, bool direct) {
  for (auto& t : towers)
    if (t.group_size == group_size && t.direct == direct) return &t;
  return nullptr;
}

const Tower* CodecModel::find_tower(int group_size, bool direct) const {
  for (const auto& t : towers)
    if (t.group_size == group_size && t.direct == direct) return &t;
  return nullptr;
}

CodecModel CodecModel::fresh(int latent_channels, int hyper_channels, int mixtures, double lambda,
                             const std::vector<int>& group_sizes, uint64_t seed) {
  CodecModel m;
  m.latent_channels = latent_channels;
  m.hyper_channels = hyper_channels;
  m.mixtures = mixtures;
  m.lambda = lambda;
  m.meta.lambda = lambda;
  m.meta.seed = seed;
  Rng rng(seed);
  for (int g : group_sizes) {
    if (g < 1 || g > 3) throw ShapeError("group size outside 1-3");
    m.towers.push_back(make_tower(g, false, latent_channels, hyper_channels, mixtures, rng));
    m.towers.push_back(make_tower(g, true, latent_channels, hyper_channels, mixtures, rng));
  }
  return m;
}

Bytes write_model(const CodecModel& model) {
  ByteWriter w;
  w.raw(reinterpret_cast<const uint8_t*>(kMagic), 4);
  w.u16(kVersion);
  w.u32(uint32_t(model.latent_channels));
  w.u32(uint32_t(model.hyper_channels));
  w.u32(uint32_t(model.mixtures));
  w.f64(model.lambda);
  w.u64(model.meta.pretrain_steps);
  w.u64(model.meta.joint_steps);
  w.u64(model.meta.seed);
  w.f64(model.meta.lambda);
  w.raw(model.meta.corpus_digest.data(), 32);
  w.u8(uint8_t(model.towers.size()));
  for (const auto& t : model.towers) {
    w.u8(uint8_t(t.group_size));
    w.u8(t.direct ? 1 : 0);
    w.u32(uint32_t(t.stats.channels()));
    for (int c = 0; c < t.stats.channels(); ++c) w.f64(t.stats.mean[c]);
    for (int c = 0; c < t.stats.channels(); ++c) w.f64(t.stats.std[c]);
    std::vector<Parameter<float>*> params;
    const_cast<Tower&>(t).collect(params);
    w.u32(uint32_t(params.size()));
    for (const Parameter<float>* p : params) {
      w.str(p->name);
      w.u32(uint32_t(p->value.n()));
      w.u32(uint32_t(p->value.c()));
      w.u32(uint32_t(p->value.h()));
      w.u32(uint32_t(p->value.w()));
      for (Eigen::Index i = 0; i < p->value.size(); ++i) w.f32(p->value.data()[i]);
    }
  }
  w.u32(crc32(w.bytes()));
  return w.take();
}

CodecModel read_model(const Bytes& bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw MalformedContainer("not a model file");
  {
    if (bytes.size() < 4) throw MalformedContainer("model file truncated");
    uint32_t stored = uint32_t(bytes[bytes.size() - 4]) |
                      (uint32_t(bytes[bytes.size() - 3]) << 8) |
                      (uint32_t(bytes[bytes.size() - 2]) << 16) |
                      (uint32_t(bytes[bytes.size() - 1]) << 24);
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
      throw ChecksumMismatch("model file checksum mismatch");
  }
  ByteReader r(bytes.data(), bytes.size() - 4);
  uint8_t magic[4];
  r.raw(magic, 4);
  uint16_t version = r.u16();
  if (version != kVersion) throw VersionError("unsupported model version");

  CodecModel m;
  m.latent_channels = int(r.u32());
  m.hyper_channels = int(r.u32());
  m.mixtures = int(r.u32());
  m.lambda = r.f64();
  m.meta.pretrain_steps = r.u64();
  m.meta.joint_steps = r.u64();
  m.meta.seed = r.u64();
  m.meta.lambda = r.f64();
  r.raw(m.meta.corpus_digest.data(), 32);
  int n_towers = r.u8();
  Rng rng(0);  // placeholder init; every value is overwritten below
  for (int ti = 0; ti < n_towers; ++ti) {
    int group_size = r.u8();
    bool direct = r.u8() != 0;
    if (group_size < 1 || group_size > 3) throw MalformedContainer("bad tower group size");
    Tower t = make_tower(group_size, direct, m.latent_channels, m.hyper_channels, m.mixtures, rng);
    uint32_t channels = r.u32();
    if (int(channels) != t.stats.channels()) throw ShapeMismatch("stats channel mismatch");
    for (uint32_t c = 0; c < channels; ++c) t.stats.mean[c] = r.f64();
    for (uint32_t c = 0; c < channels; ++c) {
      t.stats.std[c] = r.f64();
      if (!(t.stats.std[c] > 0)) throw MalformedContainer("non-positive stats std");
    }
    std::vector<Parameter<float>*> params;
    t.collect(params);
    uint32_t count = r.u32();
    if (count != params.size()) throw ShapeMismatch("parameter count mismatch");
    for (Parameter<float>* p : params) {
      std::string name = r.str();
      if (name != p->name) throw MalformedContainer("parameter name mismatch: " + name);
      uint32_t d0 = r.u32(), d1 = r.u32(), d2 = r.u32(), d3 = r.u32();
      if (int(d0) != p->value.n() || int(d1) != p->value.c() || int(d2) != p->value.h() ||
          int(d3) != p->value.w())
        throw ShapeMismatch("parameter shape mismatch: " + name);
      for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = r.f32();
    }
    m.towers.push_back(std::move(t));
  }
  if (!r.done()) throw MalformedContainer("trailing bytes in model file");
  return m;
}

std::array<uint8_t, 32> model_digest(const Bytes& model_bytes) { return sha256(model_bytes); }

std::array<uint8_t, 32> stats_digest(const CodecModel& model) {
  ByteWriter w;
  for (const auto& t : model.towers) {
    w.u8(uint8_t(t.group_size));
    w.u8(t.direct ? 1 : 0);
    for (int c = 0; c < t.stats.channels(); ++c) {
      w.f64(t.stats.mean[c]);
      w.f64(t.stats.std[c]);
    }
  }
  return sha256(w.bytes());
}

}  // namespace tlrc
