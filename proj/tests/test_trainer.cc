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

#include <filesystem>

#include "test_support.h"
#include "tlrc/eval.h"
#include "tlrc/grad_check.h"
#include "tlrc/trainer.h"

using namespace tlrc;
using namespace tlrc::testing;

namespace {

TrainConfig toy_config(const std::string& corpus, uint64_t seed) {
  TrainConfig cfg;
  cfg.phase = TrainPhase::kJoint;
  cfg.from_scratch = true;
  cfg.corpus_dir = corpus;
  cfg.seed = seed;
  cfg.batch_size = 1;
  cfg.tile_size = 16;
  cfg.latent_channels = 8;
  cfg.hyper_channels = 4;
  cfg.mixtures = 1;
  cfg.log_every = 0;
  cfg.log = [](const std::string&) {};
  return cfg;
}

}  // namespace

TEST_CASE("ingest: skips unsupported files, deterministic digest, tile cross-check") {
  std::string dir = temp_dir("ingest");
  write_corpus(dir, 1, 11, 90, Sampling::kGray, 128, 128);
  std::filesystem::copy_file(std::string(TLRC_TEST_DATA_DIR) + "/progressive.jpg",
                             dir + "/progressive.jpg");
  Dataset ds = ingest_corpus(dir);
  CHECK(ds.used_files == 1);
  CHECK(ds.skipped_files == 1);
  REQUIRE(ds.groups.size() == 1);
  CHECK(ds.groups[0].group_size == 1);
  REQUIRE(ds.groups[0].images.size() == 1);

  Dataset again = ingest_corpus(dir);
  CHECK(again.corpus_digest == ds.corpus_digest);

  // tile values equal the parser's coefficients at the same block coordinates
  Bytes file = read_file(dir + "/img_000.jpg");
  JpegImage img = parse_jpeg(file);
  Tensor<float> whole = group_tensor(img, derive_groups(img)[0]);
  REQUIRE(whole.h() == 16);  // 128 px = 16 sites, tile-sized on purpose
  Rng rng(3);
  Tensor<float> tile = sample_tile(ds.groups[0], 16, rng);
  CHECK((tile.array() == whole.array()).all());
}

TEST_CASE("joint_loss arithmetic") {
  CHECK(joint_loss(0, 0, 0, 0.03) == 0.0);
  CHECK(joint_loss(1.0, 2.0, 100.0, 0.03) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("lossy-phase end-to-end gradients match finite differences") {
  Rng rng(40);
  LossyConfig lc;
  lc.input_channels = 64;
  lc.latent_channels = 4;
  lc.hyper_channels = 2;
  LossyNets<double> lossy("L.", lc, rng);
  ResidualConfig rc;
  rc.components = 1;
  rc.mixtures = 1;
  ResidualNets<double> residual("R.", rc, rng);
  NormStats stats;
  stats.mean = Eigen::VectorXd::Zero(64);
  stats.std = Eigen::VectorXd::Constant(64, 4.0);

  Tensor<double> x(1, 64, 16, 16);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.array()[i] = double(rng.uniform_int(-16, 16));

  auto loss = [&]() {
    Rng noise(777);
    return joint_step<double>(lossy, residual, stats, x, TrainPhase::kLossyPretrain, 0.03,
                              noise)
        .loss;
  };
  std::vector<Parameter<double>*> params;
  lossy.collect(params);
  for (auto* p : params) p->zero_grad();
  {
    Rng noise(777);
    joint_step<double>(lossy, residual, stats, x, TrainPhase::kLossyPretrain, 0.03, noise);
  }
  // snapshot: every loss() evaluation is a training step and would keep
  // accumulating into the gradients
  std::vector<Tensor<double>> analytic;
  for (auto* p : params) analytic.push_back(p->grad);
  Rng pick(41);
  GradCheckReport rep;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter<double>* p = params[pi];
    Eigen::Index count = p->value.size();
    for (int probe = 0; probe < std::min<Eigen::Index>(count, 3); ++probe) {
      Eigen::Index i = Eigen::Index(pick.uniform_int(0, count - 1));
      double orig = p->value.array()[i];
      const double h = 1e-5;
      p->value.array()[i] = orig + h;
      double up = loss();
      p->value.array()[i] = orig - h;
      double down = loss();
      p->value.array()[i] = orig;
      rep.record(double(analytic[pi].array()[i]), (up - down) / (2 * h),
                 p->name + "[" + std::to_string(i) + "]", 1e-4);
    }
  }
  if (!rep.pass) MESSAGE("worst ", rep.worst, " err ", rep.max_rel_error);
  CHECK(rep.pass);
}

TEST_CASE("joint-phase gradients match finite differences away from rounding flips") {
  Rng rng(42);
  LossyConfig lc;
  lc.input_channels = 64;
  lc.latent_channels = 4;
  lc.hyper_channels = 2;
  LossyNets<double> lossy("L.", lc, rng);
  ResidualConfig rc;
  rc.components = 1;
  rc.mixtures = 2;
  ResidualNets<double> residual("R.", rc, rng);
  residual.ctx_conv.bias.value.fill_uniform(rng, 0.05, 0.15);
  residual.recon1.bias.value.fill_uniform(rng, 0.05, 0.15);
  residual.ep1.bias.value.fill_uniform(rng, 0.05, 0.15);
  residual.ep2.bias.value.fill_uniform(rng, 0.05, 0.15);
  NormStats stats;
  stats.mean = Eigen::VectorXd::Zero(64);
  stats.std = Eigen::VectorXd::Constant(64, 4.0);

  Tensor<double> x(1, 64, 16, 16);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.array()[i] = double(rng.uniform_int(-16, 16));

  // The integer reconstruction is a training constant: its rounding makes the
  // loss piecewise-smooth. Coordinates whose perturbation flips a rounding
  // are skipped (the derivative is one-sided there by design).
  auto eval = [&](uint64_t* fingerprint) {
    Rng noise(778);
    Tensor<double> x_norm = normalize(x, stats);
    Tensor<double> y = lossy.analysis.forward(x_norm);
    (void)y;
    Rng noise2(778);
    StepStats st =
        joint_step<double>(lossy, residual, stats, x, TrainPhase::kJoint, 0.03, noise2);
    if (fingerprint) {
      // recompute the integer reconstruction under the same noise
      Rng noise3(778);
      Tensor<double> yy = lossy.analysis.forward(normalize(x, stats));
      Tensor<double> zz = lossy.hyper_analysis.forward(yy);
      (void)quantize_noise(zz, noise3);  // keep the noise stream aligned
      Tensor<double> y_t = yy;
      {
        Rng noise4(778);
        Tensor<double> zt = quantize_noise(zz, noise4);
        (void)zt;
        y_t = quantize_noise(yy, noise4);
      }
      Tensor<double> rec =
          clamp_coeff_range(quantize_round(denormalize(lossy.synthesis.forward(y_t), stats)));
      uint64_t h = 1469598103934665603ull;
      for (Eigen::Index i = 0; i < rec.size(); ++i) {
        h ^= uint64_t(int64_t(rec.array()[i]) + 5000);
        h *= 1099511628211ull;
      }
      *fingerprint = h;
    }
    return st.loss;
  };

  std::vector<Parameter<double>*> params;
  lossy.collect(params);
  residual.collect(params);
  for (auto* p : params) p->zero_grad();
  {
    Rng noise(778);
    joint_step<double>(lossy, residual, stats, x, TrainPhase::kJoint, 0.03, noise);
  }
  std::vector<Tensor<double>> analytic;
  for (auto* p : params) analytic.push_back(p->grad);
  Rng pick(43);
  GradCheckReport rep;
  int checked = 0, skipped = 0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter<double>* p = params[pi];
    Eigen::Index count = p->value.size();
    for (int probe = 0; probe < std::min<Eigen::Index>(count, 2); ++probe) {
      Eigen::Index i = Eigen::Index(pick.uniform_int(0, count - 1));
      double orig = p->value.array()[i];
      const double h = 1e-5;
      uint64_t f_up = 0, f_down = 0;
      p->value.array()[i] = orig + h;
      double up = eval(&f_up);
      p->value.array()[i] = orig - h;
      double down = eval(&f_down);
      p->value.array()[i] = orig;
      if (f_up != f_down) {
        ++skipped;
        continue;
      }
      ++checked;
      double numeric = (up - down) / (2 * h);
      double a = double(analytic[pi].array()[i]);
      if (std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-3}) > 1e-4) {
        // truncation-limited coordinate: refine the step
        const double h2 = 1e-6;
        p->value.array()[i] = orig + h2;
        up = eval(nullptr);
        p->value.array()[i] = orig - h2;
        down = eval(nullptr);
        p->value.array()[i] = orig;
        numeric = (up - down) / (2 * h2);
      }
      rep.record(a, numeric, p->name + "[" + std::to_string(i) + "]", 1e-4);
    }
  }
  INFO("checked ", checked, " skipped ", skipped);
  CHECK(checked > 20);
  if (!rep.pass) MESSAGE("worst ", rep.worst, " err ", rep.max_rel_error);
  CHECK(rep.pass);
}

TEST_CASE("smoke training: loss decreases over 200 steps on a 5-image corpus") {
  std::string dir = temp_dir("smoke");
  write_corpus(dir, 5, 100, 90, Sampling::kGray, 144, 144);
  Dataset ds = ingest_corpus(dir);
  REQUIRE(ds.groups.size() == 1);

  CodecModel model = CodecModel::fresh(8, 4, 1, 0.03, {1}, 5);
  model.find_tower(1, false)->stats = ds.groups[0].stats;
  Tower& tower = *model.find_tower(1, false);
  std::vector<Parameter<float>*> params;
  tower.lossy->collect(params);
  tower.residual->collect(params);
  AdamState<float> adam;
  Rng rng(5);
  std::vector<double> losses;
  for (int step = 0; step < 200; ++step) {
    Tensor<float> tile = sample_tile(ds.groups[0], 16, rng);
    for (auto* p : params) p->zero_grad();
    StepStats st =
        joint_step(*tower.lossy, *tower.residual, tower.stats, tile, TrainPhase::kJoint, 0.03,
                   rng);
    REQUIRE(std::isfinite(st.loss));
    adam_step(params, adam, 5e-4);
    losses.push_back(st.loss);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  double first = median({losses.begin(), losses.begin() + 10});
  double last = median({losses.end() - 10, losses.end()});
  INFO("first ", first, " last ", last);
  CHECK(last < first);
}

TEST_CASE("lambda=0 joint run lets the latent rate collapse") {
  std::string dir = temp_dir("lam0");
  write_corpus(dir, 3, 200, 85, Sampling::kGray, 144, 144);
  Dataset ds = ingest_corpus(dir);
  CodecModel model = CodecModel::fresh(8, 4, 1, 0.0, {1}, 6);
  Tower& tower = *model.find_tower(1, false);
  tower.stats = ds.groups[0].stats;
  std::vector<Parameter<float>*> params;
  tower.lossy->collect(params);
  tower.residual->collect(params);
  AdamState<float> adam;
  Rng rng(6);
  double first_rate = -1, last_rate = -1;
  for (int step = 0; step < 150; ++step) {
    Tensor<float> tile = sample_tile(ds.groups[0], 16, rng);
    for (auto* p : params) p->zero_grad();
    StepStats st = joint_step(*tower.lossy, *tower.residual, tower.stats, tile,
                              TrainPhase::kJoint, 0.0, rng);
    adam_step(params, adam, 1e-3);
    if (step == 0) first_rate = st.bits_y + st.bits_z;
    last_rate = st.bits_y + st.bits_z;
  }
  INFO("first ", first_rate, " last ", last_rate);
  CHECK(last_rate < first_rate);
}

TEST_CASE("train() is deterministic: same seed, bit-identical model files") {
  std::string dir = temp_dir("det");
  write_corpus(dir, 3, 300, 90, Sampling::kGray, 144, 144);
  TrainConfig cfg = toy_config(dir, 31);
  cfg.steps = 15;
  Bytes a = write_model(train(cfg));
  Bytes b = write_model(train(cfg));
  CHECK(a == b);
  TrainConfig other = cfg;
  other.seed = 32;
  CHECK(write_model(train(other)) != a);
}

TEST_CASE("a diverging run aborts with NonFiniteLoss") {
  std::string dir = temp_dir("blowup");
  write_corpus(dir, 1, 777, 90, Sampling::kGray, 128, 128);
  TrainConfig cfg = toy_config(dir, 2);
  cfg.steps = 50;
  cfg.lr_initial = 1e8;  // guaranteed divergence
  cfg.lr_decayed = 1e8;
  CHECK_THROWS_AS(train(cfg), NonFiniteLoss);
}

TEST_CASE("joint phase without a checkpoint requires --from-scratch") {
  std::string dir = temp_dir("nockpt");
  write_corpus(dir, 1, 400, 90, Sampling::kGray, 128, 128);
  TrainConfig cfg = toy_config(dir, 1);
  cfg.from_scratch = false;
  cfg.steps = 1;
  CHECK_THROWS_AS(train(cfg), DataError);
}

TEST_CASE("phase contract: pretrain leaves residual parameters untouched") {
  std::string dir = temp_dir("phase");
  write_corpus(dir, 2, 500, 90, Sampling::kGray, 128, 128);
  TrainConfig cfg = toy_config(dir, 8);
  cfg.phase = TrainPhase::kLossyPretrain;
  cfg.from_scratch = false;  // pretrain never needs a checkpoint
  cfg.steps = 5;
  CodecModel trained = train(cfg);
  CodecModel fresh = CodecModel::fresh(cfg.latent_channels, cfg.hyper_channels, cfg.mixtures,
                                       cfg.lambda, {1}, cfg.seed);
  Tower& t_trained = *trained.find_tower(1, false);
  Tower& t_fresh = *fresh.find_tower(1, false);
  std::vector<Parameter<float>*> res_trained, res_fresh, lossy_trained, lossy_fresh;
  t_trained.residual->collect(res_trained);
  t_fresh.residual->collect(res_fresh);
  t_trained.lossy->collect(lossy_trained);
  t_fresh.lossy->collect(lossy_fresh);
  for (size_t i = 0; i < res_trained.size(); ++i)
    CHECK((res_trained[i]->value.array() == res_fresh[i]->value.array()).all());
  bool lossy_changed = false;
  for (size_t i = 0; i < lossy_trained.size(); ++i)
    if (!(lossy_trained[i]->value.array() == lossy_fresh[i]->value.array()).all())
      lossy_changed = true;
  CHECK(lossy_changed);
}

TEST_CASE("transcode round trip through the full pipeline with a fresh model") {
  std::string dir = temp_dir("pipe");
  write_corpus(dir, 2, 600, 92, Sampling::kGray, 104, 88);
  Dataset ds = ingest_corpus(dir);
  CodecModel model = CodecModel::fresh(8, 4, 2, 0.03, {1, 2, 3}, 9);
  for (auto& set : ds.groups) {
    model.find_tower(set.group_size, false)->stats = set.stats;
    model.find_tower(set.group_size, true)->stats = set.stats;
  }

  struct Case {
    uint64_t seed;
    int w, h, q, restart;
    Sampling sampling;
    bool zero_pad;
  };
  const Case cases[] = {
      {601, 72, 56, 92, 0, Sampling::kGray, false},
      {602, 64, 64, 80, 2, Sampling::k444, false},
      {603, 80, 48, 95, 0, Sampling::k420, false},
      {604, 56, 56, 85, 3, Sampling::kGray, true},  // nonstandard padding -> fallback
  };
  for (const auto& c : cases) {
    TestImage ti = synth_photo(c.seed, c.w, c.h, c.sampling == Sampling::kGray);
    JpegEncodeOptions opt;
    opt.quality = c.q;
    opt.sampling = c.sampling;
    opt.restart_interval = c.restart;
    opt.pad_zero_bits = c.zero_pad;
    Bytes file = encode_jpeg(ti, opt);

    Bytes container_bytes = encode_image_file(file, model, false);
    TlrcContainer container = read_container(container_bytes);
    if (c.zero_pad) {
      CHECK((container.flags & ContainerFlags::kRawScanFallback) != 0);
      CHECK((container.flags & ContainerFlags::kByteExact) == 0);
    } else {
      CHECK((container.flags & ContainerFlags::kByteExact) != 0);
      CHECK(container.raw_scan.empty());
    }
    DecodeResult out = decode_container_bytes(container_bytes, model);
    INFO("case seed ", c.seed);
    CHECK(out.jpeg == file);
  }
}

TEST_CASE("direct mode transcode round trip") {
  CodecModel model = CodecModel::fresh(8, 4, 2, 0.03, {1, 3}, 10);
  TestImage ti = synth_photo(700, 64, 48, false);
  JpegEncodeOptions opt;
  opt.sampling = Sampling::k444;
  opt.quality = 88;
  Bytes file = encode_jpeg(ti, opt);
  Bytes container_bytes = encode_image_file(file, model, true);
  TlrcContainer container = read_container(container_bytes);
  CHECK((container.flags & ContainerFlags::kDirectMode) != 0);
  CHECK(container.lossy_stream_bytes() == 0);
  DecodeResult out = decode_container_bytes(container_bytes, model);
  CHECK(out.jpeg == file);
}

TEST_CASE("decode refuses a mismatched model") {
  CodecModel model = CodecModel::fresh(8, 4, 2, 0.03, {1}, 11);
  CodecModel other = CodecModel::fresh(8, 4, 2, 0.03, {1}, 12);
  TestImage ti = synth_photo(800, 48, 48, true);
  JpegEncodeOptions opt;
  opt.sampling = Sampling::kGray;
  Bytes file = encode_jpeg(ti, opt);
  Bytes container = encode_image_file(file, model, false);
  CHECK_THROWS_AS(decode_container_bytes(container, other), DataError);
  DecodeResult ok = decode_container_bytes(container, model);
  CHECK(ok.jpeg == file);
}

TEST_CASE("evaluate: losslessness gate plus bpp accounting on a mini corpus") {
  std::string dir = temp_dir("eval");
  write_corpus(dir, 3, 900, 90, Sampling::kGray, 80, 64);
  CodecModel model = CodecModel::fresh(8, 4, 2, 0.03, {1}, 13);
  Dataset ds = ingest_corpus(dir);
  model.find_tower(1, false)->stats = ds.groups[0].stats;
  EvalReport report = evaluate(model, dir);
  REQUIRE(report.images.size() == 3);
  for (const auto& e : report.images) {
    CHECK(e.pixels == 80 * 64);
    CHECK(e.jpeg_bpp == doctest::Approx(double(e.jpeg_bytes) * 8 / (80 * 64)));
    CHECK(e.bit_saving == doctest::Approx(bit_saving_pct(e.jpeg_bpp, e.tlrc_bpp)));
    CHECK(e.res_share ==
          doctest::Approx(residual_share_pct(e.residual_bin_bpp, e.lossy_bin_bpp)));
  }
  double total_px = 3 * 80 * 64;
  CHECK(report.corpus.tlrc_bpp ==
        doctest::Approx(double(report.corpus.tlrc_bytes) * 8 / total_px));

  std::string json = report_to_json(report);
  CHECK(json.find("\"bit_saving_pct\"") != std::string::npos);
  std::string csv = report_to_csv(report);
  CHECK(csv.find("corpus") != std::string::npos);
}

TEST_CASE("external baseline sizes are reported pass-through") {
  std::string dir = temp_dir("base");
  write_corpus(dir, 2, 950, 90, Sampling::kGray, 80, 64);
  std::string sizes_json = "{\"img_000.jpg\": 2000, \"img_001.jpg\": 4000}";
  write_file(dir + "/sizes.json", Bytes(sizes_json.begin(), sizes_json.end()));
  auto sizes = read_baseline_sizes(dir + "/sizes.json");
  REQUIRE(sizes.size() == 2);
  CHECK(sizes.at("img_000.jpg") == 2000);

  CodecModel model = CodecModel::fresh(8, 4, 1, 0.03, {1}, 17);
  Dataset ds = ingest_corpus(dir);
  model.find_tower(1, false)->stats = ds.groups[0].stats;
  EvalReport report = evaluate(model, dir, false, &sizes);
  REQUIRE(report.images.size() == 2);
  REQUIRE(report.images[0].baseline_bpp.has_value());
  CHECK(*report.images[0].baseline_bpp == doctest::Approx(2000.0 * 8 / (80 * 64)));
  CHECK(report_to_json(report).find("baseline_bpp") != std::string::npos);
}

TEST_CASE("bit-saving arithmetic matches reference benchmark cells") {
  // BPP pairs with the rounded percentages they are reported as.
  CHECK(std::abs(bit_saving_pct(3.392, 2.665) - 21.43) <= 0.05);
  CHECK(std::abs(bit_saving_pct(3.392, 2.777) - 18.12) <= 0.05);
  CHECK(std::abs(residual_share_pct(2.152, 0.513) - 80.75) <= 0.05);
  CHECK(std::abs(bit_saving_pct(3.392, 2.834) - 16.45) <= 0.05);
}

TEST_CASE("qp sweep over pre-encoded corpora") {
  std::string root = temp_dir("sweep");
  write_corpus(root + "/qp55", 2, 1000, 55, Sampling::kGray, 64, 64);
  write_corpus(root + "/qp95", 2, 1000, 95, Sampling::kGray, 64, 64);
  CodecModel model = CodecModel::fresh(8, 4, 2, 0.03, {1}, 14);
  Dataset ds = ingest_corpus(root + "/qp95");
  model.find_tower(1, false)->stats = ds.groups[0].stats;

  auto rows = qp_sweep(model, root, {55, 95});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].qp == 55);
  CHECK(rows[0].report.corpus.jpeg_bpp <= rows[1].report.corpus.jpeg_bpp);
  CHECK(!sweep_to_csv(rows).empty());

  CHECK_THROWS_AS(qp_sweep(model, root, {55, 65, 95}), MissingCorpusForQp);
}
