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

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "tlrc/eval.h"
#include "tlrc/pipeline.h"
#include "tlrc/trainer.h"

namespace {

using namespace tlrc;
using nlohmann::json;

CodecModel load_model(const std::string& path) { return read_model(read_file(path)); }

int cmd_encode(const std::string& in, const std::string& out, const std::string& model_path,
               bool direct) {
  CodecModel model = load_model(model_path);
  Bytes jpeg = read_file(in);
  Bytes container = encode_image_file(jpeg, model, direct);
  write_file(out, container);
  std::cout << in << " -> " << out << ": " << jpeg.size() << " -> " << container.size()
            << " bytes\n";
  return 0;
}

int cmd_decode(const std::string& in, const std::string& out, const std::string& model_path,
               bool verify) {
  CodecModel model = load_model(model_path);
  Bytes container_bytes = read_file(in);
  DecodeResult result = decode_container_bytes(container_bytes, model);
  write_file(out, result.jpeg);
  if (verify) {
    TlrcContainer c = read_container(container_bytes);
    if (sha256(result.jpeg) != c.original_file_digest)
      throw LosslessViolation("decoded file does not reproduce the original digest");
    std::cout << "verified: byte-exact reconstruction\n";
  }
  std::cout << in << " -> " << out << ": " << result.jpeg.size() << " bytes\n";
  return 0;
}

int cmd_inspect(const std::string& path) {
  Bytes bytes = read_file(path);
  json j;
  if (bytes.size() >= 4 && bytes[0] == 'T' && bytes[1] == 'L' && bytes[2] == 'R' &&
      bytes[3] == 'C') {
    TlrcContainer c = read_container(bytes);
    j["type"] = "container";
    j["width"] = c.width;
    j["height"] = c.height;
    j["flags"] = json::array();
    if (c.flags & ContainerFlags::kByteExact) j["flags"].push_back("BYTE_EXACT");
    if (c.flags & ContainerFlags::kCoeffExact) j["flags"].push_back("COEFF_EXACT");
    if (c.flags & ContainerFlags::kRawScanFallback) j["flags"].push_back("RAW_SCAN_FALLBACK");
    if (c.flags & ContainerFlags::kDirectMode) j["flags"].push_back("DIRECT_MODE");
    j["components"] = c.components.size();
    j["original_size"] = c.original_size;
    j["original_digest"] = hex(c.original_file_digest);
    j["model_hash"] = hex(c.model_hash);
    j["total_bytes"] = bytes.size();
    j["lossy_stream_bytes"] = c.lossy_stream_bytes();
    j["residual_stream_bytes"] = c.residual_stream_bytes();
    j["raw_scan_bytes"] = c.raw_scan.size();
    json groups = json::array();
    for (const auto& g : c.groups)
      groups.push_back({{"group_size", g.group_size},
                        {"z_bytes", g.z_stream.size()},
                        {"y_bytes", g.y_stream.size()},
                        {"residual_bytes", g.residual_stream.size()}});
    j["groups"] = groups;
  } else {
    CodecModel m = read_model(bytes);
    j["type"] = "model";
    j["latent_channels"] = m.latent_channels;
    j["hyper_channels"] = m.hyper_channels;
    j["mixtures"] = m.mixtures;
    j["lambda"] = m.lambda;
    j["pretrain_steps"] = m.meta.pretrain_steps;
    j["joint_steps"] = m.meta.joint_steps;
    j["seed"] = m.meta.seed;
    j["corpus_digest"] = hex(m.meta.corpus_digest);
    j["digest"] = hex(model_digest(bytes));
    json towers = json::array();
    for (const auto& t : m.towers) {
      std::vector<Parameter<float>*> params;
      const_cast<Tower&>(t).collect(params);
      size_t n_values = 0;
      for (auto* p : params) n_values += size_t(p->value.size());
      towers.push_back({{"group_size", t.group_size},
                        {"direct", t.direct},
                        {"parameters", params.size()},
                        {"values", n_values}});
    }
    j["towers"] = towers;
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tlrc: lossless JPEG transcoder with a learned lossy + residual codec"};
  app.require_subcommand(1);

  std::string in, out, model_path, report_path, corpus, baseline_path;
  bool direct = false, verify = false;

  auto* enc = app.add_subcommand("encode", "transcode a baseline JPEG into a .tlrc container");
  enc->add_option("input", in, "input JPEG")->required();
  enc->add_option("output", out, "output .tlrc")->required();
  enc->add_option("--model", model_path, "model file (.tlrm)")->required();
  enc->add_flag("--direct", direct, "direct mode: no lossy branch, Laplace entropy head");

  auto* dec = app.add_subcommand("decode", "reconstruct the original JPEG from a container");
  dec->add_option("input", in, "input .tlrc")->required();
  dec->add_option("output", out, "output JPEG")->required();
  dec->add_option("--model", model_path, "model file (.tlrm)")->required();
  dec->add_flag("--verify", verify, "check the reconstruction digest");

  TrainConfig tc;
  std::string phase_name = "joint";
  auto* tr = app.add_subcommand("train", "train codec towers on a JPEG corpus");
  tr->add_option("--phase", phase_name, "lossy|joint")->check(CLI::IsMember({"lossy", "joint"}));
  tr->add_option("--data", tc.corpus_dir, "corpus directory")->required();
  tr->add_option("--out", out, "output model path")->required();
  tr->add_option("--resume", tc.resume_path, "checkpoint to resume from");
  tr->add_option("--seed", tc.seed, "rng seed");
  tr->add_option("--steps", tc.steps, "training steps per tower");
  tr->add_option("--lambda", tc.lambda, "rate-distortion weight");
  tr->add_option("--batch", tc.batch_size, "batch size");
  tr->add_option("--tile", tc.tile_size, "tile size in DCT sites (multiple of 16)");
  tr->add_option("--latent-channels", tc.latent_channels, "latent channel count");
  tr->add_option("--hyper-channels", tc.hyper_channels, "hyper channel count");
  tr->add_option("--mixtures", tc.mixtures, "logistic mixture components");
  tr->add_flag("--from-scratch", tc.from_scratch, "allow joint training without a checkpoint");
  tr->add_flag("--direct", tc.train_direct, "also train direct towers");

  auto* ev = app.add_subcommand("eval", "evaluate compression on a corpus");
  ev->add_option("--model", model_path, "model file")->required();
  ev->add_option("--corpus", corpus, "corpus directory")->required();
  ev->add_option("--report", report_path, "report path (.json or .csv)")->required();
  ev->add_option("--baseline-sizes", baseline_path, "JSON file of external baseline sizes");
  ev->add_flag("--direct", direct, "evaluate in direct mode");

  auto* qp = app.add_subcommand("qp-sweep", "evaluate across quality levels");
  qp->add_option("--model", model_path, "model file")->required();
  qp->add_option("--corpus-root", corpus, "root with qp<N> subdirectories")->required();
  qp->add_option("--report", report_path, "report path (.json or .csv)");

  auto* ins = app.add_subcommand("inspect", "dump container or model metadata");
  ins->add_option("input", in, "a .tlrc or .tlrm file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (enc->parsed()) return cmd_encode(in, out, model_path, direct);
    if (dec->parsed()) return cmd_decode(in, out, model_path, verify);
    if (tr->parsed()) {
      tc.phase = phase_name == "lossy" ? TrainPhase::kLossyPretrain : TrainPhase::kJoint;
      CodecModel model = train(tc);
      write_file(out, write_model(model));
      std::cout << "model written to " << out << "\n";
      return 0;
    }
    if (ev->parsed()) {
      CodecModel model = load_model(model_path);
      std::map<std::string, uint64_t> baseline;
      if (!baseline_path.empty()) baseline = read_baseline_sizes(baseline_path);
      EvalReport report =
          evaluate(model, corpus, direct, baseline_path.empty() ? nullptr : &baseline);
      bool csv = report_path.size() > 4 && report_path.substr(report_path.size() - 4) == ".csv";
      write_file(report_path, [&] {
        std::string s = csv ? report_to_csv(report) : report_to_json(report);
        return Bytes(s.begin(), s.end());
      }());
      std::cout << "corpus: jpeg " << report.corpus.jpeg_bpp << " bpp -> tlrc "
                << report.corpus.tlrc_bpp << " bpp (saving " << report.corpus.bit_saving
                << "%)\n";
      return 0;
    }
    if (qp->parsed()) {
      CodecModel model = load_model(model_path);
      auto rows = qp_sweep(model, corpus);
      std::string json_text = sweep_to_json(rows);
      if (!report_path.empty()) {
        bool csv = report_path.size() > 4 && report_path.substr(report_path.size() - 4) == ".csv";
        std::string s = csv ? sweep_to_csv(rows) : json_text;
        write_file(report_path, Bytes(s.begin(), s.end()));
      }
      std::cout << sweep_to_csv(rows);
      return 0;
    }
    if (ins->parsed()) return cmd_inspect(in);
  } catch (const LosslessViolation& e) {
    std::cerr << "losslessness violation: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
