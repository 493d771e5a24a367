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

#include "tlrc/eval.h"

#include <algorithm>
#include <filesystem>
#include <json.hpp>

#include "tlrc/pipeline.h"

namespace tlrc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

bool is_jpeg_name(const fs::path& p) {
  std::string ext = p.extension().string();
  for (auto& ch : ext) ch = char(std::tolower(ch));
  return ext == ".jpg" || ext == ".jpeg";
}

json image_to_json(const ImageEval& e) {
  json j{{"name", e.name},
         {"pixels", e.pixels},
         {"jpeg_bytes", e.jpeg_bytes},
         {"tlrc_bytes", e.tlrc_bytes},
         {"jpeg_bpp", e.jpeg_bpp},
         {"tlrc_bpp", e.tlrc_bpp},
         {"bit_saving_pct", e.bit_saving},
         {"lossy_bin_bpp", e.lossy_bin_bpp},
         {"residual_bin_bpp", e.residual_bin_bpp},
         {"res_share_pct", e.res_share}};
  if (e.baseline_bpp) j["baseline_bpp"] = *e.baseline_bpp;
  return j;
}

void finish_metrics(ImageEval& e) {
  const double px = double(e.pixels);
  e.jpeg_bpp = double(e.jpeg_bytes) * 8.0 / px;
  e.tlrc_bpp = double(e.tlrc_bytes) * 8.0 / px;
  e.bit_saving = bit_saving_pct(e.jpeg_bpp, e.tlrc_bpp);
  e.lossy_bin_bpp = double(e.lossy_bytes) * 8.0 / px;
  e.residual_bin_bpp = double(e.residual_bytes) * 8.0 / px;
  e.res_share = residual_share_pct(e.residual_bin_bpp, e.lossy_bin_bpp);
}

}  // namespace

EvalReport evaluate(CodecModel& model, const std::string& corpus_dir, bool direct_mode,
                    const std::map<std::string, uint64_t>* baseline_sizes) {
  if (!fs::is_directory(corpus_dir)) throw DataError("corpus directory not found: " + corpus_dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(corpus_dir))
    if (e.is_regular_file() && is_jpeg_name(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  EvalReport report;
  ImageEval& corpus = report.corpus;
  corpus.name = "corpus";
  for (const auto& f : files) {
    Bytes original = read_file(f.string());
    JpegImage orig_img;
    try {
      orig_img = parse_jpeg(original);
    } catch (const DataError&) {
      ++report.skipped_files;
      continue;
    }

    Bytes container_bytes = encode_image_file(original, model, direct_mode);
    TlrcContainer container = read_container(container_bytes);
    DecodeResult decoded = decode_container_bytes(container_bytes, model);

    // Lossless gate: every quantized coefficient, then the full byte stream.
    for (size_t c = 0; c < orig_img.coeff_planes.size(); ++c) {
      if (orig_img.coeff_planes[c] != decoded.image.coeff_planes[c])
        throw LosslessViolation("coefficient mismatch in " + f.filename().string());
    }
    if (sha256(decoded.jpeg) != orig_img.original_file_digest)
      throw LosslessViolation("byte mismatch in " + f.filename().string());

    ImageEval e;
    e.name = f.filename().string();
    e.pixels = uint64_t(orig_img.frame.width) * uint64_t(orig_img.frame.height);
    e.jpeg_bytes = original.size();
    e.tlrc_bytes = container_bytes.size();
    e.lossy_bytes = container.lossy_stream_bytes();
    e.residual_bytes = container.residual_stream_bytes();
    finish_metrics(e);
    if (baseline_sizes) {
      auto it = baseline_sizes->find(e.name);
      if (it != baseline_sizes->end()) e.baseline_bpp = double(it->second) * 8.0 / double(e.pixels);
    }
    corpus.pixels += e.pixels;
    corpus.jpeg_bytes += e.jpeg_bytes;
    corpus.tlrc_bytes += e.tlrc_bytes;
    corpus.lossy_bytes += e.lossy_bytes;
    corpus.residual_bytes += e.residual_bytes;
    report.images.push_back(std::move(e));
  }
  if (report.images.empty()) throw EmptyCorpus("no usable JPEG files in " + corpus_dir);
  finish_metrics(corpus);
  return report;
}

std::vector<QpSweepRow> qp_sweep(CodecModel& model, const std::string& corpus_root,
                                 const std::vector<int>& qps) {
  std::vector<QpSweepRow> rows;
  for (int qp : qps) {
    fs::path dir = fs::path(corpus_root) / ("qp" + std::to_string(qp));
    if (!fs::is_directory(dir))
      throw MissingCorpusForQp("missing corpus directory " + dir.string());
    rows.push_back({qp, evaluate(model, dir.string())});
  }
  // Data sanity: the baseline corpora must not shrink as quality rises.
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].report.corpus.jpeg_bpp + 1e-9 < rows[i - 1].report.corpus.jpeg_bpp)
      throw DataError("qp sweep corpora are not monotone in quality");
  }
  return rows;
}

std::string report_to_json(const EvalReport& r) {
  json j;
  j["images"] = json::array();
  for (const auto& e : r.images) j["images"].push_back(image_to_json(e));
  j["corpus"] = image_to_json(r.corpus);
  j["skipped_files"] = r.skipped_files;
  return j.dump(2);
}

std::string report_to_csv(const EvalReport& r) {
  std::string s =
      "name,pixels,jpeg_bytes,tlrc_bytes,jpeg_bpp,tlrc_bpp,bit_saving_pct,lossy_bin_bpp,"
      "residual_bin_bpp,res_share_pct\n";
  auto row = [&](const ImageEval& e) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%llu,%llu,%llu,%.6f,%.6f,%.4f,%.6f,%.6f,%.4f\n",
                  e.name.c_str(), (unsigned long long)e.pixels, (unsigned long long)e.jpeg_bytes,
                  (unsigned long long)e.tlrc_bytes, e.jpeg_bpp, e.tlrc_bpp, e.bit_saving,
                  e.lossy_bin_bpp, e.residual_bin_bpp, e.res_share);
    s += buf;
  };
  for (const auto& e : r.images) row(e);
  row(r.corpus);
  return s;
}

std::string sweep_to_json(const std::vector<QpSweepRow>& rows) {
  json j = json::array();
  for (const auto& row : rows) {
    json entry;
    entry["qp"] = row.qp;
    entry["corpus"] = image_to_json(row.report.corpus);
    j.push_back(entry);
  }
  return j.dump(2);
}

std::string sweep_to_csv(const std::vector<QpSweepRow>& rows) {
  std::string s = "qp,jpeg_bpp,tlrc_bpp,bit_saving_pct\n";
  for (const auto& row : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.4f\n", row.qp, row.report.corpus.jpeg_bpp,
                  row.report.corpus.tlrc_bpp, row.report.corpus.bit_saving);
    s += buf;
  }
  return s;
}

std::map<std::string, uint64_t> read_baseline_sizes(const std::string& path) {
  Bytes b = read_file(path);
  json j = json::parse(b.begin(), b.end());
  std::map<std::string, uint64_t> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<uint64_t>();
  return out;
}

}  // namespace tlrc
