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

// Corpus evaluation: per-image transcode with a mandatory lossless gate,
// BPP/bit-saving accounting, stream-share breakdown, and the quality-level
// sweep. Reports serialize to JSON (canonical) and CSV (flat).

#ifndef TLRC_EVAL_H_
#define TLRC_EVAL_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tlrc/model.h"

namespace tlrc {

inline double bit_saving_pct(double baseline_bpp, double method_bpp) {
  return (baseline_bpp - method_bpp) / baseline_bpp * 100.0;
}

inline double residual_share_pct(double residual_bpp, double lossy_bpp) {
  return residual_bpp / (residual_bpp + lossy_bpp) * 100.0;
}

struct ImageEval {
  std::string name;
  uint64_t pixels = 0;
  uint64_t jpeg_bytes = 0, tlrc_bytes = 0, lossy_bytes = 0, residual_bytes = 0;
  double jpeg_bpp = 0, tlrc_bpp = 0, bit_saving = 0;
  double lossy_bin_bpp = 0, residual_bin_bpp = 0, res_share = 0;
  std::optional<double> baseline_bpp;  // externally supplied sizes, pass-through
};

struct EvalReport {
  std::vector<ImageEval> images;
  ImageEval corpus;  // totals-based aggregate, name = "corpus"
  int skipped_files = 0;
};

// Encodes every baseline JPEG under corpus_dir, decodes it back, and aborts
// with LosslessViolation on any coefficient or byte mismatch before metrics
// are reported.
EvalReport evaluate(CodecModel& model, const std::string& corpus_dir, bool direct_mode = false,
                    const std::map<std::string, uint64_t>* baseline_sizes = nullptr);

struct QpSweepRow {
  int qp = 0;
  EvalReport report;
};

// Pre-encoded corpora per quality level live in  <root>/qp<N>.
std::vector<QpSweepRow> qp_sweep(CodecModel& model, const std::string& corpus_root,
                                 const std::vector<int>& qps = {55, 65, 75, 85, 95});

std::string report_to_json(const EvalReport& r);
std::string report_to_csv(const EvalReport& r);
std::string sweep_to_json(const std::vector<QpSweepRow>& rows);
std::string sweep_to_csv(const std::vector<QpSweepRow>& rows);

// Baseline sizes file: a JSON object mapping file name to compressed bytes.
std::map<std::string, uint64_t> read_baseline_sizes(const std::string& path);

}  // namespace tlrc

#endif  // TLRC_EVAL_H_
