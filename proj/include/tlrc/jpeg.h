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

// Baseline sequential JPEG parsing down to quantized DCT coefficient planes,
// and deterministic re-encoding back to bytes. Supported subset: SOF0, 8-bit,
// Huffman, 1-3 components, 4:4:4 or 4:2:0 sampling, single scan.

#ifndef TLRC_JPEG_H_
#define TLRC_JPEG_H_

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "tlrc/bytes.h"

namespace tlrc {

// Quantized coefficients in block layout: plane(r, c) is the coefficient at
// natural position (r%8, c%8) of block (r/8, c/8).
using CoeffPlane = Eigen::Matrix<int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Absolute value bounds implied by 8-bit baseline Huffman categories
// (DC category <= 11 on differentials, AC category <= 10).
inline constexpr int kDcMin = -2048;
inline constexpr int kDcMax = 2047;
inline constexpr int kAcMin = -1023;
inline constexpr int kAcMax = 1023;

struct HuffmanTable {
  std::array<uint8_t, 16> bits{};  // code count per length 1..16
  std::vector<uint8_t> values;
};

struct FrameComponent {
  int id = 0;
  int h_sampling = 1;
  int v_sampling = 1;
  int quant_table_id = 0;
};

struct FrameHeader {
  int precision = 8;
  int height = 0;
  int width = 0;
  std::vector<FrameComponent> components;
};

struct ScanComponent {
  int comp_index = 0;  // index into frame.components
  int dc_table = 0;
  int ac_table = 0;
};

struct JpegImage {
  // Raw marker segments between SOI and SOS, verbatim and in order
  // (including DQT/DHT/SOF/DRI/APPn/COM and any fill bytes).
  std::vector<Bytes> header_segments;
  Bytes sos_segment;  // verbatim SOS marker segment
  Bytes suffix;       // EOI and any trailing bytes, verbatim

  FrameHeader frame;
  std::map<int, std::array<uint16_t, 64>> quant_tables;          // natural order
  std::map<std::pair<int, int>, HuffmanTable> huffman_tables;    // (class, id)
  int restart_interval = 0;  // MCUs, 0 = none
  std::vector<ScanComponent> scan_spec;

  // Per frame component, block-layout plane at full padded-block resolution.
  // DC differentials are resolved to absolute values.
  std::vector<CoeffPlane> coeff_planes;

  Bytes original_scan_bytes;  // entropy-coded segment incl. stuffing/restarts
  std::array<uint8_t, 32> original_file_digest{};

  bool interleaved = true;
  int mcus_across = 0;
  int mcus_down = 0;

  // Blocks per row/column of a component's plane.
  int blocks_wide(int comp) const { return int(coeff_planes[comp].cols()) / 8; }
  int blocks_high(int comp) const { return int(coeff_planes[comp].rows()) / 8; }
};

struct VerificationReport {
  bool byte_exact = false;
  size_t mismatch_count = 0;
};

JpegImage parse_jpeg(const Bytes& file);

// Rebuilds the structural state (tables, frame, geometry, zeroed planes)
// from a prefix blob covering SOI through the SOS header.
JpegImage parse_jpeg_structure(const Bytes& prefix);

// SOI + header segments + SOS header, verbatim.
Bytes jpeg_prefix_bytes(const JpegImage& image);

// Deterministic baseline Huffman re-encoding of coeff_planes with the
// image's own tables, including byte stuffing, restart markers, and 1-bit
// padding. Throws CategoryOverflow if a coefficient cannot be categorized.
Bytes encode_scan(const JpegImage& image);

// SOI + header segments + SOS + scan + suffix (EOI when suffix is empty).
Bytes serialize_jpeg(const JpegImage& image, const Bytes& scan);

VerificationReport verify_reencode(const Bytes& original, const JpegImage& image);

}  // namespace tlrc

#endif  // TLRC_JPEG_H_
