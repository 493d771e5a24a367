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

// The ".tlrc" transcoded-image container: verbatim JPEG header/suffix blobs,
// per-group latent and residual substreams, fallback raw scan, digests,
// checksum. All integers little-endian, all lengths explicit.

#ifndef TLRC_CONTAINER_H_
#define TLRC_CONTAINER_H_

#include <array>
#include <cstdint>
#include <vector>

#include "tlrc/bytes.h"

namespace tlrc {

struct ContainerFlags {
  static constexpr uint32_t kByteExact = 1u << 0;
  static constexpr uint32_t kCoeffExact = 1u << 1;
  static constexpr uint32_t kRawScanFallback = 1u << 2;
  static constexpr uint32_t kDirectMode = 1u << 3;
  static constexpr uint32_t kKnown = kByteExact | kCoeffExact | kRawScanFallback | kDirectMode;
};

struct GroupStreams {
  uint8_t group_size = 1;
  Bytes z_stream, y_stream, residual_stream;  // z/y absent in direct mode
};

struct ComponentInfo {
  uint8_t id = 0, h_sampling = 1, v_sampling = 1, quant_table_id = 0;
};

struct TlrcContainer {
  uint32_t flags = 0;
  uint32_t width = 0, height = 0;
  std::vector<ComponentInfo> components;
  Bytes jpeg_prefix;  // SOI through SOS header, verbatim
  Bytes jpeg_suffix;  // EOI and trailing bytes, verbatim
  uint64_t original_size = 0;
  std::array<uint8_t, 32> original_file_digest{};
  std::array<uint8_t, 32> model_hash{};
  std::array<uint8_t, 32> stats_hash{};
  std::vector<GroupStreams> groups;
  Bytes raw_scan;  // present iff kRawScanFallback

  size_t lossy_stream_bytes() const {
    size_t n = 0;
    for (const auto& g : groups) n += g.z_stream.size() + g.y_stream.size();
    return n;
  }
  size_t residual_stream_bytes() const {
    size_t n = 0;
    for (const auto& g : groups) n += g.residual_stream.size();
    return n;
  }
};

Bytes write_container(const TlrcContainer& c);
TlrcContainer read_container(const Bytes& bytes);

}  // namespace tlrc

#endif  // TLRC_CONTAINER_H_
