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

#include "tlrc/container.h"

#include <cstring>

#include "tlrc/errors.h"

namespace tlrc {

namespace {
constexpr char kMagic[4] = {'T', 'L', 'R', 'C'};
constexpr uint16_t kVersion = 1;
}  // namespace

Bytes write_container(const TlrcContainer& c) {
  ByteWriter w;
  w.raw(reinterpret_cast<const uint8_t*>(kMagic), 4);
  w.u16(kVersion);
  w.u32(c.flags);
  w.u32(c.width);
  w.u32(c.height);
  w.u8(uint8_t(c.components.size()));
  for (const auto& comp : c.components) {
    w.u8(comp.id);
    w.u8(comp.h_sampling);
    w.u8(comp.v_sampling);
    w.u8(comp.quant_table_id);
  }
  w.blob(c.jpeg_prefix);
  w.blob(c.jpeg_suffix);
  w.u64(c.original_size);
  w.raw(c.original_file_digest.data(), 32);
  w.raw(c.model_hash.data(), 32);
  w.raw(c.stats_hash.data(), 32);
  w.u8(uint8_t(c.groups.size()));
  const bool direct = c.flags & ContainerFlags::kDirectMode;
  for (const auto& g : c.groups) {
    w.u8(g.group_size);
    if (!direct) {
      w.blob(g.z_stream);
      w.blob(g.y_stream);
    }
    w.blob(g.residual_stream);
  }
  if (c.flags & ContainerFlags::kRawScanFallback) w.blob(c.raw_scan);
  w.u32(crc32(w.bytes()));
  return w.take();
}

TlrcContainer read_container(const Bytes& bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw MalformedContainer("not a tlrc container");
  {
    uint32_t stored = uint32_t(bytes[bytes.size() - 4]) |
                      (uint32_t(bytes[bytes.size() - 3]) << 8) |
                      (uint32_t(bytes[bytes.size() - 2]) << 16) |
                      (uint32_t(bytes[bytes.size() - 1]) << 24);
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
      throw ChecksumMismatch("container checksum mismatch");
  }
  ByteReader r(bytes.data(), bytes.size() - 4);
  uint8_t magic[4];
  r.raw(magic, 4);
  if (r.u16() != kVersion) throw VersionError("unsupported container version");
  TlrcContainer c;
  c.flags = r.u32();
  if (c.flags & ~ContainerFlags::kKnown) throw VersionError("unknown container flags");
  c.width = r.u32();
  c.height = r.u32();
  int n_comp = r.u8();
  if (n_comp < 1 || n_comp > 3) throw MalformedContainer("bad component count");
  for (int i = 0; i < n_comp; ++i) {
    ComponentInfo ci;
    ci.id = r.u8();
    ci.h_sampling = r.u8();
    ci.v_sampling = r.u8();
    ci.quant_table_id = r.u8();
    c.components.push_back(ci);
  }
  c.jpeg_prefix = r.blob();
  c.jpeg_suffix = r.blob();
  c.original_size = r.u64();
  r.raw(c.original_file_digest.data(), 32);
  r.raw(c.model_hash.data(), 32);
  r.raw(c.stats_hash.data(), 32);
  int n_groups = r.u8();
  if (n_groups < 1 || n_groups > 3) throw MalformedContainer("bad group count");
  const bool direct = c.flags & ContainerFlags::kDirectMode;
  for (int i = 0; i < n_groups; ++i) {
    GroupStreams g;
    g.group_size = r.u8();
    if (g.group_size < 1 || g.group_size > 3) throw MalformedContainer("bad group size");
    if (!direct) {
      g.z_stream = r.blob();
      g.y_stream = r.blob();
    }
    g.residual_stream = r.blob();
    c.groups.push_back(std::move(g));
  }
  if (c.flags & ContainerFlags::kRawScanFallback) c.raw_scan = r.blob();
  if (!r.done()) throw MalformedContainer("trailing bytes in container");
  const bool coeff_exact = c.flags & ContainerFlags::kCoeffExact;
  const bool byte_exact = c.flags & ContainerFlags::kByteExact;
  if (byte_exact && !coeff_exact) throw MalformedContainer("inconsistent exactness flags");
  if (!byte_exact && !(c.flags & ContainerFlags::kRawScanFallback))
    throw MalformedContainer("non-byte-exact container requires raw scan fallback");
  return c;
}

}  // namespace tlrc
