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

#include "tlrc/container.h"
#include "tlrc/model.h"
#include "tlrc/rng.h"

using namespace tlrc;

namespace {

Bytes random_bytes(Rng& rng, size_t n) {
  Bytes b(n);
  for (auto& x : b) x = uint8_t(rng.uniform_int(0, 255));
  return b;
}

TlrcContainer sample_container(Rng& rng, uint32_t flags) {
  TlrcContainer c;
  c.flags = flags;
  c.width = 96;
  c.height = 64;
  c.components = {{1, 2, 2, 0}, {2, 1, 1, 1}, {3, 1, 1, 1}};
  c.jpeg_prefix = random_bytes(rng, 300);
  c.jpeg_suffix = {0xFF, 0xD9};
  c.original_size = 12345;
  for (int i = 0; i < 32; ++i) c.original_file_digest[size_t(i)] = uint8_t(i);
  for (int i = 0; i < 32; ++i) c.model_hash[size_t(i)] = uint8_t(i * 3);
  for (int i = 0; i < 32; ++i) c.stats_hash[size_t(i)] = uint8_t(i * 5);
  GroupStreams g1{1, random_bytes(rng, 40), random_bytes(rng, 200), random_bytes(rng, 700)};
  GroupStreams g2{2, random_bytes(rng, 30), random_bytes(rng, 150), random_bytes(rng, 500)};
  c.groups.push_back(std::move(g1));
  c.groups.push_back(std::move(g2));
  if (flags & ContainerFlags::kRawScanFallback) c.raw_scan = random_bytes(rng, 900);
  return c;
}

Bytes refresh_crc(Bytes b) {
  uint32_t crc = crc32(b.data(), b.size() - 4);
  for (int i = 0; i < 4; ++i) b[b.size() - 4 + size_t(i)] = uint8_t(crc >> (8 * i));
  return b;
}

}  // namespace

TEST_CASE("container round trip preserves every field") {
  Rng rng(1);
  TlrcContainer c = sample_container(
      rng, ContainerFlags::kCoeffExact | ContainerFlags::kRawScanFallback);
  Bytes bytes = write_container(c);
  TlrcContainer d = read_container(bytes);
  CHECK(d.flags == c.flags);
  CHECK(d.width == c.width);
  CHECK(d.height == c.height);
  CHECK(d.jpeg_prefix == c.jpeg_prefix);
  CHECK(d.jpeg_suffix == c.jpeg_suffix);
  CHECK(d.original_size == c.original_size);
  CHECK(d.original_file_digest == c.original_file_digest);
  CHECK(d.model_hash == c.model_hash);
  CHECK(d.stats_hash == c.stats_hash);
  REQUIRE(d.groups.size() == 2);
  CHECK(d.groups[0].y_stream == c.groups[0].y_stream);
  CHECK(d.groups[1].residual_stream == c.groups[1].residual_stream);
  CHECK(d.raw_scan == c.raw_scan);
  CHECK(d.lossy_stream_bytes() == 40 + 200 + 30 + 150);
  CHECK(d.residual_stream_bytes() == 700 + 500);
}

TEST_CASE("any flipped byte fails the checksum") {
  Rng rng(2);
  TlrcContainer c = sample_container(
      rng, ContainerFlags::kByteExact | ContainerFlags::kCoeffExact);
  Bytes bytes = write_container(c);
  for (int trial = 0; trial < 40; ++trial) {
    Bytes bad = bytes;
    size_t pos = size_t(rng.uniform_int(4, int64_t(bad.size()) - 1));
    bad[pos] ^= uint8_t(1 << rng.uniform_int(0, 7));
    CHECK_THROWS_AS(read_container(bad), DataError);  // checksum or malformed
  }
}

TEST_CASE("future versions and unknown flags are rejected") {
  Rng rng(3);
  TlrcContainer c = sample_container(
      rng, ContainerFlags::kByteExact | ContainerFlags::kCoeffExact);
  Bytes bytes = write_container(c);
  Bytes v2 = bytes;
  v2[4] += 1;  // version low byte
  CHECK_THROWS_AS(read_container(refresh_crc(v2)), VersionError);

  Bytes weird = bytes;
  weird[6] |= 0x80;  // flags low byte, unknown bit
  CHECK_THROWS_AS(read_container(refresh_crc(weird)), VersionError);
}

TEST_CASE("inconsistent exactness flags are rejected") {
  Rng rng(4);
  TlrcContainer c = sample_container(rng, ContainerFlags::kCoeffExact);  // no fallback
  Bytes bytes = write_container(c);
  CHECK_THROWS_AS(read_container(bytes), MalformedContainer);
}

TEST_CASE("model save -> load -> save is byte identical") {
  CodecModel m = CodecModel::fresh(8, 4, 2, 0.03, {1, 2}, 7);
  Rng rng(5);
  // trained-looking stats
  for (auto& t : m.towers) {
    for (int c = 0; c < t.stats.channels(); ++c) {
      t.stats.mean[c] = rng.uniform(-100, 100);
      t.stats.std[c] = rng.uniform(0.5, 300);
    }
  }
  m.meta.joint_steps = 0;  // init-only model must round trip too
  Bytes a = write_model(m);
  CodecModel loaded = read_model(a);
  Bytes b = write_model(loaded);
  CHECK(a == b);
  CHECK(loaded.towers.size() == m.towers.size());
  CHECK(loaded.latent_channels == 8);
  CHECK(loaded.mixtures == 2);
}

TEST_CASE("model files validate checksum, version, and tensor shapes") {
  CodecModel m = CodecModel::fresh(6, 4, 1, 0.03, {1}, 3);
  Bytes bytes = write_model(m);

  Bytes bad = bytes;
  bad[bytes.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(read_model(bad), ChecksumMismatch);

  Bytes v2 = bytes;
  v2[4] += 1;
  CHECK_THROWS_AS(read_model(refresh_crc(v2)), VersionError);

  // Walk to the first parameter record and corrupt its dims.
  ByteReader r(bytes);
  uint8_t magic[4];
  r.raw(magic, 4);
  r.u16();  // version
  r.u32();  // M
  r.u32();  // N
  r.u32();  // K
  r.f64();  // lambda
  r.u64();  // pretrain steps
  r.u64();  // joint steps
  r.u64();  // seed
  r.f64();  // meta lambda
  uint8_t digest[32];
  r.raw(digest, 32);
  r.u8();  // tower count
  r.u8();  // group size
  r.u8();  // direct
  uint32_t ch = r.u32();
  for (uint32_t i = 0; i < 2 * ch; ++i) r.f64();  // stats
  r.u32();  // param count
  std::string name = r.str();
  size_t dim_offset = r.pos();
  REQUIRE(!name.empty());
  Bytes reshaped = bytes;
  reshaped[dim_offset] += 1;  // d0 low byte
  CHECK_THROWS_AS(read_model(refresh_crc(reshaped)), ShapeMismatch);
}

TEST_CASE("model digest and stats digest respond to content changes") {
  CodecModel m = CodecModel::fresh(6, 4, 1, 0.03, {1}, 3);
  Bytes a = write_model(m);
  auto da = model_digest(a);
  auto sa = stats_digest(m);
  m.towers[0].stats.mean[0] += 1.0;
  Bytes b = write_model(m);
  CHECK(model_digest(b) != da);
  CHECK(stats_digest(m) != sa);
}
