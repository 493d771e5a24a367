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
#include "tlrc/errors.h"
#include "tlrc/jpeg.h"

using namespace tlrc;
using namespace tlrc::testing;

namespace {

std::vector<std::string> fixture_files(bool baseline_only = true) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(TLRC_TEST_DATA_DIR)) {
    std::string name = e.path().filename().string();
    if (baseline_only && name.find("progressive") != std::string::npos) continue;
    if (e.path().extension() == ".jpg") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  REQUIRE(out.size() >= 10);
  return out;
}

}  // namespace

TEST_CASE("minimal single-block grayscale: DC survives, ACs stay zero") {
  CoeffPlane plane = CoeffPlane::Zero(8, 8);
  plane(0, 0) = 37;
  JpegImage img = build_image({plane}, 8, 8);
  Bytes file = serialize_jpeg(img, encode_scan(img));
  JpegImage parsed = parse_jpeg(file);
  CHECK(parsed.coeff_planes[0](0, 0) == 37);
  int nonzero = 0;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      if (!(r == 0 && c == 0) && parsed.coeff_planes[0](r, c) != 0) ++nonzero;
  CHECK(nonzero == 0);
}

TEST_CASE("all-zero single block encodes to DC category 0 + EOB + padding") {
  CoeffPlane plane = CoeffPlane::Zero(8, 8);
  JpegImage img = build_image({plane}, 8, 8);
  Bytes scan = encode_scan(img);
  // '00' (DC cat 0) + '1010' (EOB) + '11' padding = 0x2B.
  CHECK(scan == Bytes{0x2B});
}

TEST_CASE("parser agrees with the independent oracle decoder") {
  // Local reference-encoder file first.
  TestImage ti = synth_photo(301, 16, 16, true);
  JpegEncodeOptions opt;
  opt.quality = 95;
  opt.sampling = Sampling::kGray;
  Bytes file = encode_jpeg(ti, opt);
  JpegImage parsed = parse_jpeg(file);
  OracleResult oracle = oracle_decode(file);
  REQUIRE(parsed.coeff_planes.size() == oracle.planes.size());
  CHECK(parsed.coeff_planes[0] == oracle.planes[0]);

  // Then every bundled libjpeg-encoded photograph.
  for (const auto& path : fixture_files()) {
    Bytes bytes = read_file(path);
    JpegImage p = parse_jpeg(bytes);
    OracleResult o = oracle_decode(bytes);
    REQUIRE(p.coeff_planes.size() == o.planes.size());
    for (size_t c = 0; c < o.planes.size(); ++c) {
      INFO("file ", path, " component ", c);
      CHECK(p.coeff_planes[c] == o.planes[c]);
    }
  }
}

TEST_CASE("truncated scan raises CorruptStream") {
  TestImage ti = synth_photo(31, 32, 24, true);
  JpegEncodeOptions opt;
  opt.sampling = Sampling::kGray;
  Bytes file = encode_jpeg(ti, opt);
  Bytes cut(file.begin(), file.begin() + long(file.size() / 2));
  CHECK_THROWS_AS(parse_jpeg(cut), CorruptStream);
}

TEST_CASE("progressive input is rejected as unsupported") {
  Bytes bytes = read_file(std::string(TLRC_TEST_DATA_DIR) + "/progressive.jpg");
  CHECK_THROWS_AS(parse_jpeg(bytes), UnsupportedJpeg);
}

TEST_CASE("re-encode reproduces the original scan bytes") {
  for (const auto& path : fixture_files()) {
    Bytes bytes = read_file(path);
    JpegImage img = parse_jpeg(bytes);
    Bytes scan = encode_scan(img);
    INFO("file ", path);
    CHECK(scan == img.original_scan_bytes);
  }
}

TEST_CASE("serialize round trip is byte-exact, including restart markers") {
  struct Case {
    uint64_t seed;
    int w, h, quality, restart;
    Sampling sampling;
  };
  const Case cases[] = {
      {1, 40, 32, 90, 0, Sampling::kGray},  {2, 48, 48, 75, 3, Sampling::kGray},
      {3, 64, 40, 95, 0, Sampling::k444},   {4, 32, 32, 60, 2, Sampling::k444},
      {5, 64, 48, 85, 0, Sampling::k420},   {6, 80, 64, 95, 4, Sampling::k420},
      {7, 33, 21, 90, 0, Sampling::k420},   {8, 17, 9, 95, 0, Sampling::k444},
  };
  for (const auto& c : cases) {
    TestImage ti = synth_photo(c.seed, c.w, c.h, c.sampling == Sampling::kGray);
    JpegEncodeOptions opt;
    opt.quality = c.quality;
    opt.sampling = c.sampling;
    opt.restart_interval = c.restart;
    Bytes file = encode_jpeg(ti, opt);
    JpegImage img = parse_jpeg(file);
    Bytes rebuilt = serialize_jpeg(img, encode_scan(img));
    INFO("case seed ", c.seed);
    CHECK(rebuilt == file);
    CHECK(sha256(rebuilt) == img.original_file_digest);
  }
}

TEST_CASE("header mutation changes the digest") {
  TestImage ti = synth_photo(9, 24, 24, true);
  JpegEncodeOptions opt;
  opt.sampling = Sampling::kGray;
  Bytes file = encode_jpeg(ti, opt);
  JpegImage img = parse_jpeg(file);
  img.header_segments[0][6] ^= 0x40;  // poke the APP0 payload
  Bytes rebuilt = serialize_jpeg(img, encode_scan(img));
  CHECK(sha256(rebuilt) != img.original_file_digest);
}

TEST_CASE("serialize with no header segments emits SOI+SOS+scan+EOI") {
  CoeffPlane plane = CoeffPlane::Zero(8, 8);
  JpegImage img = build_image({plane}, 8, 8);
  Bytes scan = encode_scan(img);
  img.header_segments.clear();
  Bytes file = serialize_jpeg(img, scan);
  REQUIRE(file.size() == 2 + img.sos_segment.size() + scan.size() + 2);
  CHECK(file[0] == 0xFF);
  CHECK(file[1] == 0xD8);
  CHECK(file[file.size() - 2] == 0xFF);
  CHECK(file.back() == 0xD9);
}

TEST_CASE("DC beyond the categorizable range raises CategoryOverflow") {
  CoeffPlane plane = CoeffPlane::Zero(8, 8);
  plane(0, 0) = 3000;
  JpegImage img = build_image({plane}, 8, 8);
  CHECK_THROWS_AS(encode_scan(img), CategoryOverflow);
}

TEST_CASE("verify_reencode: conforming file is byte-exact") {
  TestImage ti = synth_photo(77, 48, 32, false);
  JpegEncodeOptions opt;
  opt.sampling = Sampling::k444;
  Bytes file = encode_jpeg(ti, opt);
  JpegImage img = parse_jpeg(file);
  VerificationReport rep = verify_reencode(file, img);
  CHECK(rep.byte_exact);
  CHECK(rep.mismatch_count == 0);
  VerificationReport again = verify_reencode(file, img);
  CHECK(again.byte_exact == rep.byte_exact);
  CHECK(again.mismatch_count == rep.mismatch_count);
}

TEST_CASE("verify_reencode: nonstandard padding bits break byte-exactness only") {
  TestImage ti = synth_photo(78, 48, 48, true);
  JpegEncodeOptions opt;
  opt.sampling = Sampling::kGray;
  opt.restart_interval = 2;  // several padded byte boundaries
  opt.pad_zero_bits = true;
  Bytes file = encode_jpeg(ti, opt);
  JpegImage img = parse_jpeg(file);
  VerificationReport rep = verify_reencode(file, img);
  CHECK_FALSE(rep.byte_exact);
  CHECK(rep.mismatch_count >= 1);

  // Coefficients still round-trip: decoders ignore padding bits.
  JpegEncodeOptions std_opt = opt;
  std_opt.pad_zero_bits = false;
  Bytes std_file = encode_jpeg(ti, std_opt);
  JpegImage std_img = parse_jpeg(std_file);
  CHECK(img.coeff_planes[0] == std_img.coeff_planes[0]);
}

TEST_CASE("property: random planes survive encode_scan -> parse round trips") {
  Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    int comps = 1 + int(rng.uniform_int(0, 2)) % 3;
    int bw = 1 + int(rng.uniform_int(0, 5));
    int bh = 1 + int(rng.uniform_int(0, 5));
    int restart = rng.uniform() < 0.3 ? 1 + int(rng.uniform_int(0, 3)) : 0;
    double density = rng.uniform(0.02, 0.5);
    std::vector<CoeffPlane> planes;
    for (int c = 0; c < comps; ++c) planes.push_back(random_plane(rng, bh, bw, density));
    JpegImage img = build_image(planes, bw * 8, bh * 8, restart);
    Bytes file = serialize_jpeg(img, encode_scan(img));
    JpegImage parsed = parse_jpeg(file);
    REQUIRE(parsed.coeff_planes.size() == planes.size());
    for (int c = 0; c < comps; ++c) {
      INFO("trial ", trial, " comp ", c);
      REQUIRE(parsed.coeff_planes[c] == planes[c]);
    }
  }
}

TEST_CASE("4:2:0 fixture exposes expected plane geometry") {
  Bytes bytes = read_file(std::string(TLRC_TEST_DATA_DIR) + "/photo_q95_420_a.jpg");
  JpegImage img = parse_jpeg(bytes);  // 208x160
  REQUIRE(img.coeff_planes.size() == 3);
  CHECK(img.coeff_planes[0].rows() == 160);
  CHECK(img.coeff_planes[0].cols() == 208);
  CHECK(img.coeff_planes[1].rows() == 80);
  CHECK(img.coeff_planes[1].cols() == 104);
  CHECK(img.interleaved);
}
