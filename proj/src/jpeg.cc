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

#include "tlrc/jpeg.h"

#include <algorithm>
#include <cstring>

#include "tlrc/dct_image.h"
#include "tlrc/errors.h"

namespace tlrc {

namespace {

// Marker codes (second byte after 0xFF).
constexpr uint8_t kSOI = 0xD8;
constexpr uint8_t kEOI = 0xD9;
constexpr uint8_t kSOS = 0xDA;
constexpr uint8_t kDQT = 0xDB;
constexpr uint8_t kDHT = 0xC4;
constexpr uint8_t kDRI = 0xDD;
constexpr uint8_t kDNL = 0xDC;
constexpr uint8_t kSOF0 = 0xC0;
constexpr uint8_t kDAC = 0xCC;
constexpr uint8_t kRST0 = 0xD0;
constexpr uint8_t kTEM = 0x01;

bool is_rst(uint8_t m) { return m >= 0xD0 && m <= 0xD7; }
bool is_sof(uint8_t m) {
  return (m >= 0xC0 && m <= 0xCF) && m != kDHT && m != 0xC8 && m != kDAC;
}

// Derived decoding tables per T.81 F.2.2.3.
struct HuffDecoder {
  int32_t maxcode[17];
  int32_t mincode[17];
  int32_t valptr[17];
  std::vector<uint8_t> values;

  void build(const HuffmanTable& t) {
    values = t.values;
    int code = 0, k = 0;
    for (int len = 1; len <= 16; ++len) {
      int n = t.bits[len - 1];
      if (n == 0) {
        maxcode[len] = -1;
        mincode[len] = 0;
        valptr[len] = 0;
      } else {
        valptr[len] = k;
        mincode[len] = code;
        code += n;
        k += n;
        maxcode[len] = code - 1;
      }
      if (code > (1 << len)) throw CorruptStream("overfull Huffman table");
      code <<= 1;
    }
    if (size_t(k) != values.size()) throw CorruptStream("Huffman table value count mismatch");
  }
};

// Encoding tables: per symbol, its canonical code and length.
struct HuffEncoder {
  uint16_t code[256];
  int8_t size[256];

  void build(const HuffmanTable& t) {
    std::memset(size, 0, sizeof(size));
    int c = 0, k = 0;
    for (int len = 1; len <= 16; ++len) {
      for (int i = 0; i < t.bits[len - 1]; ++i) {
        uint8_t v = t.values[k++];
        code[v] = static_cast<uint16_t>(c);
        size[v] = static_cast<int8_t>(len);
        ++c;
      }
      c <<= 1;
    }
  }
};

class ScanBitReader {
 public:
  ScanBitReader(const uint8_t* p, size_t n) : p_(p), n_(n) {}

  int read_bit() {
    if (bits_left_ == 0) load_byte();
    --bits_left_;
    return (cur_ >> bits_left_) & 1;
  }

  int read_bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | read_bit();
    return v;
  }

  // Byte-aligns and consumes the expected restart marker.
  void sync_restart(int index) {
    bits_left_ = 0;
    if (pos_ + 2 > n_ || p_[pos_] != 0xFF || p_[pos_ + 1] != kRST0 + index)
      throw CorruptStream("missing or out-of-order restart marker");
    pos_ += 2;
  }

  size_t byte_pos() const { return pos_; }

 private:
  void load_byte() {
    if (pos_ >= n_) throw CorruptStream("Huffman decode ran past end of scan");
    uint8_t b = p_[pos_++];
    if (b == 0xFF) {
      if (pos_ >= n_) throw CorruptStream("dangling 0xFF at end of scan");
      uint8_t m = p_[pos_++];
      if (m != 0x00) throw CorruptStream("unexpected marker inside entropy-coded data");
    }
    cur_ = b;
    bits_left_ = 8;
  }

  const uint8_t* p_;
  size_t n_;
  size_t pos_ = 0;
  uint8_t cur_ = 0;
  int bits_left_ = 0;
};

class ScanBitWriter {
 public:
  void put_bits(uint32_t v, int n) {
    for (int i = n - 1; i >= 0; --i) put_bit((v >> i) & 1);
  }

  void put_bit(int b) {
    cur_ = static_cast<uint8_t>((cur_ << 1) | b);
    if (++nbits_ == 8) {
      out_.push_back(cur_);
      if (cur_ == 0xFF) out_.push_back(0x00);
      cur_ = 0;
      nbits_ = 0;
    }
  }

  // 1-bit padding to the next byte boundary.
  void pad() {
    while (nbits_ != 0) put_bit(1);
  }

  void restart_marker(int index) {
    pad();
    out_.push_back(0xFF);
    out_.push_back(static_cast<uint8_t>(kRST0 + index));
  }

  Bytes take() {
    pad();
    return std::move(out_);
  }

 private:
  Bytes out_;
  uint8_t cur_ = 0;
  int nbits_ = 0;
};

int decode_huff_symbol(ScanBitReader& br, const HuffDecoder& t) {
  int code = br.read_bit();
  int len = 1;
  while (code > t.maxcode[len]) {
    if (++len > 16) throw CorruptStream("invalid Huffman code");
    code = (code << 1) | br.read_bit();
  }
  return t.values[t.valptr[len] + code - t.mincode[len]];
}

int extend(int v, int s) {
  if (s == 0) return 0;
  return (v < (1 << (s - 1))) ? v - (1 << s) + 1 : v;
}

int magnitude_category(int v) {
  int a = v < 0 ? -v : v;
  int s = 0;
  while (a) {
    ++s;
    a >>= 1;
  }
  return s;
}

uint16_t be16(const uint8_t* p) { return static_cast<uint16_t>((p[0] << 8) | p[1]); }

struct MarkerSegment {
  uint8_t marker;
  size_t raw_begin;  // includes preceding fill bytes
  size_t payload_begin;
  size_t payload_end;  // == raw end
};

// Reads a marker (skipping fill bytes) plus its length-prefixed payload.
MarkerSegment read_segment(const Bytes& f, size_t& pos) {
  MarkerSegment seg;
  seg.raw_begin = pos;
  if (pos >= f.size() || f[pos] != 0xFF) throw CorruptStream("expected marker");
  while (pos < f.size() && f[pos] == 0xFF) ++pos;
  if (pos >= f.size()) throw CorruptStream("truncated marker");
  seg.marker = f[pos++];
  if (seg.marker == kEOI || is_rst(seg.marker) || seg.marker == kTEM || seg.marker == kSOI) {
    seg.payload_begin = seg.payload_end = pos;
    return seg;
  }
  if (pos + 2 > f.size()) throw CorruptStream("truncated segment length");
  size_t len = be16(f.data() + pos);
  if (len < 2 || pos + len > f.size()) throw CorruptStream("segment length out of bounds");
  seg.payload_begin = pos + 2;
  seg.payload_end = pos + len;
  pos += len;
  return seg;
}

void parse_dqt(const Bytes& f, const MarkerSegment& seg, JpegImage& img) {
  size_t p = seg.payload_begin;
  while (p < seg.payload_end) {
    int pq = f[p] >> 4, tq = f[p] & 0xF;
    ++p;
    if (pq != 0) throw UnsupportedJpeg("16-bit quantization table");
    if (tq > 3) throw CorruptStream("bad quantization table id");
    if (p + 64 > seg.payload_end) throw CorruptStream("truncated DQT");
    std::array<uint16_t, 64> q;
    for (int k = 0; k < 64; ++k) {
      uint8_t v = f[p + k];
      if (v == 0) throw CorruptStream("zero quantization table entry");
      auto [r, c] = zigzag_index(k);
      q[r * 8 + c] = v;
    }
    p += 64;
    img.quant_tables[tq] = q;
  }
}

void parse_dht(const Bytes& f, const MarkerSegment& seg, JpegImage& img) {
  size_t p = seg.payload_begin;
  while (p < seg.payload_end) {
    int tc = f[p] >> 4, th = f[p] & 0xF;
    ++p;
    if (tc > 1) throw UnsupportedJpeg("non-Huffman entropy table class");
    if (th > 3) throw CorruptStream("bad Huffman table id");
    if (p + 16 > seg.payload_end) throw CorruptStream("truncated DHT");
    HuffmanTable t;
    size_t total = 0;
    for (int i = 0; i < 16; ++i) {
      t.bits[i] = f[p + i];
      total += t.bits[i];
    }
    p += 16;
    if (total > 256 || p + total > seg.payload_end) throw CorruptStream("truncated DHT values");
    t.values.assign(f.begin() + long(p), f.begin() + long(p + total));
    p += total;
    HuffDecoder check;
    check.build(t);  // validates canonical feasibility
    img.huffman_tables[{tc, th}] = t;
  }
}

void parse_sof(const Bytes& f, const MarkerSegment& seg, JpegImage& img) {
  size_t p = seg.payload_begin;
  if (seg.payload_end - p < 6) throw CorruptStream("truncated SOF");
  img.frame.precision = f[p];
  img.frame.height = be16(f.data() + p + 1);
  img.frame.width = be16(f.data() + p + 3);
  int nf = f[p + 5];
  p += 6;
  if (img.frame.precision != 8) throw UnsupportedJpeg("12-bit precision");
  if (img.frame.height == 0 || img.frame.width == 0) throw CorruptStream("zero frame dimensions");
  if (nf < 1 || nf > 3) throw UnsupportedJpeg("component count outside 1-3");
  if (seg.payload_end - p < size_t(3 * nf)) throw CorruptStream("truncated SOF components");
  for (int i = 0; i < nf; ++i) {
    FrameComponent c;
    c.id = f[p];
    c.h_sampling = f[p + 1] >> 4;
    c.v_sampling = f[p + 1] & 0xF;
    c.quant_table_id = f[p + 2];
    p += 3;
    img.frame.components.push_back(c);
  }
  bool all_one = true;
  for (const auto& c : img.frame.components)
    all_one = all_one && c.h_sampling == 1 && c.v_sampling == 1;
  bool is_420 = nf == 3 && img.frame.components[0].h_sampling == 2 &&
                img.frame.components[0].v_sampling == 2 &&
                img.frame.components[1].h_sampling == 1 &&
                img.frame.components[1].v_sampling == 1 &&
                img.frame.components[2].h_sampling == 1 &&
                img.frame.components[2].v_sampling == 1;
  if (nf == 1) return;  // single-component scans ignore sampling factors
  if (!all_one && !is_420) throw UnsupportedJpeg("sampling layout other than 4:4:4 or 4:2:0");
}

void parse_sos_header(const Bytes& f, const MarkerSegment& seg, JpegImage& img) {
  size_t p = seg.payload_begin;
  if (seg.payload_end - p < 1) throw CorruptStream("truncated SOS");
  int ns = f[p++];
  int nf = int(img.frame.components.size());
  if (ns < 1 || ns > 4 || seg.payload_end - p < size_t(2 * ns + 3))
    throw CorruptStream("bad SOS header");
  if (ns != nf) throw UnsupportedJpeg("multi-scan sequential JPEG");
  for (int j = 0; j < ns; ++j) {
    int cs = f[p];
    int td = f[p + 1] >> 4, ta = f[p + 1] & 0xF;
    p += 2;
    int idx = -1;
    for (int i = 0; i < nf; ++i)
      if (img.frame.components[i].id == cs) idx = i;
    if (idx < 0) throw CorruptStream("scan references unknown component");
    img.scan_spec.push_back({idx, td, ta});
  }
  int ss = f[p], se = f[p + 1], ahal = f[p + 2];
  if (ss != 0 || se != 63 || ahal != 0)
    throw CorruptStream("non-baseline spectral selection in SOS");
}

struct Geometry {
  bool interleaved;
  int mcus_across, mcus_down;
  int mcu_count;
};

Geometry compute_geometry(JpegImage& img) {
  Geometry g;
  g.interleaved = img.frame.components.size() > 1;
  if (!g.interleaved) {
    int bw = (img.frame.width + 7) / 8;
    int bh = (img.frame.height + 7) / 8;
    g.mcus_across = bw;
    g.mcus_down = bh;
    img.coeff_planes.emplace_back(CoeffPlane::Zero(bh * 8, bw * 8));
  } else {
    int hmax = 0, vmax = 0;
    for (const auto& c : img.frame.components) {
      hmax = std::max(hmax, c.h_sampling);
      vmax = std::max(vmax, c.v_sampling);
    }
    g.mcus_across = (img.frame.width + 8 * hmax - 1) / (8 * hmax);
    g.mcus_down = (img.frame.height + 8 * vmax - 1) / (8 * vmax);
    for (const auto& c : img.frame.components) {
      img.coeff_planes.emplace_back(
          CoeffPlane::Zero(g.mcus_down * c.v_sampling * 8, g.mcus_across * c.h_sampling * 8));
    }
  }
  g.mcu_count = g.mcus_across * g.mcus_down;
  img.interleaved = g.interleaved;
  img.mcus_across = g.mcus_across;
  img.mcus_down = g.mcus_down;
  return g;
}

void decode_block(ScanBitReader& br, const HuffDecoder& dc, const HuffDecoder& ac,
                  int32_t& pred, CoeffPlane& plane, int by, int bx) {
  int t = decode_huff_symbol(br, dc);
  if (t > 11) throw CorruptStream("DC category exceeds baseline limit");
  int diff = extend(br.read_bits(t), t);
  pred += diff;
  if (pred < kDcMin || pred > kDcMax) throw CorruptStream("accumulated DC out of range");
  plane(by * 8, bx * 8) = pred;
  int k = 1;
  while (k <= 63) {
    int rs = decode_huff_symbol(br, ac);
    int r = rs >> 4, s = rs & 15;
    if (s == 0) {
      if (r == 15) {
        k += 16;
        continue;
      }
      if (r != 0) throw CorruptStream("invalid AC run/size symbol");
      break;  // EOB
    }
    if (s > 10) throw CorruptStream("AC category exceeds baseline limit");
    k += r;
    if (k > 63) throw CorruptStream("AC run overflows block");
    int v = extend(br.read_bits(s), s);
    auto [row, col] = zigzag_index(k);
    plane(by * 8 + row, bx * 8 + col) = v;
    ++k;
  }
}

const HuffDecoder& decoder_for(std::map<std::pair<int, int>, HuffDecoder>& cache,
                               const JpegImage& img, int cls, int id) {
  auto key = std::make_pair(cls, id);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto tab = img.huffman_tables.find(key);
  if (tab == img.huffman_tables.end())
    throw CorruptStream("Huffman table referenced before definition");
  HuffDecoder d;
  d.build(tab->second);
  return cache.emplace(key, std::move(d)).first->second;
}

// SOI through SOS header; returns the position just past the SOS segment.
size_t parse_prefix_into(const Bytes& file, JpegImage& img) {
  if (file.size() < 4 || file[0] != 0xFF || file[1] != kSOI)
    throw CorruptStream("missing SOI marker");
  size_t pos = 2;
  bool have_sof = false;
  while (true) {
    MarkerSegment seg = read_segment(file, pos);
    if (seg.marker == kSOS) {
      if (!have_sof) throw CorruptStream("SOS before SOF");
      img.sos_segment.assign(file.begin() + long(seg.raw_begin), file.begin() + long(pos));
      parse_sos_header(file, seg, img);
      break;
    }
    Bytes raw(file.begin() + long(seg.raw_begin), file.begin() + long(pos));
    switch (seg.marker) {
      case kDQT:
        parse_dqt(file, seg, img);
        break;
      case kDHT:
        parse_dht(file, seg, img);
        break;
      case kDRI:
        if (seg.payload_end - seg.payload_begin < 2) throw CorruptStream("truncated DRI");
        img.restart_interval = be16(file.data() + seg.payload_begin);
        break;
      case kDAC:
        throw UnsupportedJpeg("arithmetic-coded JPEG");
      case kSOI:
        throw CorruptStream("nested SOI");
      case kEOI:
        throw CorruptStream("EOI before scan");
      case kTEM:
        throw CorruptStream("unexpected TEM marker");
      default:
        if (is_rst(seg.marker)) throw CorruptStream("restart marker outside scan");
        if (is_sof(seg.marker)) {
          if (seg.marker != kSOF0) {
            throw UnsupportedJpeg(seg.marker == 0xC2 ? "progressive JPEG"
                                                     : "non-baseline SOF marker");
          }
          if (have_sof) throw CorruptStream("duplicate SOF");
          parse_sof(file, seg, img);
          have_sof = true;
        }
        // APPn/COM and other length-prefixed segments pass through verbatim.
        break;
    }
    img.header_segments.push_back(std::move(raw));
  }
  compute_geometry(img);
  return pos;
}

void decode_scan(JpegImage& img) {
  std::map<std::pair<int, int>, HuffDecoder> cache;
  struct CompScan {
    const HuffDecoder* dc;
    const HuffDecoder* ac;
    int comp;
    int h, v;
  };
  std::vector<CompScan> order;
  for (const auto& sc : img.scan_spec) {
    const auto& fc = img.frame.components[sc.comp_index];
    order.push_back({&decoder_for(cache, img, 0, sc.dc_table),
                     &decoder_for(cache, img, 1, sc.ac_table), sc.comp_index,
                     img.interleaved ? fc.h_sampling : 1, img.interleaved ? fc.v_sampling : 1});
  }
  for (const auto& fc : img.frame.components) {
    if (!img.quant_tables.count(fc.quant_table_id))
      throw CorruptStream("quantization table referenced before definition");
  }

  ScanBitReader br(img.original_scan_bytes.data(), img.original_scan_bytes.size());
  std::vector<int32_t> pred(img.frame.components.size(), 0);
  int rst_index = 0;
  const int mcu_count = img.mcus_across * img.mcus_down;
  for (int mcu = 0; mcu < mcu_count; ++mcu) {
    if (img.restart_interval > 0 && mcu > 0 && mcu % img.restart_interval == 0) {
      br.sync_restart(rst_index);
      rst_index = (rst_index + 1) & 7;
      std::fill(pred.begin(), pred.end(), 0);
    }
    int my = mcu / img.mcus_across, mx = mcu % img.mcus_across;
    for (const auto& cs : order) {
      for (int bv = 0; bv < cs.v; ++bv) {
        for (int bh = 0; bh < cs.h; ++bh) {
          decode_block(br, *cs.dc, *cs.ac, pred[cs.comp], img.coeff_planes[cs.comp],
                       my * cs.v + bv, mx * cs.h + bh);
        }
      }
    }
  }
}

}  // namespace

JpegImage parse_jpeg(const Bytes& file) {
  JpegImage img;
  img.original_file_digest = sha256(file);
  size_t pos = parse_prefix_into(file, img);

  // Entropy-coded data runs until the next non-RST marker.
  size_t scan_begin = pos;
  size_t p = pos;
  while (true) {
    if (p >= file.size()) throw CorruptStream("file ends inside entropy-coded scan");
    if (file[p] != 0xFF) {
      ++p;
      continue;
    }
    if (p + 1 >= file.size()) throw CorruptStream("file ends inside entropy-coded scan");
    uint8_t m = file[p + 1];
    if (m == 0x00 || is_rst(m)) {
      p += 2;
      continue;
    }
    if (m == 0xFF) {
      ++p;  // fill byte
      continue;
    }
    break;  // real marker terminates the scan
  }
  img.original_scan_bytes.assign(file.begin() + long(scan_begin), file.begin() + long(p));

  uint8_t term = file[p + 1];
  if (term == kDNL) throw UnsupportedJpeg("DNL segment");
  if (term == kSOS || term == kDHT || term == kDQT || term == kDRI)
    throw UnsupportedJpeg("multi-scan sequential JPEG");
  if (term != kEOI) throw CorruptStream("unexpected marker after scan");
  img.suffix.assign(file.begin() + long(p), file.end());

  decode_scan(img);
  return img;
}

JpegImage parse_jpeg_structure(const Bytes& prefix) {
  JpegImage img;
  size_t pos = parse_prefix_into(prefix, img);
  if (pos != prefix.size()) throw CorruptStream("trailing bytes after SOS header");
  return img;
}

Bytes jpeg_prefix_bytes(const JpegImage& image) {
  Bytes out;
  out.push_back(0xFF);
  out.push_back(kSOI);
  for (const auto& seg : image.header_segments) out.insert(out.end(), seg.begin(), seg.end());
  out.insert(out.end(), image.sos_segment.begin(), image.sos_segment.end());
  return out;
}

Bytes encode_scan(const JpegImage& image) {
  struct CompScan {
    HuffEncoder dc, ac;
    int comp, h, v;
  };
  std::vector<CompScan> order;
  for (const auto& sc : image.scan_spec) {
    auto dc_it = image.huffman_tables.find({0, sc.dc_table});
    auto ac_it = image.huffman_tables.find({1, sc.ac_table});
    if (dc_it == image.huffman_tables.end() || ac_it == image.huffman_tables.end())
      throw CorruptStream("scan references undefined Huffman table");
    CompScan cs;
    cs.dc.build(dc_it->second);
    cs.ac.build(ac_it->second);
    cs.comp = sc.comp_index;
    const auto& fc = image.frame.components[sc.comp_index];
    cs.h = image.interleaved ? fc.h_sampling : 1;
    cs.v = image.interleaved ? fc.v_sampling : 1;
    order.push_back(cs);
  }

  ScanBitWriter bw;
  auto put_coeff = [&](const HuffEncoder& t, int run, int v) {
    int s = magnitude_category(v);
    int symbol = (run << 4) | s;
    if (symbol > 255 || t.size[symbol] == 0)
      throw CategoryOverflow("coefficient magnitude not encodable by scan tables");
    bw.put_bits(t.code[symbol], t.size[symbol]);
    if (s > 0) bw.put_bits(uint32_t(v >= 0 ? v : v + (1 << s) - 1) & ((1u << s) - 1), s);
  };

  std::vector<int32_t> pred(image.frame.components.size(), 0);
  int mcu_count = image.mcus_across * image.mcus_down;
  int rst_index = 0;
  for (int mcu = 0; mcu < mcu_count; ++mcu) {
    if (image.restart_interval > 0 && mcu > 0 && mcu % image.restart_interval == 0) {
      bw.restart_marker(rst_index);
      rst_index = (rst_index + 1) & 7;
      std::fill(pred.begin(), pred.end(), 0);
    }
    int my = mcu / image.mcus_across, mx = mcu % image.mcus_across;
    for (const auto& cs : order) {
      const CoeffPlane& plane = image.coeff_planes[cs.comp];
      for (int bv = 0; bv < cs.v; ++bv) {
        for (int bh = 0; bh < cs.h; ++bh) {
          int by = my * cs.v + bv, bx = mx * cs.h + bh;
          int32_t dc = plane(by * 8, bx * 8);
          int diff = dc - pred[cs.comp];
          pred[cs.comp] = dc;
          {
            int s = magnitude_category(diff);
            if (s > 11 || cs.dc.size[s] == 0)
              throw CategoryOverflow("DC differential not encodable");
            bw.put_bits(cs.dc.code[s], cs.dc.size[s]);
            if (s > 0)
              bw.put_bits(uint32_t(diff >= 0 ? diff : diff + (1 << s) - 1) & ((1u << s) - 1), s);
          }
          int run = 0;
          for (int k = 1; k <= 63; ++k) {
            auto [row, col] = zigzag_index(k);
            int v = plane(by * 8 + row, bx * 8 + col);
            if (v == 0) {
              ++run;
              continue;
            }
            while (run > 15) {
              bw.put_bits(cs.ac.code[0xF0], cs.ac.size[0xF0]);  // ZRL
              run -= 16;
            }
            if (magnitude_category(v) > 10)
              throw CategoryOverflow("AC coefficient not encodable");
            put_coeff(cs.ac, run, v);
            run = 0;
          }
          if (run > 0) {
            if (cs.ac.size[0x00] == 0) throw CategoryOverflow("EOB symbol missing from table");
            bw.put_bits(cs.ac.code[0x00], cs.ac.size[0x00]);  // EOB
          }
        }
      }
    }
  }
  return bw.take();
}

Bytes serialize_jpeg(const JpegImage& image, const Bytes& scan) {
  Bytes out;
  out.push_back(0xFF);
  out.push_back(kSOI);
  for (const auto& seg : image.header_segments) out.insert(out.end(), seg.begin(), seg.end());
  out.insert(out.end(), image.sos_segment.begin(), image.sos_segment.end());
  out.insert(out.end(), scan.begin(), scan.end());
  if (image.suffix.empty()) {
    out.push_back(0xFF);
    out.push_back(kEOI);
  } else {
    out.insert(out.end(), image.suffix.begin(), image.suffix.end());
  }
  return out;
}

VerificationReport verify_reencode(const Bytes& original, const JpegImage& image) {
  VerificationReport rep;
  Bytes redone;
  try {
    redone = serialize_jpeg(image, encode_scan(image));
  } catch (const CategoryOverflow&) {
    rep.byte_exact = false;
    rep.mismatch_count = original.size();
    return rep;
  }
  size_t common = std::min(original.size(), redone.size());
  size_t mismatches = 0;
  for (size_t i = 0; i < common; ++i)
    if (original[i] != redone[i]) ++mismatches;
  mismatches += std::max(original.size(), redone.size()) - common;
  rep.mismatch_count = mismatches;
  rep.byte_exact = mismatches == 0;
  return rep;
}

}  // namespace tlrc
