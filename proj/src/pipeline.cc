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

#include "tlrc/pipeline.h"

namespace tlrc {

namespace {

bool planes_equal_size(const CoeffPlane& a, const CoeffPlane& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

int padded(int v) { return (v + kPadMultiple - 1) / kPadMultiple * kPadMultiple; }

}  // namespace

std::vector<ComponentGroup> derive_groups(const JpegImage& img) {
  const int n = int(img.frame.components.size());
  if (n == 1) return {{{0}}};
  if (n == 2) {
    if (planes_equal_size(img.coeff_planes[0], img.coeff_planes[1])) return {{{0, 1}}};
    return {{{0}}, {{1}}};
  }
  bool all_equal = planes_equal_size(img.coeff_planes[0], img.coeff_planes[1]) &&
                   planes_equal_size(img.coeff_planes[1], img.coeff_planes[2]);
  if (all_equal) return {{{0, 2, 1}}};
  if (planes_equal_size(img.coeff_planes[1], img.coeff_planes[2]))
    return {{{0}}, {{2, 1}}};  // 4:2:0: luma alone, chroma pair Cr then Cb
  return {{{0}}, {{1}}, {{2}}};
}

Tensor<float> group_tensor(const JpegImage& img, const ComponentGroup& group) {
  std::vector<DctImage> dct;
  dct.reserve(group.comp_indices.size());
  for (int idx : group.comp_indices)
    dct.push_back(blocks_to_dct_image(img.coeff_planes[idx], img.frame.components[idx].id));
  std::vector<const DctImage*> ptrs;
  for (const auto& d : dct) ptrs.push_back(&d);
  return stack_to_tensor<float>(ptrs);
}

void scatter_group(JpegImage& img, const ComponentGroup& group, const Tensor<float>& x) {
  const int h = x.h(), w = x.w();
  for (size_t m = 0; m < group.comp_indices.size(); ++m) {
    DctImage d;
    d.component_id = img.frame.components[group.comp_indices[m]].id;
    d.height = h;
    d.width = w;
    d.data.resize(Eigen::Index(h) * w, 64);
    for (int c = 0; c < 64; ++c)
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
          d.data(Eigen::Index(i) * w + j, c) = int32_t(x(0, int(m) * 64 + c, i, j));
    img.coeff_planes[group.comp_indices[m]] = dct_image_to_blocks(d);
  }
}

Bytes encode_image_file(const Bytes& jpeg_bytes, CodecModel& model, bool direct_mode) {
  JpegImage img = parse_jpeg(jpeg_bytes);

  TlrcContainer c;
  c.width = uint32_t(img.frame.width);
  c.height = uint32_t(img.frame.height);
  for (const auto& comp : img.frame.components)
    c.components.push_back({uint8_t(comp.id), uint8_t(comp.h_sampling),
                            uint8_t(comp.v_sampling), uint8_t(comp.quant_table_id)});
  c.jpeg_prefix = jpeg_prefix_bytes(img);
  c.jpeg_suffix = img.suffix;
  c.original_size = jpeg_bytes.size();
  c.original_file_digest = img.original_file_digest;
  c.model_hash = model_digest(write_model(model));
  c.stats_hash = stats_digest(model);

  VerificationReport verify = verify_reencode(jpeg_bytes, img);
  c.flags = ContainerFlags::kCoeffExact;
  if (verify.byte_exact) {
    c.flags |= ContainerFlags::kByteExact;
  } else {
    c.flags |= ContainerFlags::kRawScanFallback;
    c.raw_scan = img.original_scan_bytes;
  }
  if (direct_mode) c.flags |= ContainerFlags::kDirectMode;

  for (const ComponentGroup& group : derive_groups(img)) {
    const int g = int(group.comp_indices.size());
    Tower* tower = model.find_tower(g, direct_mode);
    if (!tower)
      throw DataError("model has no tower for component group of size " + std::to_string(g));
    Tensor<float> x = group_tensor(img, group);
    GroupStreams gs;
    gs.group_size = uint8_t(g);
    if (direct_mode) {
      Tensor<float> zero(1, x.c(), x.h(), x.w());
      gs.residual_stream = encode_residual(*tower->residual, tower->stats, x, zero);
    } else {
      Tensor<float> x_pad = pad_replicate(x, kPadMultiple);
      Tensor<float> x_norm = normalize(x_pad, tower->stats);
      LatentBundle<float> bundle = lossy_forward_round(*tower->lossy, x_norm);
      LatentStreams streams = encode_latents(*tower->lossy, bundle);
      Tensor<float> x_hat_norm = tower->lossy->synthesis.forward(bundle.y_hat);
      Tensor<float> x_hat = crop(reconstruct_int(x_hat_norm, tower->stats), x.h(), x.w());
      Tensor<float> r = x;
      r.array() -= x_hat.array();
      gs.z_stream = std::move(streams.z_stream);
      gs.y_stream = std::move(streams.y_stream);
      gs.residual_stream = encode_residual(*tower->residual, tower->stats, r, x_hat);
    }
    c.groups.push_back(std::move(gs));
  }
  return write_container(c);
}

DecodeResult decode_container_bytes(const Bytes& container_bytes, CodecModel& model) {
  TlrcContainer c = read_container(container_bytes);
  if (c.model_hash != model_digest(write_model(model)))
    throw DataError("container was encoded with a different model");

  DecodeResult out;
  out.image = parse_jpeg_structure(c.jpeg_prefix);
  out.image.suffix = c.jpeg_suffix;
  JpegImage& img = out.image;
  if (uint32_t(img.frame.width) != c.width || uint32_t(img.frame.height) != c.height)
    throw MalformedContainer("geometry disagrees with embedded header");

  std::vector<ComponentGroup> groups = derive_groups(img);
  if (groups.size() != c.groups.size()) throw MalformedContainer("group count mismatch");

  const bool direct_mode = c.flags & ContainerFlags::kDirectMode;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const ComponentGroup& group = groups[gi];
    const GroupStreams& gs = c.groups[gi];
    const int g = int(group.comp_indices.size());
    if (int(gs.group_size) != g) throw MalformedContainer("group size mismatch");
    Tower* tower = model.find_tower(g, direct_mode);
    if (!tower)
      throw DataError("model has no tower for component group of size " + std::to_string(g));
    const CoeffPlane& plane = img.coeff_planes[group.comp_indices[0]];
    const int h = int(plane.rows()) / 8, w = int(plane.cols()) / 8;

    Tensor<float> x;
    if (direct_mode) {
      Tensor<float> zero(1, g * 64, h, w);
      x = decode_residual(*tower->residual, tower->stats, gs.residual_stream, zero);
    } else {
      const int ph = padded(h), pw = padded(w);
      LatentBundle<float> bundle =
          decode_latents(*tower->lossy, gs.z_stream, gs.y_stream, ph / 4, pw / 4);
      Tensor<float> x_hat_norm = tower->lossy->synthesis.forward(bundle.y_hat);
      if (x_hat_norm.h() != ph || x_hat_norm.w() != pw)
        throw StreamCorrupt("synthesis geometry mismatch");
      Tensor<float> x_hat = crop(reconstruct_int(x_hat_norm, tower->stats), h, w);
      Tensor<float> r = decode_residual(*tower->residual, tower->stats, gs.residual_stream, x_hat);
      x = x_hat;
      x.array() += r.array();
    }
    scatter_group(img, group, x);
  }

  Bytes scan =
      (c.flags & ContainerFlags::kRawScanFallback) ? c.raw_scan : encode_scan(img);
  Bytes file = c.jpeg_prefix;
  file.insert(file.end(), scan.begin(), scan.end());
  if (img.suffix.empty()) {
    file.push_back(0xFF);
    file.push_back(0xD9);
  } else {
    file.insert(file.end(), img.suffix.begin(), img.suffix.end());
  }
  out.jpeg = std::move(file);
  return out;
}

}  // namespace tlrc
