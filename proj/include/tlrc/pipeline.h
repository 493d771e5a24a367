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

// End-to-end transcode: parsed JPEG -> component groups -> lossy latents +
// residual streams -> container, and the exact inverse.

#ifndef TLRC_PIPELINE_H_
#define TLRC_PIPELINE_H_

#include <vector>

#include "tlrc/container.h"
#include "tlrc/jpeg.h"
#include "tlrc/model.h"

namespace tlrc {

// Components jointly coded with cross-component conditioning. Groups are
// formed from equal-sized planes; coding order within a 3-component group is
// luma, then the second chroma, then the first (Y, Cr, Cb for YCbCr files).
struct ComponentGroup {
  std::vector<int> comp_indices;
};

std::vector<ComponentGroup> derive_groups(const JpegImage& img);

// Stacks one group's planes into an integer-valued float tensor
// (1, n*64, H_b, W_b) in coding order.
Tensor<float> group_tensor(const JpegImage& img, const ComponentGroup& group);

// Writes a group tensor back into the image's coefficient planes.
void scatter_group(JpegImage& img, const ComponentGroup& group, const Tensor<float>& x);

Bytes encode_image_file(const Bytes& jpeg_bytes, CodecModel& model, bool direct_mode);

struct DecodeResult {
  JpegImage image;  // coefficient planes reconstructed exactly
  Bytes jpeg;       // reassembled file bytes
};

DecodeResult decode_container_bytes(const Bytes& container_bytes, CodecModel& model);

}  // namespace tlrc

#endif  // TLRC_PIPELINE_H_
