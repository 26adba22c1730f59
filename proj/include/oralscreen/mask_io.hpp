/* Copyright 2026 The Oralscreen Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef ORALSCREEN_MASK_IO_HPP_
#define ORALSCREEN_MASK_IO_HPP_

#include <filesystem>

#include "oralscreen/mask_synthesis.hpp"
#include "oralscreen/seg_metrics.hpp"

namespace oralscreen {

// Masks on disk are 8-bit grayscale, 0 = background and 255 = disease. Other
// gray levels are rejected with ValidationError. Unreadable or malformed
// files raise IoError.

// Binary PGM (P5, maxval 255).
void write_mask_pgm(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask_pgm(const std::filesystem::path& path);

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask_png(const std::filesystem::path& path);

// Picks the format from the extension (.png or .pgm).
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask(const std::filesystem::path& path);

// Any PNG color type is converted to 8-bit RGB.
RgbImage read_image_png(const std::filesystem::path& path);
void write_image_png(const std::filesystem::path& path, const RgbImage& image);

// PMAP: "PMAP", width (u32 LE), height (u32 LE), 4 zero bytes, then
// width*height float32 LE scores in row-major order.
void write_probability_map(const std::filesystem::path& path,
                           const ProbabilityMap& map);
ProbabilityMap read_probability_map(const std::filesystem::path& path);

}  // namespace oralscreen

#endif  // ORALSCREEN_MASK_IO_HPP_
