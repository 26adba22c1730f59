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
#ifndef ORALSCREEN_MASK_SYNTHESIS_HPP_
#define ORALSCREEN_MASK_SYNTHESIS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oralscreen/aggregation.hpp"
#include "oralscreen/seg_metrics.hpp"

namespace oralscreen {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

// Row-major 8-bit RGB raster.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {});
  // `bytes` holds width*height packed (r,g,b) triples.
  RgbImage(int width, int height, std::vector<std::uint8_t> bytes);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  Rgb at(int x, int y) const {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width_ + x);
    return Rgb{bytes_[i], bytes_[i + 1], bytes_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width_ + x);
    bytes_[i] = c.r;
    bytes_[i + 1] = c.g;
    bytes_[i + 2] = c.b;
  }
  std::span<const std::uint8_t> bytes() const { return bytes_; }
  bool operator==(const RgbImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bytes_;
};

// Throws ValidationError unless the image is exactly 640 x 480.
void validate_frame(const RgbImage& image);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

// Convex polygon in pixel coordinates (pixel centers sit on integers),
// counter-clockwise in a y-up frame. Fewer than three vertices is the empty
// sentinel used for healthy images.
struct AnnotationRegion {
  std::vector<Point2> polygon;
  std::vector<Site> source_sites;

  bool empty() const { return polygon.size() < 3; }
};

struct ColorThresholdConfig {
  double redness_ratio_min = 1.2;
  int min_component_px = 16;
  int dilation_radius_px = 24;

  bool operator==(const ColorThresholdConfig&) const = default;
};

// Throws ValidationError when a field is out of range.
void validate(const ColorThresholdConfig& config);
// Canonical JSON text (sorted keys, no whitespace).
std::string to_json(const ColorThresholdConfig& config);
// Missing keys keep their defaults; unknown keys and bad values throw
// ValidationError.
ColorThresholdConfig parse_threshold_config(std::string_view json_text);

// Andrew's monotone chain. Collinear and duplicate points are dropped; the
// result is counter-clockwise and may have one or two vertices.
std::vector<Point2> convex_hull(std::vector<Point2> points);

// Signed shoelace area (positive for counter-clockwise).
double polygon_area(std::span<const Point2> polygon);

// Convex hull of every diseased mark's points, grown by `dilation_radius_px`
// (Minkowski sum with a 64-gon circumscribing the disc) and clipped to
// [0, width-1] x [0, height-1]. Returns the empty sentinel when no diseased
// mark has points.
AnnotationRegion bound_annotations(std::span<const SiteMark> marks,
                                   int dilation_radius_px,
                                   int width = kImageWidth,
                                   int height = kImageHeight);

// Even-odd scanline fill; pixels whose centers lie on an edge are included.
// Zero-area polygons rasterize to an all-false mask.
BinaryMask rasterize(const AnnotationRegion& region, int width, int height);

// r / (g + b + 1).
double redness(Rgb c);

// Pixels inside `within` whose redness reaches `ratio_min`.
BinaryMask threshold_redness(const RgbImage& image, const BinaryMask& within,
                             double ratio_min);

// Clears 4-connected components with fewer than `min_px` pixels.
BinaryMask remove_small_components(const BinaryMask& mask, int min_px);

// Threshold inside the rasterized region, then speckle suppression.
BinaryMask color_threshold_mask(const RgbImage& image,
                                const AnnotationRegion& region,
                                const ColorThresholdConfig& config);

// bound_annotations followed by color_threshold_mask.
BinaryMask synthesize_ground_truth(const RgbImage& image,
                                   const ImageAnnotation& annotation,
                                   const ColorThresholdConfig& config);

// Whole-frame color threshold with speckle suppression.
BinaryMask baseline_segment(const RgbImage& image,
                            const ColorThresholdConfig& config);

// Per-pixel score r / (r + redness_ratio_min) with r = redness. Monotone in
// redness and exactly 0.5 at the threshold ratio.
ProbabilityMap baseline_scores(const RgbImage& image,
                               const ColorThresholdConfig& config);

}  // namespace oralscreen

#endif  // ORALSCREEN_MASK_SYNTHESIS_HPP_
