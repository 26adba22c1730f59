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
#include "oralscreen/mask_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

#include "json.hpp"
#include "oralscreen/errors.hpp"

namespace oralscreen {
namespace {

constexpr double kEps = 1e-9;
constexpr int kDiscSides = 64;

double Cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// One Sutherland-Hodgman pass against the half-plane inside(p) >= 0, where
// inside is affine along any segment.
std::vector<Point2> ClipHalfPlane(const std::vector<Point2>& poly,
                                  const std::function<double(const Point2&)>& inside) {
  std::vector<Point2> out;
  if (poly.empty()) return out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& cur = poly[i];
    const Point2& prev = poly[(i + poly.size() - 1) % poly.size()];
    const double dc = inside(cur);
    const double dp = inside(prev);
    if (dc >= 0.0) {
      if (dp < 0.0) {
        const double t = dp / (dp - dc);
        out.push_back({prev.x + t * (cur.x - prev.x),
                       prev.y + t * (cur.y - prev.y)});
      }
      out.push_back(cur);
    } else if (dp >= 0.0) {
      const double t = dp / (dp - dc);
      out.push_back({prev.x + t * (cur.x - prev.x),
                     prev.y + t * (cur.y - prev.y)});
    }
  }
  return out;
}

std::vector<Point2> DropRepeats(const std::vector<Point2>& poly) {
  std::vector<Point2> out;
  for (const Point2& p : poly) {
    if (out.empty() || std::fabs(p.x - out.back().x) > kEps ||
        std::fabs(p.y - out.back().y) > kEps) {
      out.push_back(p);
    }
  }
  while (out.size() > 1 && std::fabs(out.front().x - out.back().x) <= kEps &&
         std::fabs(out.front().y - out.back().y) <= kEps) {
    out.pop_back();
  }
  return out;
}

void CheckSameShape(const RgbImage& image, const BinaryMask& mask) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw ValidationError("image and mask dimensions differ");
  }
}

}  // namespace

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("image dimensions must be positive");
  }
  bytes_.resize(3 * pixel_count());
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    bytes_[3 * i] = fill.r;
    bytes_[3 * i + 1] = fill.g;
    bytes_[3 * i + 2] = fill.b;
  }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> bytes)
    : width_(width), height_(height), bytes_(std::move(bytes)) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("image dimensions must be positive");
  }
  if (bytes_.size() != 3 * pixel_count()) {
    throw ValidationError("image buffer has " + std::to_string(bytes_.size()) +
                          " bytes, expected " +
                          std::to_string(3 * pixel_count()));
  }
}

void validate_frame(const RgbImage& image) {
  if (image.width() != kImageWidth || image.height() != kImageHeight) {
    throw ValidationError("image is " + std::to_string(image.width()) + "x" +
                          std::to_string(image.height()) +
                          ", expected 640x480");
  }
}

void validate(const ColorThresholdConfig& config) {
  if (!(config.redness_ratio_min > 0.0) ||
      !std::isfinite(config.redness_ratio_min)) {
    throw ValidationError("redness_ratio_min must be a positive number");
  }
  if (config.min_component_px < 0) {
    throw ValidationError("min_component_px must be >= 0");
  }
  if (config.dilation_radius_px < 0) {
    throw ValidationError("dilation_radius_px must be >= 0");
  }
}

std::string to_json(const ColorThresholdConfig& config) {
  nlohmann::json j;
  j["dilation_radius_px"] = config.dilation_radius_px;
  j["min_component_px"] = config.min_component_px;
  j["redness_ratio_min"] = config.redness_ratio_min;
  return j.dump();
}

ColorThresholdConfig parse_threshold_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("threshold config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("threshold config must be an object");
  ColorThresholdConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "redness_ratio_min") {
      if (!value.is_number()) {
        throw ValidationError("redness_ratio_min must be a number");
      }
      config.redness_ratio_min = value.get<double>();
    } else if (key == "min_component_px" || key == "dilation_radius_px") {
      if (!value.is_number_integer()) {
        throw ValidationError(key + " must be an integer");
      }
      const auto v = value.get<std::int64_t>();
      if (v < 0 || v > 100000) throw ValidationError(key + " out of range");
      (key == "min_component_px" ? config.min_component_px
                                 : config.dilation_radius_px) =
          static_cast<int>(v);
    } else {
      throw ValidationError("threshold config: unknown key '" + key + "'");
    }
  }
  validate(config);
  return config;
}

std::vector<Point2> convex_hull(std::vector<Point2> points) {
  std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;

  std::vector<Point2> hull(2 * points.size());
  std::size_t k = 0;
  for (const Point2& p : points) {
    while (k >= 2 && Cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const Point2& p = points[i];
    while (k >= lower && Cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(std::span<const Point2> polygon) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point2& p = polygon[i];
    const Point2& q = polygon[(i + 1) % polygon.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return twice / 2.0;
}

AnnotationRegion bound_annotations(std::span<const SiteMark> marks,
                                   int dilation_radius_px, int width,
                                   int height) {
  if (dilation_radius_px < 0) {
    throw ValidationError("dilation_radius_px must be >= 0");
  }
  if (width <= 0 || height <= 0) {
    throw ValidationError("frame dimensions must be positive");
  }
  AnnotationRegion region;
  std::vector<Point2> points;
  for (const SiteMark& m : marks) {
    if (!m.diseased || m.points.empty()) continue;
    region.source_sites.push_back(m.site);
    for (const PixelPoint& p : m.points) {
      points.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    }
  }
  if (points.empty()) return region;

  std::vector<Point2> hull = convex_hull(std::move(points));
  if (dilation_radius_px > 0) {
    // Circumscribed polygon, so the grown region covers the true disc.
    const double r = dilation_radius_px / std::cos(std::numbers::pi / kDiscSides);
    std::vector<Point2> grown;
    grown.reserve(hull.size() * kDiscSides);
    for (const Point2& p : hull) {
      for (int k = 0; k < kDiscSides; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / kDiscSides;
        grown.push_back({p.x + r * std::cos(theta), p.y + r * std::sin(theta)});
      }
    }
    hull = convex_hull(std::move(grown));
  }
  if (hull.size() < 3) {
    region.polygon = std::move(hull);
    return region;
  }

  const double xmax = width - 1.0;
  const double ymax = height - 1.0;
  hull = ClipHalfPlane(hull, [](const Point2& p) { return p.x; });
  hull = ClipHalfPlane(hull, [xmax](const Point2& p) { return xmax - p.x; });
  hull = ClipHalfPlane(hull, [](const Point2& p) { return p.y; });
  hull = ClipHalfPlane(hull, [ymax](const Point2& p) { return ymax - p.y; });
  region.polygon = DropRepeats(hull);
  return region;
}

BinaryMask rasterize(const AnnotationRegion& region, int width, int height) {
  BinaryMask mask(width, height);
  const std::vector<Point2>& poly = region.polygon;
  if (region.empty() || std::fabs(polygon_area(poly)) < kEps) return mask;

  double lo_y = poly[0].y;
  double hi_y = poly[0].y;
  for (const Point2& p : poly) {
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  const int y0 = std::max(0, static_cast<int>(std::ceil(lo_y - kEps)));
  const int y1 = std::min(height - 1, static_cast<int>(std::floor(hi_y + kEps)));

  auto fill_span = [&](int y, double xa, double xb) {
    const int x0 = std::max(0, static_cast<int>(std::ceil(xa - kEps)));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(xb + kEps)));
    for (int x = x0; x <= x1; ++x) mask.set(x, y, true);
  };

  // Interior by the even-odd rule with half-open edge crossings.
  std::vector<double> xs;
  for (int y = y0; y <= y1; ++y) {
    xs.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2& p = poly[i];
      const Point2& q = poly[(i + 1) % poly.size()];
      if ((p.y <= y) != (q.y <= y)) {
        xs.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) fill_span(y, xs[i], xs[i + 1]);
  }

  // Pixel centers lying exactly on an edge.
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    if (std::fabs(p.y - q.y) <= kEps) {
      const double ry = std::round(p.y);
      if (std::fabs(p.y - ry) <= kEps && ry >= 0 && ry < height) {
        fill_span(static_cast<int>(ry), std::min(p.x, q.x), std::max(p.x, q.x));
      }
      continue;
    }
    const int ey0 = std::max(0, static_cast<int>(std::ceil(std::min(p.y, q.y) - kEps)));
    const int ey1 = std::min(height - 1,
                             static_cast<int>(std::floor(std::max(p.y, q.y) + kEps)));
    for (int y = ey0; y <= ey1; ++y) {
      const double x = p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y);
      const double rx = std::round(x);
      if (std::fabs(x - rx) <= kEps && rx >= 0 && rx < width) {
        mask.set(static_cast<int>(rx), y, true);
      }
    }
  }
  return mask;
}

double redness(Rgb c) {
  return static_cast<double>(c.r) / (static_cast<double>(c.g) + c.b + 1.0);
}

BinaryMask threshold_redness(const RgbImage& image, const BinaryMask& within,
                             double ratio_min) {
  CheckSameShape(image, within);
  BinaryMask out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (within.at(x, y) && redness(image.at(x, y)) >= ratio_min) {
        out.set(x, y, true);
      }
    }
  }
  return out;
}

BinaryMask remove_small_components(const BinaryMask& mask, int min_px) {
  if (min_px < 0) throw ValidationError("min_component_px must be >= 0");
  BinaryMask out = mask;
  if (min_px <= 1) return out;
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> component;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || seen[start]) continue;
    component.clear();
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      component.push_back(i);
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (mask[j] && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      };
      visit(x - 1, y);
      visit(x + 1, y);
      visit(x, y - 1);
      visit(x, y + 1);
    }
    if (component.size() < static_cast<std::size_t>(min_px)) {
      for (std::size_t i : component) out.set(i, false);
    }
  }
  return out;
}

BinaryMask color_threshold_mask(const RgbImage& image,
                                const AnnotationRegion& region,
                                const ColorThresholdConfig& config) {
  validate(config);
  const BinaryMask within = rasterize(region, image.width(), image.height());
  return remove_small_components(
      threshold_redness(image, within, config.redness_ratio_min),
      config.min_component_px);
}

BinaryMask synthesize_ground_truth(const RgbImage& image,
                                   const ImageAnnotation& annotation,
                                   const ColorThresholdConfig& config) {
  validate(config);
  validate(annotation, image.width(), image.height());
  const AnnotationRegion region =
      bound_annotations(annotation.marks, config.dilation_radius_px,
                        image.width(), image.height());
  return color_threshold_mask(image, region, config);
}

BinaryMask baseline_segment(const RgbImage& image,
                            const ColorThresholdConfig& config) {
  validate(config);
  const BinaryMask everywhere(image.width(), image.height(), true);
  return remove_small_components(
      threshold_redness(image, everywhere, config.redness_ratio_min),
      config.min_component_px);
}

ProbabilityMap baseline_scores(const RgbImage& image,
                               const ColorThresholdConfig& config) {
  validate(config);
  std::vector<float> scores(image.pixel_count());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double r = redness(image.at(x, y));
      scores[static_cast<std::size_t>(y) * image.width() + x] =
          static_cast<float>(r / (r + config.redness_ratio_min));
    }
  }
  return ProbabilityMap(image.width(), image.height(), std::move(scores));
}

}  // namespace oralscreen
