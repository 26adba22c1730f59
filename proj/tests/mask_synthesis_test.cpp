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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oralscreen/errors.hpp"

namespace oralscreen {
namespace {

constexpr Rgb kGum{150, 95, 90};
constexpr Rgb kInflamed{220, 60, 55};

// Signed distance of (x, y) inside a convex counter-clockwise polygon: the
// minimum over edges of the distance to the edge line, positive inside.
double InsideDistance(const std::vector<Point2>& poly, double x, double y) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    const double ex = q.x - p.x;
    const double ey = q.y - p.y;
    const double cross = ex * (y - p.y) - ey * (x - p.x);
    best = std::min(best, cross / std::hypot(ex, ey));
  }
  return best;
}

struct OracleCount {
  std::size_t inside = 0;     // centers at distance >= 0
  std::size_t ambiguous = 0;  // centers within 1e-6 of an edge
};

// Brute-force pixel-center membership for a convex polygon, compared with a
// rasterized mask. Returns the number of disagreeing pixels that are not on
// an edge.
std::size_t ClearDisagreements(const std::vector<Point2>& poly, const BinaryMask& m) {
  std::size_t bad = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const double d = InsideDistance(poly, x, y);
      if (std::fabs(d) < 1e-6) continue;
      if ((d > 0) != m.at(x, y)) ++bad;
    }
  }
  return bad;
}

bool Subset(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) return false;
  }
  return true;
}

void PaintDisc(RgbImage& img, double cx, double cy, double r, Rgb c) {
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img.set(x, y, c);
    }
  }
}

SiteMark Mark(Site s, std::vector<PixelPoint> pts, bool diseased = true) {
  return SiteMark{s, std::move(pts), diseased};
}

TEST(ConvexHull, DropsInteriorCollinearAndDuplicates) {
  const std::vector<Point2> hull = convex_hull(
      {{0, 0}, {2, 0}, {4, 0}, {4, 4}, {0, 4}, {2, 2}, {0, 0}, {4, 2}});
  ASSERT_EQ(hull.size(), 4u);
  EXPECT_DOUBLE_EQ(polygon_area(hull), 16.0);
  EXPECT_EQ(convex_hull({{1, 1}, {1, 1}}).size(), 1u);
  EXPECT_EQ(convex_hull({{0, 0}, {1, 1}, {2, 2}}).size(), 2u);
}

TEST(PolygonArea, ShoelaceSign) {
  const std::vector<Point2> ccw = {{0, 0}, {3, 0}, {0, 2}};
  const std::vector<Point2> cw = {{0, 0}, {0, 2}, {3, 0}};
  EXPECT_DOUBLE_EQ(polygon_area(ccw), 3.0);
  EXPECT_DOUBLE_EQ(polygon_area(cw), -3.0);
}

TEST(BoundAnnotations, SinglePointDisc) {
  const std::vector<SiteMark> marks = {Mark(Site::kGingivalMargin, {{200, 150}})};
  const AnnotationRegion region = bound_annotations(marks, 24);
  ASSERT_FALSE(region.empty());
  const BinaryMask m = rasterize(region, kImageWidth, kImageHeight);
  // Every pixel within the radius is covered; the polygon circumscribes the
  // disc, so nothing beyond r / cos(pi / 64) is.
  const double outer = 24.0 / std::cos(std::numbers::pi / 64);
  for (int y = 0; y < kImageHeight; ++y) {
    for (int x = 0; x < kImageWidth; ++x) {
      const double d = std::hypot(x - 200.0, y - 150.0);
      if (d <= 24.0) {
        ASSERT_TRUE(m.at(x, y)) << x << "," << y;
      }
      if (d > outer + 1e-9) {
        ASSERT_FALSE(m.at(x, y)) << x << "," << y;
      }
    }
  }
  const double disc = std::numbers::pi * 24.0 * 24.0;
  EXPECT_NEAR(static_cast<double>(m.count()), disc, 2.0 * std::numbers::pi * 24.0);
  EXPECT_EQ(ClearDisagreements(region.polygon, m), 0u);
}

TEST(BoundAnnotations, DiscClippedToFrame) {
  const std::vector<SiteMark> marks = {Mark(Site::kLeftPapilla, {{0, 0}})};
  const AnnotationRegion region = bound_annotations(marks, 24);
  for (const Point2& p : region.polygon) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_GE(p.y, 0.0);
  }
  const BinaryMask m = rasterize(region, kImageWidth, kImageHeight);
  EXPECT_NEAR(static_cast<double>(m.count()), std::numbers::pi * 24 * 24 / 4.0,
              2.0 * 24.0 + std::numbers::pi * 12.0);
  EXPECT_TRUE(m.at(0, 0));
}

TEST(BoundAnnotations, DegenerateHullRasterizesEmpty) {
  const std::vector<SiteMark> marks = {
      Mark(Site::kGingivalMargin, {{0, 0}, {639, 479}})};
  const AnnotationRegion region = bound_annotations(marks, 0);
  EXPECT_TRUE(region.empty());
  EXPECT_EQ(rasterize(region, kImageWidth, kImageHeight).count(), 0u);
}

TEST(BoundAnnotations, HealthyMarksGiveEmptySentinel) {
  const std::vector<SiteMark> marks = {
      Mark(Site::kGingivalMargin, {{10, 10}, {50, 12}}, false)};
  EXPECT_TRUE(bound_annotations(marks, 24).empty());
  EXPECT_TRUE(bound_annotations(std::vector<SiteMark>{}, 24).empty());
  EXPECT_THROW(bound_annotations(marks, -1), ValidationError);
}

TEST(Rasterize, TriangleMatchesShoelaceAndPointOracle) {
  const std::vector<SiteMark> marks = {
      Mark(Site::kGingivalMargin, {{100, 100}, {400, 130}, {220, 380}})};
  const AnnotationRegion region = bound_annotations(marks, 0);
  const BinaryMask m = rasterize(region, kImageWidth, kImageHeight);
  const double area = std::fabs(polygon_area(region.polygon));
  EXPECT_DOUBLE_EQ(area, 0.5 * std::fabs(300.0 * 280.0 - 120.0 * 30.0));
  double perimeter = 0.0;
  for (std::size_t i = 0; i < region.polygon.size(); ++i) {
    const Point2& p = region.polygon[i];
    const Point2& q = region.polygon[(i + 1) % region.polygon.size()];
    perimeter += std::hypot(q.x - p.x, q.y - p.y);
  }
  EXPECT_NEAR(static_cast<double>(m.count()), area, perimeter);
  // Integer vertices: edge membership is exact, so count every center.
  std::size_t inside = 0;
  for (int y = 0; y < kImageHeight; ++y) {
    for (int x = 0; x < kImageWidth; ++x) {
      const bool want = InsideDistance(region.polygon, x, y) >= 0.0;
      inside += want ? 1 : 0;
      ASSERT_EQ(m.at(x, y), want) << x << "," << y;
    }
  }
  EXPECT_EQ(inside, m.count());
}

TEST(Rasterize, FullFrameRectangleIncludesBorder) {
  const std::vector<SiteMark> marks = {Mark(
      Site::kGingivalMargin, {{0, 0}, {639, 0}, {639, 479}, {0, 479}})};
  const BinaryMask m = rasterize(bound_annotations(marks, 0), kImageWidth, kImageHeight);
  EXPECT_EQ(m.count(), 640u * 480u);
}

TEST(Redness, RatioAndThreshold) {
  EXPECT_DOUBLE_EQ(redness({255, 0, 0}), 255.0);
  EXPECT_DOUBLE_EQ(redness({0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(redness({100, 100, 100}), 100.0 / 201.0);
  const RgbImage img(4, 1, kInflamed);
  const BinaryMask all(4, 1, true);
  EXPECT_EQ(threshold_redness(img, all, 1.2).count(), 4u);
  EXPECT_EQ(threshold_redness(img, all, redness(kInflamed) + 1e-9).count(), 0u);
  EXPECT_EQ(threshold_redness(img, all, redness(kInflamed)).count(), 4u);
}

TEST(ColorThreshold, PureRedFillsRegionGrayFillsNothing) {
  const std::vector<SiteMark> marks = {
      Mark(Site::kGingivalMargin, {{100, 100}, {300, 120}, {200, 300}})};
  const AnnotationRegion region = bound_annotations(marks, 10);
  const BinaryMask inside = rasterize(region, kImageWidth, kImageHeight);
  const ColorThresholdConfig cfg;
  EXPECT_EQ(color_threshold_mask(RgbImage(kImageWidth, kImageHeight, Rgb{255, 0, 0}),
                                 region, cfg),
            inside);
  for (std::uint8_t v : {0, 37, 128, 255}) {
    const RgbImage gray(kImageWidth, kImageHeight, Rgb{v, v, v});
    for (double t : {0.51, 1.2, 3.0}) {
      EXPECT_EQ(color_threshold_mask(gray, region, {t, 0, 10}).count(), 0u);
    }
  }
  EXPECT_EQ(color_threshold_mask(RgbImage(kImageWidth, kImageHeight, Rgb{255, 0, 0}),
                                 AnnotationRegion{}, cfg)
                .count(),
            0u);
}

TEST(ColorThreshold, HalfDiscIntersectionMatchesGeometry) {
  // Region: left half-plane x <= 320 (as a rectangle); red disc centred on the
  // boundary.
  const double r = 60.0;
  RgbImage img(kImageWidth, kImageHeight, kGum);
  PaintDisc(img, 320.0, 240.0, r, kInflamed);
  AnnotationRegion region;
  region.polygon = {{0, 0}, {320, 0}, {320, 479}, {0, 479}};
  const BinaryMask m = color_threshold_mask(img, region, {1.2, 16, 0});
  // Exact oracle: red pixel centers with x <= 320.
  std::size_t want = 0;
  for (int y = 0; y < kImageHeight; ++y) {
    for (int x = 0; x <= 320; ++x) {
      if ((x - 320.0) * (x - 320.0) + (y - 240.0) * (y - 240.0) <= r * r) ++want;
    }
  }
  EXPECT_EQ(m.count(), want);
  EXPECT_NEAR(static_cast<double>(m.count()), std::numbers::pi * r * r / 2.0,
              std::numbers::pi * r + 2.0 * r);
}

TEST(RemoveSmallComponents, FourConnectivity) {
  BinaryMask m(10, 10);
  // Diagonal chain: four separate components of size 1.
  for (int i = 0; i < 4; ++i) m.set(i, i, true);
  // A 2x3 block.
  for (int y = 6; y < 8; ++y) {
    for (int x = 5; x < 8; ++x) m.set(x, y, true);
  }
  const BinaryMask kept = remove_small_components(m, 2);
  EXPECT_EQ(kept.count(), 6u);
  EXPECT_FALSE(kept.at(0, 0));
  EXPECT_EQ(remove_small_components(m, 7).count(), 0u);
  EXPECT_EQ(remove_small_components(m, 0), m);
  EXPECT_EQ(remove_small_components(m, 1), m);
}

TEST(SynthesizeGroundTruth, HealthyAndFullFrame) {
  const RgbImage red(kImageWidth, kImageHeight, Rgb{255, 0, 0});
  ImageAnnotation healthy;
  healthy.image_id = "I";
  healthy.subject_id = "S";
  healthy.annotator_id = "A";
  healthy.marks = {Mark(Site::kGingivalMargin, {{5, 5}, {600, 400}}, false)};
  EXPECT_EQ(synthesize_ground_truth(red, healthy, {}).count(), 0u);

  ImageAnnotation full = healthy;
  full.marks = {Mark(Site::kGingivalMargin,
                     {{0, 0}, {639, 0}, {639, 479}, {0, 479}})};
  EXPECT_EQ(synthesize_ground_truth(red, full, {}).count(), 640u * 480u);
}

TEST(SynthesizeGroundTruth, ThreeSiteFixtureMatchesGeometricCount) {
  // Gum band with three inflamed discs; the marks sit on the disc centres, so
  // the dilated hull covers every disc and the mask is their union.
  RgbImage img(kImageWidth, kImageHeight, kGum);
  const std::vector<std::array<double, 3>> discs = {
      {200, 260, 18}, {320, 240, 22}, {440, 262, 16}};
  for (const auto& d : discs) PaintDisc(img, d[0], d[1], d[2], kInflamed);
  ImageAnnotation a;
  a.image_id = "I";
  a.subject_id = "S";
  a.annotator_id = "A";
  a.marks = {Mark(Site::kGingivalMargin, {{200, 260}, {320, 240}, {440, 262}}),
             Mark(Site::kLeftPapilla, {{260, 250}}),
             Mark(Site::kRightPapilla, {{380, 250}})};
  const BinaryMask m = synthesize_ground_truth(img, a, {});
  double analytic = 0.0;
  for (const auto& d : discs) analytic += std::numbers::pi * d[2] * d[2];
  EXPECT_NEAR(static_cast<double>(m.count()), analytic, 0.01 * 640 * 480);
  std::size_t want = 0;
  for (int y = 0; y < kImageHeight; ++y) {
    for (int x = 0; x < kImageWidth; ++x) {
      for (const auto& d : discs) {
        if ((x - d[0]) * (x - d[0]) + (y - d[1]) * (y - d[1]) <= d[2] * d[2]) {
          ++want;
          break;
        }
      }
    }
  }
  EXPECT_EQ(m.count(), want);
}

TEST(BaselineSegment, TrivialImagesAndAgreementWithGroundTruth) {
  EXPECT_EQ(baseline_segment(RgbImage(kImageWidth, kImageHeight), {}).count(), 0u);
  EXPECT_EQ(baseline_segment(RgbImage(kImageWidth, kImageHeight, Rgb{255, 0, 0}), {}).count(),
            640u * 480u);

  RgbImage img(kImageWidth, kImageHeight, kGum);
  PaintDisc(img, 300, 220, 40, kInflamed);
  ImageAnnotation a;
  a.image_id = "I";
  a.subject_id = "S";
  a.annotator_id = "A";
  // Marks outline the blob so the dilated hull covers all of it.
  a.marks = {Mark(Site::kGingivalMargin,
                  {{270, 220}, {300, 190}, {330, 220}, {300, 250}})};
  const BinaryMask truth = synthesize_ground_truth(img, a, {});
  const BinaryMask pred = baseline_segment(img, {});
  EXPECT_GE(iou(pred, truth), 0.9);
}

TEST(BaselineScores, HalfAtThresholdAndMonotone) {
  const ColorThresholdConfig cfg;
  RgbImage img(4, 1);
  img.set(0, 0, {0, 0, 0});
  img.set(1, 0, kGum);
  img.set(2, 0, kInflamed);
  img.set(3, 0, {255, 0, 0});
  const ProbabilityMap s = baseline_scores(img, cfg);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_GT(s[i], s[i - 1]);
  EXPECT_EQ(s[0], 0.0f);
  // A pixel with redness exactly 1.2: r = 1.2 (g + b + 1), g = 9, b = 0.
  RgbImage edge(1, 1, Rgb{12, 9, 0});
  EXPECT_FLOAT_EQ(baseline_scores(edge, cfg)[0], 0.5f);
  // Thresholding the scores at 0.5 equals the redness threshold.
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> c(0, 255);
  RgbImage noise(64, 48);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      noise.set(x, y, {static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng)),
                       static_cast<std::uint8_t>(c(rng))});
    }
  }
  const ProbabilityMap ns = baseline_scores(noise, cfg);
  const BinaryMask hard = threshold_redness(noise, BinaryMask(64, 48, true), 1.2);
  for (std::size_t i = 0; i < hard.size(); ++i) {
    const double r = redness({noise.bytes()[3 * i], noise.bytes()[3 * i + 1],
                              noise.bytes()[3 * i + 2]});
    if (std::fabs(r - 1.2) > 1e-6) {
      EXPECT_EQ(ns[i] >= 0.5f, hard[i]);
    }
  }
}

TEST(Config, JsonRoundTripAndValidation) {
  const ColorThresholdConfig cfg{1.5, 4, 12};
  EXPECT_EQ(parse_threshold_config(to_json(cfg)), cfg);
  EXPECT_EQ(to_json(ColorThresholdConfig{}),
            R"({"dilation_radius_px":24,"min_component_px":16,"redness_ratio_min":1.2})");
  EXPECT_EQ(parse_threshold_config(R"({"min_component_px": 3})").min_component_px, 3);
  EXPECT_THROW(parse_threshold_config(R"({"radius": 3})"), ValidationError);
  EXPECT_THROW(parse_threshold_config(R"({"redness_ratio_min": 0})"), ValidationError);
  EXPECT_THROW(parse_threshold_config(R"({"min_component_px": -1})"), ValidationError);
  EXPECT_THROW(parse_threshold_config("not json"), ValidationError);
  EXPECT_THROW(validate(ColorThresholdConfig{1.2, 16, -2}), ValidationError);
}

// 100 randomized scenes: red blobs on gum, random diseased marks.
class RandomScenes : public ::testing::TestWithParam<int> {};

TEST_P(RandomScenes, ContainmentMonotonicityDeterminism) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()));
  std::uniform_int_distribution<int> px(0, kImageWidth - 1);
  std::uniform_int_distribution<int> py(0, kImageHeight - 1);
  std::uniform_real_distribution<double> radius(5.0, 50.0);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_int_distribution<int> shade(-25, 25);

  RgbImage img(kImageWidth, kImageHeight, kGum);
  const int blobs = count(rng);
  for (int i = 0; i < blobs; ++i) {
    const int dr = shade(rng);
    PaintDisc(img, px(rng), py(rng), radius(rng),
              {static_cast<std::uint8_t>(kInflamed.r + dr / 2), kInflamed.g,
               static_cast<std::uint8_t>(kInflamed.b + dr)});
  }
  std::vector<SiteMark> marks;
  const Site sites[] = {Site::kGingivalMargin, Site::kLeftPapilla, Site::kRightPapilla};
  const int n_marks = 1 + GetParam() % 3;
  for (int s = 0; s < n_marks; ++s) {
    std::vector<PixelPoint> pts;
    const int n_pts = count(rng);
    for (int k = 0; k < n_pts; ++k) pts.push_back({px(rng), py(rng)});
    marks.push_back(Mark(sites[s], pts));
  }
  std::uniform_int_distribution<int> dil(0, 40);
  std::uniform_real_distribution<double> ratio(0.5, 2.5);
  const ColorThresholdConfig cfg{ratio(rng), 16, dil(rng)};

  const AnnotationRegion region = bound_annotations(marks, cfg.dilation_radius_px);
  const BinaryMask inside = rasterize(region, kImageWidth, kImageHeight);
  if (!region.empty()) {
    EXPECT_EQ(ClearDisagreements(region.polygon, inside), 0u);
  }
  const BinaryMask mask = color_threshold_mask(img, region, cfg);
  EXPECT_TRUE(Subset(mask, inside));

  // Threshold monotonicity before speckle suppression.
  const BinaryMask loose = threshold_redness(img, inside, cfg.redness_ratio_min * 0.8);
  const BinaryMask tight = threshold_redness(img, inside, cfg.redness_ratio_min);
  EXPECT_TRUE(Subset(tight, loose));
  EXPECT_TRUE(Subset(mask, tight));

  // Dilation monotonicity.
  const BinaryMask wider = rasterize(bound_annotations(marks, cfg.dilation_radius_px + 7),
                                     kImageWidth, kImageHeight);
  EXPECT_TRUE(Subset(inside, wider));

  ImageAnnotation a;
  a.image_id = "I";
  a.subject_id = "S";
  a.annotator_id = "A";
  a.marks = marks;
  const BinaryMask gt = synthesize_ground_truth(img, a, cfg);
  EXPECT_EQ(gt, mask);
  EXPECT_EQ(synthesize_ground_truth(img, a, cfg), gt);
}

INSTANTIATE_TEST_SUITE_P(Fixtures, RandomScenes, ::testing::Range(0, 100));

}  // namespace
}  // namespace oralscreen
