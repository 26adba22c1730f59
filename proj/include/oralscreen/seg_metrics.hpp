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
#ifndef ORALSCREEN_SEG_METRICS_HPP_
#define ORALSCREEN_SEG_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "oralscreen/aggregation.hpp"

namespace oralscreen {

// Row-major boolean grid.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool v) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }

  std::size_t count() const;
  bool same_shape(const BinaryMask& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }
  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Row-major per-pixel disease scores in [0, 1].
class ProbabilityMap {
 public:
  ProbabilityMap() = default;
  ProbabilityMap(int width, int height, float fill = 0.0f);
  // Throws ValidationError if a score is outside [0, 1] or sizes disagree.
  ProbabilityMap(int width, int height, std::vector<float> scores);
  // Degenerate map with scores 0 and 1.
  static ProbabilityMap from_mask(const BinaryMask& m);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return scores_.size(); }
  float operator[](std::size_t i) const { return scores_[i]; }
  // Throws ValidationError outside [0, 1].
  void set(std::size_t i, float v);
  std::span<const float> scores() const { return scores_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> scores_;
};

// Throws ValidationError unless the mask/map is exactly 640 x 480.
void validate_frame(const BinaryMask& m);
void validate_frame(const ProbabilityMap& m);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  // Empty optional when the denominator is zero.
  std::optional<double> tpr() const;
  std::optional<double> fpr() const;
  std::optional<double> precision() const;
  std::optional<double> recall() const { return tpr(); }

  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

// Throws ValidationError on a shape mismatch.
ConfusionCounts confusion_counts(const BinaryMask& pred,
                                 const BinaryMask& truth);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  // Score threshold per point (predict positive when score >= threshold);
  // +inf for the (0,0) anchor.
  std::vector<double> thresholds;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;
  std::vector<double> thresholds;
  // The first point has no predicted positives; its precision is reported as
  // 1.0 by convention.
  bool zero_prediction_precision_convention = true;
};

// ROC over all pixels of all images pooled together. Thresholds are the
// distinct scores in descending order; equal scores enter together. Throws
// ValidationError for empty input, mismatched lists or shapes, or when the
// pooled pixels lack either class.
RocCurve pooled_roc(std::span<const ProbabilityMap> preds,
                    std::span<const BinaryMask> truths);
RocCurve pooled_roc(std::span<const BinaryMask> preds,
                    std::span<const BinaryMask> truths);

// Trapezoidal area over fpr. Throws ValidationError for fewer than two points
// or a non-monotone curve.
double auc_trapezoid(const RocCurve& curve);

// Pooled precision/recall per threshold. Throws ValidationError when no
// ground-truth pixel is positive.
PrCurve pr_curve(std::span<const ProbabilityMap> preds,
                 std::span<const BinaryMask> truths);
PrCurve pr_curve(std::span<const BinaryMask> preds,
                 std::span<const BinaryMask> truths);

// |pred and truth| / |pred or truth|; 1.0 when both masks are empty.
double iou(const BinaryMask& pred, const BinaryMask& truth);

struct MaskPair {
  BinaryMask pred;
  BinaryMask truth;
};

struct IouSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single image
  std::vector<double> per_image;
};

// Throws ValidationError for an empty list.
IouSummary mean_iou(std::span<const MaskPair> pairs);

// Pooled positive-pixel prevalence implied by an operating point:
// solves precision = tpr*p / (tpr*p + fpr*(1-p)) for p. Inputs must lie in
// (0, 1).
double implied_prevalence(double tpr, double fpr, double precision);

}  // namespace oralscreen

#endif  // ORALSCREEN_SEG_METRICS_HPP_
