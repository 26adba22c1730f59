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
#include "oralscreen/seg_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "oralscreen/errors.hpp"
#include "oralscreen/exact_stats.hpp"

namespace oralscreen {
namespace {

void CheckDimensions(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("mask dimensions must be positive");
  }
}

std::string ShapeString(int w, int h) {
  return std::to_string(w) + "x" + std::to_string(h);
}

// Per distinct score: (positive pixels, negative pixels), highest score first.
using ScoreHistogram =
    std::map<float, std::pair<std::uint64_t, std::uint64_t>, std::greater<>>;

ScoreHistogram Pool(std::span<const ProbabilityMap> preds,
                    std::span<const BinaryMask> truths) {
  if (preds.empty()) throw ValidationError("no images to evaluate");
  if (preds.size() != truths.size()) {
    throw ValidationError("prediction and ground-truth counts differ");
  }
  ScoreHistogram hist;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const ProbabilityMap& p = preds[i];
    const BinaryMask& t = truths[i];
    if (p.width() != t.width() || p.height() != t.height()) {
      throw ValidationError("image " + std::to_string(i) + ": prediction " +
                            ShapeString(p.width(), p.height()) +
                            " vs ground truth " +
                            ShapeString(t.width(), t.height()));
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto& bucket = hist[p[k]];
      ++(t[k] ? bucket.first : bucket.second);
    }
  }
  return hist;
}

std::vector<ProbabilityMap> AsMaps(std::span<const BinaryMask> masks) {
  std::vector<ProbabilityMap> out;
  out.reserve(masks.size());
  for (const BinaryMask& m : masks) out.push_back(ProbabilityMap::from_mask(m));
  return out;
}

}  // namespace

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  CheckDimensions(width, height);
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

ProbabilityMap::ProbabilityMap(int width, int height, float fill)
    : width_(width), height_(height) {
  CheckDimensions(width, height);
  if (!(fill >= 0.0f && fill <= 1.0f)) {
    throw ValidationError("score outside [0, 1]");
  }
  scores_.assign(static_cast<std::size_t>(width) * height, fill);
}

ProbabilityMap::ProbabilityMap(int width, int height, std::vector<float> scores)
    : width_(width), height_(height), scores_(std::move(scores)) {
  CheckDimensions(width, height);
  if (scores_.size() != static_cast<std::size_t>(width) * height) {
    throw ValidationError("probability map has " +
                          std::to_string(scores_.size()) + " scores, expected " +
                          std::to_string(static_cast<std::size_t>(width) *
                                         height));
  }
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    if (!(scores_[i] >= 0.0f && scores_[i] <= 1.0f)) {
      throw ValidationError("score " + std::to_string(scores_[i]) +
                            " at pixel " + std::to_string(i) +
                            " outside [0, 1]");
    }
  }
}

ProbabilityMap ProbabilityMap::from_mask(const BinaryMask& m) {
  std::vector<float> scores(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) scores[i] = m[i] ? 1.0f : 0.0f;
  return ProbabilityMap(m.width(), m.height(), std::move(scores));
}

void ProbabilityMap::set(std::size_t i, float v) {
  if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("score outside [0, 1]");
  scores_.at(i) = v;
}

void validate_frame(const BinaryMask& m) {
  if (m.width() != kImageWidth || m.height() != kImageHeight) {
    throw ValidationError("mask is " + ShapeString(m.width(), m.height()) +
                          ", expected 640x480");
  }
}

void validate_frame(const ProbabilityMap& m) {
  if (m.width() != kImageWidth || m.height() != kImageHeight) {
    throw ValidationError("probability map is " +
                          ShapeString(m.width(), m.height()) +
                          ", expected 640x480");
  }
}

std::optional<double> ConfusionCounts::tpr() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> ConfusionCounts::fpr() const {
  if (fp + tn == 0) return std::nullopt;
  return static_cast<double>(fp) / static_cast<double>(fp + tn);
}

std::optional<double> ConfusionCounts::precision() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

ConfusionCounts confusion_counts(const BinaryMask& pred,
                                 const BinaryMask& truth) {
  if (!pred.same_shape(truth)) {
    throw ValidationError("prediction " +
                          ShapeString(pred.width(), pred.height()) +
                          " vs ground truth " +
                          ShapeString(truth.width(), truth.height()));
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i];
    const bool t = truth[i];
    if (p && t) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (t) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

RocCurve pooled_roc(std::span<const ProbabilityMap> preds,
                    std::span<const BinaryMask> truths) {
  const ScoreHistogram hist = Pool(preds, truths);
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
  for (const auto& [score, counts] : hist) {
    positives += counts.first;
    negatives += counts.second;
  }
  if (positives == 0 || negatives == 0) {
    throw ValidationError(
        "ROC needs both diseased and healthy ground-truth pixels");
  }
  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (const auto& [score, counts] : hist) {
    tp += counts.first;
    fp += counts.second;
    curve.points.push_back({static_cast<double>(fp) / negatives,
                            static_cast<double>(tp) / positives});
    curve.thresholds.push_back(score);
  }
  return curve;
}

RocCurve pooled_roc(std::span<const BinaryMask> preds,
                    std::span<const BinaryMask> truths) {
  const auto maps = AsMaps(preds);
  return pooled_roc(std::span<const ProbabilityMap>(maps), truths);
}

double auc_trapezoid(const RocCurve& curve) {
  const auto& pts = curve.points;
  if (pts.size() < 2) throw ValidationError("ROC curve needs >= 2 points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const RocPoint& p = pts[i];
    if (!(p.fpr >= 0.0 && p.fpr <= 1.0 && p.tpr >= 0.0 && p.tpr <= 1.0)) {
      throw ValidationError("ROC point outside the unit square");
    }
    if (i > 0 && (p.fpr < pts[i - 1].fpr || p.tpr < pts[i - 1].tpr)) {
      throw ValidationError("ROC curve is not monotone");
    }
  }
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  }
  return area;
}

PrCurve pr_curve(std::span<const ProbabilityMap> preds,
                 std::span<const BinaryMask> truths) {
  const ScoreHistogram hist = Pool(preds, truths);
  std::uint64_t positives = 0;
  for (const auto& [score, counts] : hist) positives += counts.first;
  if (positives == 0) {
    throw ValidationError("precision/recall needs diseased ground-truth pixels");
  }
  PrCurve curve;
  curve.points.push_back({0.0, 1.0});
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (const auto& [score, counts] : hist) {
    tp += counts.first;
    fp += counts.second;
    curve.points.push_back({static_cast<double>(tp) / positives,
                            static_cast<double>(tp) / (tp + fp)});
    curve.thresholds.push_back(score);
  }
  return curve;
}

PrCurve pr_curve(std::span<const BinaryMask> preds,
                 std::span<const BinaryMask> truths) {
  const auto maps = AsMaps(preds);
  return pr_curve(std::span<const ProbabilityMap>(maps), truths);
}

double iou(const BinaryMask& pred, const BinaryMask& truth) {
  const ConfusionCounts c = confusion_counts(pred, truth);
  const std::uint64_t uni = c.tp + c.fp + c.fn;
  if (uni == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(uni);
}

IouSummary mean_iou(std::span<const MaskPair> pairs) {
  if (pairs.empty()) throw ValidationError("mean_iou: no image pairs");
  IouSummary out;
  out.per_image.reserve(pairs.size());
  for (const MaskPair& p : pairs) out.per_image.push_back(iou(p.pred, p.truth));
  const SummaryStats s = summarize(out.per_image);
  out.mean = s.mean;
  out.sd = s.sd;
  return out;
}

double implied_prevalence(double tpr, double fpr, double precision) {
  for (double v : {tpr, fpr, precision}) {
    if (!(v > 0.0 && v < 1.0)) {
      throw ValidationError("implied_prevalence: inputs must lie in (0, 1)");
    }
  }
  const double prevalence =
      precision * fpr / (tpr * (1.0 - precision) + precision * fpr);
  if (!(prevalence > 0.0 && prevalence <= 1.0)) {
    throw ValidationError("implied_prevalence: inconsistent operating point");
  }
  return prevalence;
}

}  // namespace oralscreen
