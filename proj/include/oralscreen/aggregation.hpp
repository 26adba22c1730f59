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
#ifndef ORALSCREEN_AGGREGATION_HPP_
#define ORALSCREEN_AGGREGATION_HPP_

#include <chrono>
#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oralscreen {

inline constexpr int kImageWidth = 640;
inline constexpr int kImageHeight = 480;

// Modified gingival index, 0 (healthy gingiva) to 5 (severe periodontal
// disease).
class MgiScore {
 public:
  static constexpr int kMin = 0;
  static constexpr int kMax = 5;
  static constexpr int kLevels = kMax - kMin + 1;

  // Throws ValidationError outside [0, 5].
  explicit MgiScore(int value);

  int value() const { return value_; }
  auto operator<=>(const MgiScore&) const = default;

 private:
  int value_;
};

enum class Site { kGingivalMargin, kLeftPapilla, kRightPapilla };

std::string_view to_string(Site s);
Site parse_site(std::string_view s);

struct PixelPoint {
  int x = 0;
  int y = 0;
  bool operator==(const PixelPoint&) const = default;
};

struct SiteMark {
  Site site = Site::kGingivalMargin;
  std::vector<PixelPoint> points;
  bool diseased = false;
  bool operator==(const SiteMark&) const = default;
};

using Timestamp = std::chrono::sys_seconds;

struct ImageAnnotation {
  std::string image_id;
  std::string subject_id;
  std::string annotator_id;
  MgiScore mgi{0};
  std::vector<SiteMark> marks;
  Timestamp timestamp{};
  // Optional per-condition votes from TES review (condition name -> noted).
  std::map<std::string, bool> conditions;
  bool operator==(const ImageAnnotation&) const = default;
};

// Throws ValidationError: empty ids, duplicate site, diseased mark without
// points, or a point outside the width x height frame.
void validate(const ImageAnnotation& a, int width = kImageWidth,
              int height = kImageHeight);

struct BoolConsensus {
  bool label = false;
  std::size_t n_annotators = 0;
  std::size_t n_agree = 0;
};

struct MgiConsensus {
  MgiScore label{0};
  std::size_t n_annotators = 0;  // number of votes
  std::size_t n_agree = 0;       // votes equal to label
  bool tied = false;             // label won a tie on the greater-value rule
};

// Modal MGI; ties for the maximal count go to the greatest tied value.
// Throws ValidationError on an empty list.
MgiScore aggregate_subject_mgi(std::span<const MgiScore> image_mgis);

// Same rule as aggregate_subject_mgi, with vote bookkeeping.
MgiConsensus consensus_mgi(std::span<const MgiScore> votes);

// label = strict majority of true votes. Throws ValidationError when empty.
BoolConsensus consensus_condition(const std::vector<bool>& votes);

struct ImageConsensus {
  std::string image_id;
  std::string subject_id;
  MgiConsensus mgi;
};

// Per-image consensus over annotators, in image_id order. Throws
// ValidationError on a duplicate (image_id, annotator_id) pair or an image
// attributed to two subjects.
std::vector<ImageConsensus> image_consensus(
    std::span<const ImageAnnotation> annotations);

struct SubjectMgiTable {
  std::map<std::string, MgiScore> mgi;
  // Subjects listed in `expected_subjects` that had no annotated image.
  std::vector<std::string> warnings;
};

// Per-image consensus first, then aggregate_subject_mgi over each subject's
// images. Subjects in `expected_subjects` without images are omitted and
// reported in `warnings`.
SubjectMgiTable subject_mgi_table(
    std::span<const ImageAnnotation> annotations,
    std::span<const std::string> expected_subjects = {});

}  // namespace oralscreen

#endif  // ORALSCREEN_AGGREGATION_HPP_
