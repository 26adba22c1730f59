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
#include "oralscreen/aggregation.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

#include "oralscreen/errors.hpp"

namespace oralscreen {

MgiScore::MgiScore(int value) : value_(value) {
  if (value < kMin || value > kMax) {
    throw ValidationError("MGI " + std::to_string(value) +
                          " outside [0, 5]");
  }
}

std::string_view to_string(Site s) {
  switch (s) {
    case Site::kGingivalMargin:
      return "gingival_margin";
    case Site::kLeftPapilla:
      return "left_papilla";
    case Site::kRightPapilla:
      return "right_papilla";
  }
  return "unknown";
}

Site parse_site(std::string_view s) {
  for (Site site :
       {Site::kGingivalMargin, Site::kLeftPapilla, Site::kRightPapilla}) {
    if (s == to_string(site)) return site;
  }
  throw ValidationError("unknown site '" + std::string(s) + "'");
}

void validate(const ImageAnnotation& a, int width, int height) {
  if (a.image_id.empty()) throw ValidationError("annotation: empty image_id");
  if (a.subject_id.empty()) {
    throw ValidationError("annotation " + a.image_id + ": empty subject_id");
  }
  if (a.annotator_id.empty()) {
    throw ValidationError("annotation " + a.image_id + ": empty annotator_id");
  }
  std::set<Site> seen;
  for (const SiteMark& m : a.marks) {
    if (!seen.insert(m.site).second) {
      throw ValidationError("annotation " + a.image_id + ": duplicate site " +
                            std::string(to_string(m.site)));
    }
    if (m.diseased && m.points.empty()) {
      throw ValidationError("annotation " + a.image_id +
                            ": diseased mark without points at " +
                            std::string(to_string(m.site)));
    }
    for (const PixelPoint& p : m.points) {
      if (p.x < 0 || p.x >= width || p.y < 0 || p.y >= height) {
        throw ValidationError("annotation " + a.image_id + ": point (" +
                              std::to_string(p.x) + ", " +
                              std::to_string(p.y) + ") outside frame");
      }
    }
  }
}

MgiConsensus consensus_mgi(std::span<const MgiScore> votes) {
  if (votes.empty()) {
    throw ValidationError("no MGI votes: subject or image has no annotations");
  }
  std::array<std::size_t, MgiScore::kLevels> counts{};
  for (MgiScore v : votes) ++counts[static_cast<std::size_t>(v.value())];
  const std::size_t best = *std::max_element(counts.begin(), counts.end());
  // Scan from the top so the greatest tied value wins.
  int winner = MgiScore::kMax;
  while (counts[static_cast<std::size_t>(winner)] != best) --winner;
  const auto n_best = std::count(counts.begin(), counts.end(), best);
  return MgiConsensus{MgiScore(winner), votes.size(), best, n_best > 1};
}

MgiScore aggregate_subject_mgi(std::span<const MgiScore> image_mgis) {
  return consensus_mgi(image_mgis).label;
}

BoolConsensus consensus_condition(const std::vector<bool>& votes) {
  if (votes.empty()) throw ValidationError("no condition votes");
  const auto yes =
      static_cast<std::size_t>(std::count(votes.begin(), votes.end(), true));
  const bool label = 2 * yes > votes.size();
  return BoolConsensus{label, votes.size(), label ? yes : votes.size() - yes};
}

std::vector<ImageConsensus> image_consensus(
    std::span<const ImageAnnotation> annotations) {
  struct Bucket {
    std::string subject_id;
    std::set<std::string> annotators;
    std::vector<MgiScore> votes;
  };
  std::map<std::string, Bucket> by_image;
  for (const ImageAnnotation& a : annotations) {
    auto [it, inserted] = by_image.try_emplace(a.image_id);
    Bucket& b = it->second;
    if (inserted) {
      b.subject_id = a.subject_id;
    } else if (b.subject_id != a.subject_id) {
      throw ValidationError("image " + a.image_id +
                            " attributed to subjects " + b.subject_id +
                            " and " + a.subject_id);
    }
    if (!b.annotators.insert(a.annotator_id).second) {
      throw ValidationError("duplicate annotation for image " + a.image_id +
                            " by annotator " + a.annotator_id);
    }
    b.votes.push_back(a.mgi);
  }
  std::vector<ImageConsensus> out;
  out.reserve(by_image.size());
  for (const auto& [image_id, b] : by_image) {
    out.push_back({image_id, b.subject_id, consensus_mgi(b.votes)});
  }
  return out;
}

SubjectMgiTable subject_mgi_table(
    std::span<const ImageAnnotation> annotations,
    std::span<const std::string> expected_subjects) {
  std::map<std::string, std::vector<MgiScore>> per_subject;
  for (const ImageConsensus& ic : image_consensus(annotations)) {
    per_subject[ic.subject_id].push_back(ic.mgi.label);
  }
  SubjectMgiTable table;
  for (const auto& [subject, mgis] : per_subject) {
    table.mgi.emplace(subject, aggregate_subject_mgi(mgis));
  }
  std::set<std::string> expected(expected_subjects.begin(),
                                 expected_subjects.end());
  for (const std::string& s : expected) {
    if (!table.mgi.contains(s)) {
      table.warnings.push_back("subject " + s +
                               " has no annotated images; omitted");
    }
  }
  return table;
}

}  // namespace oralscreen
