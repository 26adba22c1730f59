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
#ifndef ORALSCREEN_FIXTURES_HPP_
#define ORALSCREEN_FIXTURES_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oralscreen/annotation_service.hpp"
#include "oralscreen/core_model.hpp"
#include "oralscreen/pipeline_io.hpp"

namespace oralscreen::fixtures {

// Synthetic study cohort whose marginal counts match the published study
// tables: MGI x gender x age cohort, and for every (MGI, condition) cell the
// total, the per-gender and the per-cohort counts.

enum class PublishedGrid { kQuestionnaire, kScreening };

inline constexpr std::size_t kPublishedScreeningColumns = 9;

// Columns of the published screening table, in order.
std::span<const Condition> published_screening_columns();
// Columns of the published table for `grid`.
std::span<const Condition> published_columns(PublishedGrid grid);

// Subjects per (MGI, gender, cohort) in the published histogram.
std::size_t published_histogram(int mgi, Gender g, AgeCohort c);
// Published per-MGI count for column `column` of `grid`.
std::size_t published_count(PublishedGrid grid, int mgi, std::size_t column);
// Published female / male split for the same cell.
std::array<std::size_t, 2> published_gender_split(PublishedGrid grid, int mgi,
                                                  std::size_t column);
// Published split by cohort (adolescent, young adult, middle age, old age).
std::array<std::size_t, 4> published_cohort_split(PublishedGrid grid, int mgi,
                                                  std::size_t column);

// A cell where the published sources disagree and the fixture had to choose.
struct FixtureAdjustment {
  PublishedGrid grid = PublishedGrid::kQuestionnaire;
  int mgi = 0;
  Condition condition = Condition::kGlasses;
  std::size_t main_table = 0;    // per-MGI table
  std::size_t gender_total = 0;  // sum of the gender split
  std::size_t cohort_total = 0;  // sum of the cohort split
  std::size_t used_total = 0;
  std::array<std::size_t, 2> published_gender{};
  std::array<std::size_t, 2> used_gender{};
};

// [mgi][gender][cohort] counts of subjects with one condition.
using CellSplit =
    std::array<std::array<std::array<std::size_t, 4>, 2>, MgiScore::kLevels>;

struct StudyFixture {
  Dataset dataset;  // subjects and annotations; provenance left empty
  std::vector<ImageEntry> images;  // file paths empty
  std::vector<FixtureAdjustment> adjustments;
  // Indexed by Condition. Conditions outside the published tables are all 0.
  std::array<CellSplit, kConditionCount> allocation{};

  std::size_t expected_count(int mgi, Condition c) const;
  std::size_t expected_count(int mgi, Condition c, Gender g) const;
  std::size_t expected_count(int mgi, Condition c, AgeCohort a) const;
};

inline constexpr std::size_t kFixtureImageCount = 1215;
inline constexpr std::size_t kFixtureAnnotatorCount = 3;

// Deterministic: every call returns an identical fixture.
StudyFixture build_study_fixture();

// Writes subjects.csv, questionnaire.csv, screenings.csv, annotations.jsonl
// and images.csv into `dir` (created if needed). With `render_images`, also
// writes one synthetic 640 x 480 PNG per image under `dir`/images and points
// the manifest at them.
void write_study_fixture(const StudyFixture& fixture,
                         const std::filesystem::path& dir,
                         bool render_images = false);

}  // namespace oralscreen::fixtures

#endif  // ORALSCREEN_FIXTURES_HPP_
