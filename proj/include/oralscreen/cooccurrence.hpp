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
#ifndef ORALSCREEN_COOCCURRENCE_HPP_
#define ORALSCREEN_COOCCURRENCE_HPP_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "oralscreen/aggregation.hpp"
#include "oralscreen/core_model.hpp"
#include "oralscreen/exact_stats.hpp"

namespace oralscreen {

// A subject joined with its aggregated MGI and its derived condition flags.
struct ScoredSubject {
  SubjectRecord record;
  MgiScore mgi{0};
  ConditionFlags flags;
  AgeCohort cohort = AgeCohort::kAdolescent;
};

// Joins subjects with the MGI table; subjects without an MGI are skipped.
std::vector<ScoredSubject> score_subjects(
    std::span<const SubjectRecord> subjects,
    const std::map<std::string, MgiScore>& mgi_by_subject,
    BpPrecedence precedence = BpPrecedence::kHighFirst);

struct CohortFilter {
  std::optional<Gender> gender;
  std::optional<AgeCohort> age_cohort;

  bool matches(const ScoredSubject& s) const;
  // "all", "female", "middle_age", "female/middle_age".
  std::string label() const;
  bool operator==(const CohortFilter&) const = default;
};

// How a cross-count table is handed to Fisher's test.
//   kCrossCounts:       [[a, b], [c, d]]
//   kCountVsGroupTotal: [[a, a + b], [c, c + d]]  (each group's count next to
//                       the group size, i.e. the two ratios a/(a+b) and
//                       c/(c+d) entered as numerator/denominator pairs)
enum class TableLayout { kCrossCounts, kCountVsGroupTotal };

std::string_view to_string(TableLayout l);  // "cross-counts", "count-vs-total"
TableLayout parse_table_layout(std::string_view s);

// Which family a comparison belongs to: MGI level x condition, or MGI level
// x demographic group.
enum class TableFamily { kCooccurrence, kDemographic };

// The complete rule for turning a cross-count table into a p-value. Default
// is the convention selected by calibrate_convention() against the study's
// published values.
struct TestConvention {
  TailMode tail = TailMode::kTwoSided;
  TableLayout cooccurrence_layout = TableLayout::kCountVsGroupTotal;
  TableLayout demographic_layout = TableLayout::kCrossCounts;

  TableLayout layout_for(TableFamily f) const {
    return f == TableFamily::kCooccurrence ? cooccurrence_layout
                                           : demographic_layout;
  }
  std::string describe() const;
  bool operator==(const TestConvention&) const = default;
};

ContingencyTable apply_layout(const ContingencyTable& cross, TableLayout layout);

TestResult run_test(const ContingencyTable& cross, TableFamily family,
                    const TestConvention& convention);

// a = |MGI=level and flag|, b = |MGI=level and not flag|,
// c = |MGI!=level and flag|, d = |MGI!=level and not flag| over the filtered
// population. Throws ValidationError when the filtered population is empty or
// has nobody at `level`.
ContingencyTable build_mgi_condition_table(std::span<const ScoredSubject> subjects,
                                           MgiScore level, Condition condition,
                                           const CohortFilter& filter = {});
// Same, resolving the condition by external name (ValidationError if unknown).
ContingencyTable build_mgi_condition_table(std::span<const ScoredSubject> subjects,
                                           MgiScore level,
                                           std::string_view condition_name,
                                           const CohortFilter& filter = {});

using DemographicGroup = std::variant<Gender, AgeCohort>;

std::string to_string(const DemographicGroup& g);

// In-group versus out-group; when `out_group` is empty the out-group is
// everybody not in the in-group.
struct DemographicSplit {
  DemographicGroup in_group;
  std::optional<DemographicGroup> out_group;
};

// a = |in and MGI=level|, b = |in and MGI!=level|, c = |out and MGI=level|,
// d = |out and MGI!=level|. Throws ValidationError if either side is empty.
ContingencyTable build_demographic_table(std::span<const ScoredSubject> subjects,
                                         MgiScore level,
                                         const DemographicSplit& split);

struct CellResult {
  MgiScore mgi_level{0};
  Condition condition = Condition::kGlasses;
  ContingencyTable table;  // cross counts
  std::optional<TestResult> result;
  bool significant = false;  // p < alpha, either direction
  // Condition rate at this MGI exceeds the rate at the other MGIs.
  bool elevated = false;
  std::string not_computable_reason;  // set when result is empty

  // Marked in regenerated tables: significant and elevated.
  bool starred() const { return significant && elevated; }
};

struct AbsentLevel {
  MgiScore mgi_level{0};
  std::string reason;
};

struct CorrelationGrid {
  CohortFilter filter;
  double alpha = 0.05;
  TestConvention convention;
  std::vector<Condition> conditions;
  // MGI ascending, then conditions in the order given.
  std::vector<CellResult> cells;
  std::vector<AbsentLevel> absent_levels;
  std::size_t population_size = 0;
  std::array<std::size_t, MgiScore::kLevels> level_counts{};

  // Cell for (level, condition), or nullptr.
  const CellResult* find(MgiScore level, Condition condition) const;
  std::vector<const CellResult*> significant_cells() const;
  std::vector<const CellResult*> starred_cells() const;
};

// One Fisher test per (MGI level present x condition). Throws ValidationError
// for alpha outside (0, 1] or an empty filtered population.
CorrelationGrid run_grid(std::span<const ScoredSubject> subjects,
                         std::span<const Condition> conditions,
                         const CohortFilter& filter = {}, double alpha = 0.05,
                         const TestConvention& convention = {});

enum class Strata { kNone, kGender, kAge };

std::string_view to_string(Strata s);  // "none", "gender", "age"
Strata parse_strata(std::string_view s);

struct StratifiedGrids {
  std::vector<CorrelationGrid> grids;
  std::vector<std::string> warnings;  // omitted (empty) strata
};

StratifiedGrids run_stratified_grids(std::span<const ScoredSubject> subjects,
                                     std::span<const Condition> conditions,
                                     Strata strata, double alpha = 0.05,
                                     const TestConvention& convention = {});

// One published p-value with the cross-count table it was computed from.
struct ReferenceValue {
  std::string label;
  ContingencyTable table;
  TableFamily family = TableFamily::kCooccurrence;
  double published_p = 0.0;
  // When set, the published value is an upper bound ("p < published_p").
  bool upper_bound = false;
  double tolerance = 5e-4;
  // Calibration references select the convention; the rest only corroborate.
  bool calibration = true;
};

bool reproduces(const ReferenceValue& ref, double p);

struct CandidateEvaluation {
  TestConvention convention;
  std::vector<double> p_values;  // one per reference
  std::size_t calibration_hits = 0;
  std::size_t calibration_total = 0;
  std::size_t corroborating_hits = 0;
  std::size_t corroborating_total = 0;
};

struct CalibrationReport {
  std::vector<ReferenceValue> references;
  std::vector<CandidateEvaluation> candidates;
  // Set only when exactly one candidate reproduces every calibration value.
  std::optional<TestConvention> selected;
  std::string summary;
};

// Evaluates every (tail, co-occurrence layout, demographic layout) candidate
// against the references and selects the unique one that reproduces all
// calibration references.
CalibrationReport calibrate_convention(std::span<const ReferenceValue> refs);

// Published p-values of the oral-systemic screening study together with the
// tables they were computed from. The first five are calibration references.
std::vector<ReferenceValue> study_reference_values();

}  // namespace oralscreen

#endif  // ORALSCREEN_COOCCURRENCE_HPP_
