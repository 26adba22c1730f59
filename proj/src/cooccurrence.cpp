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
#include "oralscreen/cooccurrence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oralscreen/errors.hpp"

namespace oralscreen {
namespace {

bool InGroup(const ScoredSubject& s, const DemographicGroup& g) {
  if (const auto* gender = std::get_if<Gender>(&g)) {
    return s.record.gender == *gender;
  }
  return s.cohort == std::get<AgeCohort>(g);
}

std::vector<const ScoredSubject*> Filter(std::span<const ScoredSubject> subjects,
                                         const CohortFilter& filter) {
  std::vector<const ScoredSubject*> out;
  for (const ScoredSubject& s : subjects) {
    if (filter.matches(s)) out.push_back(&s);
  }
  return out;
}

ContingencyTable CountTable(std::span<const ScoredSubject* const> population,
                            MgiScore level, Condition condition) {
  ContingencyTable t;
  for (const ScoredSubject* s : population) {
    const bool at_level = s->mgi == level;
    const bool flag = s->flags[condition];
    if (at_level) {
      ++(flag ? t.a : t.b);
    } else {
      ++(flag ? t.c : t.d);
    }
  }
  return t;
}

void ValidateAlpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0, 1], got " +
                          std::to_string(alpha));
  }
}

}  // namespace

std::vector<ScoredSubject> score_subjects(
    std::span<const SubjectRecord> subjects,
    const std::map<std::string, MgiScore>& mgi_by_subject,
    BpPrecedence precedence) {
  std::vector<ScoredSubject> out;
  out.reserve(subjects.size());
  for (const SubjectRecord& r : subjects) {
    const auto it = mgi_by_subject.find(r.subject_id);
    if (it == mgi_by_subject.end()) continue;
    out.push_back(ScoredSubject{r, it->second,
                                derive_condition_flags(r, precedence),
                                assign_age_cohort(r.age)});
  }
  return out;
}

bool CohortFilter::matches(const ScoredSubject& s) const {
  if (gender && s.record.gender != *gender) return false;
  if (age_cohort && s.cohort != *age_cohort) return false;
  return true;
}

std::string CohortFilter::label() const {
  if (!gender && !age_cohort) return "all";
  std::string out;
  if (gender) out += to_string(*gender);
  if (age_cohort) {
    if (!out.empty()) out += "/";
    out += to_string(*age_cohort);
  }
  return out;
}

std::string_view to_string(TableLayout l) {
  return l == TableLayout::kCrossCounts ? "cross-counts" : "count-vs-total";
}

TableLayout parse_table_layout(std::string_view s) {
  if (s == "cross-counts") return TableLayout::kCrossCounts;
  if (s == "count-vs-total") return TableLayout::kCountVsGroupTotal;
  throw ValidationError("unknown table layout '" + std::string(s) +
                        "' (expected cross-counts or count-vs-total)");
}

std::string TestConvention::describe() const {
  std::ostringstream os;
  os << "tail=" << to_string(tail)
     << " cooccurrence_layout=" << to_string(cooccurrence_layout)
     << " demographic_layout=" << to_string(demographic_layout);
  return os.str();
}

ContingencyTable apply_layout(const ContingencyTable& cross,
                              TableLayout layout) {
  if (layout == TableLayout::kCrossCounts) return cross;
  return ContingencyTable{cross.a, cross.row1(), cross.c, cross.row2()};
}

TestResult run_test(const ContingencyTable& cross, TableFamily family,
                    const TestConvention& convention) {
  return fisher_exact(apply_layout(cross, convention.layout_for(family)),
                      convention.tail);
}

ContingencyTable build_mgi_condition_table(
    std::span<const ScoredSubject> subjects, MgiScore level,
    Condition condition, const CohortFilter& filter) {
  const auto population = Filter(subjects, filter);
  if (population.empty()) {
    throw ValidationError("no subjects pass filter '" + filter.label() + "'");
  }
  const ContingencyTable t = CountTable(population, level, condition);
  if (t.row1() == 0) {
    throw ValidationError("no subjects with MGI " +
                          std::to_string(level.value()) + " in '" +
                          filter.label() + "'");
  }
  return t;
}

ContingencyTable build_mgi_condition_table(
    std::span<const ScoredSubject> subjects, MgiScore level,
    std::string_view condition_name, const CohortFilter& filter) {
  const auto condition = condition_from_name(condition_name);
  if (!condition) {
    throw ValidationError("unknown condition '" + std::string(condition_name) +
                          "'");
  }
  return build_mgi_condition_table(subjects, level, *condition, filter);
}

std::string to_string(const DemographicGroup& g) {
  if (const auto* gender = std::get_if<Gender>(&g)) {
    return std::string(to_string(*gender));
  }
  return std::string(to_string(std::get<AgeCohort>(g)));
}

ContingencyTable build_demographic_table(
    std::span<const ScoredSubject> subjects, MgiScore level,
    const DemographicSplit& split) {
  ContingencyTable t;
  for (const ScoredSubject& s : subjects) {
    const bool in = InGroup(s, split.in_group);
    const bool out = split.out_group ? InGroup(s, *split.out_group) : !in;
    if (!in && !out) continue;
    const bool at_level = s.mgi == level;
    if (in) {
      ++(at_level ? t.a : t.b);
    } else {
      ++(at_level ? t.c : t.d);
    }
  }
  if (t.row1() == 0) {
    throw ValidationError("demographic group '" + to_string(split.in_group) +
                          "' is empty");
  }
  if (t.row2() == 0) {
    throw ValidationError(
        "demographic comparison group '" +
        (split.out_group ? to_string(*split.out_group) : std::string("rest")) +
        "' is empty");
  }
  return t;
}

const CellResult* CorrelationGrid::find(MgiScore level,
                                        Condition condition) const {
  for (const CellResult& c : cells) {
    if (c.mgi_level == level && c.condition == condition) return &c;
  }
  return nullptr;
}

std::vector<const CellResult*> CorrelationGrid::significant_cells() const {
  std::vector<const CellResult*> out;
  for (const CellResult& c : cells) {
    if (c.significant) out.push_back(&c);
  }
  return out;
}

std::vector<const CellResult*> CorrelationGrid::starred_cells() const {
  std::vector<const CellResult*> out;
  for (const CellResult& c : cells) {
    if (c.starred()) out.push_back(&c);
  }
  return out;
}

CorrelationGrid run_grid(std::span<const ScoredSubject> subjects,
                         std::span<const Condition> conditions,
                         const CohortFilter& filter, double alpha,
                         const TestConvention& convention) {
  ValidateAlpha(alpha);
  const auto population = Filter(subjects, filter);
  if (population.empty()) {
    throw ValidationError("no subjects pass filter '" + filter.label() + "'");
  }
  CorrelationGrid grid;
  grid.filter = filter;
  grid.alpha = alpha;
  grid.convention = convention;
  grid.conditions.assign(conditions.begin(), conditions.end());
  grid.population_size = population.size();
  for (const ScoredSubject* s : population) {
    ++grid.level_counts[static_cast<std::size_t>(s->mgi.value())];
  }
  for (int v = MgiScore::kMin; v <= MgiScore::kMax; ++v) {
    const MgiScore level(v);
    if (grid.level_counts[static_cast<std::size_t>(v)] == 0) {
      grid.absent_levels.push_back(
          {level, "no subjects with MGI " + std::to_string(v) + " in '" +
                      filter.label() + "'"});
      continue;
    }
    for (Condition condition : conditions) {
      CellResult cell;
      cell.mgi_level = level;
      cell.condition = condition;
      cell.table = CountTable(population, level, condition);
      cell.elevated = cell.table.a * (cell.table.c + cell.table.d) >
                      cell.table.c * (cell.table.a + cell.table.b);
      try {
        cell.result =
            run_test(cell.table, TableFamily::kCooccurrence, convention);
        cell.significant = cell.result->p_value < alpha;
      } catch (const std::exception& e) {
        cell.not_computable_reason = e.what();
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

std::string_view to_string(Strata s) {
  switch (s) {
    case Strata::kNone:
      return "none";
    case Strata::kGender:
      return "gender";
    case Strata::kAge:
      return "age";
  }
  return "unknown";
}

Strata parse_strata(std::string_view s) {
  for (Strata v : {Strata::kNone, Strata::kGender, Strata::kAge}) {
    if (s == to_string(v)) return v;
  }
  throw ValidationError("unknown strata '" + std::string(s) +
                        "' (expected none, gender or age)");
}

StratifiedGrids run_stratified_grids(std::span<const ScoredSubject> subjects,
                                     std::span<const Condition> conditions,
                                     Strata strata, double alpha,
                                     const TestConvention& convention) {
  ValidateAlpha(alpha);
  std::vector<CohortFilter> filters;
  switch (strata) {
    case Strata::kNone:
      filters.push_back({});
      break;
    case Strata::kGender:
      for (Gender g : kAllGenders) filters.push_back({g, std::nullopt});
      break;
    case Strata::kAge:
      for (AgeCohort c : kAllAgeCohorts) filters.push_back({std::nullopt, c});
      break;
  }
  StratifiedGrids out;
  for (const CohortFilter& f : filters) {
    const bool any = std::any_of(subjects.begin(), subjects.end(),
                                 [&](const ScoredSubject& s) {
                                   return f.matches(s);
                                 });
    if (!any) {
      out.warnings.push_back("stratum '" + f.label() +
                             "' has no subjects; grid omitted");
      continue;
    }
    out.grids.push_back(run_grid(subjects, conditions, f, alpha, convention));
  }
  return out;
}

bool reproduces(const ReferenceValue& ref, double p) {
  if (ref.upper_bound) return p < ref.published_p;
  return std::fabs(p - ref.published_p) <= ref.tolerance;
}

CalibrationReport calibrate_convention(std::span<const ReferenceValue> refs) {
  CalibrationReport report;
  report.references.assign(refs.begin(), refs.end());
  const TableLayout layouts[] = {TableLayout::kCrossCounts,
                                 TableLayout::kCountVsGroupTotal};
  std::vector<TestConvention> winners;
  for (TailMode tail :
       {TailMode::kTwoSided, TailMode::kGreater, TailMode::kLess}) {
    for (TableLayout co : layouts) {
      for (TableLayout demo : layouts) {
        CandidateEvaluation eval;
        eval.convention = TestConvention{tail, co, demo};
        for (const ReferenceValue& ref : refs) {
          const double p =
              run_test(ref.table, ref.family, eval.convention).p_value;
          eval.p_values.push_back(p);
          const bool hit = reproduces(ref, p);
          if (ref.calibration) {
            ++eval.calibration_total;
            eval.calibration_hits += hit ? 1 : 0;
          } else {
            ++eval.corroborating_total;
            eval.corroborating_hits += hit ? 1 : 0;
          }
        }
        if (eval.calibration_total > 0 &&
            eval.calibration_hits == eval.calibration_total) {
          winners.push_back(eval.convention);
        }
        report.candidates.push_back(std::move(eval));
      }
    }
  }
  std::ostringstream os;
  if (winners.size() == 1) {
    report.selected = winners.front();
    os << "selected " << winners.front().describe();
  } else {
    os << winners.size()
       << " candidates reproduce every calibration value; none selected";
  }
  report.summary = os.str();
  return report;
}

std::vector<ReferenceValue> study_reference_values() {
  using F = TableFamily;
  return {
      {"MGI 4 x swollen joints (all subjects)", {14, 16, 56, 198},
       F::kCooccurrence, 0.0422, false, 5e-4, true},
      {"MGI 4 x family history of eye disease (all subjects)", {2, 28, 1, 253},
       F::kCooccurrence, 0.0337, false, 5e-4, true},
      {"MGI 1 x retinal abnormality (all subjects)", {5, 34, 0, 245},
       F::kCooccurrence, 0.0001, true, 0.0, true},
      {"males vs females, MGI 3", {67, 100, 25, 92}, F::kDemographic, 0.0012,
       false, 5e-4, true},
      {"females vs males, MGI 2", {58, 59, 62, 105}, F::kDemographic, 0.0389,
       false, 5e-4, true},
      // Corroborating values from the stratified and cohort comparisons.
      {"females: MGI 4 x swollen joints", {7, 3, 20, 87}, F::kCooccurrence,
       0.0195, false, 5e-4, false},
      {"females: MGI 4 x hearing", {5, 5, 12, 95}, F::kCooccurrence, 0.0245,
       false, 5e-4, false},
      {"females: MGI 4 x difficulty walking", {4, 6, 7, 100},
       F::kCooccurrence, 0.0193, false, 5e-4, false},
      {"males: MGI 4 x family history of eye disease", {2, 18, 0, 147},
       F::kCooccurrence, 0.0163, false, 5e-4, false},
      {"middle age: MGI 1 x asthma", {3, 5, 6, 85}, F::kCooccurrence, 0.0475,
       false, 5e-4, false},
      {"young adult: MGI 4 x family history of eye disease", {2, 3, 0, 86},
       F::kCooccurrence, 0.0049, false, 5e-4, false},
      {"males: MGI 1 x retinal abnormality", {4, 13, 0, 150},
       F::kCooccurrence, 0.0002, false, 5e-4, false},
      {"old age: MGI 1 x retinal abnormality", {2, 1, 0, 39},
       F::kCooccurrence, 0.0002, false, 5e-4, false},
      {"middle age vs adolescent, MGI 4", {16, 83, 0, 52}, F::kDemographic,
       0.0013, false, 5e-4, false},
      {"middle age vs young adult, MGI 4", {16, 83, 5, 86}, F::kDemographic,
       0.0213, false, 5e-4, false},
      {"old age vs adolescent, MGI 3", {18, 24, 10, 42}, F::kDemographic,
       0.0224, false, 5e-4, false},
      {"old age vs adolescent, MGI 4", {9, 33, 0, 52}, F::kDemographic, 0.0004,
       false, 5e-4, false},
  };
}

}  // namespace oralscreen
