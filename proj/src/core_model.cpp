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
#include "oralscreen/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "oralscreen/errors.hpp"

namespace oralscreen {
namespace {

constexpr std::array<Condition, kConditionCount> MakeAllConditions() {
  std::array<Condition, kConditionCount> out{};
  for (std::size_t i = 0; i < kConditionCount; ++i) {
    out[i] = static_cast<Condition>(i);
  }
  return out;
}

constexpr std::array<Condition, kConditionCount> kAll = MakeAllConditions();

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

void RequirePositiveFinite(double v, std::string_view what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw ValidationError(std::string(what) +
                          " must be finite and positive, got " +
                          std::to_string(v));
  }
}

}  // namespace

std::optional<Condition> condition_from_name(std::string_view name) {
  const auto it =
      std::find(kConditionNames.begin(), kConditionNames.end(), name);
  if (it == kConditionNames.end()) return std::nullopt;
  return static_cast<Condition>(it - kConditionNames.begin());
}

std::span<const Condition> all_conditions() { return kAll; }

std::span<const Condition> questionnaire_conditions() {
  return std::span<const Condition>(kAll).first(kQuestionnaireItemCount);
}

std::span<const Condition> screening_conditions() {
  return std::span<const Condition>(kAll).subspan(kQuestionnaireItemCount);
}

std::string_view to_string(Gender g) {
  return g == Gender::kFemale ? "female" : "male";
}

std::string_view to_string(AgeCohort c) {
  switch (c) {
    case AgeCohort::kAdolescent:
      return "adolescent";
    case AgeCohort::kYoungAdult:
      return "young_adult";
    case AgeCohort::kMiddleAge:
      return "middle_age";
    case AgeCohort::kOldAge:
      return "old_age";
  }
  return "unknown";
}

std::string_view to_string(CategoricalLevel l) {
  switch (l) {
    case CategoricalLevel::kLow:
      return "low";
    case CategoricalLevel::kNormal:
      return "normal";
    case CategoricalLevel::kHigh:
      return "high";
  }
  return "unknown";
}

std::string_view to_string(EcgLabel e) {
  return e == EcgLabel::kNormal ? "Normal" : "Possible atrial fibrillation";
}

Gender parse_gender(std::string_view s) {
  const std::string v = Lower(s);
  if (v == "female" || v == "f") return Gender::kFemale;
  if (v == "male" || v == "m") return Gender::kMale;
  throw ValidationError("unknown gender '" + std::string(s) + "'");
}

AgeCohort parse_age_cohort(std::string_view s) {
  const std::string v = Lower(s);
  for (AgeCohort c : kAllAgeCohorts) {
    if (v == to_string(c)) return c;
  }
  throw ValidationError("unknown age cohort '" + std::string(s) + "'");
}

EcgLabel parse_ecg_label(std::string_view s) {
  const std::string v = Lower(s);
  if (v == "normal") return EcgLabel::kNormal;
  if (v == "possible atrial fibrillation" ||
      v == "possible_atrial_fibrillation") {
    return EcgLabel::kPossibleAtrialFibrillation;
  }
  throw ValidationError("unknown ECG label '" + std::string(s) + "'");
}

void validate(const RoutineScreenings& r) {
  RequirePositiveFinite(r.systolic, "systolic");
  RequirePositiveFinite(r.diastolic, "diastolic");
  RequirePositiveFinite(r.bmi, "bmi");
  if (!(r.systolic > r.diastolic)) {
    throw ValidationError("systolic must exceed diastolic");
  }
}

void validate(const TesResults& t) {
  if (!std::isfinite(t.spo2_percent) || t.spo2_percent < 0.0 ||
      t.spo2_percent > 100.0) {
    throw ValidationError("spo2 must lie in [0, 100], got " +
                          std::to_string(t.spo2_percent));
  }
}

void validate(const SubjectRecord& s) {
  if (s.subject_id.empty()) throw ValidationError("empty subject_id");
  if (s.age < kMinStudyAge || s.age > kMaxStudyAge) {
    throw ValidationError("subject " + s.subject_id + ": age " +
                          std::to_string(s.age) + " outside [18, 90]");
  }
  validate(s.routine);
  validate(s.tes);
}

CategoricalLevel categorize_bmi(double bmi) {
  RequirePositiveFinite(bmi, "bmi");
  if (bmi < 19.0) return CategoricalLevel::kLow;
  if (bmi < 25.0) return CategoricalLevel::kNormal;
  return CategoricalLevel::kHigh;
}

CategoricalLevel categorize_bp(double systolic, double diastolic,
                               BpPrecedence precedence) {
  validate(RoutineScreenings{systolic, diastolic, 1.0});
  const bool high = systolic > 140.0 || diastolic > 90.0;
  const bool low = systolic < 90.0 || diastolic < 60.0;
  if (precedence == BpPrecedence::kHighFirst) {
    if (high) return CategoricalLevel::kHigh;
    if (low) return CategoricalLevel::kLow;
  } else {
    if (low) return CategoricalLevel::kLow;
    if (high) return CategoricalLevel::kHigh;
  }
  return CategoricalLevel::kNormal;
}

CategoricalLevel categorize_spo2(double spo2_percent) {
  validate(TesResults{.spo2_percent = spo2_percent});
  return spo2_percent <= 90.0 ? CategoricalLevel::kLow
                              : CategoricalLevel::kNormal;
}

AgeCohort assign_age_cohort(int age) {
  if (age < kMinStudyAge || age > kMaxStudyAge) {
    throw ValidationError("age " + std::to_string(age) +
                          " outside study range [18, 90]");
  }
  if (age <= 19) return AgeCohort::kAdolescent;
  if (age <= 39) return AgeCohort::kYoungAdult;
  if (age <= 64) return AgeCohort::kMiddleAge;
  return AgeCohort::kOldAge;
}

bool ConditionFlags::at(std::string_view name) const {
  const auto c = condition_from_name(name);
  if (!c) throw ValidationError("unknown condition '" + std::string(name) + "'");
  return (*this)[*c];
}

std::size_t ConditionFlags::count_true() const {
  return static_cast<std::size_t>(
      std::count(values_.begin(), values_.end(), true));
}

ConditionFlags derive_condition_flags(const SubjectRecord& subject,
                                      BpPrecedence precedence) {
  validate(subject);
  ConditionFlags flags;
  for (Condition c : questionnaire_conditions()) {
    flags.set(c, subject.questionnaire[c]);
  }
  const auto bp = categorize_bp(subject.routine.systolic,
                                subject.routine.diastolic, precedence);
  const auto bmi = categorize_bmi(subject.routine.bmi);
  flags.set(Condition::kHighBpMeasured, bp == CategoricalLevel::kHigh);
  flags.set(Condition::kLowBpMeasured, bp == CategoricalLevel::kLow);
  flags.set(Condition::kHighBmi, bmi == CategoricalLevel::kHigh);
  flags.set(Condition::kLowBmi, bmi == CategoricalLevel::kLow);
  flags.set(Condition::kLowO2, categorize_spo2(subject.tes.spo2_percent) ==
                                   CategoricalLevel::kLow);
  flags.set(Condition::kRetinal, subject.tes.retinal_abnormal);
  flags.set(Condition::kTm, subject.tes.tympanic_abnormal);
  flags.set(Condition::kFingerNose, subject.tes.finger_nose_abnormal);
  flags.set(Condition::kGait, subject.tes.gait_abnormal);
  flags.set(Condition::kAfib,
            subject.tes.ecg_label == EcgLabel::kPossibleAtrialFibrillation);
  return flags;
}

}  // namespace oralscreen
