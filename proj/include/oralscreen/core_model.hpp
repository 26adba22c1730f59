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
#ifndef ORALSCREEN_CORE_MODEL_HPP_
#define ORALSCREEN_CORE_MODEL_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace oralscreen {

enum class Gender { kFemale, kMale };

// Study age bands. Together they cover 18..90 inclusive without overlap.
enum class AgeCohort { kAdolescent, kYoungAdult, kMiddleAge, kOldAge };

inline constexpr std::array<Gender, 2> kAllGenders = {Gender::kFemale,
                                                      Gender::kMale};
inline constexpr std::array<AgeCohort, 4> kAllAgeCohorts = {
    AgeCohort::kAdolescent, AgeCohort::kYoungAdult, AgeCohort::kMiddleAge,
    AgeCohort::kOldAge};

inline constexpr int kMinStudyAge = 18;
inline constexpr int kMaxStudyAge = 90;

enum class CategoricalLevel { kLow, kNormal, kHigh };

enum class EcgLabel { kNormal, kPossibleAtrialFibrillation };

// Which label wins when a blood pressure reading meets both the low and the
// high criterion (e.g. 85/95 mmHg).
enum class BpPrecedence { kHighFirst, kLowFirst };

// Every condition flag the analysis can cross-correlate with MGI, in canonical
// report order: the 26 questionnaire items, then the routine and
// technology-enabled screening outcomes, then the ECG rhythm flag.
enum class Condition : std::size_t {
  kGlasses,
  kDental,
  kSwollenJoints,
  kHearing,
  kFhDiabetes,
  kFhHighBp,
  kTobacco,
  kDifficultyWalking,
  kHighBp,
  kDiabetes,
  kHighBpRx,
  kAsthma,
  kSmoking,
  kFhCardiac,
  kCardiacRx,
  kCardiovascular,
  kLowBp,
  kFhStroke,
  kFhEyeDisease,
  kHeartAttack,
  kCoronaryBypass,
  kDrinking,
  kEyeTreatment,
  kMemoryLoss,
  kEarTreatment,
  kFhEarDisease,
  // Derived from measurements and TES outcomes.
  kHighBpMeasured,
  kLowBpMeasured,
  kHighBmi,
  kLowBmi,
  kLowO2,
  kRetinal,
  kTm,
  kFingerNose,
  kGait,
  kAfib,
};

inline constexpr std::size_t kQuestionnaireItemCount = 26;
inline constexpr std::size_t kConditionCount = 36;

// Stable external names (snake_case). Index = static_cast<size_t>(Condition).
inline constexpr std::array<std::string_view, kConditionCount>
    kConditionNames = {
        "glasses",         "dental",          "swollen_joints",
        "hearing",         "fh_diabetes",     "fh_high_bp",
        "tobacco",         "difficulty_walking", "high_bp",
        "diabetes",        "high_bp_rx",      "asthma",
        "smoking",         "fh_cardiac",      "cardiac_rx",
        "cardiovascular",  "low_bp",          "fh_stroke",
        "fh_eye_disease",  "heart_attack",    "coronary_bypass",
        "drinking",        "eye_treatment",   "memory_loss",
        "ear_treatment",   "fh_ear_disease",  "high_bp_measured",
        "low_bp_measured", "high_bmi",        "low_bmi",
        "low_o2",          "retinal",         "tm",
        "finger_nose",     "gait",            "afib",
};

// Human-readable column headers used in regenerated tables.
inline constexpr std::array<std::string_view, kConditionCount>
    kConditionLabels = {
        "Glasses",        "Dental",          "Swollen joints",
        "Hearing",        "FH diabetes",     "FH high BP",
        "Tobacco",        "Difficulty walking", "High BP",
        "Diabetes",       "High BP Rx",      "Asthma",
        "Smoking",        "FH cardiac",      "Cardiac Rx",
        "Cardiovascular", "Low BP",          "FH stroke",
        "FH eye disease", "Heart attack",    "Coronary bypass",
        "Drinking",       "Eye treatment",   "Memory loss",
        "Ear treatment",  "FH ear disease",  "High BP (measured)",
        "Low BP (measured)", "High BMI",     "Low BMI",
        "Low O2",         "Retinal",         "TM",
        "Finger-nose",    "Gait",            "AFib",
};

constexpr std::size_t index_of(Condition c) {
  return static_cast<std::size_t>(c);
}
constexpr std::string_view name_of(Condition c) {
  return kConditionNames[index_of(c)];
}
constexpr std::string_view label_of(Condition c) {
  return kConditionLabels[index_of(c)];
}
constexpr bool is_questionnaire_item(Condition c) {
  return index_of(c) < kQuestionnaireItemCount;
}

std::optional<Condition> condition_from_name(std::string_view name);

// All conditions in canonical order.
std::span<const Condition> all_conditions();
// The 26 questionnaire conditions (medical-history grid).
std::span<const Condition> questionnaire_conditions();
// Routine + technology-enabled screening conditions (screening grid), afib
// last.
std::span<const Condition> screening_conditions();

std::string_view to_string(Gender g);
std::string_view to_string(AgeCohort c);
std::string_view to_string(CategoricalLevel l);
std::string_view to_string(EcgLabel e);
// Case-insensitive; throws ValidationError for unknown values.
Gender parse_gender(std::string_view s);
AgeCohort parse_age_cohort(std::string_view s);
EcgLabel parse_ecg_label(std::string_view s);

struct QuestionnaireResponse {
  std::array<bool, kQuestionnaireItemCount> answers{};

  bool operator[](Condition c) const { return answers.at(index_of(c)); }
  bool& operator[](Condition c) { return answers.at(index_of(c)); }
  bool operator==(const QuestionnaireResponse&) const = default;
};

struct RoutineScreenings {
  double systolic = 0.0;   // mmHg
  double diastolic = 0.0;  // mmHg
  double bmi = 0.0;        // kg/m^2
  bool operator==(const RoutineScreenings&) const = default;
};

struct TesResults {
  double spo2_percent = 0.0;
  bool retinal_abnormal = false;
  bool tympanic_abnormal = false;
  bool finger_nose_abnormal = false;
  bool gait_abnormal = false;
  EcgLabel ecg_label = EcgLabel::kNormal;
  bool operator==(const TesResults&) const = default;
};

struct SubjectRecord {
  std::string subject_id;
  int age = 0;
  Gender gender = Gender::kFemale;
  QuestionnaireResponse questionnaire;
  RoutineScreenings routine;
  TesResults tes;
  bool operator==(const SubjectRecord&) const = default;
};

// Throw ValidationError when a field is outside its documented domain.
void validate(const RoutineScreenings& r);
void validate(const TesResults& t);
void validate(const SubjectRecord& s);

CategoricalLevel categorize_bmi(double bmi);
CategoricalLevel categorize_bp(double systolic, double diastolic,
                               BpPrecedence precedence = BpPrecedence::kHighFirst);
// Never returns kHigh.
CategoricalLevel categorize_spo2(double spo2_percent);
AgeCohort assign_age_cohort(int age);

// Condition flags for one subject, indexed by Condition.
class ConditionFlags {
 public:
  bool operator[](Condition c) const { return values_[index_of(c)]; }
  // Throws ValidationError for an unknown name.
  bool at(std::string_view name) const;
  void set(Condition c, bool v) { values_[index_of(c)] = v; }
  std::size_t count_true() const;
  bool operator==(const ConditionFlags&) const = default;

 private:
  std::array<bool, kConditionCount> values_{};
};

ConditionFlags derive_condition_flags(
    const SubjectRecord& subject,
    BpPrecedence precedence = BpPrecedence::kHighFirst);

}  // namespace oralscreen

#endif  // ORALSCREEN_CORE_MODEL_HPP_
