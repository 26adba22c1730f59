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
#include "oralscreen/pipeline_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "oralscreen/annotation_json.hpp"
#include "oralscreen/digest.hpp"

namespace oralscreen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kScreeningHeader[] = {
    "subject_id", "systolic", "diastolic", "bmi",  "spo2",
    "retinal",    "tm",       "finger_nose", "gait", "ecg_label"};

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::vector<std::string> SplitCsvLine(const std::string& line,
                                      const std::string& file,
                                      std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw SchemaError(file, line_no, out.size() + 1, "unterminated quote");
  out.push_back(std::move(field));
  return out;
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  if (!lines.empty() && lines[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    lines[0].erase(0, 3);
  }
  return lines;
}

// Header must match exactly; every data row must have the header's width.
std::vector<CsvRow> ReadCsv(const fs::path& path,
                            const std::vector<std::string>& header) {
  const std::string file = path.filename().string();
  const std::vector<std::string> lines = ReadLines(path);
  if (lines.empty()) throw SchemaError(file, 1, 0, "missing header row");
  const std::vector<std::string> got = SplitCsvLine(lines[0], file, 1);
  for (std::size_t i = 0; i < std::max(got.size(), header.size()); ++i) {
    if (i >= got.size() || i >= header.size() || got[i] != header[i]) {
      throw SchemaError(file, 1, i + 1,
                        "header column " + std::to_string(i + 1) + " should be '" +
                            (i < header.size() ? header[i] : std::string("<none>")) +
                            "'");
    }
  }
  std::vector<CsvRow> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    CsvRow row{n + 1, SplitCsvLine(lines[n], file, n + 1)};
    if (row.fields.size() != header.size()) {
      throw SchemaError(file, row.line,
                        std::min(row.fields.size(), header.size()) + 1,
                        "expected " + std::to_string(header.size()) +
                            " columns, found " + std::to_string(row.fields.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int ParseInt(const std::string& s, const std::string& file, const CsvRow& row,
             std::size_t col) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw SchemaError(file, row.line, col, "'" + s + "' is not an integer");
  }
  return v;
}

double ParseDouble(const std::string& s, const std::string& file,
                   const CsvRow& row, std::size_t col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() ||
      !std::isfinite(v)) {
    throw SchemaError(file, row.line, col, "'" + s + "' is not a number");
  }
  return v;
}

bool ParseFlag(const std::string& s, const std::string& file, const CsvRow& row,
               std::size_t col) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw SchemaError(file, row.line, col, "'" + s + "' is not 0 or 1");
}

std::string_view EcgToken(EcgLabel e) {
  return e == EcgLabel::kNormal ? "normal" : "possible_atrial_fibrillation";
}

FileDigest DigestOf(const fs::path& path) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string());
  return FileDigest{path.filename().string(), sha256_file(path), size};
}

std::string NowUtc() {
  return format_timestamp(
      std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string());
  }
}

std::string JoinSorted(const std::set<std::string>& ids) {
  std::string out;
  for (const std::string& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

json OptionalNumber(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json GridToJson(const CorrelationGrid& grid, const std::string& name) {
  json cells = json::array();
  for (const CellResult& c : grid.cells) {
    const std::size_t n = c.table.a + c.table.b;
    json cell = {{"mgi", c.mgi_level.value()},
                 {"condition", std::string(name_of(c.condition))},
                 {"a", c.table.a},
                 {"b", c.table.b},
                 {"c", c.table.c},
                 {"d", c.table.d},
                 {"display", format_cell(c.table.a, n, c.starred())},
                 {"significant", c.significant},
                 {"elevated", c.elevated},
                 {"starred", c.starred()}};
    if (c.result) {
      cell["p_value"] = c.result->p_value;
      cell["odds_ratio"] = OptionalNumber(c.result->statistic);
    } else {
      cell["p_value"] = nullptr;
      cell["reason"] = c.not_computable_reason;
    }
    cells.push_back(std::move(cell));
  }
  json absent = json::array();
  for (const AbsentLevel& a : grid.absent_levels) {
    absent.push_back({{"mgi", a.mgi_level.value()}, {"reason", a.reason}});
  }
  return {{"name", name},
          {"filter", grid.filter.label()},
          {"alpha", grid.alpha},
          {"population_size", grid.population_size},
          {"level_counts", grid.level_counts},
          {"absent_levels", std::move(absent)},
          {"cells", std::move(cells)}};
}

std::string StratumFileLabel(const CohortFilter& f) {
  std::string label = f.label();
  std::replace(label.begin(), label.end(), '/', '_');
  return label;
}

}  // namespace

SchemaError::SchemaError(std::string file, std::size_t line, std::size_t column,
                         const std::string& message)
    : ValidationError(file + ":" + std::to_string(line) +
                      (column ? ":" + std::to_string(column) : std::string()) +
                      ": " + message),
      file_(std::move(file)),
      line_(line),
      column_(column) {}

OrphanError::OrphanError(std::string file, std::vector<std::string> ids)
    : ValidationError(file + ": unknown subject id(s): " +
                      JoinSorted({ids.begin(), ids.end()})),
      file_(std::move(file)),
      ids_(std::move(ids)) {}

DatasetPaths DatasetPaths::in_directory(const fs::path& dir) {
  return DatasetPaths{dir / "subjects.csv", dir / "questionnaire.csv",
                      dir / "screenings.csv", dir / "annotations.jsonl"};
}

std::vector<ImageAnnotation> read_annotations_jsonl(const fs::path& path) {
  const std::string file = path.filename().string();
  const std::vector<std::string> lines = ReadLines(path);
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, std::string> image_subject;
  std::vector<ImageAnnotation> out;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].find_first_not_of(" \t") == std::string::npos) continue;
    ImageAnnotation a;
    try {
      a = annotation_from_json(json::parse(lines[n]));
      validate(a);
    } catch (const json::exception& e) {
      throw SchemaError(file, n + 1, 0, e.what());
    } catch (const ValidationError& e) {
      throw SchemaError(file, n + 1, 0, e.what());
    }
    if (!seen.emplace(a.image_id, a.annotator_id).second) {
      throw SchemaError(file, n + 1, 0,
                        "duplicate annotation of image '" + a.image_id +
                            "' by annotator '" + a.annotator_id + "'");
    }
    const auto [it, fresh] = image_subject.emplace(a.image_id, a.subject_id);
    if (!fresh && it->second != a.subject_id) {
      throw SchemaError(file, n + 1, 0,
                        "image '" + a.image_id + "' already belongs to subject '" +
                            it->second + "'");
    }
    out.push_back(std::move(a));
  }
  return out;
}

Dataset ingest(const DatasetPaths& paths) {
  Dataset ds;
  std::map<std::string, std::size_t> index;

  {
    const std::string file = paths.subjects_csv.filename().string();
    for (const CsvRow& row :
         ReadCsv(paths.subjects_csv, {"subject_id", "age", "gender"})) {
      SubjectRecord s;
      s.subject_id = row.fields[0];
      if (s.subject_id.empty()) throw SchemaError(file, row.line, 1, "empty subject_id");
      if (index.count(s.subject_id)) {
        throw SchemaError(file, row.line, 1, "duplicate subject_id '" + s.subject_id + "'");
      }
      s.age = ParseInt(row.fields[1], file, row, 2);
      if (s.age < kMinStudyAge || s.age > kMaxStudyAge) {
        throw SchemaError(file, row.line, 2,
                          "age " + row.fields[1] + " outside 18..90");
      }
      try {
        s.gender = parse_gender(row.fields[2]);
      } catch (const ValidationError& e) {
        throw SchemaError(file, row.line, 3, e.what());
      }
      index.emplace(s.subject_id, ds.subjects.size());
      ds.subjects.push_back(std::move(s));
    }
  }

  std::vector<bool> has_questionnaire(ds.subjects.size(), false);
  std::vector<bool> has_screening(ds.subjects.size(), false);

  {
    const std::string file = paths.questionnaire_csv.filename().string();
    std::vector<std::string> header = {"subject_id"};
    for (std::size_t i = 0; i < kQuestionnaireItemCount; ++i) {
      header.emplace_back(kConditionNames[i]);
    }
    std::set<std::string> orphans;
    for (const CsvRow& row : ReadCsv(paths.questionnaire_csv, header)) {
      const auto it = index.find(row.fields[0]);
      if (it == index.end()) {
        orphans.insert(row.fields[0]);
        continue;
      }
      if (has_questionnaire[it->second]) {
        throw SchemaError(file, row.line, 1, "duplicate row for '" + row.fields[0] + "'");
      }
      has_questionnaire[it->second] = true;
      QuestionnaireResponse& q = ds.subjects[it->second].questionnaire;
      for (std::size_t i = 0; i < kQuestionnaireItemCount; ++i) {
        q.answers[i] = ParseFlag(row.fields[i + 1], file, row, i + 2);
      }
    }
    if (!orphans.empty()) throw OrphanError(file, {orphans.begin(), orphans.end()});
  }

  {
    const std::string file = paths.screenings_csv.filename().string();
    std::set<std::string> orphans;
    for (const CsvRow& row :
         ReadCsv(paths.screenings_csv,
                 {std::begin(kScreeningHeader), std::end(kScreeningHeader)})) {
      const auto it = index.find(row.fields[0]);
      if (it == index.end()) {
        orphans.insert(row.fields[0]);
        continue;
      }
      if (has_screening[it->second]) {
        throw SchemaError(file, row.line, 1, "duplicate row for '" + row.fields[0] + "'");
      }
      has_screening[it->second] = true;
      SubjectRecord& s = ds.subjects[it->second];
      s.routine.systolic = ParseDouble(row.fields[1], file, row, 2);
      s.routine.diastolic = ParseDouble(row.fields[2], file, row, 3);
      s.routine.bmi = ParseDouble(row.fields[3], file, row, 4);
      s.tes.spo2_percent = ParseDouble(row.fields[4], file, row, 5);
      s.tes.retinal_abnormal = ParseFlag(row.fields[5], file, row, 6);
      s.tes.tympanic_abnormal = ParseFlag(row.fields[6], file, row, 7);
      s.tes.finger_nose_abnormal = ParseFlag(row.fields[7], file, row, 8);
      s.tes.gait_abnormal = ParseFlag(row.fields[8], file, row, 9);
      try {
        s.tes.ecg_label = parse_ecg_label(row.fields[9]);
      } catch (const ValidationError& e) {
        throw SchemaError(file, row.line, 10, e.what());
      }
      try {
        validate(s.routine);
        validate(s.tes);
      } catch (const ValidationError& e) {
        throw SchemaError(file, row.line, 0, e.what());
      }
    }
    if (!orphans.empty()) throw OrphanError(file, {orphans.begin(), orphans.end()});
  }

  std::set<std::string> missing_q;
  std::set<std::string> missing_s;
  for (std::size_t i = 0; i < ds.subjects.size(); ++i) {
    if (!has_questionnaire[i]) missing_q.insert(ds.subjects[i].subject_id);
    if (!has_screening[i]) missing_s.insert(ds.subjects[i].subject_id);
  }
  if (!missing_q.empty()) {
    throw ValidationError(paths.questionnaire_csv.filename().string() +
                          ": no row for subject(s): " + JoinSorted(missing_q));
  }
  if (!missing_s.empty()) {
    throw ValidationError(paths.screenings_csv.filename().string() +
                          ": no row for subject(s): " + JoinSorted(missing_s));
  }

  {
    std::set<std::string> orphans;
    for (ImageAnnotation& a : read_annotations_jsonl(paths.annotations_jsonl)) {
      if (!index.count(a.subject_id)) {
        orphans.insert(a.subject_id);
        continue;
      }
      ds.annotations.push_back(std::move(a));
    }
    if (!orphans.empty()) {
      throw OrphanError(paths.annotations_jsonl.filename().string(),
                        {orphans.begin(), orphans.end()});
    }
  }

  for (const fs::path& p : {paths.subjects_csv, paths.questionnaire_csv,
                            paths.screenings_csv, paths.annotations_jsonl}) {
    ds.provenance.files.push_back(DigestOf(p));
  }
  ds.provenance.ingested_at = NowUtc();
  return ds;
}

void write_dataset(const Dataset& dataset, const DatasetPaths& paths) {
  std::ostringstream subjects;
  subjects << "subject_id,age,gender\n";
  std::ostringstream questionnaire;
  questionnaire << "subject_id";
  for (std::size_t i = 0; i < kQuestionnaireItemCount; ++i) {
    questionnaire << ',' << kConditionNames[i];
  }
  questionnaire << '\n';
  std::ostringstream screenings;
  for (std::size_t i = 0; i < std::size(kScreeningHeader); ++i) {
    screenings << (i ? "," : "") << kScreeningHeader[i];
  }
  screenings << '\n';

  for (const SubjectRecord& s : dataset.subjects) {
    subjects << s.subject_id << ',' << s.age << ',' << to_string(s.gender) << '\n';
    questionnaire << s.subject_id;
    for (bool v : s.questionnaire.answers) questionnaire << ',' << (v ? 1 : 0);
    questionnaire << '\n';
    screenings << s.subject_id << ',' << format_double(s.routine.systolic) << ','
               << format_double(s.routine.diastolic) << ','
               << format_double(s.routine.bmi) << ','
               << format_double(s.tes.spo2_percent) << ','
               << (s.tes.retinal_abnormal ? 1 : 0) << ','
               << (s.tes.tympanic_abnormal ? 1 : 0) << ','
               << (s.tes.finger_nose_abnormal ? 1 : 0) << ','
               << (s.tes.gait_abnormal ? 1 : 0) << ',' << EcgToken(s.tes.ecg_label)
               << '\n';
  }
  std::string annotations;
  for (const ImageAnnotation& a : dataset.annotations) {
    annotations += annotation_to_json(a).dump();
    annotations += '\n';
  }
  WriteText(paths.subjects_csv, subjects.str());
  WriteText(paths.questionnaire_csv, questionnaire.str());
  WriteText(paths.screenings_csv, screenings.str());
  WriteText(paths.annotations_jsonl, annotations);
}

AnalysisInput prepare_analysis(const Dataset& dataset, BpPrecedence precedence) {
  std::vector<std::string> ids;
  ids.reserve(dataset.subjects.size());
  for (const SubjectRecord& s : dataset.subjects) ids.push_back(s.subject_id);
  AnalysisInput out;
  if (dataset.annotations.empty()) {
    for (const std::string& id : ids) {
      out.warnings.push_back("subject '" + id + "' has no annotated image");
    }
    return out;
  }
  SubjectMgiTable table = subject_mgi_table(dataset.annotations, ids);
  out.subjects = score_subjects(dataset.subjects, table.mgi, precedence);
  out.warnings = std::move(table.warnings);
  return out;
}

std::size_t Table1::at(int mgi, Gender g, AgeCohort c) const {
  return counts.at(static_cast<std::size_t>(mgi))[static_cast<std::size_t>(g)]
               [static_cast<std::size_t>(c)];
}

std::size_t Table1::cohort_total(int mgi, AgeCohort c) const {
  return at(mgi, Gender::kFemale, c) + at(mgi, Gender::kMale, c);
}

std::size_t Table1::gender_total(int mgi, Gender g) const {
  std::size_t n = 0;
  for (AgeCohort c : kAllAgeCohorts) n += at(mgi, g, c);
  return n;
}

std::size_t Table1::level_total(int mgi) const {
  return gender_total(mgi, Gender::kFemale) + gender_total(mgi, Gender::kMale);
}

std::size_t Table1::gender_total(Gender g) const {
  std::size_t n = 0;
  for (int m = MgiScore::kMin; m <= MgiScore::kMax; ++m) n += gender_total(m, g);
  return n;
}

std::size_t Table1::total() const {
  return gender_total(Gender::kFemale) + gender_total(Gender::kMale);
}

Table1 emit_table1(std::span<const ScoredSubject> subjects) {
  Table1 t;
  for (const ScoredSubject& s : subjects) {
    ++t.counts[static_cast<std::size_t>(s.mgi.value())]
              [static_cast<std::size_t>(s.record.gender)]
              [static_cast<std::size_t>(s.cohort)];
  }
  return t;
}

Table1 emit_table1(const Dataset& dataset) {
  return emit_table1(prepare_analysis(dataset).subjects);
}

std::string table1_csv(const Table1& t) {
  std::ostringstream out;
  out << "mgi";
  for (AgeCohort c : kAllAgeCohorts) {
    out << ',' << to_string(c) << "_female," << to_string(c) << "_male,"
        << to_string(c) << "_total";
  }
  out << ",all_female,all_male,all_total\n";
  auto row = [&](const std::string& label, auto cell) {
    out << label;
    std::size_t female = 0;
    std::size_t male = 0;
    for (AgeCohort c : kAllAgeCohorts) {
      const std::size_t f = cell(Gender::kFemale, c);
      const std::size_t m = cell(Gender::kMale, c);
      female += f;
      male += m;
      out << ',' << f << ',' << m << ',' << f + m;
    }
    out << ',' << female << ',' << male << ',' << female + male << '\n';
  };
  for (int m = MgiScore::kMin; m <= MgiScore::kMax; ++m) {
    row(std::to_string(m), [&](Gender g, AgeCohort c) { return t.at(m, g, c); });
  }
  row("total", [&](Gender g, AgeCohort c) {
    std::size_t n = 0;
    for (int m = MgiScore::kMin; m <= MgiScore::kMax; ++m) n += t.at(m, g, c);
    return n;
  });
  return out.str();
}

std::string format_percent(std::size_t count, std::size_t n) {
  if (n == 0) throw ValidationError("format_percent: empty group");
  if (count > n) throw ValidationError("format_percent: count exceeds group size");
  if (count == 0) return "0";
  if (count == n) return "100";
  // floor(1000 * count / n + 1/2) in tenths of a percent.
  const unsigned long long tenths =
      (2000ULL * count + n) / (2ULL * static_cast<unsigned long long>(n));
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

std::string format_cell(std::size_t count, std::size_t n, bool significant) {
  return std::to_string(count) + " (" + format_percent(count, n) + ")" +
         (significant ? "*" : "");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string ReportMetadata::config_json() const {
  const json j = {
      {"alpha", alpha},
      {"bp_precedence",
       bp_precedence == BpPrecedence::kHighFirst ? "high-first" : "low-first"},
      {"convention",
       {{"tail", std::string(to_string(convention.tail))},
        {"cooccurrence_layout", std::string(to_string(convention.cooccurrence_layout))},
        {"demographic_layout", std::string(to_string(convention.demographic_layout))}}},
      {"strata", std::string(to_string(strata))},
      {"threshold_config", json::parse(to_json(threshold_config))}};
  return j.dump();
}

std::string ReportMetadata::config_digest() const {
  return sha256_hex(config_json());
}

ReportBundle emit_grids(const Dataset& dataset, double alpha,
                        const TestConvention& convention, Strata strata,
                        BpPrecedence precedence,
                        const ColorThresholdConfig& threshold_config) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0, 1]");
  }
  validate(threshold_config);
  const AnalysisInput input = prepare_analysis(dataset, precedence);
  if (input.subjects.empty()) {
    throw ValidationError("no subject has an annotated image");
  }
  ReportBundle bundle;
  bundle.mgi_histogram = emit_table1(input.subjects);
  bundle.questionnaire_grid = run_grid(input.subjects, questionnaire_conditions(),
                                       {}, alpha, convention);
  bundle.screening_grid =
      run_grid(input.subjects, screening_conditions(), {}, alpha, convention);
  if (strata != Strata::kNone) {
    bundle.stratified_questionnaire = run_stratified_grids(
        input.subjects, questionnaire_conditions(), strata, alpha, convention);
    bundle.stratified_screening = run_stratified_grids(
        input.subjects, screening_conditions(), strata, alpha, convention);
  }
  ReportMetadata& meta = bundle.metadata;
  meta.alpha = alpha;
  meta.convention = convention;
  meta.strata = strata;
  meta.bp_precedence = precedence;
  meta.threshold_config = threshold_config;
  meta.inputs = dataset.provenance.files;
  meta.warnings = input.warnings;
  for (const std::string& w : bundle.stratified_questionnaire.warnings) {
    meta.warnings.push_back(w);
  }
  return bundle;
}

std::string grid_table_csv(const CorrelationGrid& grid) {
  std::ostringstream out;
  out << "mgi,n_patients";
  for (Condition c : grid.conditions) out << ',' << name_of(c);
  out << '\n';
  for (int m = MgiScore::kMin; m <= MgiScore::kMax; ++m) {
    const std::size_t n = grid.level_counts[static_cast<std::size_t>(m)];
    out << m << ',' << n;
    for (Condition c : grid.conditions) {
      const CellResult* cell = grid.find(MgiScore(m), c);
      out << ',' << (cell ? format_cell(cell->table.a, n, cell->starred()) : "");
    }
    out << '\n';
  }
  return out.str();
}

std::string grid_cells_csv(const CorrelationGrid& grid) {
  std::ostringstream out;
  out << "filter,mgi,condition,a,b,c,d,percent,p_value,significant,elevated,note\n";
  for (const CellResult& c : grid.cells) {
    out << grid.filter.label() << ',' << c.mgi_level.value() << ','
        << name_of(c.condition) << ',' << c.table.a << ',' << c.table.b << ','
        << c.table.c << ',' << c.table.d << ','
        << format_percent(c.table.a, c.table.a + c.table.b) << ','
        << (c.result ? format_double(c.result->p_value) : "") << ','
        << (c.significant ? 1 : 0) << ',' << (c.elevated ? 1 : 0) << ',';
    if (!c.not_computable_reason.empty()) {
      out << '"' << c.not_computable_reason << '"';
    }
    out << '\n';
  }
  return out.str();
}

std::vector<fs::path> write_report(const ReportBundle& bundle,
                                   const fs::path& out_dir) {
  EnsureDirectory(out_dir);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    WriteText(out_dir / name, text);
    written.push_back(out_dir / name);
  };
  emit("table1.csv", table1_csv(bundle.mgi_histogram));
  emit("table2.csv", grid_table_csv(bundle.questionnaire_grid));
  emit("table3.csv", grid_table_csv(bundle.screening_grid));

  std::string cells = grid_cells_csv(bundle.questionnaire_grid);
  auto append_cells = [&](const CorrelationGrid& g) {
    const std::string rows = grid_cells_csv(g);
    cells += rows.substr(rows.find('\n') + 1);
  };
  append_cells(bundle.screening_grid);

  json grids = json::array();
  grids.push_back(GridToJson(bundle.questionnaire_grid, "questionnaire"));
  grids.push_back(GridToJson(bundle.screening_grid, "screening"));
  for (const auto& [family, set] :
       {std::pair{"questionnaire", &bundle.stratified_questionnaire},
        std::pair{"screening", &bundle.stratified_screening}}) {
    for (const CorrelationGrid& g : set->grids) {
      const std::string label = StratumFileLabel(g.filter);
      emit(std::string("supplementary_") + family + "_" + label + ".csv",
           grid_table_csv(g));
      append_cells(g);
      grids.push_back(GridToJson(g, std::string(family) + "/" + label));
    }
  }
  emit("cells.csv", cells);

  const ReportMetadata& meta = bundle.metadata;
  json inputs = json::array();
  for (const FileDigest& f : meta.inputs) {
    inputs.push_back({{"file", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  const Table1& t1 = bundle.mgi_histogram;
  json level_totals = json::array();
  for (int m = MgiScore::kMin; m <= MgiScore::kMax; ++m) {
    level_totals.push_back(t1.level_total(m));
  }
  const json report = {
      {"config", json::parse(meta.config_json())},
      {"config_digest", meta.config_digest()},
      {"inputs", std::move(inputs)},
      {"warnings", meta.warnings},
      {"mgi_histogram",
       {{"counts", t1.counts},
        {"level_totals", std::move(level_totals)},
        {"female_total", t1.gender_total(Gender::kFemale)},
        {"male_total", t1.gender_total(Gender::kMale)},
        {"total", t1.total()}}},
      {"grids", std::move(grids)}};
  emit("report.json", report.dump(2) + "\n");
  return written;
}

CurveSummary emit_curves(const RocCurve& roc, const PrCurve& pr,
                         const fs::path& out_dir, double decision_threshold) {
  CurveSummary summary;
  summary.auc = auc_trapezoid(roc);
  const bool has_thresholds = roc.thresholds.size() == roc.points.size();
  if (!roc.thresholds.empty() && !has_thresholds) {
    throw ValidationError("ROC thresholds do not match its points");
  }
  if (has_thresholds) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < roc.points.size(); ++i) {
      if (roc.thresholds[i] >= decision_threshold) best = i;
    }
    summary.operating_index = best;
  } else {
    double best_j = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roc.points.size(); ++i) {
      const double j = roc.points[i].tpr - roc.points[i].fpr;
      if (j > best_j) {
        best_j = j;
        summary.operating_index = i;
      }
    }
  }

  EnsureDirectory(out_dir);
  std::ostringstream roc_csv;
  roc_csv << "fpr,tpr,threshold\n";
  for (std::size_t i = 0; i < roc.points.size(); ++i) {
    roc_csv << format_double(roc.points[i].fpr) << ','
            << format_double(roc.points[i].tpr) << ','
            << (has_thresholds ? format_double(roc.thresholds[i]) : "") << '\n';
  }
  std::ostringstream pr_csv;
  pr_csv << "recall,precision,threshold\n";
  const bool pr_thresholds = pr.thresholds.size() == pr.points.size();
  for (std::size_t i = 0; i < pr.points.size(); ++i) {
    pr_csv << format_double(pr.points[i].recall) << ','
           << format_double(pr.points[i].precision) << ','
           << (pr_thresholds ? format_double(pr.thresholds[i]) : "") << '\n';
  }

  const RocPoint& op = roc.points[summary.operating_index];
  json point = {{"fpr", op.fpr}, {"tpr", op.tpr}};
  if (has_thresholds) {
    point["threshold"] = OptionalNumber(roc.thresholds[summary.operating_index]);
    if (pr_thresholds) {
      for (std::size_t i = 0; i < pr.points.size(); ++i) {
        if (pr.thresholds[i] == roc.thresholds[summary.operating_index]) {
          point["recall"] = pr.points[i].recall;
          point["precision"] = pr.points[i].precision;
        }
      }
    }
  }
  const json doc = {
      {"auc", summary.auc},
      {"operating_point", std::move(point)},
      {"decision_threshold", decision_threshold},
      {"roc_points", roc.points.size()},
      {"pr_points", pr.points.size()},
      {"conventions",
       {{"zero_prediction_precision", 1.0}, {"empty_masks_iou", 1.0}}}};
  WriteText(out_dir / "roc.csv", roc_csv.str());
  WriteText(out_dir / "pr.csv", pr_csv.str());
  WriteText(out_dir / "curve_summary.json", doc.dump(2) + "\n");
  return summary;
}

std::string calibration_report_json(const CalibrationReport& report) {
  auto convention_json = [](const TestConvention& c) {
    return json{{"tail", std::string(to_string(c.tail))},
                {"cooccurrence_layout", std::string(to_string(c.cooccurrence_layout))},
                {"demographic_layout", std::string(to_string(c.demographic_layout))}};
  };
  json refs = json::array();
  for (const ReferenceValue& r : report.references) {
    refs.push_back({{"label", r.label},
                    {"table", {r.table.a, r.table.b, r.table.c, r.table.d}},
                    {"family", r.family == TableFamily::kCooccurrence ? "cooccurrence"
                                                                      : "demographic"},
                    {"published_p", r.published_p},
                    {"upper_bound", r.upper_bound},
                    {"tolerance", r.tolerance},
                    {"calibration", r.calibration}});
  }
  json candidates = json::array();
  for (const CandidateEvaluation& c : report.candidates) {
    json ps = json::array();
    json hits = json::array();
    for (std::size_t i = 0; i < c.p_values.size(); ++i) {
      ps.push_back(c.p_values[i]);
      hits.push_back(i < report.references.size() &&
                     reproduces(report.references[i], c.p_values[i]));
    }
    candidates.push_back({{"convention", convention_json(c.convention)},
                          {"p_values", std::move(ps)},
                          {"reproduced", std::move(hits)},
                          {"calibration_hits", c.calibration_hits},
                          {"calibration_total", c.calibration_total},
                          {"corroborating_hits", c.corroborating_hits},
                          {"corroborating_total", c.corroborating_total}});
  }
  json out = {{"references", std::move(refs)},
              {"candidates", std::move(candidates)},
              {"selected", report.selected ? convention_json(*report.selected)
                                           : json(nullptr)},
              {"summary", report.summary}};
  return out.dump(2) + "\n";
}

}  // namespace oralscreen
