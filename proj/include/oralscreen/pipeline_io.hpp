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
#ifndef ORALSCREEN_PIPELINE_IO_HPP_
#define ORALSCREEN_PIPELINE_IO_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oralscreen/aggregation.hpp"
#include "oralscreen/cooccurrence.hpp"
#include "oralscreen/core_model.hpp"
#include "oralscreen/errors.hpp"
#include "oralscreen/mask_synthesis.hpp"
#include "oralscreen/seg_metrics.hpp"

namespace oralscreen {

// A malformed input row. line and column are 1-based; column 0 means the
// whole line.
class SchemaError : public ValidationError {
 public:
  SchemaError(std::string file, std::size_t line, std::size_t column,
              const std::string& message);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

// Rows that name subjects missing from subjects.csv.
class OrphanError : public ValidationError {
 public:
  OrphanError(std::string file, std::vector<std::string> ids);

  const std::string& file() const { return file_; }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::string file_;
  std::vector<std::string> ids_;
};

struct FileDigest {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Provenance {
  std::vector<FileDigest> files;
  std::string ingested_at;  // UTC, informational only
};

struct Dataset {
  std::vector<SubjectRecord> subjects;
  std::vector<ImageAnnotation> annotations;
  Provenance provenance;
};

struct DatasetPaths {
  std::filesystem::path subjects_csv;
  std::filesystem::path questionnaire_csv;
  std::filesystem::path screenings_csv;
  std::filesystem::path annotations_jsonl;

  // subjects.csv, questionnaire.csv, screenings.csv, annotations.jsonl.
  static DatasetPaths in_directory(const std::filesystem::path& dir);
};

// Reads and cross-checks the four inputs. Throws IoError for unreadable
// files, SchemaError for malformed rows, OrphanError for rows naming unknown
// subjects, and ValidationError for subjects missing questionnaire or
// screening rows or for a duplicate (image_id, annotator_id).
Dataset ingest(const DatasetPaths& paths);

// Parses and validates an annotations.jsonl file on its own, without the
// subject cross-check. Throws SchemaError for a malformed line, a duplicate
// (image_id, annotator_id) or an image attributed to two subjects.
std::vector<ImageAnnotation> read_annotations_jsonl(
    const std::filesystem::path& path);

// Writes the four inputs in the layout ingest() reads.
void write_dataset(const Dataset& dataset, const DatasetPaths& paths);

// Subject MGIs plus condition flags for every subject with >= 1 annotation.
struct AnalysisInput {
  std::vector<ScoredSubject> subjects;
  std::vector<std::string> warnings;
};

AnalysisInput prepare_analysis(const Dataset& dataset,
                               BpPrecedence precedence = BpPrecedence::kHighFirst);

// MGI x gender x age cohort counts.
struct Table1 {
  std::array<std::array<std::array<std::size_t, 4>, 2>, MgiScore::kLevels> counts{};

  std::size_t at(int mgi, Gender g, AgeCohort c) const;
  std::size_t cohort_total(int mgi, AgeCohort c) const;
  std::size_t gender_total(int mgi, Gender g) const;
  std::size_t level_total(int mgi) const;
  std::size_t gender_total(Gender g) const;
  std::size_t total() const;
};

Table1 emit_table1(std::span<const ScoredSubject> subjects);
Table1 emit_table1(const Dataset& dataset);

// One row per MGI plus a "total" row; Female/Male/Total per cohort and for
// all ages.
std::string table1_csv(const Table1& t);

// round(100 * count / n, 1) with halves away from zero, computed in integer
// arithmetic. "0" when count is 0 and "100" when count equals n.
std::string format_percent(std::size_t count, std::size_t n);
// "14 (46.7)", with a trailing "*" when significant.
std::string format_cell(std::size_t count, std::size_t n, bool significant);

// Shortest text that round-trips the double.
std::string format_double(double v);

struct ReportMetadata {
  double alpha = 0.05;
  TestConvention convention;
  Strata strata = Strata::kNone;
  BpPrecedence bp_precedence = BpPrecedence::kHighFirst;
  ColorThresholdConfig threshold_config;
  std::vector<FileDigest> inputs;
  std::vector<std::string> warnings;

  // Canonical JSON of the analysis settings; config_digest() hashes it.
  std::string config_json() const;
  std::string config_digest() const;
};

struct ReportBundle {
  Table1 mgi_histogram;
  CorrelationGrid questionnaire_grid;
  CorrelationGrid screening_grid;
  // Empty unless strata != kNone.
  StratifiedGrids stratified_questionnaire;
  StratifiedGrids stratified_screening;
  ReportMetadata metadata;
};

// Per-cell failures are recorded in the grids, never thrown.
ReportBundle emit_grids(const Dataset& dataset, double alpha = 0.05,
                        const TestConvention& convention = {},
                        Strata strata = Strata::kNone,
                        BpPrecedence precedence = BpPrecedence::kHighFirst,
                        const ColorThresholdConfig& threshold_config = {});

// Wide table: MGI, No. patients, one "count (pct)" column per condition.
std::string grid_table_csv(const CorrelationGrid& grid);
// Long form: one row per cell with the cross counts and the p-value.
std::string grid_cells_csv(const CorrelationGrid& grid);

// Writes table1.csv, table2.csv, table3.csv, cells.csv, report.json and,
// when stratified, supplementary_*.csv into `out_dir` (created if needed).
// Returns the written paths in order.
std::vector<std::filesystem::path> write_report(
    const ReportBundle& bundle, const std::filesystem::path& out_dir);

struct CurveSummary {
  double auc = 0.0;
  std::size_t operating_index = 0;  // index into the ROC points
};

// Writes roc.csv, pr.csv and curve_summary.json into `out_dir` (created if
// needed). The marked operating point is the ROC point at the smallest
// threshold >= decision_threshold, or the point maximising tpr - fpr when the
// curve carries no thresholds. `pr` may be empty (no points).
CurveSummary emit_curves(const RocCurve& roc, const PrCurve& pr,
                         const std::filesystem::path& out_dir,
                         double decision_threshold = 0.5);

// Candidate table, per-reference p-values and the selected convention as
// pretty-printed JSON.
std::string calibration_report_json(const CalibrationReport& report);

}  // namespace oralscreen

#endif  // ORALSCREEN_PIPELINE_IO_HPP_
