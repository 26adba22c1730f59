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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oralscreen/fixtures.hpp"

namespace oralscreen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fixtures::StudyFixture& Fixture() {
  static const fixtures::StudyFixture fx = fixtures::build_study_fixture();
  return fx;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void Spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

// Independent percent formatting: tenths rounded half up on non-negative
// integers.
std::string ReferencePercent(std::size_t count, std::size_t n) {
  if (count == 0) return "0";
  if (count == n) return "100";
  const std::size_t tenths = (2000 * count + n) / (2 * n);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oralscreen_pipeline_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Dataset SmallDataset() const {
    Dataset d;
    for (int i = 1; i <= 3; ++i) {
      SubjectRecord s;
      s.subject_id = "S" + std::to_string(i);
      s.age = 20 * i;
      s.gender = i % 2 ? Gender::kFemale : Gender::kMale;
      s.routine = {110.0 + i, 70.0, 21.5};
      s.tes.spo2_percent = 96.0;
      s.questionnaire[Condition::kGlasses] = i == 2;
      d.subjects.push_back(s);
      ImageAnnotation a;
      a.image_id = "IMG" + std::to_string(i);
      a.subject_id = s.subject_id;
      a.annotator_id = "A1";
      a.mgi = MgiScore(i);
      a.marks.push_back({Site::kGingivalMargin, {{10, 20}, {30, 25}}, true});
      a.timestamp = std::chrono::sys_seconds{std::chrono::seconds{1677657600 + i}};
      d.annotations.push_back(a);
    }
    return d;
  }

  fs::path dir_;
};

TEST_F(PipelineTest, IngestSmallDataset) {
  const Dataset d = SmallDataset();
  const DatasetPaths paths = DatasetPaths::in_directory(dir_);
  write_dataset(d, paths);
  const Dataset back = ingest(paths);
  EXPECT_EQ(back.subjects, d.subjects);
  EXPECT_EQ(back.annotations, d.annotations);
  ASSERT_EQ(back.provenance.files.size(), 4u);
  for (const FileDigest& f : back.provenance.files) {
    EXPECT_EQ(f.sha256.size(), 64u);
    EXPECT_GT(f.bytes, 0u);
  }
}

TEST_F(PipelineTest, ShortQuestionnaireRowIsLineAddressed) {
  const DatasetPaths paths = DatasetPaths::in_directory(dir_);
  write_dataset(SmallDataset(), paths);
  std::string q = Slurp(paths.questionnaire_csv);
  // Drop the last column of the second data row (file line 3).
  std::vector<std::string> lines;
  std::istringstream in(q);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  lines[2] = lines[2].substr(0, lines[2].rfind(','));
  std::string out;
  for (const std::string& l : lines) out += l + "\n";
  Spit(paths.questionnaire_csv, out);
  try {
    ingest(paths);
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(fs::path(e.file()).filename(), "questionnaire.csv");
    EXPECT_NE(std::string(e.what()).find("questionnaire.csv"), std::string::npos);
  }
}

TEST_F(PipelineTest, BadValueIsColumnAddressed) {
  const DatasetPaths paths = DatasetPaths::in_directory(dir_);
  write_dataset(SmallDataset(), paths);
  Spit(paths.subjects_csv, "subject_id,age,gender\nS1,20,female\nS2,40.5,male\nS3,60,female\n");
  try {
    ingest(paths);
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 2u);
  }
  Spit(paths.subjects_csv, "subject_id,gender,age\nS1,female,20\n");
  EXPECT_THROW(ingest(paths), SchemaError);
}

TEST_F(PipelineTest, OrphanAnnotationListsIds) {
  Dataset d = SmallDataset();
  d.annotations[1].subject_id = "S99";
  const DatasetPaths paths = DatasetPaths::in_directory(dir_);
  write_dataset(d, paths);
  try {
    ingest(paths);
    FAIL() << "expected an orphan error";
  } catch (const OrphanError& e) {
    EXPECT_EQ(e.ids(), (std::vector<std::string>{"S99"}));
  }
}

TEST_F(PipelineTest, MissingFilesAndRows) {
  const DatasetPaths paths = DatasetPaths::in_directory(dir_);
  EXPECT_THROW(ingest(paths), IoError);
  write_dataset(SmallDataset(), paths);
  std::string s = Slurp(paths.screenings_csv);
  s = s.substr(0, s.rfind('\n', s.size() - 2) + 1);
  Spit(paths.screenings_csv, s);
  EXPECT_THROW(ingest(paths), ValidationError);
}

TEST_F(PipelineTest, AnnotationsJsonlErrors) {
  const fs::path p = dir_ / "a.jsonl";
  Spit(p, R"({"image_id":"I1","subject_id":"S1","annotator_id":"A1","mgi":2,"marks":[],"timestamp":"2023-03-01T08:00:00Z"})"
          "\n{not json}\n");
  try {
    read_annotations_jsonl(p);
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  Spit(p, R"({"image_id":"I1","subject_id":"S1","annotator_id":"A1","mgi":9,"marks":[],"timestamp":"2023-03-01T08:00:00Z"})"
          "\n");
  EXPECT_THROW(read_annotations_jsonl(p), SchemaError);
  const std::string line =
      R"({"image_id":"I1","subject_id":"S1","annotator_id":"A1","mgi":2,"marks":[],"timestamp":"2023-03-01T08:00:00Z"})";
  Spit(p, line + "\n" + line + "\n");
  EXPECT_THROW(read_annotations_jsonl(p), SchemaError);
  Spit(p, line + "\n\n");
  EXPECT_EQ(read_annotations_jsonl(p).size(), 1u);
}

TEST_F(PipelineTest, FixtureRoundTripsThroughFiles) {
  fixtures::write_study_fixture(Fixture(), dir_);
  const Dataset back = ingest(DatasetPaths::in_directory(dir_));
  EXPECT_EQ(back.subjects, Fixture().dataset.subjects);
  EXPECT_EQ(back.annotations.size(), Fixture().dataset.annotations.size());
  EXPECT_EQ(back.annotations, Fixture().dataset.annotations);
}

TEST(Table1, ReproducesPublishedHistogram) {
  const Table1 t = emit_table1(Fixture().dataset);
  const std::array<std::size_t, 6> totals = {2, 39, 120, 92, 30, 1};
  for (int m = 0; m < 6; ++m) {
    EXPECT_EQ(t.level_total(m), totals[m]);
    for (Gender g : kAllGenders) {
      for (AgeCohort c : kAllAgeCohorts) {
        EXPECT_EQ(t.at(m, g, c), fixtures::published_histogram(m, g, c));
      }
    }
  }
  EXPECT_EQ(t.gender_total(Gender::kFemale), 117u);
  EXPECT_EQ(t.gender_total(Gender::kMale), 167u);
  EXPECT_EQ(t.total(), 284u);
  EXPECT_EQ(t.total(), prepare_analysis(Fixture().dataset).subjects.size());

  const auto rows = ParseCsv(table1_csv(t));
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows.back().back(), "284");
}

TEST(Table1, EmptyDatasetIsAllZero) {
  const Table1 t = emit_table1(Dataset{});
  EXPECT_EQ(t.total(), 0u);
  for (int m = 0; m < 6; ++m) EXPECT_EQ(t.level_total(m), 0u);
}

TEST(Percent, RoundHalfAwayFromZero) {
  EXPECT_EQ(format_percent(14, 30), "46.7");
  EXPECT_EQ(format_percent(5, 39), "12.8");
  EXPECT_EQ(format_percent(2, 30), "6.7");
  EXPECT_EQ(format_percent(1, 16), "6.3");
  EXPECT_EQ(format_percent(1, 8), "12.5");
  EXPECT_EQ(format_percent(0, 8), "0");
  EXPECT_EQ(format_percent(8, 8), "100");
  EXPECT_EQ(format_percent(1, 2000), "0.1");
  EXPECT_EQ(format_percent(1, 2001), "0.0");
  EXPECT_EQ(format_cell(14, 30, true), "14 (46.7)*");
  EXPECT_EQ(format_cell(3, 30, false), "3 (10.0)");
  for (std::size_t n = 1; n <= 300; ++n) {
    for (std::size_t k = 0; k <= n; ++k) {
      ASSERT_EQ(format_percent(k, n), ReferencePercent(k, n)) << k << "/" << n;
    }
  }
}

TEST(Grids, RenderedCellsMatchPublishedTables) {
  const ReportBundle b = emit_grids(Fixture().dataset);
  for (auto [grid, published] :
       {std::pair{&b.questionnaire_grid, fixtures::PublishedGrid::kQuestionnaire},
        std::pair{&b.screening_grid, fixtures::PublishedGrid::kScreening}}) {
    const auto cols = fixtures::published_columns(published);
    for (int m = 0; m < 6; ++m) {
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const CellResult* cell = grid->find(MgiScore(m), cols[k]);
        ASSERT_NE(cell, nullptr);
        const std::size_t n = cell->table.a + cell->table.b;
        EXPECT_EQ(format_percent(cell->table.a, n), ReferencePercent(cell->table.a, n));
        EXPECT_EQ(cell->table.a, Fixture().expected_count(m, cols[k]));
      }
    }
  }
  const std::string t2 = grid_table_csv(b.questionnaire_grid);
  const std::string t3 = grid_table_csv(b.screening_grid);
  EXPECT_NE(t2.find("14 (46.7)*"), std::string::npos);
  EXPECT_NE(t2.find("2 (6.7)*"), std::string::npos);
  EXPECT_NE(t3.find("5 (12.8)*"), std::string::npos);
  std::size_t stars = 0;
  for (char ch : t2 + t3) stars += ch == '*';
  EXPECT_EQ(stars, 3u);
}

TEST(Grids, TinyAlphaRemovesEveryStar) {
  const ReportBundle b = emit_grids(Fixture().dataset, 1e-9);
  EXPECT_EQ(grid_table_csv(b.questionnaire_grid).find('*'), std::string::npos);
  EXPECT_EQ(grid_table_csv(b.screening_grid).find('*'), std::string::npos);
}

TEST_F(PipelineTest, ReportIsByteIdenticalAcrossRuns) {
  const ReportBundle b1 = emit_grids(Fixture().dataset, 0.05, {}, Strata::kGender);
  const ReportBundle b2 = emit_grids(Fixture().dataset, 0.05, {}, Strata::kGender);
  const auto p1 = write_report(b1, dir_ / "one");
  const auto p2 = write_report(b2, dir_ / "two");
  ASSERT_EQ(p1.size(), p2.size());
  ASSERT_GE(p1.size(), 5u);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    EXPECT_EQ(p1[i].filename(), p2[i].filename());
    EXPECT_EQ(Slurp(p1[i]), Slurp(p2[i])) << p1[i];
  }
  const json report = json::parse(Slurp(dir_ / "one" / "report.json"));
  EXPECT_EQ(report.dump().find(b1.metadata.config_digest()) != std::string::npos, true);
  EXPECT_TRUE(fs::exists(dir_ / "one" / "table1.csv"));
}

TEST(ReportMetadata, DigestTracksSettings) {
  ReportMetadata a;
  ReportMetadata b;
  EXPECT_EQ(a.config_digest(), b.config_digest());
  EXPECT_EQ(a.config_digest().size(), 64u);
  b.alpha = 0.01;
  EXPECT_NE(a.config_digest(), b.config_digest());
  b = a;
  b.threshold_config.redness_ratio_min = 1.3;
  EXPECT_NE(a.config_digest(), b.config_digest());
}

TEST_F(PipelineTest, EmitCurvesThreePointAndDiagonal) {
  const RocCurve roc{{{0, 0}, {0.075, 0.429}, {1, 1}}, {}};
  const CurveSummary s = emit_curves(roc, PrCurve{}, dir_ / "fresh" / "curves");
  EXPECT_NEAR(s.auc, 0.677, 5e-4);
  EXPECT_EQ(s.operating_index, 1u);
  const auto rows = ParseCsv(Slurp(dir_ / "fresh" / "curves" / "roc.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1][0], "0");
  EXPECT_EQ(rows[2][0], "0.075");
  EXPECT_EQ(rows[2][1], "0.429");
  EXPECT_EQ(rows[3][1], "1");
  const json summary = json::parse(Slurp(dir_ / "fresh" / "curves" / "curve_summary.json"));
  EXPECT_NEAR(summary["auc"].get<double>(), 0.677, 5e-4);
  EXPECT_DOUBLE_EQ(summary["operating_point"]["tpr"].get<double>(), 0.429);

  const CurveSummary d = emit_curves({{{0, 0}, {1, 1}}, {}}, PrCurve{}, dir_ / "diag");
  EXPECT_DOUBLE_EQ(d.auc, 0.5);
  EXPECT_TRUE(fs::exists(dir_ / "diag" / "pr.csv"));
}

TEST_F(PipelineTest, EmitCurvesUnwritableTarget) {
  Spit(dir_ / "file", "x");
  EXPECT_THROW(emit_curves({{{0, 0}, {1, 1}}, {}}, PrCurve{}, dir_ / "file" / "sub"),
               IoError);
}

TEST(Calibration, ReportJsonNamesSelectedConvention) {
  const CalibrationReport r = calibrate_convention(study_reference_values());
  const json doc = json::parse(calibration_report_json(r));
  ASSERT_TRUE(doc.contains("selected"));
  EXPECT_EQ(doc["candidates"].size(), 12u);
  EXPECT_EQ(doc["references"].size(), study_reference_values().size());
}

}  // namespace
}  // namespace oralscreen
