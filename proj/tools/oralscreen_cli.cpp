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
// oralscreen: command-line front end.
// Exit codes: 0 success, 1 validation failure, 2 I/O failure.

#include <algorithm>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oralscreen/aggregation.hpp"
#include "oralscreen/annotation_service.hpp"
#include "oralscreen/cooccurrence.hpp"
#include "oralscreen/errors.hpp"
#include "oralscreen/mask_io.hpp"
#include "oralscreen/mask_synthesis.hpp"
#include "oralscreen/pipeline_io.hpp"
#include "oralscreen/seg_metrics.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oralscreen;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

std::atomic<bool> g_stop{false};

void OnSignal(int) { g_stop.store(true); }

struct AnalysisFlags {
  double alpha = 0.05;
  std::string tail = "two-sided";
  std::string layout = "count-vs-total";
  std::string stratify = "none";
  std::string config;
};

void AddAnalysisFlags(CLI::App* cmd, AnalysisFlags& f) {
  cmd->add_option("--alpha", f.alpha, "Significance level")->capture_default_str();
  cmd->add_option("--tail", f.tail, "Fisher tail")
      ->check(CLI::IsMember({"two-sided", "greater", "less"}))
      ->capture_default_str();
  cmd->add_option("--layout", f.layout, "Co-occurrence table layout")
      ->check(CLI::IsMember({"count-vs-total", "cross-counts"}))
      ->capture_default_str();
  cmd->add_option("--stratify", f.stratify, "Stratified grids")
      ->check(CLI::IsMember({"none", "gender", "age"}))
      ->capture_default_str();
  cmd->add_option("--config", f.config, "Threshold config JSON file");
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create " + dir.string());
}

ColorThresholdConfig LoadConfig(const std::string& path) {
  if (path.empty()) return {};
  return parse_threshold_config(ReadFile(path));
}

TestConvention Convention(const AnalysisFlags& f) {
  TestConvention c;
  c.tail = parse_tail_mode(f.tail);
  c.cooccurrence_layout = parse_table_layout(f.layout);
  return c;
}

std::string SubjectMgiCsv(const std::vector<ImageAnnotation>& annotations) {
  std::map<std::string, std::vector<MgiScore>> per_subject;
  for (const ImageConsensus& ic : image_consensus(annotations)) {
    per_subject[ic.subject_id].push_back(ic.mgi.label);
  }
  std::ostringstream out;
  out << "subject_id,mgi,n_images,n_agree,tied\n";
  for (const auto& [id, labels] : per_subject) {
    const MgiConsensus c = consensus_mgi(labels);
    out << id << ',' << c.label.value() << ',' << c.n_annotators << ','
        << c.n_agree << ',' << (c.tied ? 1 : 0) << '\n';
  }
  return out.str();
}

int RunIngest(const fs::path& data, const std::string& out_dir) {
  const Dataset ds = ingest(DatasetPaths::in_directory(data));
  const AnalysisInput input = prepare_analysis(ds);
  std::cout << "ingested " << ds.subjects.size() << " subjects, "
            << ds.annotations.size() << " annotations; "
            << input.subjects.size() << " subjects with an MGI\n";
  for (const std::string& w : input.warnings) std::cerr << "warning: " << w << '\n';
  if (!out_dir.empty()) {
    EnsureDir(out_dir);
    json files = json::array();
    for (const FileDigest& f : ds.provenance.files) {
      files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    }
    const json prov = {{"files", files},
                       {"ingested_at", ds.provenance.ingested_at},
                       {"subjects", ds.subjects.size()},
                       {"annotations", ds.annotations.size()},
                       {"warnings", input.warnings}};
    WriteFile(fs::path(out_dir) / "provenance.json", prov.dump(2) + "\n");
    WriteFile(fs::path(out_dir) / "subject_mgi.csv", SubjectMgiCsv(ds.annotations));
  }
  return 0;
}

int RunValidate(const fs::path& data) {
  const Dataset ds = ingest(DatasetPaths::in_directory(data));
  std::cout << "valid: " << ds.subjects.size() << " subjects, "
            << ds.annotations.size() << " annotations\n";
  return 0;
}

int RunAggregate(const fs::path& annotations, const std::string& out) {
  const std::string csv = SubjectMgiCsv(read_annotations_jsonl(annotations));
  if (out.empty()) {
    std::cout << csv;
  } else {
    WriteFile(out, csv);
  }
  return 0;
}

int RunMasks(const fs::path& manifest, const fs::path& annotations,
             const fs::path& out_dir, const std::string& config_path) {
  const ColorThresholdConfig config = LoadConfig(config_path);
  std::map<std::string, std::vector<SiteMark>> marks;
  for (const ImageAnnotation& a : read_annotations_jsonl(annotations)) {
    auto& v = marks[a.image_id];
    v.insert(v.end(), a.marks.begin(), a.marks.end());
  }
  EnsureDir(out_dir);
  std::size_t written = 0;
  for (const ImageEntry& e : load_image_manifest(manifest)) {
    if (e.file.empty()) continue;
    const RgbImage image = read_image_png(e.file);
    validate_frame(image);
    const auto it = marks.find(e.image_id);
    const AnnotationRegion region =
        it == marks.end() ? AnnotationRegion{}
                          : bound_annotations(it->second, config.dilation_radius_px,
                                              image.width(), image.height());
    write_mask_png(out_dir / (e.image_id + ".png"),
                   color_threshold_mask(image, region, config));
    ++written;
  }
  std::cout << "wrote " << written << " ground-truth masks to " << out_dir.string()
            << '\n';
  return 0;
}

int RunSegment(const fs::path& manifest, const fs::path& out_dir,
               const std::string& config_path) {
  const ColorThresholdConfig config = LoadConfig(config_path);
  EnsureDir(out_dir);
  std::size_t written = 0;
  for (const ImageEntry& e : load_image_manifest(manifest)) {
    if (e.file.empty()) continue;
    const RgbImage image = read_image_png(e.file);
    validate_frame(image);
    write_mask_png(out_dir / (e.image_id + ".png"), baseline_segment(image, config));
    write_probability_map(out_dir / (e.image_id + ".pmap"),
                          baseline_scores(image, config));
    ++written;
  }
  std::cout << "segmented " << written << " images into " << out_dir.string() << '\n';
  return 0;
}

int RunSegEval(const fs::path& pred_dir, const fs::path& truth_dir,
               const fs::path& out_dir, double threshold) {
  std::vector<fs::path> truth_files;
  for (const auto& entry : fs::directory_iterator(truth_dir)) {
    if (entry.path().extension() == ".png" || entry.path().extension() == ".pgm") {
      truth_files.push_back(entry.path());
    }
  }
  std::sort(truth_files.begin(), truth_files.end());
  if (truth_files.empty()) {
    throw ValidationError("no ground-truth masks in " + truth_dir.string());
  }
  std::vector<ProbabilityMap> maps;
  std::vector<BinaryMask> truths;
  std::vector<MaskPair> pairs;
  ConfusionCounts counts;
  for (const fs::path& t : truth_files) {
    const std::string id = t.stem().string();
    BinaryMask truth = read_mask(t);
    validate_frame(truth);
    ProbabilityMap map;
    if (fs::exists(pred_dir / (id + ".pmap"))) {
      map = read_probability_map(pred_dir / (id + ".pmap"));
    } else if (fs::exists(pred_dir / (id + ".png"))) {
      map = ProbabilityMap::from_mask(read_mask(pred_dir / (id + ".png")));
    } else {
      throw ValidationError("no prediction for image '" + id + "'");
    }
    validate_frame(map);
    BinaryMask pred(map.width(), map.height());
    for (std::size_t i = 0; i < map.size(); ++i) pred.set(i, map[i] >= threshold);
    counts += confusion_counts(pred, truth);
    pairs.push_back({pred, truth});
    maps.push_back(std::move(map));
    truths.push_back(std::move(truth));
  }
  const RocCurve roc = pooled_roc(maps, truths);
  const PrCurve pr = pr_curve(maps, truths);
  const CurveSummary summary = emit_curves(roc, pr, out_dir, threshold);
  const IouSummary iou_summary = mean_iou(pairs);
  auto opt = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
  const json metrics = {{"images", truth_files.size()},
                        {"threshold", threshold},
                        {"auc", summary.auc},
                        {"tp", counts.tp},
                        {"fp", counts.fp},
                        {"tn", counts.tn},
                        {"fn", counts.fn},
                        {"tpr", opt(counts.tpr())},
                        {"fpr", opt(counts.fpr())},
                        {"precision", opt(counts.precision())},
                        {"mean_iou", iou_summary.mean},
                        {"sd_iou", iou_summary.sd}};
  WriteFile(out_dir / "metrics.json", metrics.dump(2) + "\n");
  std::cout << "auc " << format_double(summary.auc) << ", mean IOU "
            << format_double(iou_summary.mean) << '\n';
  return 0;
}

ReportBundle BuildBundle(const fs::path& data, const AnalysisFlags& f) {
  const Dataset ds = ingest(DatasetPaths::in_directory(data));
  return emit_grids(ds, f.alpha, Convention(f), parse_strata(f.stratify),
                    BpPrecedence::kHighFirst, LoadConfig(f.config));
}

void PrintStarred(const CorrelationGrid& g) {
  for (const CellResult* c : g.starred_cells()) {
    const std::size_t n = c->table.a + c->table.b;
    std::cout << g.filter.label() << "  MGI " << c->mgi_level.value() << "  "
              << label_of(c->condition) << "  "
              << format_cell(c->table.a, n, true) << "  p="
              << format_double(c->result->p_value) << '\n';
  }
}

int RunCorrelate(const fs::path& data, const AnalysisFlags& f,
                 const std::string& out_dir) {
  const ReportBundle b = BuildBundle(data, f);
  std::vector<const CorrelationGrid*> grids = {&b.questionnaire_grid,
                                               &b.screening_grid};
  for (const auto* s : {&b.stratified_questionnaire, &b.stratified_screening}) {
    for (const CorrelationGrid& g : s->grids) grids.push_back(&g);
  }
  std::string cells;
  for (const CorrelationGrid* g : grids) {
    PrintStarred(*g);
    const std::string part = grid_cells_csv(*g);
    cells += cells.empty() ? part : part.substr(part.find('\n') + 1);
  }
  for (const std::string& w : b.metadata.warnings) std::cerr << "warning: " << w << '\n';
  if (!out_dir.empty()) WriteFile(fs::path(out_dir) / "cells.csv", cells);
  return 0;
}

int RunReport(const fs::path& data, const AnalysisFlags& f, const fs::path& out_dir) {
  const ReportBundle b = BuildBundle(data, f);
  for (const fs::path& p : write_report(b, out_dir)) std::cout << p.string() << '\n';
  for (const std::string& w : b.metadata.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int RunServe(const fs::path& manifest, const fs::path& store_path,
             const std::string& subjects_csv, const ServerOptions& options) {
  AnnotationStore store(store_path);
  std::vector<std::string> subject_ids;
  if (!subjects_csv.empty()) {
    std::ifstream in(subjects_csv);
    if (!in) throw IoError("cannot open " + subjects_csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const std::string id = line.substr(0, line.find(','));
      if (!id.empty()) subject_ids.push_back(id);
    }
  }
  AnnotationService service(load_image_manifest(manifest), store, subject_ids);
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  std::atomic<int> port{0};
  std::cout << "serving " << service.images().size() << " images on " << options.host
            << ':' << options.port << " (log " << store_path.string() << ", "
            << store.log_size() << " records)" << std::endl;
  if (!run_annotation_server(service, options, &g_stop, &port)) {
    throw IoError("cannot bind " + options.host + ":" + std::to_string(options.port));
  }
  return 0;
}

int RunCalibrate(const std::string& out) {
  const std::vector<ReferenceValue> refs = study_reference_values();
  const CalibrationReport report = calibrate_convention(refs);
  std::cout << report.summary << '\n';
  if (!out.empty()) WriteFile(out, calibration_report_json(report));
  return report.selected ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oral-systemic screening analysis tools"};
  app.require_subcommand(1);

  std::string data;
  std::string out;
  AnalysisFlags flags;

  auto* ingest_cmd = app.add_subcommand("ingest", "Ingest and validate a dataset");
  ingest_cmd->add_option("--data", data, "Dataset directory")->required();
  ingest_cmd->add_option("--out", out, "Write provenance.json and subject_mgi.csv here");

  auto* validate_cmd = app.add_subcommand("validate", "Validate a dataset");
  validate_cmd->add_option("--data", data, "Dataset directory")->required();

  std::string annotations;
  auto* agg_cmd = app.add_subcommand("aggregate-mgi", "Subject MGIs from annotations");
  agg_cmd->add_option("--annotations", annotations, "annotations.jsonl")->required();
  agg_cmd->add_option("--out", out, "Output CSV (stdout when omitted)");

  std::string manifest;
  std::string config;
  auto* masks_cmd = app.add_subcommand("masks", "Synthesize ground-truth masks");
  masks_cmd->add_option("--images", manifest, "images.csv manifest")->required();
  masks_cmd->add_option("--annotations", annotations, "annotations.jsonl")->required();
  masks_cmd->add_option("--out", out, "Output directory")->required();
  masks_cmd->add_option("--config", config, "Threshold config JSON file");

  auto* segment_cmd = app.add_subcommand("segment", "Run the baseline segmenter");
  segment_cmd->add_option("--images", manifest, "images.csv manifest")->required();
  segment_cmd->add_option("--out", out, "Output directory")->required();
  segment_cmd->add_option("--config", config, "Threshold config JSON file");

  std::string pred_dir;
  std::string truth_dir;
  double threshold = 0.5;
  auto* eval_cmd = app.add_subcommand("seg-eval", "Evaluate segmentations");
  eval_cmd->add_option("--pred", pred_dir, "Prediction directory")->required();
  eval_cmd->add_option("--truth", truth_dir, "Ground-truth mask directory")->required();
  eval_cmd->add_option("--out", out, "Output directory")->required();
  eval_cmd->add_option("--threshold", threshold, "Decision threshold")
      ->capture_default_str();

  auto* correlate_cmd = app.add_subcommand("correlate", "MGI x condition Fisher grids");
  correlate_cmd->add_option("--data", data, "Dataset directory")->required();
  correlate_cmd->add_option("--out", out, "Write cells.csv here");
  AddAnalysisFlags(correlate_cmd, flags);

  auto* report_cmd = app.add_subcommand("report", "Regenerate the study tables");
  report_cmd->add_option("--data", data, "Dataset directory")->required();
  report_cmd->add_option("--out", out, "Output directory")->required();
  AddAnalysisFlags(report_cmd, flags);

  ServerOptions server;
  std::string store_path = "annotations.log.jsonl";
  std::string subjects_csv;
  auto* serve_cmd = app.add_subcommand("serve", "Start the annotation service");
  serve_cmd->add_option("--images", manifest, "images.csv manifest")->required();
  serve_cmd->add_option("--store", store_path, "Append-only annotation log")
      ->capture_default_str();
  serve_cmd->add_option("--subjects", subjects_csv, "subjects.csv to register ids");
  serve_cmd->add_option("--host", server.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", server.port, "Port")->capture_default_str();
  serve_cmd->add_option("--cors-origin", server.cors_origin, "Allowed origin")
      ->capture_default_str();

  auto* calibrate_cmd =
      app.add_subcommand("calibrate", "Select the Fisher convention from published values");
  calibrate_cmd->add_option("--out", out, "Write the calibration report JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*ingest_cmd) return RunIngest(data, out);
    if (*validate_cmd) return RunValidate(data);
    if (*agg_cmd) return RunAggregate(annotations, out);
    if (*masks_cmd) return RunMasks(manifest, annotations, out, config);
    if (*segment_cmd) return RunSegment(manifest, out, config);
    if (*eval_cmd) return RunSegEval(pred_dir, truth_dir, out, threshold);
    if (*correlate_cmd) return RunCorrelate(data, flags, out);
    if (*report_cmd) return RunReport(data, flags, out);
    if (*serve_cmd) return RunServe(manifest, store_path, subjects_csv, server);
    if (*calibrate_cmd) return RunCalibrate(out);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitValidation;
}
