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
#include "oralscreen/annotation_service.hpp"

#include <chrono>
#include <sstream>

#include "oralscreen/annotation_json.hpp"
#include "oralscreen/core_model.hpp"
#include "oralscreen/errors.hpp"

namespace oralscreen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json ErrorBody(const std::string& message) { return {{"error", message}}; }

json MgiJson(const MgiConsensus& c) {
  return {{"label", c.label.value()},
          {"n_annotators", c.n_annotators},
          {"n_agree", c.n_agree},
          {"tied", c.tied}};
}

std::vector<std::string> SplitSimple(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

AnnotationStore::AnnotationStore(const fs::path& log_path) {
  if (fs::exists(log_path)) {
    std::ifstream in(log_path);
    if (!in) throw IoError("cannot open " + log_path.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        ImageAnnotation a = annotation_from_json(json::parse(line));
        validate(a);
        index_locked(std::move(a));
      } catch (const std::exception& e) {
        throw ValidationError(log_path.filename().string() + ":" +
                              std::to_string(n) + ": " + e.what());
      }
    }
  }
  out_.open(log_path, std::ios::app);
  if (!out_) throw IoError("cannot open " + log_path.string() + " for appending");
}

void AnnotationStore::index_locked(ImageAnnotation a) {
  latest_[{a.image_id, a.annotator_id}] = log_.size();
  log_.push_back(std::move(a));
}

std::size_t AnnotationStore::append(const ImageAnnotation& a) {
  validate(a);
  const std::string line = annotation_to_json(a).dump();
  std::lock_guard<std::mutex> lock(mu_);
  if (out_.is_open()) {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw IoError("annotation log write failed");
  }
  const std::size_t pos = log_.size();
  index_locked(a);
  return pos;
}

std::vector<ImageAnnotation> AnnotationStore::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<ImageAnnotation> out;
  out.reserve(latest_.size());
  for (const auto& [key, pos] : latest_) out.push_back(log_[pos]);
  return out;
}

std::size_t AnnotationStore::log_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_.size();
}

std::vector<ImageEntry> load_image_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t n = 0;
  std::vector<ImageEntry> out;
  const std::string file = path.filename().string();
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (line != "image_id,subject_id,file") {
        throw ValidationError(file + ":1: header must be image_id,subject_id,file");
      }
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitSimple(line);
    if (f.size() != 3 || f[0].empty() || f[1].empty()) {
      throw ValidationError(file + ":" + std::to_string(n) +
                            ": expected image_id,subject_id,file");
    }
    fs::path p = f[2];
    if (!f[2].empty() && p.is_relative()) p = path.parent_path() / p;
    out.push_back({f[0], f[1], p});
  }
  if (n == 0) throw ValidationError(file + ": empty manifest");
  return out;
}

void write_image_manifest(const fs::path& path,
                          const std::vector<ImageEntry>& images) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "image_id,subject_id,file\n";
  for (const ImageEntry& e : images) {
    out << e.image_id << ',' << e.subject_id << ',' << e.file.generic_string()
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

AnnotationService::AnnotationService(std::vector<ImageEntry> images,
                                     AnnotationStore& store,
                                     const std::vector<std::string>& subject_ids)
    : images_(std::move(images)), store_(store) {
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (!image_index_.emplace(images_[i].image_id, i).second) {
      throw ValidationError("duplicate image id '" + images_[i].image_id + "'");
    }
    subjects_.insert(images_[i].subject_id);
  }
  subjects_.insert(subject_ids.begin(), subject_ids.end());
}

HttpResult AnnotationService::work_queue(const std::string& annotator_id) const {
  if (annotator_id.empty()) {
    return {400, ErrorBody("query parameter 'annotator' is required")};
  }
  std::set<std::string> done;
  for (const ImageAnnotation& a : store_.snapshot()) {
    if (a.annotator_id == annotator_id) done.insert(a.image_id);
  }
  json items = json::array();
  for (const ImageEntry& e : images_) {
    items.push_back({{"image_id", e.image_id},
                     {"subject_id", e.subject_id},
                     {"complete", done.count(e.image_id) > 0}});
  }
  return {200, {{"annotator", annotator_id}, {"images", std::move(items)}}};
}

HttpResult AnnotationService::submit(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    return {422, ErrorBody(std::string("malformed JSON: ") + e.what())};
  }
  if (j.is_object() && !j.contains("timestamp")) {
    j["timestamp"] = format_timestamp(
        std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
  }
  ImageAnnotation a;
  try {
    a = annotation_from_json(j);
    validate(a);
  } catch (const ValidationError& e) {
    return {422, ErrorBody(e.what())};
  }
  const auto it = image_index_.find(a.image_id);
  if (it == image_index_.end()) {
    return {422, ErrorBody("unknown image '" + a.image_id + "'")};
  }
  if (images_[it->second].subject_id != a.subject_id) {
    return {422, ErrorBody("image '" + a.image_id + "' belongs to subject '" +
                           images_[it->second].subject_id + "'")};
  }
  store_.append(a);
  return {201, annotation_to_json(a)};
}

HttpResult AnnotationService::consensus(const std::string& subject_id) const {
  if (!subjects_.count(subject_id)) {
    return {404, ErrorBody("unknown subject '" + subject_id + "'")};
  }
  std::vector<ImageAnnotation> mine;
  for (ImageAnnotation& a : store_.snapshot()) {
    if (a.subject_id == subject_id) mine.push_back(std::move(a));
  }
  json body = {{"subject_id", subject_id}};
  if (mine.empty()) {
    body["mgi"] = nullptr;
    body["images"] = json::array();
    body["conditions"] = json::object();
    return {200, std::move(body)};
  }

  json images = json::array();
  std::vector<MgiScore> labels;
  for (const ImageConsensus& ic : image_consensus(mine)) {
    images.push_back({{"image_id", ic.image_id}, {"mgi", MgiJson(ic.mgi)}});
    labels.push_back(ic.mgi.label);
  }
  body["mgi"] = MgiJson(consensus_mgi(labels));
  body["images"] = std::move(images);

  std::map<std::string, std::vector<bool>> votes;
  for (const ImageAnnotation& a : mine) {
    for (const auto& [name, v] : a.conditions) votes[name].push_back(v);
  }
  json conditions = json::object();
  for (const auto& [name, v] : votes) {
    const BoolConsensus c = consensus_condition(v);
    conditions[name] = {{"label", c.label},
                        {"n_annotators", c.n_annotators},
                        {"n_agree", c.n_agree}};
  }
  body["conditions"] = std::move(conditions);
  return {200, std::move(body)};
}

HttpResult AnnotationService::progress() const {
  std::map<std::string, std::set<std::string>> done;
  for (const ImageAnnotation& a : store_.snapshot()) {
    if (image_index_.count(a.image_id)) done[a.annotator_id].insert(a.image_id);
  }
  json annotators = json::array();
  const double total = static_cast<double>(images_.size());
  for (const auto& [id, set] : done) {
    annotators.push_back(
        {{"annotator_id", id},
         {"completed", set.size()},
         {"fraction", total > 0 ? static_cast<double>(set.size()) / total : 0.0}});
  }
  return {200, {{"images_total", images_.size()}, {"annotators", std::move(annotators)}}};
}

std::optional<fs::path> AnnotationService::image_file(
    const std::string& image_id) const {
  const auto it = image_index_.find(image_id);
  if (it == image_index_.end()) return std::nullopt;
  return images_[it->second].file;
}

}  // namespace oralscreen
