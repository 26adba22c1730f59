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
#ifndef ORALSCREEN_ANNOTATION_SERVICE_HPP_
#define ORALSCREEN_ANNOTATION_SERVICE_HPP_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "oralscreen/aggregation.hpp"

namespace oralscreen {

// Append-only annotation log. The latest record per (image_id, annotator_id)
// is authoritative. With a path, every append is written as one JSON line and
// flushed before append() returns, and an existing log is replayed on
// construction.
class AnnotationStore {
 public:
  AnnotationStore() = default;
  // Throws IoError if the log cannot be opened and ValidationError for a
  // corrupt line.
  explicit AnnotationStore(const std::filesystem::path& log_path);

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Validates against the 640 x 480 frame, appends, returns the position in
  // the log.
  std::size_t append(const ImageAnnotation& a);

  // Latest record per (image_id, annotator_id), ordered by that key.
  std::vector<ImageAnnotation> snapshot() const;
  std::size_t log_size() const;

 private:
  void index_locked(ImageAnnotation a);

  mutable std::mutex mu_;
  std::vector<ImageAnnotation> log_;
  std::map<std::pair<std::string, std::string>, std::size_t> latest_;
  std::ofstream out_;
};

struct ImageEntry {
  std::string image_id;
  std::string subject_id;
  std::filesystem::path file;  // may not exist; the file endpoint then 404s
};

// images.csv with header image_id,subject_id,file. Relative file paths are
// resolved against the manifest's directory.
std::vector<ImageEntry> load_image_manifest(const std::filesystem::path& path);
void write_image_manifest(const std::filesystem::path& path,
                          const std::vector<ImageEntry>& images);

struct HttpResult {
  int status = 200;
  nlohmann::json body;
};

// Endpoint logic, independent of the HTTP transport.
class AnnotationService {
 public:
  // `subject_ids` adds subjects that have no images yet.
  AnnotationService(std::vector<ImageEntry> images, AnnotationStore& store,
                    const std::vector<std::string>& subject_ids = {});

  // GET /api/images?annotator=
  HttpResult work_queue(const std::string& annotator_id) const;
  // POST /api/annotations. A missing "timestamp" is filled with server time.
  HttpResult submit(const std::string& body);
  // GET /api/consensus/{subject_id}
  HttpResult consensus(const std::string& subject_id) const;
  // GET /api/progress
  HttpResult progress() const;
  // GET /api/images/{id}/file. Empty when the image is unknown.
  std::optional<std::filesystem::path> image_file(const std::string& image_id) const;

  const std::vector<ImageEntry>& images() const { return images_; }

 private:
  std::vector<ImageEntry> images_;
  std::map<std::string, std::size_t> image_index_;
  std::set<std::string> subjects_;
  AnnotationStore& store_;
};

struct ServerOptions {
  std::string host = "0.0.0.0";
  int port = 8350;
  std::string cors_origin = "*";
};

// Blocks serving HTTP until stop_flag is set or the server fails. Returns
// false if binding failed. When `bound_port` is non-null it receives the
// listening port once ready (useful with port 0).
bool run_annotation_server(AnnotationService& service, const ServerOptions& options,
                           std::atomic<bool>* stop_flag = nullptr,
                           std::atomic<int>* bound_port = nullptr);

}  // namespace oralscreen

#endif  // ORALSCREEN_ANNOTATION_SERVICE_HPP_
