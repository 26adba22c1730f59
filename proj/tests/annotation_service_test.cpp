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

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "oralscreen/annotation_json.hpp"
#include "oralscreen/errors.hpp"
#include "oralscreen/mask_io.hpp"

namespace oralscreen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Submission(const std::string& image, const std::string& subject,
                       const std::string& annotator, int mgi) {
  return json{{"image_id", image},
              {"subject_id", subject},
              {"annotator_id", annotator},
              {"mgi", mgi},
              {"marks", json::array({json{{"site", "gingival_margin"},
                                          {"diseased", mgi > 0},
                                          {"points", json::array({json::array({100, 200})})}}})},
              {"timestamp", "2023-03-01T08:00:00Z"}}
      .dump();
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oralscreen_service_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    images_ = {{"I1", "S1", dir_ / "I1.png"},
               {"I2", "S1", dir_ / "I2.png"},
               {"I3", "S1", dir_ / "I3.png"},
               {"I4", "S2", dir_ / "I4.png"},
               {"I5", "S2", dir_ / "I5.png"}};
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  std::vector<ImageEntry> images_;
};

TEST_F(ServiceTest, WorkQueue) {
  AnnotationStore store;
  AnnotationService svc(images_, store);
  const HttpResult fresh = svc.work_queue("A1");
  EXPECT_EQ(fresh.status, 200);
  ASSERT_EQ(fresh.body["images"].size(), 5u);
  for (const json& e : fresh.body["images"]) EXPECT_FALSE(e["complete"].get<bool>());
  EXPECT_EQ(svc.work_queue("").status, 400);

  EXPECT_EQ(svc.submit(Submission("I2", "S1", "A1", 3)).status, 201);
  const HttpResult after = svc.work_queue("A1");
  for (const json& e : after.body["images"]) {
    EXPECT_EQ(e["complete"].get<bool>(), e["image_id"] == "I2");
  }
  for (const json& e : svc.work_queue("newcomer").body["images"]) {
    EXPECT_FALSE(e["complete"].get<bool>());
  }
}

TEST_F(ServiceTest, SubmitValidation) {
  AnnotationStore store;
  AnnotationService svc(images_, store);
  const HttpResult ok = svc.submit(Submission("I1", "S1", "A1", 3));
  EXPECT_EQ(ok.status, 201);
  EXPECT_EQ(ok.body["mgi"], 3);
  EXPECT_EQ(svc.submit(Submission("I1", "S1", "A1", 7)).status, 422);
  EXPECT_EQ(svc.submit("{oops").status, 422);
  EXPECT_EQ(svc.submit(Submission("I9", "S1", "A1", 1)).status, 422);
  EXPECT_EQ(svc.submit(Submission("I1", "S2", "A1", 1)).status, 422);
  json out_of_frame = json::parse(Submission("I1", "S1", "A2", 2));
  out_of_frame["marks"][0]["points"][0] = json::array({640, 10});
  EXPECT_EQ(svc.submit(out_of_frame.dump()).status, 422);
  json extra = json::parse(Submission("I1", "S1", "A2", 2));
  extra["surprise"] = true;
  EXPECT_EQ(svc.submit(extra.dump()).status, 422);
  EXPECT_EQ(store.log_size(), 1u);

  json untimed = json::parse(Submission("I1", "S1", "A3", 2));
  untimed.erase("timestamp");
  const HttpResult filled = svc.submit(untimed.dump());
  EXPECT_EQ(filled.status, 201);
  EXPECT_NO_THROW(parse_timestamp(filled.body["timestamp"].get<std::string>()));
}

TEST_F(ServiceTest, LastWriteWins) {
  AnnotationStore store;
  AnnotationService svc(images_, store);
  ASSERT_EQ(svc.submit(Submission("I4", "S2", "A1", 2)).status, 201);
  ASSERT_EQ(svc.submit(Submission("I4", "S2", "A1", 4)).status, 201);
  const HttpResult c = svc.consensus("S2");
  EXPECT_EQ(c.status, 200);
  EXPECT_EQ(c.body["mgi"]["label"], 4);
  EXPECT_EQ(store.log_size(), 2u);
  EXPECT_EQ(store.snapshot().size(), 1u);
}

TEST_F(ServiceTest, ConsensusRules) {
  AnnotationStore store;
  AnnotationService svc(images_, store, {"S1", "S2", "S3"});
  for (auto [img, mgi] : {std::pair{"I1", 2}, {"I2", 2}, {"I3", 3}}) {
    ASSERT_EQ(svc.submit(Submission(img, "S1", "A1", mgi)).status, 201);
  }
  EXPECT_EQ(svc.consensus("S1").body["mgi"]["label"], 2);
  ASSERT_EQ(svc.submit(Submission("I4", "S2", "A1", 2)).status, 201);
  ASSERT_EQ(svc.submit(Submission("I5", "S2", "A1", 3)).status, 201);
  const HttpResult tied = svc.consensus("S2");
  EXPECT_EQ(tied.body["mgi"]["label"], 3);
  EXPECT_TRUE(tied.body["mgi"]["tied"].get<bool>());
  EXPECT_EQ(svc.consensus("nobody").status, 404);
  const HttpResult empty = svc.consensus("S3");
  EXPECT_EQ(empty.status, 200);
  EXPECT_TRUE(empty.body["mgi"].is_null());
}

TEST_F(ServiceTest, ConditionMajority) {
  AnnotationStore store;
  AnnotationService svc(images_, store);
  for (auto [annotator, noted] :
       {std::pair{"A1", true}, {"A2", true}, {"A3", false}}) {
    json j = json::parse(Submission("I1", "S1", annotator, 1));
    j["conditions"] = {{"retinal", noted}};
    ASSERT_EQ(svc.submit(j.dump()).status, 201);
  }
  const json cond = svc.consensus("S1").body["conditions"]["retinal"];
  EXPECT_TRUE(cond["label"].get<bool>());
  EXPECT_EQ(cond["n_agree"], 2);
  EXPECT_EQ(cond["n_annotators"], 3);
}

TEST_F(ServiceTest, ConsensusEqualsOfflineAggregation) {
  AnnotationStore store;
  AnnotationService svc(images_, store);
  const int votes[5][3] = {{2, 3, 3}, {1, 4, 4}, {0, 0, 5}, {2, 3, 2}, {5, 1, 3}};
  for (int i = 0; i < 5; ++i) {
    for (int a = 0; a < 3; ++a) {
      const ImageEntry& e = images_[static_cast<std::size_t>(i)];
      ASSERT_EQ(svc.submit(Submission(e.image_id, e.subject_id, "A" + std::to_string(a),
                                      votes[i][a]))
                    .status,
                201);
    }
  }
  const SubjectMgiTable offline = subject_mgi_table(store.snapshot());
  for (const auto& [subject, mgi] : offline.mgi) {
    EXPECT_EQ(svc.consensus(subject).body["mgi"]["label"], mgi.value()) << subject;
  }
}

TEST_F(ServiceTest, ProgressFractions) {
  AnnotationStore store;
  AnnotationService svc(images_, store);
  svc.submit(Submission("I1", "S1", "A1", 1));
  svc.submit(Submission("I2", "S1", "A1", 1));
  svc.submit(Submission("I1", "S1", "A2", 1));
  svc.submit(Submission("I1", "S1", "A2", 2));
  const json p = svc.progress().body;
  EXPECT_EQ(p["images_total"], 5);
  ASSERT_EQ(p["annotators"].size(), 2u);
  EXPECT_DOUBLE_EQ(p["annotators"][0]["fraction"].get<double>(), 0.4);
  EXPECT_DOUBLE_EQ(p["annotators"][1]["fraction"].get<double>(), 0.2);
}

TEST_F(ServiceTest, ReplayReproducesConsensus) {
  const fs::path log = dir_ / "store.jsonl";
  std::vector<json> before;
  {
    AnnotationStore store(log);
    AnnotationService svc(images_, store);
    svc.submit(Submission("I1", "S1", "A1", 2));
    svc.submit(Submission("I2", "S1", "A1", 3));
    svc.submit(Submission("I2", "S1", "A1", 1));
    svc.submit(Submission("I4", "S2", "A2", 5));
    before = {svc.consensus("S1").body, svc.consensus("S2").body};
  }
  AnnotationStore replayed(log);
  EXPECT_EQ(replayed.log_size(), 4u);
  AnnotationService svc(images_, replayed);
  EXPECT_EQ(svc.consensus("S1").body, before[0]);
  EXPECT_EQ(svc.consensus("S2").body, before[1]);

  std::ofstream(log, std::ios::app) << "{broken\n";
  EXPECT_THROW(AnnotationStore{log}, ValidationError);
  EXPECT_THROW(AnnotationStore{dir_ / "missing" / "dir" / "log.jsonl"}, IoError);
}

TEST_F(ServiceTest, ConcurrentSubmissions) {
  std::vector<ImageEntry> many;
  for (int i = 0; i < 64; ++i) {
    many.push_back({"I" + std::to_string(i), "S" + std::to_string(i % 8), {}});
  }
  const fs::path log = dir_ / "store.jsonl";
  {
    AnnotationStore store(log);
    AnnotationService svc(many, store);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&svc, t] {
        for (int i = 0; i < 64; ++i) {
          const std::string img = "I" + std::to_string(i);
          const std::string subj = "S" + std::to_string(i % 8);
          // Each annotator writes twice; the second write must win.
          svc.submit(Submission(img, subj, "A" + std::to_string(t), 1));
          svc.submit(Submission(img, subj, "A" + std::to_string(t), (i + t) % 6));
        }
      });
    }
    for (std::thread& th : threads) th.join();
    EXPECT_EQ(store.log_size(), 8u * 64u * 2u);
    const std::vector<ImageAnnotation> snap = store.snapshot();
    ASSERT_EQ(snap.size(), 8u * 64u);
    for (const ImageAnnotation& a : snap) {
      const int i = std::stoi(a.image_id.substr(1));
      const int t = std::stoi(a.annotator_id.substr(1));
      EXPECT_EQ(a.mgi.value(), (i + t) % 6);
    }
  }
  AnnotationStore replayed(log);
  EXPECT_EQ(replayed.snapshot().size(), 8u * 64u);
}

TEST_F(ServiceTest, ManifestRoundTrip) {
  write_image_manifest(dir_ / "images.csv", images_);
  const std::vector<ImageEntry> back = load_image_manifest(dir_ / "images.csv");
  ASSERT_EQ(back.size(), images_.size());
  EXPECT_EQ(back[3].image_id, "I4");
  EXPECT_EQ(back[3].subject_id, "S2");
  EXPECT_EQ(fs::weakly_canonical(back[3].file), fs::weakly_canonical(images_[3].file));
  std::ofstream(dir_ / "bad.csv") << "id,subject\nI1,S1\n";
  EXPECT_THROW(load_image_manifest(dir_ / "bad.csv"), ValidationError);
  EXPECT_THROW(load_image_manifest(dir_ / "none.csv"), IoError);
  std::vector<ImageEntry> dup = {images_[0], images_[0]};
  AnnotationStore store;
  EXPECT_THROW(AnnotationService(dup, store), ValidationError);
}

TEST_F(ServiceTest, HttpEndToEnd) {
  write_image_png(images_[0].file, RgbImage(4, 3, Rgb{200, 50, 40}));
  AnnotationStore store(dir_ / "store.jsonl");
  AnnotationService svc(images_, store);
  std::atomic<bool> stop{false};
  std::atomic<int> port{0};
  ServerOptions opts;
  opts.host = "127.0.0.1";
  opts.port = 0;
  opts.cors_origin = "http://portal.example";
  bool served = false;
  std::thread server([&] { served = run_annotation_server(svc, opts, &stop, &port); });
  for (int i = 0; i < 500 && port.load() == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_NE(port.load(), 0);

  httplib::Client client("127.0.0.1", port.load());
  client.set_connection_timeout(5);
  auto queue = client.Get("/api/images?annotator=A1");
  ASSERT_TRUE(queue);
  EXPECT_EQ(queue->status, 200);
  EXPECT_EQ(json::parse(queue->body)["images"].size(), 5u);
  EXPECT_EQ(queue->get_header_value("Access-Control-Allow-Origin"), "http://portal.example");
  EXPECT_EQ(client.Get("/api/images")->status, 400);

  auto posted = client.Post("/api/annotations", Submission("I1", "S1", "A1", 2),
                            "application/json");
  ASSERT_TRUE(posted);
  EXPECT_EQ(posted->status, 201);
  EXPECT_EQ(client.Post("/api/annotations", Submission("I2", "S1", "A1", 3),
                        "application/json")
                ->status,
            201);
  EXPECT_EQ(client.Post("/api/annotations", Submission("I2", "S1", "A1", 7),
                        "application/json")
                ->status,
            422);
  auto consensus = client.Get("/api/consensus/S1");
  ASSERT_TRUE(consensus);
  EXPECT_EQ(json::parse(consensus->body)["mgi"]["label"], 3);
  EXPECT_EQ(client.Get("/api/consensus/S404")->status, 404);
  auto progress = client.Get("/api/progress");
  EXPECT_DOUBLE_EQ(json::parse(progress->body)["annotators"][0]["fraction"].get<double>(),
                   0.4);

  auto file = client.Get("/api/images/I1/file");
  ASSERT_TRUE(file);
  EXPECT_EQ(file->status, 200);
  EXPECT_EQ(file->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(file->body.substr(1, 3), "PNG");
  EXPECT_EQ(client.Get("/api/images/I2/file")->status, 404);
  EXPECT_EQ(client.Get("/api/images/nope/file")->status, 404);

  auto preflight = client.Options("/api/annotations");
  ASSERT_TRUE(preflight);
  EXPECT_LT(preflight->status, 300);
  EXPECT_NE(preflight->get_header_value("Access-Control-Allow-Methods").find("POST"),
            std::string::npos);

  stop = true;
  server.join();
  EXPECT_TRUE(served);
}

}  // namespace
}  // namespace oralscreen
