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
#include <atomic>
#include <chrono>
#include <fstream>
#include <iterator>
#include <thread>

#include "httplib.h"
#include "oralscreen/annotation_service.hpp"

namespace oralscreen {
namespace {

void Reply(httplib::Response& res, const HttpResult& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

bool run_annotation_server(AnnotationService& service, const ServerOptions& options,
                           std::atomic<bool>* stop_flag,
                           std::atomic<int>* bound_port) {
  httplib::Server server;
  const std::string origin = options.cors_origin;

  server.set_post_routing_handler(
      [origin](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  server.Get("/api/images", [&service](const httplib::Request& req,
                                       httplib::Response& res) {
    Reply(res, service.work_queue(req.get_param_value("annotator")));
  });
  server.Post("/api/annotations", [&service](const httplib::Request& req,
                                             httplib::Response& res) {
    Reply(res, service.submit(req.body));
  });
  server.Get(R"(/api/consensus/([^/]+))", [&service](const httplib::Request& req,
                                                     httplib::Response& res) {
    Reply(res, service.consensus(req.matches[1]));
  });
  server.Get("/api/progress", [&service](const httplib::Request&,
                                         httplib::Response& res) {
    Reply(res, service.progress());
  });
  server.Get(R"(/api/images/([^/]+)/file)", [&service](const httplib::Request& req,
                                                       httplib::Response& res) {
    const auto path = service.image_file(req.matches[1]);
    std::ifstream in;
    if (path) in.open(*path, std::ios::binary);
    if (!in.is_open() || !in) {
      Reply(res, {404, {{"error", "no file for image '" + std::string(req.matches[1]) + "'"}}});
      return;
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    res.set_content(std::move(bytes), "image/png");
  });

  int port = options.port;
  if (port == 0) {
    port = server.bind_to_any_port(options.host);
    if (port < 0) return false;
  } else if (!server.bind_to_port(options.host, port)) {
    return false;
  }
  if (bound_port) bound_port->store(port);

  // stop() only takes effect once the listen loop is running.
  std::atomic<bool> done{false};
  std::thread watcher;
  if (stop_flag) {
    watcher = std::thread([&server, &done, stop_flag] {
      while (!done.load()) {
        if (stop_flag->load() && server.is_running()) {
          server.stop();
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    });
  }
  const bool ok = server.listen_after_bind();
  done.store(true);
  if (watcher.joinable()) watcher.join();
  return ok;
}

}  // namespace oralscreen
