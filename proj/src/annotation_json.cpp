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
#include "oralscreen/annotation_json.hpp"

#include <chrono>
#include <cstdio>
#include <set>

#include "oralscreen/core_model.hpp"
#include "oralscreen/errors.hpp"

namespace oralscreen {
namespace {

using nlohmann::json;

const json& Require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ValidationError(std::string("annotation: missing field '") + key + "'");
  }
  return *it;
}

std::string RequireString(const json& j, const char* key) {
  const json& v = Require(j, key);
  if (!v.is_string()) {
    throw ValidationError(std::string("annotation: '") + key +
                          "' must be a string");
  }
  return v.get<std::string>();
}

int ToInt(const json& v, const std::string& what) {
  if (!v.is_number_integer()) {
    throw ValidationError("annotation: " + what + " must be an integer");
  }
  const auto n = v.get<std::int64_t>();
  if (n < -1000000 || n > 1000000) {
    throw ValidationError("annotation: " + what + " out of range");
  }
  return static_cast<int>(n);
}

void RejectUnknownKeys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ValidationError(where + ": unknown field '" + key + "'");
    }
  }
}

}  // namespace

std::string format_timestamp(Timestamp t) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{t - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view s) {
  int y = 0;
  unsigned mo = 0;
  unsigned d = 0;
  int h = 0;
  int mi = 0;
  int sec = 0;
  char z = 0;
  int consumed = 0;
  const std::string text(s);
  if (text.size() != 20 ||
      std::sscanf(text.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d%c%n", &y, &mo, &d, &h,
                  &mi, &sec, &z, &consumed) != 7 ||
      consumed != 20 || z != 'Z') {
    throw ValidationError("timestamp '" + text +
                          "' is not of the form YYYY-MM-DDTHH:MM:SSZ");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59 || h < 0 || mi < 0 || sec < 0) {
    throw ValidationError("timestamp '" + text + "' is not a valid UTC time");
  }
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} +
         std::chrono::minutes{mi} + std::chrono::seconds{sec};
}

json annotation_to_json(const ImageAnnotation& a) {
  json marks = json::array();
  for (const SiteMark& m : a.marks) {
    json points = json::array();
    for (const PixelPoint& p : m.points) points.push_back({p.x, p.y});
    marks.push_back({{"site", std::string(to_string(m.site))},
                     {"diseased", m.diseased},
                     {"points", std::move(points)}});
  }
  json j = {{"image_id", a.image_id},
            {"subject_id", a.subject_id},
            {"annotator_id", a.annotator_id},
            {"mgi", a.mgi.value()},
            {"timestamp", format_timestamp(a.timestamp)},
            {"marks", std::move(marks)}};
  if (!a.conditions.empty()) j["conditions"] = a.conditions;
  return j;
}

ImageAnnotation annotation_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("annotation must be a JSON object");
  RejectUnknownKeys(j,
                    {"image_id", "subject_id", "annotator_id", "mgi",
                     "timestamp", "marks", "conditions"},
                    "annotation");
  ImageAnnotation a;
  a.image_id = RequireString(j, "image_id");
  a.subject_id = RequireString(j, "subject_id");
  a.annotator_id = RequireString(j, "annotator_id");
  a.mgi = MgiScore(ToInt(Require(j, "mgi"), "mgi"));
  a.timestamp = parse_timestamp(RequireString(j, "timestamp"));

  const json& marks = Require(j, "marks");
  if (!marks.is_array()) throw ValidationError("annotation: 'marks' must be an array");
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const json& m = marks[i];
    const std::string where = "marks[" + std::to_string(i) + "]";
    if (!m.is_object()) throw ValidationError("annotation: " + where + " must be an object");
    RejectUnknownKeys(m, {"site", "diseased", "points"}, "annotation " + where);
    SiteMark mark;
    mark.site = parse_site(RequireString(m, "site"));
    const json& diseased = Require(m, "diseased");
    if (!diseased.is_boolean()) {
      throw ValidationError("annotation: " + where + ".diseased must be a boolean");
    }
    mark.diseased = diseased.get<bool>();
    const json& points = Require(m, "points");
    if (!points.is_array()) {
      throw ValidationError("annotation: " + where + ".points must be an array");
    }
    for (const json& p : points) {
      if (!p.is_array() || p.size() != 2) {
        throw ValidationError("annotation: " + where +
                              ".points entries must be [x, y] pairs");
      }
      mark.points.push_back({ToInt(p[0], where + " x"), ToInt(p[1], where + " y")});
    }
    a.marks.push_back(std::move(mark));
  }

  if (auto it = j.find("conditions"); it != j.end()) {
    if (!it->is_object()) {
      throw ValidationError("annotation: 'conditions' must be an object");
    }
    for (const auto& [name, vote] : it->items()) {
      if (!condition_from_name(name)) {
        throw ValidationError("annotation: unknown condition '" + name + "'");
      }
      if (!vote.is_boolean()) {
        throw ValidationError("annotation: condition '" + name +
                              "' must be a boolean");
      }
      a.conditions[name] = vote.get<bool>();
    }
  }
  return a;
}

}  // namespace oralscreen
