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
#ifndef ORALSCREEN_ANNOTATION_JSON_HPP_
#define ORALSCREEN_ANNOTATION_JSON_HPP_

#include <string>
#include <string_view>

#include "json.hpp"
#include "oralscreen/aggregation.hpp"

namespace oralscreen {

// "2024-03-01T09:30:00Z". Only UTC with a trailing Z is accepted.
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view s);

// {"image_id", "subject_id", "annotator_id", "mgi", "timestamp",
//  "marks": [{"site", "diseased", "points": [[x, y], ...]}],
//  "conditions": {name: bool}}
// "conditions" is omitted when empty and optional on input.
nlohmann::json annotation_to_json(const ImageAnnotation& a);

// Throws ValidationError naming the offending field. Unknown keys are
// rejected. Point bounds are not checked here; see validate().
ImageAnnotation annotation_from_json(const nlohmann::json& j);

}  // namespace oralscreen

#endif  // ORALSCREEN_ANNOTATION_JSON_HPP_
