// Copyright 2026 The mqmkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON mapping of the domain types. Scores are rounded to four decimals on
// the way out.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mqmkit/error.hpp"
#include "mqmkit/mqm.hpp"
#include "mqmkit/text.hpp"

namespace mqmkit {

using Json = nlohmann::ordered_json;

inline Json optional_number(const std::optional<double>& v) {
  return v ? Json(text::round4(*v)) : Json(nullptr);
}

inline Json to_json(const ErrorAnnotation& a) {
  Json j;
  j["span"] = a.span_text;
  j["start"] = a.char_start ? Json(*a.char_start) : Json(nullptr);
  j["end"] = a.char_end ? Json(*a.char_end) : Json(nullptr);
  j["side"] = a.side == TextSide::kSource ? "source" : "candidate";
  j["severity"] = std::string(to_string(a.severity));
  if (a.category) {
    j["category"] = a.category->recognized ? a.category->canonical() : a.category->raw;
    j["category_recognized"] = a.category->recognized;
  } else {
    j["category"] = nullptr;
  }
  return j;
}

namespace detail {

inline std::string string_field(const Json& j, const char* name) {
  if (!j.contains(name) || !j.at(name).is_string()) {
    throw DataError(std::string("missing string field '") + name + "'");
  }
  return j.at(name).get<std::string>();
}

inline std::optional<std::string> optional_string_field(const Json& j, const char* name) {
  if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
  if (!j.at(name).is_string()) {
    throw DataError(std::string("field '") + name + "' must be a string");
  }
  return j.at(name).get<std::string>();
}

inline std::optional<double> optional_number_field(const Json& j, const char* name) {
  if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
  if (!j.at(name).is_number()) {
    throw DataError(std::string("field '") + name + "' must be a number");
  }
  return j.at(name).get<double>();
}

}  // namespace detail

inline ErrorAnnotation annotation_from_json(const Json& j) {
  ErrorAnnotation a;
  a.span_text = detail::string_field(j, "span");
  auto sev = parse_severity(detail::string_field(j, "severity"));
  if (!sev) throw DataError("unknown severity '" + j.at("severity").get<std::string>() + "'");
  a.severity = *sev;
  if (j.contains("start") && !j.at("start").is_null()) a.char_start = j.at("start").get<std::size_t>();
  if (j.contains("end") && !j.at("end").is_null()) a.char_end = j.at("end").get<std::size_t>();
  auto side = detail::optional_string_field(j, "side");
  a.side = (side && *side == "source") ? TextSide::kSource : TextSide::kCandidate;
  if (auto cat = detail::optional_string_field(j, "category")) {
    a.category = ErrorCategory::parse(*cat);
  }
  return a;
}

inline Json to_json(const Segment& s) {
  Json j;
  j["lp"] = s.lp;
  j["system_id"] = s.system_id;
  j["doc_id"] = s.doc_id;
  j["seg_id"] = s.seg_id;
  j["source"] = s.source;
  j["candidate"] = s.candidate;
  if (s.reference) j["reference"] = *s.reference;
  return j;
}

inline Segment segment_from_json(const Json& j) {
  Segment s;
  s.lp = detail::string_field(j, "lp");
  s.system_id = detail::string_field(j, "system_id");
  s.doc_id = detail::optional_string_field(j, "doc_id").value_or("");
  s.seg_id = j.contains("seg_id") && j.at("seg_id").is_number_integer()
                 ? std::to_string(j.at("seg_id").get<long long>())
                 : detail::string_field(j, "seg_id");
  s.source = detail::string_field(j, "source");
  s.candidate = detail::string_field(j, "candidate");
  s.reference = detail::optional_string_field(j, "reference");
  validate_segment(s);
  return s;
}

inline Json to_json(const SegmentAssessment& a) {
  Json j;
  j["lp"] = a.key.lp;
  j["system_id"] = a.key.system_id;
  j["seg_id"] = a.key.seg_id;
  j["rater"] = a.rater_id;
  Json anns = Json::array();
  for (const auto& ann : a.annotations) anns.push_back(to_json(ann));
  j["annotations"] = std::move(anns);
  j["raw_score"] = optional_number(a.raw_score);
  j["derived_score"] = optional_number(a.derived_score);
  j["warnings"] = a.warnings;
  return j;
}

inline SegmentAssessment assessment_from_json(const Json& j) {
  SegmentAssessment a;
  a.key.lp = detail::string_field(j, "lp");
  a.key.system_id = detail::string_field(j, "system_id");
  a.key.seg_id = detail::string_field(j, "seg_id");
  a.rater_id = detail::optional_string_field(j, "rater").value_or("");
  if (j.contains("annotations")) {
    for (const auto& ann : j.at("annotations")) {
      a.annotations.push_back(annotation_from_json(ann));
    }
  }
  a.raw_score = detail::optional_number_field(j, "raw_score");
  a.derived_score = detail::optional_number_field(j, "derived_score");
  if (j.contains("warnings") && j.at("warnings").is_array()) {
    for (const auto& w : j.at("warnings")) a.warnings.push_back(w.get<std::string>());
  }
  return a;
}

}  // namespace mqmkit
