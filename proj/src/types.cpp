// Copyright 2026 The detfuse Authors.
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

#include "detfuse/types.hpp"

#include <cmath>

#include "detfuse/error.hpp"

namespace detfuse {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kInvalidCategory: return "InvalidCategory";
    case ErrorCode::kInvalidScore: return "InvalidScore";
    case ErrorCode::kInvalidBox: return "InvalidBox";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kUniverseMismatch: return "UniverseMismatch";
    case ErrorCode::kMissingImage: return "MissingImage";
    case ErrorCode::kDanglingCrop: return "DanglingCrop";
    case ErrorCode::kAxisUnavailable: return "AxisUnavailable";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

std::string_view disease_name(Disease d) {
  switch (d) {
    case Disease::kCaries: return "caries";
    case Disease::kDeepCaries: return "deep-caries";
    case Disease::kImpacted: return "impacted";
    case Disease::kPeriapicalLesion: return "periapical-lesion";
  }
  return "unknown";
}

std::optional<Disease> disease_from_name(std::string_view name) {
  for (Disease d : kAllDiseases) {
    if (disease_name(d) == name) return d;
  }
  return std::nullopt;
}

std::optional<Disease> disease_from_index(std::int64_t index) {
  if (index < 0 || index >= static_cast<std::int64_t>(kAllDiseases.size())) {
    return std::nullopt;
  }
  return static_cast<Disease>(index);
}

std::string_view source_name(Source s) {
  switch (s) {
    case Source::kEnumerationModel: return "enumeration-model";
    case Source::kDiagnosisA: return "diagnosis-A";
    case Source::kDiagnosisB: return "diagnosis-B";
    case Source::kComplementary: return "complementary";
    case Source::kFused: return "fused";
  }
  return "unknown";
}

std::optional<Source> source_from_name(std::string_view name) {
  for (Source s : {Source::kEnumerationModel, Source::kDiagnosisA,
                   Source::kDiagnosisB, Source::kComplementary, Source::kFused}) {
    if (source_name(s) == name) return s;
  }
  return std::nullopt;
}

bool is_valid(const CategoryTriple& c) {
  if (!c.quadrant && !c.enumeration && !c.disease) return false;
  if (c.quadrant && (*c.quadrant < 1 || *c.quadrant > kQuadrantCount)) return false;
  if (c.enumeration &&
      (*c.enumeration < 1 || *c.enumeration > kTeethPerQuadrant)) {
    return false;
  }
  if (c.disease && static_cast<int>(*c.disease) >= static_cast<int>(kAllDiseases.size())) {
    return false;
  }
  return true;
}

bool is_valid(const Detection& d) {
  return is_valid(d.box) && std::isfinite(d.score) && d.score >= 0.0 &&
         d.score <= 1.0 && is_valid(d.category);
}

DetectionSet make_detection_set(std::vector<Detection> detections, Source source) {
  DetectionSet set;
  set.source = source;
  for (const Detection& d : detections) set.image_universe.insert(d.image_id);
  set.detections = std::move(detections);
  return set;
}

}  // namespace detfuse
