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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "detfuse/geometry.hpp"

namespace detfuse {

using ImageId = std::int64_t;

// Index order is the DENTEX `category_id_3` order.
enum class Disease : std::uint8_t {
  kCaries = 0,
  kDeepCaries = 1,
  kImpacted = 2,
  kPeriapicalLesion = 3,
};

inline constexpr std::array<Disease, 4> kAllDiseases = {
    Disease::kCaries, Disease::kDeepCaries, Disease::kImpacted,
    Disease::kPeriapicalLesion};

std::string_view disease_name(Disease d);
std::optional<Disease> disease_from_name(std::string_view name);
std::optional<Disease> disease_from_index(std::int64_t index);
inline int disease_index(Disease d) { return static_cast<int>(d); }

enum class Source : std::uint8_t {
  kEnumerationModel,
  kDiagnosisA,
  kDiagnosisB,
  kComplementary,
  kFused,
};

std::string_view source_name(Source s);
std::optional<Source> source_from_name(std::string_view name);

inline constexpr int kQuadrantCount = 4;
inline constexpr int kTeethPerQuadrant = 8;

// One finding's labels. Quadrant and tooth are 1-based (FDI digits).
struct CategoryTriple {
  std::optional<int> quadrant;
  std::optional<int> enumeration;
  std::optional<Disease> disease;

  bool has_tooth() const { return quadrant && enumeration; }
  // Two-digit FDI code (e.g. 36), only when both tooth axes are present.
  std::optional<int> fdi() const {
    if (!has_tooth()) return std::nullopt;
    return *quadrant * 10 + *enumeration;
  }

  friend bool operator==(const CategoryTriple&, const CategoryTriple&) = default;
};

bool is_valid(const CategoryTriple& c);

struct Detection {
  ImageId image_id = 0;
  BoundingBox box;
  double score = 0.0;
  CategoryTriple category;
  Source source = Source::kFused;

  friend bool operator==(const Detection&, const Detection&) = default;
};

bool is_valid(const Detection& d);

struct DetectionSet {
  std::vector<Detection> detections;
  Source source = Source::kFused;
  std::set<ImageId> image_universe;

  std::size_t size() const { return detections.size(); }
  bool empty() const { return detections.empty(); }
};

// Builds a set whose universe is exactly the images its detections touch.
DetectionSet make_detection_set(std::vector<Detection> detections, Source source);

}  // namespace detfuse
