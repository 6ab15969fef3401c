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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "detfuse/types.hpp"

namespace detfuse {

enum class UnmatchedPolicy { kDrop, kKeepWithoutEnumeration };

struct IntegrationConfig {
  double enum_score_gate = 0.7;
  // Unbounded when empty.
  std::optional<double> max_match_distance;
  UnmatchedPolicy unmatched_policy = UnmatchedPolicy::kKeepWithoutEnumeration;
};

void validate(const IntegrationConfig& cfg);

struct IntegratedDetection {
  ImageId image_id = 0;
  BoundingBox box;
  double score = 0.0;
  CategoryTriple category;
  // Index into the enumeration set passed to integrate().
  std::optional<std::size_t> matched_enum;
  Source source = Source::kFused;

  friend bool operator==(const IntegratedDetection&,
                         const IntegratedDetection&) = default;
};

struct CenterMatch {
  std::size_t diag_index = 0;
  std::optional<std::size_t> enum_index;
};

// Keeps detections scoring strictly above `gate`, preserving order.
DetectionSet filter_enumeration(const DetectionSet& enums, double gate);

// Pairs every diagnosis detection with the same-image enumeration detection
// whose center is nearest. Equal distances go to the higher enumeration
// score, then to the lower index. Indices refer to the inputs as given; no
// score gate is applied here.
std::vector<CenterMatch> match_closest_center(const DetectionSet& enums,
                                              const DetectionSet& diags,
                                              const IntegrationConfig& cfg);

// Gates `enums` with cfg.enum_score_gate, matches, and fuses: the diagnosis
// box is kept, quadrant/tooth come from the matched tooth, disease from the
// diagnosis, and the score is the product of the two.
std::vector<IntegratedDetection> integrate(const DetectionSet& enums,
                                           const DetectionSet& diags,
                                           const IntegrationConfig& cfg);

std::vector<Detection> to_detections(std::span<const IntegratedDetection> items);
std::vector<IntegratedDetection> from_detections(std::span<const Detection> dets);

}  // namespace detfuse
