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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detfuse/ingestion.hpp"
#include "detfuse/integrate.hpp"
#include "detfuse/types.hpp"

namespace detfuse {

// Five-way per-crop classifier output: healthy or one of the diseases.
enum class CropLabel : std::uint8_t {
  kNormal,
  kCaries,
  kDeepCaries,
  kImpacted,
  kPeriapicalLesion,
};

std::string_view crop_label_name(CropLabel label);
std::optional<CropLabel> crop_label_from_name(std::string_view name);
std::optional<Disease> to_disease(CropLabel label);
CropLabel to_crop_label(std::optional<Disease> disease);

struct CropAssignment {
  std::size_t crop_id = 0;
  ImageId image_id = 0;
  BoundingBox crop_box;    // padded and clamped
  BoundingBox source_box;  // the enumeration box itself
  int quadrant = 1;
  int tooth = 1;
  double enum_score = 0.0;

  friend bool operator==(const CropAssignment&, const CropAssignment&) = default;
};

struct CropClassification {
  std::size_t crop_id = 0;
  CropLabel label = CropLabel::kNormal;
  double confidence = 0.0;

  friend bool operator==(const CropClassification&,
                         const CropClassification&) = default;
};

struct BalancePlan {
  std::map<Disease, std::size_t> counts;
  std::map<Disease, int> multipliers;

  std::size_t planned(Disease d) const;
};

struct MergeConfig {
  double overlap_iou = 0.5;
  double min_confidence = 0.5;
};

void validate(const MergeConfig& cfg);

// One crop per enumeration detection, in input order. The box grows by
// pad_fraction of its width (height) on each side and is clamped to the
// image. Throws kMissingImage for detections on unknown images.
std::vector<CropAssignment> assign_crops(const DetectionSet& enums,
                                         std::span<const AnnotatedImage> images,
                                         double pad_fraction);

BalancePlan audit_balance(const AnnotatedDataset& ds);
BalancePlan audit_balance(std::span<const CropClassification> cls);

// Periapical lesion and deep caries doubled, everything else unchanged.
std::map<Disease, int> default_boost();
BalancePlan oversample_plan(const std::map<Disease, std::size_t>& counts,
                            const std::map<Disease, int>& boost = default_boost());

// Non-normal classifications at or above min_confidence become detections on
// the unpadded tooth box with score enum_score * confidence. A crop
// classified more than once keeps its most confident entry.
DetectionSet classifications_to_detections(std::span<const CropAssignment> crops,
                                           std::span<const CropClassification> cls,
                                           double min_confidence);

// Appends each complementary detection that has no same-image integrated
// detection with the same disease and iou >= overlap_iou.
std::vector<IntegratedDetection> merge_complementary(
    std::span<const IntegratedDetection> integrated, const DetectionSet& comp,
    const MergeConfig& cfg);

std::string serialize_crops(std::span<const CropAssignment> crops);
std::vector<CropAssignment> parse_crops_text(const std::string& text);

std::vector<CropClassification> parse_classifications_text(const std::string& text);
std::vector<CropClassification> parse_classifications(const std::filesystem::path& path);
std::string serialize_classifications(std::span<const CropClassification> cls);

}  // namespace detfuse
