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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detfuse/types.hpp"

namespace detfuse {

struct AnnotatedImage {
  ImageId image_id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;

  friend bool operator==(const AnnotatedImage&, const AnnotatedImage&) = default;
};

struct GroundTruthAnnotation {
  std::int64_t annotation_id = 0;
  ImageId image_id = 0;
  BoundingBox box;
  CategoryTriple category;
  // Serialized `segmentation` JSON, carried opaquely.
  std::optional<std::string> mask_payload;

  friend bool operator==(const GroundTruthAnnotation&,
                         const GroundTruthAnnotation&) = default;
};

// Which category axes appear anywhere in a dataset.
struct LabelSchema {
  bool quadrant = false;
  bool enumeration = false;
  bool disease = false;

  bool is_full_triple() const { return quadrant && enumeration && disease; }
  bool is_enumeration_only() const { return quadrant && enumeration && !disease; }
  std::string name() const;

  friend bool operator==(const LabelSchema&, const LabelSchema&) = default;
};

struct AnnotatedDataset {
  std::vector<AnnotatedImage> images;
  std::vector<GroundTruthAnnotation> annotations;
  LabelSchema label_schema;
  // Non-fatal notices produced while parsing (e.g. clamped boxes).
  std::vector<std::string> warnings;

  const AnnotatedImage* find_image(ImageId id) const;
  std::set<ImageId> image_ids() const;
};

LabelSchema infer_label_schema(std::span<const GroundTruthAnnotation> annotations);

// COCO/DENTEX ground truth. Category fields are either `category_id_1/2/3`
// (0-based quadrant, tooth and disease) or a single `category_id`, read as a
// 0-based 32-class tooth index (quadrant-major).
AnnotatedDataset parse_ground_truth_text(const std::string& text);
AnnotatedDataset parse_ground_truth(const std::filesystem::path& path);

std::string serialize_ground_truth(const AnnotatedDataset& ds);
void write_ground_truth(const AnnotatedDataset& ds, const std::filesystem::path& path);

// COCO results array of {image_id, bbox, score, category fields}.
DetectionSet parse_detections_text(const std::string& text, Source source);
DetectionSet parse_detections(const std::filesystem::path& path, Source source);

// One record per line; absent axes are omitted.
std::string serialize_detections(std::span<const Detection> detections);
void write_detections(std::span<const Detection> detections,
                      const std::filesystem::path& path);

struct SplitSpec {
  std::size_t train_count = 0;
  std::size_t val_count = 0;
  std::size_t test_count = 0;
  std::uint64_t seed = 0;
};

struct IdSplit {
  std::vector<ImageId> train;
  std::vector<ImageId> val;
  std::vector<ImageId> test;
};

struct DatasetSplit {
  AnnotatedDataset train;
  AnnotatedDataset val;
  AnnotatedDataset test;
};

// Seeded shuffle of `ids` (in the given order) followed by slicing.
IdSplit split_ids(std::span<const ImageId> ids, const SplitSpec& spec);
DatasetSplit split_dataset(const AnnotatedDataset& ds, const SplitSpec& spec);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace detfuse
