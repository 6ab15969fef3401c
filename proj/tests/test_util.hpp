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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "detfuse/ingestion.hpp"
#include "detfuse/types.hpp"

namespace detfuse::testing {

inline Detection det(ImageId image, BoundingBox box, double score, CategoryTriple cat = {},
                     Source source = Source::kFused) {
  if (!cat.quadrant && !cat.enumeration && !cat.disease) cat.disease = Disease::kCaries;
  return {image, box, score, cat, source};
}

inline CategoryTriple tooth(int q, int t) { return {q, t, std::nullopt}; }
inline CategoryTriple disease(Disease d) { return {std::nullopt, std::nullopt, d}; }

// Box of size w x h centered at (cx, cy).
inline BoundingBox centered(double cx, double cy, double w = 10.0, double h = 10.0) {
  return {cx - w / 2.0, cy - h / 2.0, w, h};
}

inline AnnotatedDataset dataset(std::vector<ImageId> ids, int width = 1000, int height = 1000) {
  AnnotatedDataset ds;
  for (ImageId id : ids) ds.images.push_back({id, width, height, "img" + std::to_string(id)});
  return ds;
}

inline void add_gt(AnnotatedDataset& ds, ImageId image, BoundingBox box, CategoryTriple cat) {
  GroundTruthAnnotation a;
  a.annotation_id = static_cast<std::int64_t>(ds.annotations.size()) + 1;
  a.image_id = image;
  a.box = box;
  a.category = cat;
  ds.annotations.push_back(a);
  ds.label_schema = infer_label_schema(ds.annotations);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("detfuse_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace detfuse::testing
