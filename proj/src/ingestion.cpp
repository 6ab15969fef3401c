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

#include "detfuse/ingestion.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "detfuse/error.hpp"
#include "detfuse/random.hpp"
#include "json_util.hpp"

namespace detfuse {

using detail::Json;

std::string LabelSchema::name() const {
  if (is_full_triple()) return "full-triple";
  if (is_enumeration_only()) return "enumeration-only";
  std::string out;
  auto add = [&](bool on, const char* axis) {
    if (!on) return;
    if (!out.empty()) out += "+";
    out += axis;
  };
  add(quadrant, "quadrant");
  add(enumeration, "enumeration");
  add(disease, "disease");
  return out.empty() ? "empty" : out;
}

const AnnotatedImage* AnnotatedDataset::find_image(ImageId id) const {
  for (const auto& img : images) {
    if (img.image_id == id) return &img;
  }
  return nullptr;
}

std::set<ImageId> AnnotatedDataset::image_ids() const {
  std::set<ImageId> ids;
  for (const auto& img : images) ids.insert(img.image_id);
  return ids;
}

LabelSchema infer_label_schema(std::span<const GroundTruthAnnotation> annotations) {
  LabelSchema s;
  for (const auto& a : annotations) {
    s.quadrant = s.quadrant || a.category.quadrant.has_value();
    s.enumeration = s.enumeration || a.category.enumeration.has_value();
    s.disease = s.disease || a.category.disease.has_value();
  }
  return s;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

AnnotatedDataset parse_ground_truth_text(const std::string& text) {
  const Json root = detail::parse_json(text, "ground truth");
  if (!root.is_object()) {
    throw Error(ErrorCode::kMalformedFile, "ground truth: top level must be an object");
  }
  const Json& images = detail::require(root, "images", "ground truth");
  const Json& annotations = detail::require(root, "annotations", "ground truth");
  if (!images.is_array() || !annotations.is_array()) {
    throw Error(ErrorCode::kMalformedFile, "ground truth: images/annotations must be arrays");
  }

  AnnotatedDataset ds;
  std::map<ImageId, std::size_t> index;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Json& j = images[i];
    const std::string where = "images[" + std::to_string(i) + "]";
    if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, where + ": expected an object");
    AnnotatedImage img;
    img.image_id = detail::as_int(detail::require(j, "id", where), where);
    const std::int64_t w = detail::as_int(detail::require(j, "width", where), where);
    const std::int64_t h = detail::as_int(detail::require(j, "height", where), where);
    if (w <= 0 || h <= 0) {
      throw Error(ErrorCode::kMalformedFile, where + ": width and height must be positive");
    }
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    if (auto it = j.find("file_name"); it != j.end() && it->is_string()) {
      img.file_name = it->get<std::string>();
    }
    if (!index.emplace(img.image_id, ds.images.size()).second) {
      throw Error(ErrorCode::kMalformedFile,
                  where + ": duplicate image id " + std::to_string(img.image_id));
    }
    ds.images.push_back(std::move(img));
  }

  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const Json& j = annotations[i];
    const std::string where = "annotations[" + std::to_string(i) + "]";
    if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, where + ": expected an object");
    GroundTruthAnnotation a;
    a.annotation_id = j.contains("id") ? detail::as_int(j["id"], where)
                                       : static_cast<std::int64_t>(i) + 1;
    a.image_id = detail::as_int(detail::require(j, "image_id", where), where);
    auto img_it = index.find(a.image_id);
    if (img_it == index.end()) {
      throw Error(ErrorCode::kDanglingReference,
                  where + ": image_id " + std::to_string(a.image_id) + " not in images");
    }
    a.box = detail::as_box(detail::require(j, "bbox", where), where);
    a.category = detail::parse_category(j, where);
    if (auto it = j.find("segmentation"); it != j.end() && !it->is_null()) {
      a.mask_payload = it->dump();
    }

    const AnnotatedImage& img = ds.images[img_it->second];
    const BoundingBox clamped = clamp_to_frame(a.box, img.width, img.height);
    if (!(clamped == a.box)) {
      if (!is_valid(clamped)) {
        throw Error(ErrorCode::kInvalidBox, where + ": bbox lies outside its image");
      }
      ds.warnings.push_back(where + ": bbox clamped to image bounds");
      a.box = clamped;
    }
    ds.annotations.push_back(std::move(a));
  }
  ds.label_schema = infer_label_schema(ds.annotations);
  return ds;
}

AnnotatedDataset parse_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth_text(read_text_file(path));
}

std::string serialize_ground_truth(const AnnotatedDataset& ds) {
  Json root = Json::object();
  Json images = Json::array();
  for (const auto& img : ds.images) {
    Json j;
    j["id"] = img.image_id;
    j["width"] = img.width;
    j["height"] = img.height;
    j["file_name"] = img.file_name;
    images.push_back(std::move(j));
  }
  Json anns = Json::array();
  for (const auto& a : ds.annotations) {
    Json j;
    j["id"] = a.annotation_id;
    j["image_id"] = a.image_id;
    j["bbox"] = detail::box_json(a.box);
    j["area"] = a.box.area();
    j["iscrowd"] = 0;
    detail::write_category(j, a.category);
    if (a.mask_payload) j["segmentation"] = Json::parse(*a.mask_payload);
    anns.push_back(std::move(j));
  }
  root["images"] = std::move(images);
  root["annotations"] = std::move(anns);
  return root.dump(1) + "\n";
}

void write_ground_truth(const AnnotatedDataset& ds, const std::filesystem::path& path) {
  write_text_file(path, serialize_ground_truth(ds));
}

DetectionSet parse_detections_text(const std::string& text, Source source) {
  const Json root = detail::parse_json(text, "detections");
  if (!root.is_array()) {
    throw Error(ErrorCode::kMalformedFile, "detections: top level must be an array");
  }
  std::vector<Detection> dets;
  dets.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const Json& j = root[i];
    const std::string where = "detections[" + std::to_string(i) + "]";
    if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, where + ": expected an object");
    Detection d;
    d.image_id = detail::as_int(detail::require(j, "image_id", where), where);
    d.box = detail::as_box(detail::require(j, "bbox", where), where);
    d.score = detail::as_number(detail::require(j, "score", where), where);
    if (!std::isfinite(d.score) || d.score < 0.0 || d.score > 1.0) {
      throw Error(ErrorCode::kInvalidScore, where + ": score must lie in [0,1]");
    }
    d.category = detail::parse_category(j, where);
    d.source = source;
    dets.push_back(d);
  }
  return make_detection_set(std::move(dets), source);
}

DetectionSet parse_detections(const std::filesystem::path& path, Source source) {
  return parse_detections_text(read_text_file(path), source);
}

std::string serialize_detections(std::span<const Detection> detections) {
  std::string out = "[";
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& d = detections[i];
    Json j;
    j["image_id"] = d.image_id;
    j["bbox"] = detail::box_json(d.box);
    j["score"] = d.score;
    detail::write_category(j, d.category);
    out += i == 0 ? "\n" : ",\n";
    out += j.dump();
  }
  out += detections.empty() ? "]\n" : "\n]\n";
  return out;
}

void write_detections(std::span<const Detection> detections,
                      const std::filesystem::path& path) {
  write_text_file(path, serialize_detections(detections));
}

IdSplit split_ids(std::span<const ImageId> ids, const SplitSpec& spec) {
  const std::size_t total = spec.train_count + spec.val_count + spec.test_count;
  if (total != ids.size()) {
    throw Error(ErrorCode::kCountMismatch,
                "split counts sum to " + std::to_string(total) + " but there are " +
                    std::to_string(ids.size()) + " images");
  }
  std::vector<ImageId> order(ids.begin(), ids.end());
  Rng rng(spec.seed);
  rng.shuffle(std::span<ImageId>(order));
  IdSplit out;
  auto first = order.begin();
  out.train.assign(first, first + static_cast<std::ptrdiff_t>(spec.train_count));
  first += static_cast<std::ptrdiff_t>(spec.train_count);
  out.val.assign(first, first + static_cast<std::ptrdiff_t>(spec.val_count));
  first += static_cast<std::ptrdiff_t>(spec.val_count);
  out.test.assign(first, order.end());
  return out;
}

namespace {

AnnotatedDataset subset(const AnnotatedDataset& ds, const std::vector<ImageId>& ids) {
  std::map<ImageId, const AnnotatedImage*> by_id;
  for (const auto& img : ds.images) by_id.emplace(img.image_id, &img);
  AnnotatedDataset out;
  std::set<ImageId> keep;
  for (ImageId id : ids) {
    out.images.push_back(*by_id.at(id));
    keep.insert(id);
  }
  for (const auto& a : ds.annotations) {
    if (keep.count(a.image_id)) out.annotations.push_back(a);
  }
  out.label_schema = ds.label_schema;
  return out;
}

}  // namespace

DatasetSplit split_dataset(const AnnotatedDataset& ds, const SplitSpec& spec) {
  std::vector<ImageId> ids;
  ids.reserve(ds.images.size());
  for (const auto& img : ds.images) ids.push_back(img.image_id);
  const IdSplit parts = split_ids(ids, spec);
  return {subset(ds, parts.train), subset(ds, parts.val), subset(ds, parts.test)};
}

}  // namespace detfuse
