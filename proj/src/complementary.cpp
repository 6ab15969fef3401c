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

#include "detfuse/complementary.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "detfuse/error.hpp"
#include "json_util.hpp"

namespace detfuse {

using detail::Json;

std::string_view crop_label_name(CropLabel label) {
  switch (label) {
    case CropLabel::kNormal: return "normal";
    case CropLabel::kCaries: return "caries";
    case CropLabel::kDeepCaries: return "deep-caries";
    case CropLabel::kImpacted: return "impacted";
    case CropLabel::kPeriapicalLesion: return "periapical-lesion";
  }
  return "unknown";
}

std::optional<CropLabel> crop_label_from_name(std::string_view name) {
  for (CropLabel l : {CropLabel::kNormal, CropLabel::kCaries, CropLabel::kDeepCaries,
                      CropLabel::kImpacted, CropLabel::kPeriapicalLesion}) {
    if (crop_label_name(l) == name) return l;
  }
  return std::nullopt;
}

std::optional<Disease> to_disease(CropLabel label) {
  if (label == CropLabel::kNormal) return std::nullopt;
  return static_cast<Disease>(static_cast<int>(label) - 1);
}

CropLabel to_crop_label(std::optional<Disease> disease) {
  if (!disease) return CropLabel::kNormal;
  return static_cast<CropLabel>(disease_index(*disease) + 1);
}

std::size_t BalancePlan::planned(Disease d) const {
  auto c = counts.find(d);
  if (c == counts.end()) return 0;
  auto m = multipliers.find(d);
  return c->second * static_cast<std::size_t>(m == multipliers.end() ? 1 : m->second);
}

void validate(const MergeConfig& cfg) {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in_unit(cfg.overlap_iou) || !in_unit(cfg.min_confidence)) {
    throw Error(ErrorCode::kInvalidConfig,
                "merge overlap_iou and min_confidence must lie in [0,1]");
  }
}

std::vector<CropAssignment> assign_crops(const DetectionSet& enums,
                                         std::span<const AnnotatedImage> images,
                                         double pad_fraction) {
  if (!std::isfinite(pad_fraction) || pad_fraction < 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "pad_fraction must be non-negative");
  }
  std::map<ImageId, const AnnotatedImage*> by_id;
  for (const auto& img : images) by_id.emplace(img.image_id, &img);

  std::vector<CropAssignment> crops;
  crops.reserve(enums.size());
  for (const Detection& d : enums.detections) {
    auto it = by_id.find(d.image_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kMissingImage,
                  "enumeration detection on unknown image " + std::to_string(d.image_id));
    }
    if (!d.category.has_tooth()) {
      throw Error(ErrorCode::kInvalidCategory,
                  "enumeration detection without quadrant and tooth labels");
    }
    const double px = d.box.w * pad_fraction;
    const double py = d.box.h * pad_fraction;
    const BoundingBox padded{d.box.x - px, d.box.y - py, d.box.w + 2 * px,
                             d.box.h + 2 * py};
    CropAssignment c;
    c.crop_id = crops.size();
    c.image_id = d.image_id;
    c.crop_box = clamp_to_frame(padded, it->second->width, it->second->height);
    c.source_box = d.box;
    c.quadrant = *d.category.quadrant;
    c.tooth = *d.category.enumeration;
    c.enum_score = d.score;
    crops.push_back(c);
  }
  return crops;
}

namespace {

BalancePlan empty_plan() {
  BalancePlan p;
  for (Disease d : kAllDiseases) {
    p.counts[d] = 0;
    p.multipliers[d] = 1;
  }
  return p;
}

}  // namespace

BalancePlan audit_balance(const AnnotatedDataset& ds) {
  BalancePlan p = empty_plan();
  for (const auto& a : ds.annotations) {
    if (a.category.disease) ++p.counts[*a.category.disease];
  }
  return p;
}

BalancePlan audit_balance(std::span<const CropClassification> cls) {
  BalancePlan p = empty_plan();
  for (const auto& c : cls) {
    if (auto d = to_disease(c.label)) ++p.counts[*d];
  }
  return p;
}

std::map<Disease, int> default_boost() {
  return {{Disease::kCaries, 1},
          {Disease::kDeepCaries, 2},
          {Disease::kImpacted, 1},
          {Disease::kPeriapicalLesion, 2}};
}

BalancePlan oversample_plan(const std::map<Disease, std::size_t>& counts,
                            const std::map<Disease, int>& boost) {
  BalancePlan p = empty_plan();
  for (const auto& [d, n] : counts) p.counts[d] = n;
  for (const auto& [d, m] : boost) {
    if (m < 1) {
      throw Error(ErrorCode::kInvalidConfig,
                  "boost for " + std::string(disease_name(d)) + " must be >= 1");
    }
    p.multipliers[d] = m;
  }
  return p;
}

DetectionSet classifications_to_detections(std::span<const CropAssignment> crops,
                                           std::span<const CropClassification> cls,
                                           double min_confidence) {
  std::vector<const CropClassification*> best(crops.size(), nullptr);
  for (const auto& c : cls) {
    if (c.crop_id >= crops.size()) {
      throw Error(ErrorCode::kDanglingCrop,
                  "classification references crop " + std::to_string(c.crop_id) +
                      " of " + std::to_string(crops.size()));
    }
    if (!std::isfinite(c.confidence) || c.confidence < 0.0 || c.confidence > 1.0) {
      throw Error(ErrorCode::kInvalidScore, "classifier confidence must lie in [0,1]");
    }
    const CropClassification*& slot = best[c.crop_id];
    if (!slot || c.confidence > slot->confidence) slot = &c;
  }

  std::vector<Detection> dets;
  for (std::size_t i = 0; i < crops.size(); ++i) {
    const CropClassification* c = best[i];
    if (!c || c->confidence < min_confidence) continue;
    const auto disease = to_disease(c->label);
    if (!disease) continue;
    const CropAssignment& crop = crops[i];
    Detection d;
    d.image_id = crop.image_id;
    d.box = crop.source_box;
    d.score = crop.enum_score * c->confidence;
    d.category = {crop.quadrant, crop.tooth, disease};
    d.source = Source::kComplementary;
    dets.push_back(d);
  }
  DetectionSet out = make_detection_set(std::move(dets), Source::kComplementary);
  for (const auto& crop : crops) out.image_universe.insert(crop.image_id);
  return out;
}

std::vector<IntegratedDetection> merge_complementary(
    std::span<const IntegratedDetection> integrated, const DetectionSet& comp,
    const MergeConfig& cfg) {
  validate(cfg);
  std::map<ImageId, std::vector<const IntegratedDetection*>> by_image;
  for (const auto& it : integrated) by_image[it.image_id].push_back(&it);

  std::vector<IntegratedDetection> out(integrated.begin(), integrated.end());
  for (const Detection& d : comp.detections) {
    bool duplicate = false;
    if (auto it = by_image.find(d.image_id); it != by_image.end()) {
      for (const IntegratedDetection* other : it->second) {
        if (other->category.disease == d.category.disease &&
            iou(other->box, d.box) >= cfg.overlap_iou) {
          duplicate = true;
          break;
        }
      }
    }
    if (!duplicate) {
      out.push_back({d.image_id, d.box, d.score, d.category, std::nullopt,
                     Source::kComplementary});
    }
  }
  return out;
}

std::string serialize_crops(std::span<const CropAssignment> crops) {
  std::string out = "[";
  for (std::size_t i = 0; i < crops.size(); ++i) {
    const CropAssignment& c = crops[i];
    Json j;
    j["crop_id"] = c.crop_id;
    j["image_id"] = c.image_id;
    j["crop_box"] = detail::box_json(c.crop_box);
    j["bbox"] = detail::box_json(c.source_box);
    j["category_id_1"] = c.quadrant - 1;
    j["category_id_2"] = c.tooth - 1;
    j["score"] = c.enum_score;
    out += i == 0 ? "\n" : ",\n";
    out += j.dump();
  }
  out += crops.empty() ? "]\n" : "\n]\n";
  return out;
}

std::vector<CropAssignment> parse_crops_text(const std::string& text) {
  const Json root = detail::parse_json(text, "crops");
  if (!root.is_array()) throw Error(ErrorCode::kMalformedFile, "crops: expected an array");
  std::vector<CropAssignment> crops;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const Json& j = root[i];
    const std::string where = "crops[" + std::to_string(i) + "]";
    if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, where + ": expected an object");
    CropAssignment c;
    c.crop_id = static_cast<std::size_t>(detail::as_int(detail::require(j, "crop_id", where), where));
    c.image_id = detail::as_int(detail::require(j, "image_id", where), where);
    c.crop_box = detail::as_box(detail::require(j, "crop_box", where), where);
    c.source_box = detail::as_box(detail::require(j, "bbox", where), where);
    const CategoryTriple cat = detail::parse_category(j, where);
    if (!cat.has_tooth()) {
      throw Error(ErrorCode::kInvalidCategory, where + ": crop needs quadrant and tooth");
    }
    c.quadrant = *cat.quadrant;
    c.tooth = *cat.enumeration;
    c.enum_score = detail::as_number(detail::require(j, "score", where), where);
    crops.push_back(c);
  }
  return crops;
}

std::vector<CropClassification> parse_classifications_text(const std::string& text) {
  const Json root = detail::parse_json(text, "classifications");
  if (!root.is_array()) {
    throw Error(ErrorCode::kMalformedFile, "classifications: expected an array");
  }
  std::vector<CropClassification> out;
  out.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const Json& j = root[i];
    const std::string where = "classifications[" + std::to_string(i) + "]";
    if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, where + ": expected an object");
    CropClassification c;
    const std::int64_t id = detail::as_int(detail::require(j, "crop_id", where), where);
    if (id < 0) throw Error(ErrorCode::kDanglingCrop, where + ": negative crop_id");
    c.crop_id = static_cast<std::size_t>(id);
    const Json& label = detail::require(j, "label", where);
    if (!label.is_string()) throw Error(ErrorCode::kMalformedFile, where + ": label must be a string");
    auto parsed = crop_label_from_name(label.get<std::string>());
    if (!parsed) {
      throw Error(ErrorCode::kInvalidCategory,
                  where + ": unknown label '" + label.get<std::string>() + "'");
    }
    c.label = *parsed;
    c.confidence = detail::as_number(detail::require(j, "confidence", where), where);
    if (!std::isfinite(c.confidence) || c.confidence < 0.0 || c.confidence > 1.0) {
      throw Error(ErrorCode::kInvalidScore, where + ": confidence must lie in [0,1]");
    }
    out.push_back(c);
  }
  return out;
}

std::vector<CropClassification> parse_classifications(const std::filesystem::path& path) {
  return parse_classifications_text(read_text_file(path));
}

std::string serialize_classifications(std::span<const CropClassification> cls) {
  std::string out = "[";
  for (std::size_t i = 0; i < cls.size(); ++i) {
    Json j;
    j["crop_id"] = cls[i].crop_id;
    j["label"] = std::string(crop_label_name(cls[i].label));
    j["confidence"] = cls[i].confidence;
    out += i == 0 ? "\n" : ",\n";
    out += j.dump();
  }
  out += cls.empty() ? "]\n" : "\n]\n";
  return out;
}

}  // namespace detfuse
