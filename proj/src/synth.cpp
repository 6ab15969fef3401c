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

#include "detfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>

#include "detfuse/error.hpp"
#include "detfuse/random.hpp"
#include "json_util.hpp"

namespace detfuse {

using detail::Json;

namespace {

constexpr int kSlotsPerRow = 16;
constexpr double kArchMarginX = 0.1;       // fraction of width left free per side
constexpr double kToothWidthFill = 0.85;   // fraction of a slot a tooth covers
constexpr double kToothHeight = 0.25;      // fraction of image height
constexpr double kUpperRowCenter = 0.36;
constexpr double kLowerRowCenter = 0.64;

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

double draw_score(Rng& rng, const ScoreDistribution& d) {
  if (d.stddev == 0.0) return std::clamp(d.mean, 0.0, 1.0);
  return std::clamp(rng.normal(d.mean, d.stddev), 0.0, 1.0);
}

// Slot position (0..15, left to right) of a tooth in its row.
int slot_of(int quadrant, int tooth) {
  return (quadrant == 1 || quadrant == 4) ? kTeethPerQuadrant - tooth
                                          : kTeethPerQuadrant - 1 + tooth;
}

CategoryTriple category_for(DetectorTask task, const CategoryTriple& gt) {
  switch (task) {
    case DetectorTask::kEnumeration: return {gt.quadrant, gt.enumeration, std::nullopt};
    case DetectorTask::kDiagnosis: return {std::nullopt, std::nullopt, gt.disease};
    case DetectorTask::kFull: return gt;
  }
  return gt;
}

bool targets(DetectorTask task, const CategoryTriple& gt) {
  switch (task) {
    case DetectorTask::kEnumeration: return gt.has_tooth();
    case DetectorTask::kDiagnosis: return gt.disease.has_value();
    case DetectorTask::kFull: return true;
  }
  return false;
}

CategoryTriple random_category(DetectorTask task, Rng& rng) {
  const int q = static_cast<int>(rng.below(kQuadrantCount)) + 1;
  const int t = static_cast<int>(rng.below(kTeethPerQuadrant)) + 1;
  const Disease d = kAllDiseases[rng.below(kAllDiseases.size())];
  switch (task) {
    case DetectorTask::kEnumeration: return {q, t, std::nullopt};
    case DetectorTask::kDiagnosis: return {std::nullopt, std::nullopt, d};
    case DetectorTask::kFull: return {q, t, d};
  }
  return {q, t, d};
}

Source source_for(DetectorTask task) {
  return task == DetectorTask::kEnumeration ? Source::kEnumerationModel
                                            : Source::kDiagnosisA;
}

}  // namespace

void validate(const ScenePlan& plan) {
  if (plan.image_width <= 0 || plan.image_height <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "scene image size must be positive");
  }
  if (plan.teeth_per_image < 0 || plan.teeth_per_image > kQuadrantCount * kTeethPerQuadrant) {
    throw Error(ErrorCode::kInvalidConfig, "teeth_per_image must lie in 0..32");
  }
  if (!is_probability(plan.missing_teeth_rate)) {
    throw Error(ErrorCode::kInvalidConfig, "missing_teeth_rate must lie in [0,1]");
  }
  double total = 0.0;
  for (const auto& [d, p] : plan.disease_prior) {
    if (!is_probability(p)) {
      throw Error(ErrorCode::kInvalidConfig, "disease priors must lie in [0,1]");
    }
    total += p;
  }
  if (total > 1.0 + 1e-12) throw Error(ErrorCode::kInvalidConfig, "disease priors sum above 1");
}

void validate(const DetectorProfile& p) {
  if (!is_probability(p.recall)) throw Error(ErrorCode::kInvalidConfig, "recall must lie in [0,1]");
  if (!std::isfinite(p.fp_per_image) || p.fp_per_image < 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "fp_per_image must be non-negative");
  }
  if (!std::isfinite(p.localization_noise) || p.localization_noise < 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "localization_noise must be non-negative");
  }
  for (const ScoreDistribution* d : {&p.score_tp, &p.score_fp}) {
    if (!std::isfinite(d->mean) || !std::isfinite(d->stddev) || d->stddev < 0.0) {
      throw Error(ErrorCode::kInvalidConfig, "score distributions need finite mean, std >= 0");
    }
  }
}

std::string_view detector_task_name(DetectorTask task) {
  switch (task) {
    case DetectorTask::kEnumeration: return "enumeration";
    case DetectorTask::kDiagnosis: return "diagnosis";
    case DetectorTask::kFull: return "full";
  }
  return "unknown";
}

std::vector<std::string> builtin_profile_names() {
  return {"diffusiondet-like", "dino-like", "perfect", "perfect-enumeration"};
}

DetectorProfile builtin_profile(const std::string& name) {
  DetectorProfile p;
  p.name = name;
  if (name == "diffusiondet-like") {
    // Few, confident, well-localized detections.
    p.task = DetectorTask::kDiagnosis;
    p.recall = 0.7;
    p.fp_per_image = 2.0;
    p.localization_noise = 0.03;
    p.score_tp = {0.75, 0.15};
    p.score_fp = {0.3, 0.15};
    p.det_cap_per_image = 300;
  } else if (name == "dino-like") {
    // High recall buried in thousands of low-score boxes.
    p.task = DetectorTask::kDiagnosis;
    p.recall = 0.95;
    p.fp_per_image = 3000.0;
    p.localization_noise = 0.05;
    p.score_tp = {0.04, 0.005};
    p.score_fp = {0.02, 0.008};
    p.det_cap_per_image = 3000;
  } else if (name == "perfect") {
    p.task = DetectorTask::kDiagnosis;
    p.score_tp = {0.9, 0.0};
  } else if (name == "perfect-enumeration") {
    p.task = DetectorTask::kEnumeration;
    p.score_tp = {0.95, 0.0};
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown detector profile '" + name + "'");
  }
  return p;
}

AnnotatedDataset generate_scene(const ScenePlan& plan) {
  validate(plan);
  const double W = plan.image_width;
  const double H = plan.image_height;
  const double slot_w = W * (1.0 - 2.0 * kArchMarginX) / kSlotsPerRow;
  const double tooth_w = slot_w * kToothWidthFill;
  const double tooth_h = H * kToothHeight;

  std::vector<std::pair<int, int>> admitted;
  for (int t = 1; t <= kTeethPerQuadrant; ++t) {
    for (int q = 1; q <= kQuadrantCount; ++q) {
      if (static_cast<int>(admitted.size()) < plan.teeth_per_image) admitted.emplace_back(q, t);
    }
  }
  // Draw in FDI order so the stream does not depend on admission order.
  std::sort(admitted.begin(), admitted.end());

  AnnotatedDataset ds;
  std::int64_t next_ann = 1;
  for (std::size_t i = 0; i < plan.image_count; ++i) {
    Rng rng(derive_seed(plan.seed, i));
    AnnotatedImage img;
    img.image_id = static_cast<ImageId>(i) + 1;
    img.width = plan.image_width;
    img.height = plan.image_height;
    img.file_name = "synthetic_" + std::to_string(img.image_id) + ".png";
    const double shift_x = rng.uniform(-0.02, 0.02) * W;
    const double shift_y = rng.uniform(-0.02, 0.02) * H;

    for (const auto& [q, t] : admitted) {
      const double jitter_x = rng.uniform(-0.03, 0.03) * slot_w;
      const double jitter_y = rng.uniform(-0.03, 0.03) * tooth_h;
      const double scale = rng.uniform(0.9, 1.1);
      const bool missing = rng.bernoulli(plan.missing_teeth_rate);
      const double u = rng.uniform();
      if (missing) continue;

      const double row_center = (q <= 2 ? kUpperRowCenter : kLowerRowCenter) * H;
      const double cx = W * kArchMarginX + (slot_of(q, t) + 0.5) * slot_w + shift_x + jitter_x;
      const double cy = row_center + shift_y + jitter_y;
      const double w = tooth_w * scale;
      const double h = tooth_h * scale;

      GroundTruthAnnotation a;
      a.annotation_id = next_ann++;
      a.image_id = img.image_id;
      a.box = clamp_to_frame({cx - w / 2.0, cy - h / 2.0, w, h}, W, H);
      a.category.quadrant = q;
      a.category.enumeration = t;
      double cumulative = 0.0;
      for (Disease d : kAllDiseases) {
        auto it = plan.disease_prior.find(d);
        if (it == plan.disease_prior.end()) continue;
        cumulative += it->second;
        if (u < cumulative) {
          a.category.disease = d;
          break;
        }
      }
      ds.annotations.push_back(a);
    }
    ds.images.push_back(std::move(img));
  }
  ds.label_schema = {true, true, true};
  return ds;
}

AnnotatedDataset diagnosis_view(const AnnotatedDataset& ds) {
  AnnotatedDataset out;
  out.images = ds.images;
  for (const auto& a : ds.annotations) {
    if (a.category.disease) out.annotations.push_back(a);
  }
  out.label_schema = ds.label_schema;
  return out;
}

DetectionSet simulate_detector(const AnnotatedDataset& ds, const DetectorProfile& profile,
                               std::uint64_t seed) {
  validate(profile);
  std::map<ImageId, std::vector<const GroundTruthAnnotation*>> by_image;
  for (const auto& a : ds.annotations) by_image[a.image_id].push_back(&a);

  const Source source = source_for(profile.task);
  DetectionSet out;
  out.source = source;
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    const AnnotatedImage& img = ds.images[i];
    out.image_universe.insert(img.image_id);
    Rng rng(derive_seed(seed, i));
    const double W = img.width;
    const double H = img.height;
    std::vector<Detection> dets;

    for (const GroundTruthAnnotation* a : by_image[img.image_id]) {
      if (!targets(profile.task, a->category)) continue;
      if (!rng.bernoulli(profile.recall)) continue;
      BoundingBox box = a->box;
      if (profile.localization_noise > 0.0) {
        const double n = profile.localization_noise;
        const Point c = center(a->box);
        const double cx = c.x + rng.normal(0.0, n * a->box.w);
        const double cy = c.y + rng.normal(0.0, n * a->box.h);
        const double w = a->box.w * std::max(0.05, 1.0 + rng.normal(0.0, n));
        const double h = a->box.h * std::max(0.05, 1.0 + rng.normal(0.0, n));
        box = clamp_to_frame({cx - w / 2.0, cy - h / 2.0, w, h}, W, H);
        if (!is_valid(box)) continue;
      }
      dets.push_back({img.image_id, box, draw_score(rng, profile.score_tp),
                      category_for(profile.task, a->category), source});
    }

    const double slot_w = W * (1.0 - 2.0 * kArchMarginX) / kSlotsPerRow;
    const std::uint64_t fp_count = rng.poisson(profile.fp_per_image);
    for (std::uint64_t k = 0; k < fp_count; ++k) {
      const double w = std::min(W, slot_w * kToothWidthFill * rng.uniform(0.6, 1.4));
      const double h = std::min(H, H * kToothHeight * rng.uniform(0.6, 1.4));
      const double x = rng.uniform(0.0, W - w);
      const double y = rng.uniform(0.0, H - h);
      const double score = draw_score(rng, profile.score_fp);
      dets.push_back({img.image_id, {x, y, w, h}, score,
                      random_category(profile.task, rng), source});
    }

    if (dets.size() > profile.det_cap_per_image) {
      std::vector<std::size_t> order(dets.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
      });
      order.resize(profile.det_cap_per_image);
      std::sort(order.begin(), order.end());
      std::vector<Detection> kept;
      kept.reserve(order.size());
      for (std::size_t k : order) kept.push_back(dets[k]);
      dets = std::move(kept);
    }
    out.detections.insert(out.detections.end(), dets.begin(), dets.end());
  }
  return out;
}

std::vector<CropClassification> simulate_classifier(const AnnotatedDataset& ds,
                                                    std::span<const CropAssignment> crops,
                                                    const ClassifierProfile& profile,
                                                    std::uint64_t seed) {
  if (!is_probability(profile.accuracy)) {
    throw Error(ErrorCode::kInvalidConfig, "classifier accuracy must lie in [0,1]");
  }
  std::map<ImageId, std::vector<const GroundTruthAnnotation*>> by_image;
  for (const auto& a : ds.annotations) by_image[a.image_id].push_back(&a);

  std::vector<CropClassification> out;
  out.reserve(crops.size());
  for (const CropAssignment& crop : crops) {
    Rng rng(derive_seed(seed, crop.crop_id));
    const GroundTruthAnnotation* best = nullptr;
    double best_iou = 0.5;
    for (const GroundTruthAnnotation* a : by_image[crop.image_id]) {
      const double v = iou(a->box, crop.source_box);
      if (v >= best_iou) {
        best = a;
        best_iou = v;
      }
    }
    CropLabel label = to_crop_label(best ? best->category.disease : std::nullopt);
    if (!rng.bernoulli(profile.accuracy)) {
      const int shift = static_cast<int>(rng.below(4)) + 1;
      label = static_cast<CropLabel>((static_cast<int>(label) + shift) % 5);
    }
    out.push_back({crop.crop_id, label, draw_score(rng, profile.confidence)});
  }
  return out;
}

namespace {

ScenePlan parse_scene_plan_text_impl(const std::string& text) {
  const Json j = detail::parse_json(text, "scene plan");
  if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, "scene plan: expected an object");
  ScenePlan p;
  const std::string where = "scene plan";
  if (j.contains("image_count")) p.image_count = static_cast<std::size_t>(detail::as_int(j["image_count"], where));
  if (j.contains("image_width")) p.image_width = static_cast<int>(detail::as_int(j["image_width"], where));
  if (j.contains("image_height")) p.image_height = static_cast<int>(detail::as_int(j["image_height"], where));
  if (j.contains("teeth_per_image")) p.teeth_per_image = static_cast<int>(detail::as_int(j["teeth_per_image"], where));
  if (j.contains("missing_teeth_rate")) p.missing_teeth_rate = detail::as_number(j["missing_teeth_rate"], where);
  if (j.contains("seed")) p.seed = static_cast<std::uint64_t>(detail::as_int(j["seed"], where));
  if (j.contains("disease_prior")) {
    const Json& prior = j["disease_prior"];
    if (!prior.is_object()) throw Error(ErrorCode::kMalformedFile, "disease_prior must be an object");
    p.disease_prior.clear();
    for (auto it = prior.begin(); it != prior.end(); ++it) {
      auto d = disease_from_name(it.key());
      if (!d) throw Error(ErrorCode::kInvalidCategory, "unknown disease '" + it.key() + "'");
      p.disease_prior[*d] = detail::as_number(it.value(), where);
    }
  }
  validate(p);
  return p;
}

}  // namespace

ScenePlan parse_scene_plan_text(const std::string& text) {
  try {
    return parse_scene_plan_text_impl(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
}

std::string serialize_scene_plan(const ScenePlan& p) {
  Json j;
  j["image_count"] = p.image_count;
  j["image_width"] = p.image_width;
  j["image_height"] = p.image_height;
  j["teeth_per_image"] = p.teeth_per_image;
  j["missing_teeth_rate"] = p.missing_teeth_rate;
  Json prior = Json::object();
  for (const auto& [d, v] : p.disease_prior) prior[std::string(disease_name(d))] = v;
  j["disease_prior"] = std::move(prior);
  j["seed"] = p.seed;
  return j.dump(2) + "\n";
}

namespace {

ScoreDistribution parse_distribution(const Json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, where + ": expected {mean, std}");
  return {detail::as_number(detail::require(j, "mean", where), where),
          detail::as_number(detail::require(j, "std", where), where)};
}

}  // namespace

namespace {

DetectorProfile parse_detector_profile_text_impl(const std::string& text) {
  const Json j = detail::parse_json(text, "detector profile");
  if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, "detector profile: expected an object");
  const std::string where = "detector profile";
  DetectorProfile p;
  if (j.contains("name")) p.name = j["name"].get<std::string>();
  if (j.contains("task")) {
    const std::string task = j["task"].get<std::string>();
    bool found = false;
    for (DetectorTask t : {DetectorTask::kEnumeration, DetectorTask::kDiagnosis, DetectorTask::kFull}) {
      if (detector_task_name(t) == task) {
        p.task = t;
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::kMalformedFile, "unknown detector task '" + task + "'");
  }
  if (j.contains("recall")) p.recall = detail::as_number(j["recall"], where);
  if (j.contains("fp_per_image")) p.fp_per_image = detail::as_number(j["fp_per_image"], where);
  if (j.contains("localization_noise")) p.localization_noise = detail::as_number(j["localization_noise"], where);
  if (j.contains("score_tp")) p.score_tp = parse_distribution(j["score_tp"], where + ".score_tp");
  if (j.contains("score_fp")) p.score_fp = parse_distribution(j["score_fp"], where + ".score_fp");
  if (j.contains("det_cap_per_image")) {
    p.det_cap_per_image = static_cast<std::size_t>(detail::as_int(j["det_cap_per_image"], where));
  }
  validate(p);
  return p;
}

}  // namespace

DetectorProfile parse_detector_profile_text(const std::string& text) {
  try {
    return parse_detector_profile_text_impl(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
}

std::string serialize_detector_profile(const DetectorProfile& p) {
  Json j;
  j["name"] = p.name;
  j["task"] = std::string(detector_task_name(p.task));
  j["recall"] = p.recall;
  j["fp_per_image"] = p.fp_per_image;
  j["localization_noise"] = p.localization_noise;
  j["score_tp"] = {{"mean", p.score_tp.mean}, {"std", p.score_tp.stddev}};
  j["score_fp"] = {{"mean", p.score_fp.mean}, {"std", p.score_fp.stddev}};
  j["det_cap_per_image"] = p.det_cap_per_image;
  return j.dump(2) + "\n";
}

DetectorProfile load_detector_profile(const std::string& name_or_path) {
  const auto names = builtin_profile_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return builtin_profile(name_or_path);
  }
  if (!std::filesystem::exists(name_or_path)) {
    throw Error(ErrorCode::kInvalidConfig,
                "'" + name_or_path + "' is neither a builtin profile nor a file");
  }
  return parse_detector_profile_text(read_text_file(name_or_path));
}

}  // namespace detfuse
