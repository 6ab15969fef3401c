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

#include <gtest/gtest.h>

#include <set>

#include "detfuse/error.hpp"
#include "detfuse/ensemble.hpp"
#include "detfuse/metrics.hpp"
#include "detfuse/synth.hpp"
#include "test_util.hpp"

namespace detfuse {
namespace {

ScenePlan plan_of(std::size_t images, std::uint64_t seed, double missing = 0.0) {
  ScenePlan p;
  p.image_count = images;
  p.missing_teeth_rate = missing;
  p.seed = seed;
  return p;
}

TEST(GenerateScene, FullArchCoversEveryTooth) {
  const AnnotatedDataset ds = generate_scene(plan_of(1, 1));
  ASSERT_EQ(ds.annotations.size(), 32u);
  std::set<int> fdi;
  for (const auto& a : ds.annotations) {
    ASSERT_TRUE(a.category.fdi());
    fdi.insert(*a.category.fdi());
    EXPECT_TRUE(is_valid(a.box));
    EXPECT_GE(a.box.x, 0);
    EXPECT_LE(a.box.right(), 2900);
    EXPECT_LE(a.box.bottom(), 1300);
  }
  EXPECT_EQ(fdi.size(), 32u);
  EXPECT_EQ(*fdi.begin(), 11);
  EXPECT_EQ(*fdi.rbegin(), 48);
  EXPECT_TRUE(ds.label_schema.quadrant && ds.label_schema.enumeration && ds.label_schema.disease);
}

TEST(GenerateScene, ArchLayout) {
  const AnnotatedDataset ds = generate_scene(plan_of(1, 2));
  std::map<int, Point> c;
  for (const auto& a : ds.annotations) c[*a.category.fdi()] = center(a.box);
  // Upper arch reads 18..11 then 21..28 left to right; lower arch 48..41, 31..38.
  EXPECT_LT(c[18].x, c[11].x);
  EXPECT_LT(c[11].x, c[21].x);
  EXPECT_LT(c[21].x, c[28].x);
  EXPECT_LT(c[48].x, c[41].x);
  EXPECT_LT(c[41].x, c[31].x);
  EXPECT_LT(c[11].y, c[41].y);
  EXPECT_LT(c[21].y, c[31].y);
}

TEST(GenerateScene, PartialArchAndMissingTeeth) {
  ScenePlan p = plan_of(3, 5, 1.0);
  EXPECT_TRUE(generate_scene(p).annotations.empty());
  EXPECT_EQ(generate_scene(p).images.size(), 3u);
  p = plan_of(1, 5);
  p.teeth_per_image = 8;
  const AnnotatedDataset ds = generate_scene(p);
  ASSERT_EQ(ds.annotations.size(), 8u);
  for (const auto& a : ds.annotations) EXPECT_LE(*a.category.enumeration, 2);
}

TEST(GenerateScene, Deterministic) {
  const ScenePlan p = plan_of(6, 99, 0.1);
  EXPECT_EQ(serialize_ground_truth(generate_scene(p)), serialize_ground_truth(generate_scene(p)));
  EXPECT_NE(serialize_ground_truth(generate_scene(p)), serialize_ground_truth(generate_scene(plan_of(6, 100, 0.1))));
}

TEST(GenerateScene, ImagesIndependentOfImageCount) {
  const AnnotatedDataset small = generate_scene(plan_of(3, 17, 0.2));
  const AnnotatedDataset big = generate_scene(plan_of(9, 17, 0.2));
  ASSERT_LE(small.annotations.size(), big.annotations.size());
  for (std::size_t i = 0; i < small.annotations.size(); ++i) EXPECT_EQ(small.annotations[i], big.annotations[i]);
}

TEST(GenerateScene, DiseasePriorsRespected) {
  ScenePlan p = plan_of(200, 3);
  const AnnotatedDataset ds = generate_scene(p);
  std::map<Disease, double> freq;
  for (const auto& a : ds.annotations) {
    if (a.category.disease) freq[*a.category.disease] += 1.0 / static_cast<double>(ds.annotations.size());
  }
  for (const auto& [d, prior] : p.disease_prior) EXPECT_NEAR(freq[d], prior, 0.02) << disease_name(d);
  p.disease_prior = {{Disease::kCaries, 0.7}, {Disease::kImpacted, 0.5}};
  EXPECT_THROW(generate_scene(p), Error);
}

TEST(DiagnosisView, KeepsDiseasedOnly) {
  const AnnotatedDataset ds = generate_scene(plan_of(4, 8));
  const AnnotatedDataset view = diagnosis_view(ds);
  EXPECT_EQ(view.images, ds.images);
  EXPECT_LT(view.annotations.size(), ds.annotations.size());
  for (const auto& a : view.annotations) EXPECT_TRUE(a.category.disease);
}

TEST(SimulateDetector, NoiselessProfileIsExact) {
  const AnnotatedDataset ds = diagnosis_view(generate_scene(plan_of(5, 4)));
  DetectorProfile p;
  p.task = DetectorTask::kFull;
  p.score_tp = {0.9, 0.0};
  const DetectionSet dets = simulate_detector(ds, p, 1);
  ASSERT_EQ(dets.size(), ds.annotations.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    EXPECT_EQ(dets.detections[i].box, ds.annotations[i].box);
    EXPECT_EQ(dets.detections[i].category, ds.annotations[i].category);
    EXPECT_EQ(dets.detections[i].score, 0.9);
  }
  for (Axis axis : {Axis::kQuadrant, Axis::kEnumeration, Axis::kDisease}) {
    const auto r = evaluate(ds, dets.detections, axis);
    EXPECT_EQ(r.mAP, 1.0);
    EXPECT_EQ(r.AP50, 1.0);
    EXPECT_EQ(r.AP75, 1.0);
    EXPECT_EQ(r.AR, 1.0);
  }
}

TEST(SimulateDetector, TaskLabels) {
  const AnnotatedDataset ds = generate_scene(plan_of(2, 4));
  const DetectionSet en = simulate_detector(ds, builtin_profile("perfect-enumeration"), 1);
  EXPECT_EQ(en.size(), ds.annotations.size());
  EXPECT_EQ(en.source, Source::kEnumerationModel);
  for (const auto& d : en.detections) {
    EXPECT_TRUE(d.category.has_tooth());
    EXPECT_FALSE(d.category.disease);
  }
  const DetectionSet dx = simulate_detector(ds, builtin_profile("perfect"), 1);
  EXPECT_EQ(dx.size(), diagnosis_view(ds).annotations.size());
  for (const auto& d : dx.detections) {
    EXPECT_FALSE(d.category.has_tooth());
    EXPECT_TRUE(d.category.disease);
  }
}

TEST(SimulateDetector, RecallZeroIsEmpty) {
  const AnnotatedDataset ds = generate_scene(plan_of(3, 4));
  DetectorProfile p;
  p.recall = 0.0;
  const DetectionSet dets = simulate_detector(ds, p, 7);
  EXPECT_TRUE(dets.empty());
  EXPECT_EQ(dets.image_universe.size(), 3u);
}

TEST(SimulateDetector, DinoLikeVolume) {
  const AnnotatedDataset ds = diagnosis_view(generate_scene(plan_of(4, 4)));
  const DetectorProfile p = builtin_profile("dino-like");
  const DetectionSet dets = simulate_detector(ds, p, 9);
  std::map<ImageId, std::size_t> per_image;
  for (const auto& d : dets.detections) {
    ++per_image[d.image_id];
    EXPECT_GE(d.score, 0.0);
    EXPECT_LE(d.score, 1.0);
  }
  ASSERT_EQ(per_image.size(), 4u);
  for (const auto& [id, n] : per_image) {
    EXPECT_LE(n, p.det_cap_per_image);
    EXPECT_GE(n, 2900u);
  }
}

TEST(SimulateDetector, CapKeepsHighestScores) {
  const AnnotatedDataset ds = generate_scene(plan_of(1, 4));
  DetectorProfile p;
  p.fp_per_image = 50;
  p.score_tp = {0.9, 0.0};
  p.score_fp = {0.1, 0.05};
  p.det_cap_per_image = 5;
  const DetectionSet dets = simulate_detector(diagnosis_view(ds), p, 3);
  ASSERT_EQ(dets.size(), std::min<std::size_t>(5, diagnosis_view(ds).annotations.size() + 50));
  for (const auto& d : dets.detections) EXPECT_EQ(d.score, 0.9);
}

TEST(SimulateDetector, Deterministic) {
  const AnnotatedDataset ds = generate_scene(plan_of(3, 4));
  const DetectorProfile p = builtin_profile("diffusiondet-like");
  EXPECT_EQ(simulate_detector(ds, p, 5).detections, simulate_detector(ds, p, 5).detections);
  EXPECT_NE(simulate_detector(ds, p, 5).detections, simulate_detector(ds, p, 6).detections);
}

TEST(SimulateDetector, EnsembleShowsComplementaryStrengths) {
  const AnnotatedDataset scene = generate_scene(plan_of(30, 42));
  const AnnotatedDataset ds = diagnosis_view(scene);
  const DetectionSet a = simulate_detector(ds, builtin_profile("diffusiondet-like"), 43);
  const DetectionSet b = simulate_detector(ds, builtin_profile("dino-like"), 44);
  const DetectionSet e = threshold_ensemble(a, b, {});
  const auto ra = evaluate(ds, a.detections, Axis::kDisease);
  const auto rb = evaluate(ds, b.detections, Axis::kDisease);
  const auto re = evaluate(ds, e.detections, Axis::kDisease);
  EXPECT_GT(ra.mAP, rb.mAP);
  EXPECT_GT(rb.AR, ra.AR);
  EXPECT_GE(re.AR, rb.AR - 0.01);
  EXPECT_GE(re.mAP, ra.mAP - 0.02);
}

TEST(SimulateClassifier, PerfectAccuracyRecoversLabels) {
  const AnnotatedDataset ds = generate_scene(plan_of(2, 4));
  const DetectionSet en = simulate_detector(ds, builtin_profile("perfect-enumeration"), 1);
  const auto crops = assign_crops(en, ds.images, 0.1);
  const auto cls = simulate_classifier(ds, crops, {}, 2);
  ASSERT_EQ(cls.size(), crops.size());
  for (std::size_t i = 0; i < cls.size(); ++i) {
    EXPECT_EQ(cls[i].crop_id, crops[i].crop_id);
    EXPECT_EQ(to_disease(cls[i].label), ds.annotations[i].category.disease);
  }
  ClassifierProfile wrong;
  wrong.accuracy = 0.0;
  const auto flipped = simulate_classifier(ds, crops, wrong, 2);
  for (std::size_t i = 0; i < cls.size(); ++i) EXPECT_NE(flipped[i].label, cls[i].label);
}

TEST(Profiles, BuiltinsMatchShippedFiles) {
  const std::filesystem::path dir = DETFUSE_PROFILE_DIR;
  for (const std::string name : {"diffusiondet-like", "dino-like"}) {
    const DetectorProfile file = load_detector_profile((dir / (name + ".json")).string());
    const DetectorProfile builtin = builtin_profile(name);
    EXPECT_EQ(serialize_detector_profile(file), serialize_detector_profile(builtin)) << name;
  }
  const DetectorProfile dino = builtin_profile("dino-like");
  EXPECT_EQ(dino.recall, 0.95);
  EXPECT_EQ(dino.score_fp.mean, 0.02);
  EXPECT_EQ(dino.det_cap_per_image, 3000u);
  EXPECT_EQ(builtin_profile("diffusiondet-like").recall, 0.7);
  EXPECT_THROW(builtin_profile("yolo-like"), Error);
  EXPECT_THROW(load_detector_profile("/nonexistent/profile.json"), Error);
}

TEST(Profiles, RoundTripAndValidation) {
  for (const auto& name : builtin_profile_names()) {
    const DetectorProfile p = builtin_profile(name);
    EXPECT_EQ(serialize_detector_profile(parse_detector_profile_text(serialize_detector_profile(p))),
              serialize_detector_profile(p));
  }
  EXPECT_THROW(parse_detector_profile_text(R"({"recall": 1.5})"), Error);
  EXPECT_THROW(parse_detector_profile_text("not json"), Error);
  const ScenePlan p = plan_of(7, 11, 0.3);
  EXPECT_EQ(serialize_scene_plan(parse_scene_plan_text(serialize_scene_plan(p))), serialize_scene_plan(p));
  EXPECT_THROW(parse_scene_plan_text(R"({"teeth_per_image": 40})"), Error);
}

}  // namespace
}  // namespace detfuse
