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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "detfuse/complementary.hpp"
#include "detfuse/ingestion.hpp"
#include "detfuse/types.hpp"

namespace detfuse {

struct ScenePlan {
  std::size_t image_count = 10;
  int image_width = 2900;
  int image_height = 1300;
  int teeth_per_image = 32;
  double missing_teeth_rate = 0.1;
  // Probability that a present tooth carries each disease; the remainder is
  // healthy.
  std::map<Disease, double> disease_prior = {
      {Disease::kCaries, 0.20},
      {Disease::kDeepCaries, 0.06},
      {Disease::kImpacted, 0.06},
      {Disease::kPeriapicalLesion, 0.04}};
  std::uint64_t seed = 0;
};

void validate(const ScenePlan& plan);

struct ScoreDistribution {
  double mean = 0.5;
  double stddev = 0.0;
};

// What a simulated model is asked to find.
enum class DetectorTask {
  kEnumeration,  // every tooth, labeled (quadrant, tooth)
  kDiagnosis,    // diseased teeth only, labeled with the disease
  kFull,         // every annotation with its full label
};

std::string_view detector_task_name(DetectorTask task);

struct DetectorProfile {
  std::string name = "custom";
  DetectorTask task = DetectorTask::kDiagnosis;
  double recall = 1.0;
  double fp_per_image = 0.0;
  // Std of center jitter and relative size jitter, as a fraction of the box
  // dimensions.
  double localization_noise = 0.0;
  ScoreDistribution score_tp{0.9, 0.0};
  ScoreDistribution score_fp{0.1, 0.0};
  std::size_t det_cap_per_image = 3000;
};

void validate(const DetectorProfile& profile);

// Names understood by builtin_profile(): "diffusiondet-like", "dino-like",
// "perfect", "perfect-enumeration".
std::vector<std::string> builtin_profile_names();
DetectorProfile builtin_profile(const std::string& name);

struct ClassifierProfile {
  double accuracy = 1.0;
  ScoreDistribution confidence{0.9, 0.0};
};

// Teeth sit on two horizontal arches in FDI order (18..11 21..28 on top,
// 48..41 31..38 below). Teeth are admitted in the order (1,1),(2,1),(3,1),
// (4,1),(1,2),... until teeth_per_image, then dropped with
// missing_teeth_rate. Each image draws from its own derived seed.
AnnotatedDataset generate_scene(const ScenePlan& plan);

// Annotations that carry a disease label: the diagnosis-evaluation view.
AnnotatedDataset diagnosis_view(const AnnotatedDataset& ds);

DetectionSet simulate_detector(const AnnotatedDataset& ds,
                               const DetectorProfile& profile,
                               std::uint64_t seed);

// Labels each crop from the ground-truth tooth it overlaps best (iou >= 0.5;
// otherwise normal), flipping to a random wrong label with probability
// 1 - accuracy.
std::vector<CropClassification> simulate_classifier(
    const AnnotatedDataset& ds, std::span<const CropAssignment> crops,
    const ClassifierProfile& profile, std::uint64_t seed);

ScenePlan parse_scene_plan_text(const std::string& text);
std::string serialize_scene_plan(const ScenePlan& plan);
DetectorProfile parse_detector_profile_text(const std::string& text);
std::string serialize_detector_profile(const DetectorProfile& profile);
// A builtin name, or a path to a profile JSON file.
DetectorProfile load_detector_profile(const std::string& name_or_path);

}  // namespace detfuse
