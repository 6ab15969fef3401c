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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detfuse/ingestion.hpp"
#include "detfuse/types.hpp"

namespace detfuse {

enum class Axis { kQuadrant, kEnumeration, kDisease, kAgnostic };

std::string_view axis_name(Axis axis);
std::optional<Axis> axis_from_name(std::string_view name);

struct EvalConfig {
  std::vector<double> iou_thresholds = default_iou_thresholds();
  std::size_t max_dets = 100;
  std::size_t recall_points = 101;
  // Enumeration axis classes: 32 FDI teeth, or 8 tooth positions pooled over
  // quadrants.
  int enumeration_classes = 32;
  bool collect_pr = false;
  unsigned threads = 1;

  // 0.50:0.95 in steps of 0.05.
  static std::vector<double> default_iou_thresholds();
};

void validate(const EvalConfig& cfg);

struct ScoredBox {
  BoundingBox box;
  double score = 0.0;
};

// Ground truth and detections of one (image, class).
struct ImageSlice {
  std::vector<BoundingBox> gt;
  std::vector<ScoredBox> dets;
};

struct MatchRecord {
  std::size_t detection = 0;
  std::optional<std::size_t> gt;
  double iou = 0.0;
  double iou_threshold = 0.0;
  bool is_true_positive = false;
};

// COCO greedy assignment. `dets` must already be ordered by descending
// score; each claims the unmatched ground truth of highest iou >= iou_t
// (lowest index on equal iou).
std::vector<MatchRecord> greedy_match(std::span<const BoundingBox> gt,
                                      std::span<const ScoredBox> dets,
                                      double iou_t);

// Class-restricted quantities over all images of `images`. Detections are
// stable-sorted by score and capped at cfg.max_dets per image first.
double average_precision(std::span<const ImageSlice> images, double iou_t,
                         const EvalConfig& cfg);
// Recall at the detection cap, averaged over cfg.iou_thresholds.
double average_recall(std::span<const ImageSlice> images, const EvalConfig& cfg);

struct ClassMetrics {
  double ap = 0.0;
  double ar = 0.0;
  std::size_t gt_count = 0;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double iou_threshold = 0.0;

  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

struct EvaluationReport {
  Axis axis = Axis::kAgnostic;
  double mAP = 0.0;
  double AP50 = 0.0;
  double AP75 = 0.0;
  double AR = 0.0;
  // Keyed by class label: "1".."4", FDI "11".."48" (or "1".."8"), disease
  // names, or "all".
  std::map<std::string, ClassMetrics> per_class;
  // Class-averaged interpolated precision at each recall point, per IoU
  // threshold; filled when EvalConfig::collect_pr is set.
  std::vector<PrPoint> pr_points;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

// Class key of a category on `axis`, or nullopt when the axis is absent.
std::optional<int> class_key(const CategoryTriple& c, Axis axis,
                             int enumeration_classes);
std::string class_label(int key, Axis axis, int enumeration_classes);

bool axis_available(const LabelSchema& schema, Axis axis);

// COCO-style bbox evaluation on one axis: mAP over cfg.iou_thresholds and
// classes, AP at 0.5 and 0.75, AR at cfg.max_dets. Classes with no ground
// truth are skipped; so are detections on images outside the dataset.
EvaluationReport evaluate(const AnnotatedDataset& ds,
                          std::span<const Detection> dets, Axis axis,
                          const EvalConfig& cfg = {});

std::string format_report_table(std::span<const EvaluationReport> reports);
std::string report_to_json(const EvaluationReport& report);
std::string reports_to_json(std::span<const EvaluationReport> reports);
std::string pr_points_to_csv(const EvaluationReport& report);

}  // namespace detfuse
