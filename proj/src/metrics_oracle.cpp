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

#include "detfuse/metrics_oracle.hpp"

#include <cmath>
#include <set>

#include "detfuse/error.hpp"

// Deliberately plain: quadratic selection sorts, per-image linear scans and
// no helpers shared with metrics.cpp.
namespace detfuse {

namespace {

double box_overlap(const BoundingBox& a, const BoundingBox& b) {
  const double left = a.x > b.x ? a.x : b.x;
  const double top = a.y > b.y ? a.y : b.y;
  const double right = (a.x + a.w) < (b.x + b.w) ? (a.x + a.w) : (b.x + b.w);
  const double bottom = (a.y + a.h) < (b.y + b.h) ? (a.y + a.h) : (b.y + b.h);
  if (right - left <= 0.0 || bottom - top <= 0.0) return 0.0;
  const double inter = (right - left) * (bottom - top);
  const double area_a = ((a.x + a.w) - a.x) * ((a.y + a.h) - a.y);
  const double area_b = ((b.x + b.w) - b.x) * ((b.y + b.h) - b.y);
  return inter / (area_a + area_b - inter);
}

bool key_of(const CategoryTriple& c, Axis axis, int enum_classes, int* key) {
  if (axis == Axis::kAgnostic) {
    *key = 0;
    return true;
  }
  if (axis == Axis::kQuadrant) {
    if (!c.quadrant.has_value()) return false;
    *key = c.quadrant.value();
    return true;
  }
  if (axis == Axis::kEnumeration) {
    if (!c.enumeration.has_value()) return false;
    if (enum_classes == 8) {
      *key = c.enumeration.value();
      return true;
    }
    if (!c.quadrant.has_value()) return false;
    *key = 10 * c.quadrant.value() + c.enumeration.value();
    return true;
  }
  if (!c.disease.has_value()) return false;
  *key = static_cast<int>(c.disease.value());
  return true;
}

std::string label_of(int key, Axis axis) {
  if (axis == Axis::kAgnostic) return "all";
  if (axis == Axis::kDisease) {
    static const char* names[] = {"caries", "deep-caries", "impacted", "periapical-lesion"};
    return names[key];
  }
  return std::to_string(key);
}

struct Ranked {
  double score;
  bool tp;
};

// Interpolated precision at every recall point plus the final recall.
void score_curve(const std::vector<Ranked>& ranked_in, int gt_total, int points,
                 std::vector<double>* precision_at, double* final_recall) {
  // Selection sort, descending score, first-come on ties.
  std::vector<Ranked> pool = ranked_in;
  std::vector<char> used(pool.size(), 0);
  std::vector<Ranked> order;
  for (std::size_t n = 0; n < pool.size(); ++n) {
    int pick = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      if (pick < 0 || pool[i].score > pool[pick].score) pick = static_cast<int>(i);
    }
    used[pick] = 1;
    order.push_back(pool[pick]);
  }

  std::vector<double> recall, prec;
  int tp = 0, fp = 0;
  for (const Ranked& r : order) {
    if (r.tp) tp++; else fp++;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_total));
    prec.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  *final_recall = recall.empty() ? 0.0 : recall.back();
  precision_at->clear();
  for (int i = 0; i < points; ++i) {
    const double r = static_cast<double>(i) / static_cast<double>(points - 1);
    double best = 0.0;
    for (std::size_t k = 0; k < recall.size(); ++k) {
      if (recall[k] >= r && prec[k] > best) best = prec[k];
    }
    precision_at->push_back(best);
  }
}

}  // namespace

EvaluationReport naive_oracle_evaluate(const AnnotatedDataset& ds,
                                       std::span<const Detection> dets, Axis axis,
                                       const EvalConfig& cfg) {
  validate(cfg);
  const bool schema_has = axis == Axis::kAgnostic ||
                          (axis == Axis::kQuadrant && ds.label_schema.quadrant) ||
                          (axis == Axis::kEnumeration && ds.label_schema.enumeration) ||
                          (axis == Axis::kDisease && ds.label_schema.disease);
  if (!schema_has) {
    throw Error(ErrorCode::kAxisUnavailable, "axis not present in ground truth");
  }

  const int points = static_cast<int>(cfg.recall_points);
  std::set<int> classes;
  for (const auto& a : ds.annotations) {
    int k;
    if (key_of(a.category, axis, cfg.enumeration_classes, &k)) classes.insert(k);
  }

  double t50 = 0.5, t75 = 0.75;
  for (double t : cfg.iou_thresholds) {
    if (std::fabs(t - 0.5) < 1e-12) t50 = t;
    if (std::fabs(t - 0.75) < 1e-12) t75 = t;
  }
  std::vector<double> all_thresholds = cfg.iou_thresholds;
  all_thresholds.push_back(t50);
  all_thresholds.push_back(t75);
  const std::size_t n_main = cfg.iou_thresholds.size();

  EvaluationReport report;
  report.axis = axis;
  if (classes.empty()) return report;

  std::vector<std::vector<std::vector<double>>> pr_by_class;  // class, thr, point
  double sum_map = 0, sum50 = 0, sum75 = 0, sum_ar = 0;
  for (int cls : classes) {
    int gt_total = 0;
    std::vector<std::vector<Ranked>> ranked(all_thresholds.size());
    for (const auto& img : ds.images) {
      std::vector<BoundingBox> gts;
      for (const auto& a : ds.annotations) {
        int k;
        if (a.image_id == img.image_id &&
            key_of(a.category, axis, cfg.enumeration_classes, &k) && k == cls) {
          gts.push_back(a.box);
        }
      }
      gt_total += static_cast<int>(gts.size());

      std::vector<const Detection*> mine;
      for (const auto& d : dets) {
        int k;
        if (d.image_id == img.image_id &&
            key_of(d.category, axis, cfg.enumeration_classes, &k) && k == cls) {
          mine.push_back(&d);
        }
      }
      std::vector<const Detection*> sorted;
      std::vector<char> used(mine.size(), 0);
      while (sorted.size() < mine.size() && sorted.size() < cfg.max_dets) {
        int pick = -1;
        for (std::size_t i = 0; i < mine.size(); ++i) {
          if (used[i]) continue;
          if (pick < 0 || mine[i]->score > mine[pick]->score) pick = static_cast<int>(i);
        }
        used[pick] = 1;
        sorted.push_back(mine[pick]);
      }

      for (std::size_t t = 0; t < all_thresholds.size(); ++t) {
        std::vector<char> claimed(gts.size(), 0);
        for (const Detection* d : sorted) {
          int best = -1;
          double best_iou = 0.0;
          for (std::size_t g = 0; g < gts.size(); ++g) {
            if (claimed[g]) continue;
            const double o = box_overlap(d->box, gts[g]);
            if (o >= all_thresholds[t] && (best < 0 || o > best_iou)) {
              best = static_cast<int>(g);
              best_iou = o;
            }
          }
          if (best >= 0) claimed[best] = 1;
          ranked[t].push_back({d->score, best >= 0});
        }
      }
    }

    std::vector<double> aps(all_thresholds.size()), recalls(all_thresholds.size());
    std::vector<std::vector<double>> pr(n_main);
    for (std::size_t t = 0; t < all_thresholds.size(); ++t) {
      std::vector<double> prec;
      score_curve(ranked[t], gt_total, points, &prec, &recalls[t]);
      double s = 0;
      for (double p : prec) s += p;
      aps[t] = s / points;
      if (t < n_main) pr[t] = prec;
    }
    double ap = 0, ar = 0;
    for (std::size_t t = 0; t < n_main; ++t) {
      ap += aps[t];
      ar += recalls[t];
    }
    ap /= static_cast<double>(n_main);
    ar /= static_cast<double>(n_main);
    report.per_class[label_of(cls, axis)] = {ap, ar, static_cast<std::size_t>(gt_total)};
    sum_map += ap;
    sum_ar += ar;
    sum50 += aps[n_main];
    sum75 += aps[n_main + 1];
    pr_by_class.push_back(std::move(pr));
  }
  const double n = static_cast<double>(classes.size());
  report.mAP = sum_map / n;
  report.AP50 = sum50 / n;
  report.AP75 = sum75 / n;
  report.AR = sum_ar / n;
  if (cfg.collect_pr) {
    for (std::size_t t = 0; t < n_main; ++t) {
      for (int i = 0; i < points; ++i) {
        double s = 0;
        for (const auto& pc : pr_by_class) s += pc[t][i];
        report.pr_points.push_back(
            {static_cast<double>(i) / static_cast<double>(points - 1), s / n,
             cfg.iou_thresholds[t]});
      }
    }
  }
  return report;
}

}  // namespace detfuse
