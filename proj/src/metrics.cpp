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

#include "detfuse/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <numeric>

#include "detfuse/error.hpp"
#include "json_util.hpp"

namespace detfuse {

namespace {

// Recall reached and interpolated precision at each recall point, for one
// class at one IoU threshold.
struct Curve {
  std::vector<double> precision;
  double recall = 0.0;
  double ap = 0.0;
};

struct ClassResult {
  int key = 0;
  std::size_t gt_count = 0;
  std::vector<Curve> curves;  // parallel to the evaluated threshold list
};

std::vector<double> recall_grid(std::size_t points) {
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

// Indices of `dets` ordered by descending score (stable), truncated to cap.
std::vector<std::size_t> ranked(std::span<const ScoredBox> dets, std::size_t cap) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  if (order.size() > cap) order.resize(cap);
  return order;
}

// Greedy assignment over a precomputed row-major iou matrix (dets x gt).
void match_into(std::span<const double> ious, std::size_t n_det, std::size_t n_gt,
                double iou_t, std::vector<char>& gt_taken, std::vector<char>& is_tp) {
  gt_taken.assign(n_gt, 0);
  is_tp.assign(n_det, 0);
  for (std::size_t d = 0; d < n_det; ++d) {
    std::ptrdiff_t best = -1;
    double best_iou = iou_t;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (gt_taken[g]) continue;
      const double v = ious[d * n_gt + g];
      if (v < iou_t) continue;
      if (best < 0 || v > best_iou) {
        best = static_cast<std::ptrdiff_t>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      gt_taken[static_cast<std::size_t>(best)] = 1;
      is_tp[d] = 1;
    }
  }
}

Curve make_curve(std::span<const char> tp_in_rank, std::size_t gt_count,
                 std::span<const double> grid) {
  Curve c;
  c.precision.assign(grid.size(), 0.0);
  const std::size_t n = tp_in_rank.size();
  if (gt_count == 0) return c;
  std::vector<double> rc(n), pr(n);
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    (tp_in_rank[k] ? tp : fp) += 1;
    rc[k] = static_cast<double>(tp) / static_cast<double>(gt_count);
    pr[k] = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  c.recall = n == 0 ? 0.0 : rc.back();
  for (std::size_t k = n; k-- > 1;) pr[k - 1] = std::max(pr[k - 1], pr[k]);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto it = std::lower_bound(rc.begin(), rc.end(), grid[i]);
    if (it != rc.end()) {
      c.precision[i] = pr[static_cast<std::size_t>(it - rc.begin())];
    }
    sum += c.precision[i];
  }
  c.ap = sum / static_cast<double>(grid.size());
  return c;
}

// Runs every threshold of `thresholds` over one class.
std::vector<Curve> class_curves(std::span<const ImageSlice> images,
                                std::span<const double> thresholds,
                                const EvalConfig& cfg, std::size_t* gt_count_out) {
  struct Ranked {
    double score;
    std::size_t image;
    std::size_t rank;
  };
  const std::vector<double> grid = recall_grid(cfg.recall_points);
  std::size_t gt_count = 0;
  std::vector<Ranked> all;
  // Per image, per threshold, tp flag of each ranked detection.
  std::vector<std::vector<std::vector<char>>> tp(images.size());
  std::vector<double> ious;
  std::vector<char> taken, flags;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const ImageSlice& img = images[i];
    gt_count += img.gt.size();
    const std::vector<std::size_t> order = ranked(img.dets, cfg.max_dets);
    ious.assign(order.size() * img.gt.size(), 0.0);
    for (std::size_t d = 0; d < order.size(); ++d) {
      all.push_back({img.dets[order[d]].score, i, d});
      for (std::size_t g = 0; g < img.gt.size(); ++g) {
        ious[d * img.gt.size() + g] = iou(img.dets[order[d]].box, img.gt[g]);
      }
    }
    tp[i].resize(thresholds.size());
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      match_into(ious, order.size(), img.gt.size(), thresholds[t], taken, flags);
      tp[i][t] = flags;
    }
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

  std::vector<Curve> curves;
  curves.reserve(thresholds.size());
  std::vector<char> seq(all.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    for (std::size_t k = 0; k < all.size(); ++k) seq[k] = tp[all[k].image][t][all[k].rank];
    curves.push_back(make_curve(seq, gt_count, grid));
  }
  if (gt_count_out) *gt_count_out = gt_count;
  return curves;
}

bool near(double a, double b) { return std::fabs(a - b) < 1e-12; }

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<double> EvalConfig::default_iou_thresholds() {
  std::vector<double> t(10);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.5 + 0.05 * static_cast<double>(i);
  return t;
}

void validate(const EvalConfig& cfg) {
  if (cfg.iou_thresholds.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "at least one IoU threshold is required");
  }
  for (std::size_t i = 0; i < cfg.iou_thresholds.size(); ++i) {
    const double t = cfg.iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0) || (i > 0 && !(t > cfg.iou_thresholds[i - 1]))) {
      throw Error(ErrorCode::kInvalidConfig,
                  "IoU thresholds must be strictly increasing within (0,1]");
    }
  }
  if (cfg.max_dets == 0) throw Error(ErrorCode::kInvalidConfig, "max_dets must be positive");
  if (cfg.recall_points < 2) {
    throw Error(ErrorCode::kInvalidConfig, "recall_points must be at least 2");
  }
  if (cfg.enumeration_classes != 8 && cfg.enumeration_classes != 32) {
    throw Error(ErrorCode::kInvalidConfig, "enumeration_classes must be 8 or 32");
  }
}

std::string_view axis_name(Axis axis) {
  switch (axis) {
    case Axis::kQuadrant: return "quadrant";
    case Axis::kEnumeration: return "enumeration";
    case Axis::kDisease: return "disease";
    case Axis::kAgnostic: return "agnostic";
  }
  return "unknown";
}

std::optional<Axis> axis_from_name(std::string_view name) {
  for (Axis a : {Axis::kQuadrant, Axis::kEnumeration, Axis::kDisease, Axis::kAgnostic}) {
    if (axis_name(a) == name) return a;
  }
  return std::nullopt;
}

std::vector<MatchRecord> greedy_match(std::span<const BoundingBox> gt,
                                      std::span<const ScoredBox> dets, double iou_t) {
  std::vector<double> ious(dets.size() * gt.size());
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t g = 0; g < gt.size(); ++g) ious[d * gt.size() + g] = iou(dets[d].box, gt[g]);
  }
  std::vector<char> taken(gt.size(), 0);
  std::vector<MatchRecord> out;
  out.reserve(dets.size());
  for (std::size_t d = 0; d < dets.size(); ++d) {
    MatchRecord r{d, std::nullopt, 0.0, iou_t, false};
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double v = ious[d * gt.size() + g];
      if (taken[g] || v < iou_t) continue;
      if (!r.gt || v > r.iou) {
        r.gt = g;
        r.iou = v;
      }
    }
    if (r.gt) {
      taken[*r.gt] = 1;
      r.is_true_positive = true;
    }
    out.push_back(r);
  }
  return out;
}

double average_precision(std::span<const ImageSlice> images, double iou_t,
                         const EvalConfig& cfg) {
  const double t[] = {iou_t};
  return class_curves(images, t, cfg, nullptr).front().ap;
}

double average_recall(std::span<const ImageSlice> images, const EvalConfig& cfg) {
  const std::vector<Curve> curves = class_curves(images, cfg.iou_thresholds, cfg, nullptr);
  double sum = 0.0;
  for (const Curve& c : curves) sum += c.recall;
  return sum / static_cast<double>(curves.size());
}

std::optional<int> class_key(const CategoryTriple& c, Axis axis, int enumeration_classes) {
  switch (axis) {
    case Axis::kQuadrant:
      return c.quadrant;
    case Axis::kEnumeration:
      if (enumeration_classes == 8) return c.enumeration;
      return c.fdi();
    case Axis::kDisease:
      if (!c.disease) return std::nullopt;
      return disease_index(*c.disease);
    case Axis::kAgnostic:
      return 0;
  }
  return std::nullopt;
}

std::string class_label(int key, Axis axis, int /*enumeration_classes*/) {
  switch (axis) {
    case Axis::kDisease:
      if (auto d = disease_from_index(key)) return std::string(disease_name(*d));
      break;
    case Axis::kAgnostic:
      return "all";
    default:
      break;
  }
  return std::to_string(key);
}

bool axis_available(const LabelSchema& schema, Axis axis) {
  switch (axis) {
    case Axis::kQuadrant: return schema.quadrant;
    case Axis::kEnumeration: return schema.enumeration;
    case Axis::kDisease: return schema.disease;
    case Axis::kAgnostic: return true;
  }
  return false;
}

EvaluationReport evaluate(const AnnotatedDataset& ds, std::span<const Detection> dets,
                          Axis axis, const EvalConfig& cfg) {
  validate(cfg);
  if (!axis_available(ds.label_schema, axis)) {
    throw Error(ErrorCode::kAxisUnavailable,
                std::string(axis_name(axis)) + " axis not present in ground truth (" +
                    ds.label_schema.name() + ")");
  }

  std::map<ImageId, std::size_t> image_pos;
  for (std::size_t i = 0; i < ds.images.size(); ++i) image_pos.emplace(ds.images[i].image_id, i);

  std::map<int, std::vector<ImageSlice>> slices;
  for (const auto& a : ds.annotations) {
    const auto key = class_key(a.category, axis, cfg.enumeration_classes);
    if (!key) continue;
    auto& per_image = slices[*key];
    if (per_image.empty()) per_image.resize(ds.images.size());
    per_image[image_pos.at(a.image_id)].gt.push_back(a.box);
  }
  for (const Detection& d : dets) {
    const auto key = class_key(d.category, axis, cfg.enumeration_classes);
    if (!key) continue;
    auto cls = slices.find(*key);
    auto pos = image_pos.find(d.image_id);
    if (cls == slices.end() || pos == image_pos.end()) continue;
    cls->second[pos->second].dets.push_back({d.box, d.score});
  }

  // Evaluated thresholds: the configured ones, then 0.5/0.75 when missing.
  std::vector<double> thresholds = cfg.iou_thresholds;
  auto locate = [&](double t) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (near(thresholds[i], t)) return i;
    }
    thresholds.push_back(t);
    return thresholds.size() - 1;
  };
  const std::size_t at50 = locate(0.5);
  const std::size_t at75 = locate(0.75);
  const std::size_t n_main = cfg.iou_thresholds.size();

  std::vector<std::pair<int, const std::vector<ImageSlice>*>> work;
  for (const auto& [key, imgs] : slices) work.emplace_back(key, &imgs);
  std::vector<ClassResult> results(work.size());
  auto run = [&](std::size_t i) {
    results[i].key = work[i].first;
    results[i].curves = class_curves(*work[i].second, thresholds, cfg, &results[i].gt_count);
  };
  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1 || work.size() < 2) {
    for (std::size_t i = 0; i < work.size(); ++i) run(i);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < threads; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < work.size(); i += threads) run(i);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  EvaluationReport report;
  report.axis = axis;
  if (results.empty()) return report;
  double map_sum = 0.0, ap50_sum = 0.0, ap75_sum = 0.0, ar_sum = 0.0;
  for (const ClassResult& r : results) {
    double ap = 0.0, ar = 0.0;
    for (std::size_t t = 0; t < n_main; ++t) {
      ap += r.curves[t].ap;
      ar += r.curves[t].recall;
    }
    ap /= static_cast<double>(n_main);
    ar /= static_cast<double>(n_main);
    report.per_class[class_label(r.key, axis, cfg.enumeration_classes)] = {ap, ar, r.gt_count};
    map_sum += ap;
    ar_sum += ar;
    ap50_sum += r.curves[at50].ap;
    ap75_sum += r.curves[at75].ap;
  }
  const double k = static_cast<double>(results.size());
  report.mAP = map_sum / k;
  report.AP50 = ap50_sum / k;
  report.AP75 = ap75_sum / k;
  report.AR = ar_sum / k;

  if (cfg.collect_pr) {
    const std::vector<double> grid = recall_grid(cfg.recall_points);
    for (std::size_t t = 0; t < n_main; ++t) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = 0.0;
        for (const ClassResult& r : results) s += r.curves[t].precision[i];
        report.pr_points.push_back({grid[i], s / k, cfg.iou_thresholds[t]});
      }
    }
  }
  return report;
}

std::string format_report_table(std::span<const EvaluationReport> reports) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %7s %7s %7s %7s\n", "axis", "mAP", "AP50",
                "AP75", "AR");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%-12s %7.3f %7.3f %7.3f %7.3f\n",
                  std::string(axis_name(r.axis)).c_str(), r.mAP, r.AP50, r.AP75, r.AR);
    out += line;
  }
  return out;
}

namespace {

detail::Json report_json(const EvaluationReport& r) {
  detail::Json j;
  j["axis"] = std::string(axis_name(r.axis));
  j["mAP"] = r.mAP;
  j["AP50"] = r.AP50;
  j["AP75"] = r.AP75;
  j["AR"] = r.AR;
  detail::Json per = detail::Json::object();
  for (const auto& [label, m] : r.per_class) {
    per[label] = {{"AP", m.ap}, {"AR", m.ar}, {"gt_count", m.gt_count}};
  }
  j["per_class"] = std::move(per);
  return j;
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string reports_to_json(std::span<const EvaluationReport> reports) {
  detail::Json arr = detail::Json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2) + "\n";
}

std::string pr_points_to_csv(const EvaluationReport& report) {
  std::string out = "recall,precision,iou_threshold\n";
  for (const PrPoint& p : report.pr_points) {
    out += fmt_double(p.recall) + "," + fmt_double(p.precision) + "," +
           fmt_double(p.iou_threshold) + "\n";
  }
  return out;
}

}  // namespace detfuse
