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

#include "detfuse/integrate.hpp"

#include <cmath>
#include <map>

#include "detfuse/error.hpp"

namespace detfuse {

void validate(const IntegrationConfig& cfg) {
  if (!std::isfinite(cfg.enum_score_gate) || cfg.enum_score_gate < 0.0 ||
      cfg.enum_score_gate > 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "enumeration score gate must lie in [0,1]");
  }
  if (cfg.max_match_distance &&
      (!(*cfg.max_match_distance > 0.0) || std::isnan(*cfg.max_match_distance))) {
    throw Error(ErrorCode::kInvalidConfig, "max_match_distance must be positive");
  }
}

DetectionSet filter_enumeration(const DetectionSet& enums, double gate) {
  DetectionSet out;
  out.source = enums.source;
  out.image_universe = enums.image_universe;
  for (const Detection& d : enums.detections) {
    if (d.score > gate) out.detections.push_back(d);
  }
  return out;
}

std::vector<CenterMatch> match_closest_center(const DetectionSet& enums,
                                              const DetectionSet& diags,
                                              const IntegrationConfig& cfg) {
  std::map<ImageId, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < enums.size(); ++i) {
    by_image[enums.detections[i].image_id].push_back(i);
  }

  std::vector<CenterMatch> matches;
  matches.reserve(diags.size());
  for (std::size_t di = 0; di < diags.size(); ++di) {
    const Detection& diag = diags.detections[di];
    CenterMatch m{di, std::nullopt};
    double best_dist = 0.0;
    if (auto it = by_image.find(diag.image_id); it != by_image.end()) {
      // Candidates are visited in index order, so keeping the incumbent on a
      // full tie leaves the lower index.
      for (std::size_t ei : it->second) {
        const double dist = center_distance(diag.box, enums.detections[ei].box);
        if (!m.enum_index || dist < best_dist ||
            (dist == best_dist &&
             enums.detections[ei].score > enums.detections[*m.enum_index].score)) {
          m.enum_index = ei;
          best_dist = dist;
        }
      }
    }
    if (m.enum_index && cfg.max_match_distance && best_dist > *cfg.max_match_distance) {
      m.enum_index.reset();
    }
    matches.push_back(m);
  }
  return matches;
}

std::vector<IntegratedDetection> integrate(const DetectionSet& enums,
                                           const DetectionSet& diags,
                                           const IntegrationConfig& cfg) {
  validate(cfg);
  // Gate while remembering each survivor's index in `enums`.
  DetectionSet gated;
  gated.source = enums.source;
  std::vector<std::size_t> original;
  for (std::size_t i = 0; i < enums.size(); ++i) {
    if (enums.detections[i].score > cfg.enum_score_gate) {
      gated.detections.push_back(enums.detections[i]);
      original.push_back(i);
    }
  }

  const std::vector<CenterMatch> matches = match_closest_center(gated, diags, cfg);
  std::vector<IntegratedDetection> out;
  out.reserve(diags.size());
  for (const CenterMatch& m : matches) {
    const Detection& diag = diags.detections[m.diag_index];
    if (!diag.category.disease) {
      throw Error(ErrorCode::kInvalidCategory,
                  "diagnosis detection " + std::to_string(m.diag_index) +
                      " has no disease label");
    }
    IntegratedDetection item;
    item.image_id = diag.image_id;
    item.box = diag.box;
    item.category.disease = diag.category.disease;
    if (m.enum_index) {
      const Detection& tooth = gated.detections[*m.enum_index];
      item.category.quadrant = tooth.category.quadrant;
      item.category.enumeration = tooth.category.enumeration;
      item.score = tooth.score * diag.score;
      item.matched_enum = original[*m.enum_index];
    } else if (cfg.unmatched_policy == UnmatchedPolicy::kKeepWithoutEnumeration) {
      item.score = diag.score;
    } else {
      continue;
    }
    out.push_back(item);
  }
  return out;
}

std::vector<Detection> to_detections(std::span<const IntegratedDetection> items) {
  std::vector<Detection> out;
  out.reserve(items.size());
  for (const auto& it : items) {
    out.push_back({it.image_id, it.box, it.score, it.category, it.source});
  }
  return out;
}

std::vector<IntegratedDetection> from_detections(std::span<const Detection> dets) {
  std::vector<IntegratedDetection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) {
    out.push_back({d.image_id, d.box, d.score, d.category, std::nullopt, d.source});
  }
  return out;
}

}  // namespace detfuse
