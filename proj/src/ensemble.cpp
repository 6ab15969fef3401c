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

#include "detfuse/ensemble.hpp"

#include <cmath>

#include "detfuse/error.hpp"

namespace detfuse {

void validate(const EnsembleConfig& cfg) {
  if (!std::isfinite(cfg.tau) || cfg.tau < 0.0 || cfg.tau > 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "ensemble tau must lie in [0,1]");
  }
}

EnsemblePartition partition_ensemble(const DetectionSet& primary,
                                     const DetectionSet& secondary,
                                     const EnsembleConfig& cfg) {
  validate(cfg);
  if (!cfg.allow_universe_mismatch && primary.image_universe != secondary.image_universe) {
    throw Error(ErrorCode::kUniverseMismatch,
                "primary covers " + std::to_string(primary.image_universe.size()) +
                    " images, secondary " +
                    std::to_string(secondary.image_universe.size()) +
                    "; the image sets differ");
  }
  EnsemblePartition p;
  for (std::size_t i = 0; i < primary.size(); ++i) {
    (primary.detections[i].score >= cfg.tau ? p.kept_primary : p.discarded_primary)
        .push_back(i);
  }
  for (std::size_t i = 0; i < secondary.size(); ++i) {
    (secondary.detections[i].score < cfg.tau ? p.kept_secondary : p.discarded_secondary)
        .push_back(i);
  }
  return p;
}

DetectionSet threshold_ensemble(const DetectionSet& primary,
                                const DetectionSet& secondary,
                                const EnsembleConfig& cfg) {
  const EnsemblePartition p = partition_ensemble(primary, secondary, cfg);
  DetectionSet out;
  out.source = Source::kFused;
  out.image_universe = primary.image_universe;
  out.image_universe.insert(secondary.image_universe.begin(),
                            secondary.image_universe.end());
  out.detections.reserve(p.kept_primary.size() + p.kept_secondary.size());
  for (std::size_t i : p.kept_primary) {
    out.detections.push_back(primary.detections[i]);
    out.detections.back().source = Source::kFused;
  }
  for (std::size_t i : p.kept_secondary) {
    out.detections.push_back(secondary.detections[i]);
    out.detections.back().source = Source::kFused;
  }
  return out;
}

}  // namespace detfuse
