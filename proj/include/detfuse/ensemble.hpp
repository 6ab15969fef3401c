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
#include <vector>

#include "detfuse/types.hpp"

namespace detfuse {

struct EnsembleConfig {
  double tau = 0.05;
  Source primary_source = Source::kDiagnosisA;
  Source secondary_source = Source::kDiagnosisB;
  // When false, differing image universes raise kUniverseMismatch.
  bool allow_universe_mismatch = false;
};

// Index-level view of the threshold rule: every input detection lands in
// exactly one of the kept/discarded lists of its stream.
struct EnsemblePartition {
  std::vector<std::size_t> kept_primary;
  std::vector<std::size_t> discarded_primary;
  std::vector<std::size_t> kept_secondary;
  std::vector<std::size_t> discarded_secondary;
};

void validate(const EnsembleConfig& cfg);

EnsemblePartition partition_ensemble(const DetectionSet& primary,
                                     const DetectionSet& secondary,
                                     const EnsembleConfig& cfg);

// Primary detections scoring >= tau followed by secondary detections scoring
// < tau, unchanged except for the source tag, which becomes kFused.
DetectionSet threshold_ensemble(const DetectionSet& primary,
                                const DetectionSet& secondary,
                                const EnsembleConfig& cfg);

}  // namespace detfuse
