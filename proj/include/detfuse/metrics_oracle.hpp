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

#include <span>

#include "detfuse/metrics.hpp"

namespace detfuse {

// Reference evaluator written with plain per-image loops. It shares no code
// with evaluate() (including IoU and class bucketing) so the two can be
// compared against each other.
EvaluationReport naive_oracle_evaluate(const AnnotatedDataset& ds,
                                       std::span<const Detection> dets,
                                       Axis axis, const EvalConfig& cfg = {});

}  // namespace detfuse
