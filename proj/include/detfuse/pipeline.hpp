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

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "detfuse/complementary.hpp"
#include "detfuse/ensemble.hpp"
#include "detfuse/integrate.hpp"
#include "detfuse/metrics.hpp"

namespace detfuse {

inline constexpr int kPipelineSchemaVersion = 1;

struct PipelinePaths {
  std::optional<std::filesystem::path> ground_truth;
  std::optional<std::filesystem::path> enumeration;
  std::optional<std::filesystem::path> diagnosis_a;
  std::optional<std::filesystem::path> diagnosis_b;
  std::optional<std::filesystem::path> classifications;
  std::filesystem::path output_dir = "detfuse_out";
};

struct PipelineConfig {
  PipelinePaths paths;
  EnsembleConfig ensemble;
  IntegrationConfig integration;
  double pad_fraction = 0.0;
  MergeConfig merge;
  EvalConfig eval;
  std::vector<Axis> axes = {Axis::kQuadrant, Axis::kEnumeration, Axis::kDisease};
};

// Threshold and range checks; raises kInvalidConfig.
void validate(const PipelineConfig& cfg);

PipelineConfig parse_pipeline_config_text(const std::string& text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string serialize_pipeline_config(const PipelineConfig& cfg);

// Failure inside a named stage; files written by earlier stages remain.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PipelineResult {
  std::vector<std::filesystem::path> stage_files;
  std::vector<std::filesystem::path> report_files;
  std::vector<EvaluationReport> reports;
  std::vector<std::string> warnings;
};

// File names written under output_dir.
inline constexpr const char* kFusedFile = "fused.json";
inline constexpr const char* kIntegratedFile = "integrated.json";
inline constexpr const char* kCropsFile = "crops.json";
inline constexpr const char* kFinalFile = "final.json";
std::string report_file_name(Axis axis);

// ensemble -> integrate -> complement -> evaluate, writing every
// intermediate artifact. Stages whose inputs are absent are skipped with a
// warning.
PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream& log);

}  // namespace detfuse
