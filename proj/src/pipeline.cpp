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

#include "detfuse/pipeline.hpp"

#include <cmath>

#include "detfuse/error.hpp"
#include "detfuse/ingestion.hpp"
#include "json_util.hpp"

namespace detfuse {

using detail::Json;

std::string report_file_name(Axis axis) {
  return "report_" + std::string(axis_name(axis)) + ".json";
}

void validate(const PipelineConfig& cfg) {
  validate(cfg.ensemble);
  validate(cfg.integration);
  validate(cfg.merge);
  validate(cfg.eval);
  if (!std::isfinite(cfg.pad_fraction) || cfg.pad_fraction < 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "pad_fraction must be non-negative");
  }
}

namespace {

std::optional<std::filesystem::path> optional_path(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedFile, std::string("paths.") + key + " must be a string");
  }
  return std::filesystem::path(it->get<std::string>());
}

double number_or(const Json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return detail::as_number(*it, key);
}

const Json& section(const Json& root, const char* key) {
  static const Json empty = Json::object();
  auto it = root.find(key);
  if (it == root.end()) return empty;
  if (!it->is_object()) {
    throw Error(ErrorCode::kMalformedFile, std::string(key) + " must be an object");
  }
  return *it;
}

}  // namespace

namespace {

PipelineConfig parse_pipeline_config_text_impl(const std::string& text) {
  const Json root = detail::parse_json(text, "pipeline config");
  if (!root.is_object()) {
    throw Error(ErrorCode::kMalformedFile, "pipeline config: expected an object");
  }
  const std::int64_t version =
      detail::as_int(detail::require(root, "schema_version", "pipeline config"), "schema_version");
  if (version != kPipelineSchemaVersion) {
    throw Error(ErrorCode::kInvalidConfig,
                "unsupported schema_version " + std::to_string(version));
  }

  PipelineConfig cfg;
  const Json& paths = section(root, "paths");
  cfg.paths.ground_truth = optional_path(paths, "gt");
  cfg.paths.enumeration = optional_path(paths, "enumeration");
  cfg.paths.diagnosis_a = optional_path(paths, "diagnosis_a");
  cfg.paths.diagnosis_b = optional_path(paths, "diagnosis_b");
  cfg.paths.classifications = optional_path(paths, "classifications");
  if (auto out = optional_path(paths, "output_dir")) cfg.paths.output_dir = *out;

  const Json& ens = section(root, "ensemble");
  cfg.ensemble.tau = number_or(ens, "tau", cfg.ensemble.tau);
  if (auto it = ens.find("allow_universe_mismatch"); it != ens.end()) {
    cfg.ensemble.allow_universe_mismatch = it->get<bool>();
  }

  const Json& integ = section(root, "integration");
  cfg.integration.enum_score_gate = number_or(integ, "enum_score_gate", 0.7);
  if (auto it = integ.find("max_match_distance"); it != integ.end() && !it->is_null()) {
    cfg.integration.max_match_distance = detail::as_number(*it, "max_match_distance");
  }
  if (auto it = integ.find("unmatched_policy"); it != integ.end()) {
    const std::string policy = it->get<std::string>();
    if (policy == "drop") {
      cfg.integration.unmatched_policy = UnmatchedPolicy::kDrop;
    } else if (policy == "keep-without-enumeration" || policy == "keep") {
      cfg.integration.unmatched_policy = UnmatchedPolicy::kKeepWithoutEnumeration;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown unmatched_policy '" + policy + "'");
    }
  }

  const Json& comp = section(root, "complementary");
  cfg.pad_fraction = number_or(comp, "pad_fraction", cfg.pad_fraction);
  cfg.merge.overlap_iou = number_or(comp, "overlap_iou", cfg.merge.overlap_iou);
  cfg.merge.min_confidence = number_or(comp, "min_confidence", cfg.merge.min_confidence);

  const Json& ev = section(root, "evaluation");
  if (auto it = ev.find("axes"); it != ev.end()) {
    cfg.axes.clear();
    for (const Json& a : *it) {
      auto axis = axis_from_name(a.get<std::string>());
      if (!axis) throw Error(ErrorCode::kInvalidConfig, "unknown axis '" + a.get<std::string>() + "'");
      cfg.axes.push_back(*axis);
    }
  }
  if (auto it = ev.find("max_dets"); it != ev.end()) {
    cfg.eval.max_dets = static_cast<std::size_t>(detail::as_int(*it, "max_dets"));
  }
  if (auto it = ev.find("enumeration_classes"); it != ev.end()) {
    cfg.eval.enumeration_classes = static_cast<int>(detail::as_int(*it, "enumeration_classes"));
  }
  if (auto it = ev.find("iou_thresholds"); it != ev.end()) {
    cfg.eval.iou_thresholds.clear();
    for (const Json& t : *it) cfg.eval.iou_thresholds.push_back(detail::as_number(t, "iou_thresholds"));
  }
  validate(cfg);
  return cfg;
}

}  // namespace

PipelineConfig parse_pipeline_config_text(const std::string& text) {
  try {
    return parse_pipeline_config_text_impl(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config_text(read_text_file(path));
}

std::string serialize_pipeline_config(const PipelineConfig& cfg) {
  auto path_json = [](const std::optional<std::filesystem::path>& p) -> Json {
    if (!p) return nullptr;
    return p->string();
  };
  Json j;
  j["schema_version"] = kPipelineSchemaVersion;
  j["paths"] = {{"gt", path_json(cfg.paths.ground_truth)},
                {"enumeration", path_json(cfg.paths.enumeration)},
                {"diagnosis_a", path_json(cfg.paths.diagnosis_a)},
                {"diagnosis_b", path_json(cfg.paths.diagnosis_b)},
                {"classifications", path_json(cfg.paths.classifications)},
                {"output_dir", cfg.paths.output_dir.string()}};
  j["ensemble"] = {{"tau", cfg.ensemble.tau},
                   {"allow_universe_mismatch", cfg.ensemble.allow_universe_mismatch}};
  Json integ;
  integ["enum_score_gate"] = cfg.integration.enum_score_gate;
  integ["max_match_distance"] =
      cfg.integration.max_match_distance ? Json(*cfg.integration.max_match_distance) : Json(nullptr);
  integ["unmatched_policy"] = cfg.integration.unmatched_policy == UnmatchedPolicy::kDrop
                                  ? "drop"
                                  : "keep-without-enumeration";
  j["integration"] = std::move(integ);
  j["complementary"] = {{"pad_fraction", cfg.pad_fraction},
                        {"overlap_iou", cfg.merge.overlap_iou},
                        {"min_confidence", cfg.merge.min_confidence}};
  Json axes = Json::array();
  for (Axis a : cfg.axes) axes.push_back(std::string(axis_name(a)));
  j["evaluation"] = {{"axes", axes},
                     {"max_dets", cfg.eval.max_dets},
                     {"enumeration_classes", cfg.eval.enumeration_classes},
                     {"iou_thresholds", cfg.eval.iou_thresholds}};
  return j.dump(2) + "\n";
}

PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream& log) {
  try {
    validate(cfg);
  } catch (const Error& e) {
    throw StageError("config", e.what());
  }

  PipelineResult result;
  auto warn = [&](const std::string& msg) {
    result.warnings.push_back(msg);
    log << "warning: " << msg << "\n";
  };
  const std::filesystem::path& out_dir = cfg.paths.output_dir;
  std::string stage = "load";
  try {
    std::filesystem::create_directories(out_dir);

    std::optional<AnnotatedDataset> gt;
    if (cfg.paths.ground_truth) {
      gt = parse_ground_truth(*cfg.paths.ground_truth);
      for (const auto& w : gt->warnings) warn(w);
    }
    auto widen = [&](DetectionSet& set) {
      if (gt) {
        const auto ids = gt->image_ids();
        set.image_universe.insert(ids.begin(), ids.end());
      }
    };

    stage = "ensemble";
    if (!cfg.paths.diagnosis_a) throw Error(ErrorCode::kInvalidConfig, "paths.diagnosis_a is required");
    DetectionSet diag_a = parse_detections(*cfg.paths.diagnosis_a, Source::kDiagnosisA);
    widen(diag_a);
    DetectionSet fused;
    if (cfg.paths.diagnosis_b) {
      DetectionSet diag_b = parse_detections(*cfg.paths.diagnosis_b, Source::kDiagnosisB);
      widen(diag_b);
      fused = threshold_ensemble(diag_a, diag_b, cfg.ensemble);
    } else {
      warn("no diagnosis_b detections; ensemble passes diagnosis_a through");
      fused = diag_a;
      fused.source = Source::kFused;
      for (auto& d : fused.detections) d.source = Source::kFused;
    }
    result.stage_files.push_back(out_dir / kFusedFile);
    write_detections(fused.detections, result.stage_files.back());

    stage = "integrate";
    DetectionSet enums;
    enums.source = Source::kEnumerationModel;
    if (cfg.paths.enumeration) {
      enums = parse_detections(*cfg.paths.enumeration, Source::kEnumerationModel);
    } else {
      warn("no enumeration detections; every diagnosis box stays unmatched");
    }
    const std::vector<IntegratedDetection> integrated = integrate(enums, fused, cfg.integration);
    result.stage_files.push_back(out_dir / kIntegratedFile);
    write_detections(to_detections(integrated), result.stage_files.back());

    stage = "complement";
    std::vector<IntegratedDetection> final_dets = integrated;
    if (!cfg.paths.classifications) {
      warn("no classifier outputs; complementary stage skipped");
    } else if (!gt) {
      warn("complementary stage needs ground-truth images for crop bounds; skipped");
    } else {
      const DetectionSet gated = filter_enumeration(enums, cfg.integration.enum_score_gate);
      const std::vector<CropAssignment> crops = assign_crops(gated, gt->images, cfg.pad_fraction);
      result.stage_files.push_back(out_dir / kCropsFile);
      write_text_file(result.stage_files.back(), serialize_crops(crops));
      const auto cls = parse_classifications(*cfg.paths.classifications);
      const DetectionSet comp = classifications_to_detections(crops, cls, cfg.merge.min_confidence);
      final_dets = merge_complementary(integrated, comp, cfg.merge);
    }
    result.stage_files.push_back(out_dir / kFinalFile);
    const std::vector<Detection> final_list = to_detections(final_dets);
    write_detections(final_list, result.stage_files.back());

    stage = "evaluate";
    if (!gt) {
      warn("no ground truth; evaluation skipped");
    } else {
      for (Axis axis : cfg.axes) {
        result.reports.push_back(evaluate(*gt, final_list, axis, cfg.eval));
        result.report_files.push_back(out_dir / report_file_name(axis));
        write_text_file(result.report_files.back(), report_to_json(result.reports.back()));
      }
      log << format_report_table(result.reports);
    }
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw StageError(stage, e.what());
  }
  return result;
}

}  // namespace detfuse
