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

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "detfuse/cli.hpp"
#include "detfuse/complementary.hpp"
#include "detfuse/ensemble.hpp"
#include "detfuse/error.hpp"
#include "detfuse/ingestion.hpp"
#include "detfuse/integrate.hpp"
#include "detfuse/metrics.hpp"
#include "detfuse/pipeline.hpp"
#include "detfuse/synth.hpp"

namespace py = pybind11;
using namespace detfuse;

namespace {

std::string repr_box(const BoundingBox& b) {
  std::ostringstream os;
  os << "BoundingBox(" << b.x << ", " << b.y << ", " << b.w << ", " << b.h << ")";
  return os.str();
}

py::dict report_dict(const EvaluationReport& r) {
  py::dict d;
  d["axis"] = std::string(axis_name(r.axis));
  d["mAP"] = r.mAP;
  d["AP50"] = r.AP50;
  d["AP75"] = r.AP75;
  d["AR"] = r.AR;
  py::dict per;
  for (const auto& [label, m] : r.per_class) {
    py::dict c;
    c["AP"] = m.ap;
    c["AR"] = m.ar;
    c["gt_count"] = m.gt_count;
    per[py::str(label)] = c;
  }
  d["per_class"] = per;
  return d;
}

Axis axis_arg(const std::string& name) {
  auto a = axis_from_name(name);
  if (!a) throw py::value_error("unknown axis '" + name + "'");
  return *a;
}

}  // namespace

PYBIND11_MODULE(_detfuse, m) {
  m.doc() = "Detection fusion and COCO-style evaluation for dental panoramic findings";

  auto& base_error = py::register_exception<Error>(m, "DetfuseError", PyExc_RuntimeError);
  py::register_exception<StageError>(m, "StageError", base_error.ptr());

  py::enum_<Disease>(m, "Disease")
      .value("CARIES", Disease::kCaries)
      .value("DEEP_CARIES", Disease::kDeepCaries)
      .value("IMPACTED", Disease::kImpacted)
      .value("PERIAPICAL_LESION", Disease::kPeriapicalLesion);

  py::enum_<Source>(m, "Source")
      .value("ENUMERATION", Source::kEnumerationModel)
      .value("DIAGNOSIS_A", Source::kDiagnosisA)
      .value("DIAGNOSIS_B", Source::kDiagnosisB)
      .value("COMPLEMENTARY", Source::kComplementary)
      .value("FUSED", Source::kFused);

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<>())
      .def(py::init([](double x, double y, double w, double h) { return BoundingBox{x, y, w, h}; }),
           py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("x", &BoundingBox::x)
      .def_readwrite("y", &BoundingBox::y)
      .def_readwrite("w", &BoundingBox::w)
      .def_readwrite("h", &BoundingBox::h)
      .def("area", &BoundingBox::area)
      .def(py::self == py::self)
      .def("__repr__", &repr_box);

  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def("center_distance", &center_distance, py::arg("a"), py::arg("b"));

  py::class_<CategoryTriple>(m, "CategoryTriple")
      .def(py::init([](std::optional<int> q, std::optional<int> t, std::optional<Disease> d) {
             return CategoryTriple{q, t, d};
           }),
           py::arg("quadrant") = py::none(), py::arg("tooth") = py::none(), py::arg("disease") = py::none())
      .def_readwrite("quadrant", &CategoryTriple::quadrant)
      .def_readwrite("tooth", &CategoryTriple::enumeration)
      .def_readwrite("disease", &CategoryTriple::disease)
      .def("fdi", &CategoryTriple::fdi)
      .def(py::self == py::self);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](ImageId image, BoundingBox box, double score, CategoryTriple cat, Source src) {
             return Detection{image, box, score, cat, src};
           }),
           py::arg("image_id"), py::arg("box"), py::arg("score"), py::arg("category") = CategoryTriple{},
           py::arg("source") = Source::kFused)
      .def_readwrite("image_id", &Detection::image_id)
      .def_readwrite("box", &Detection::box)
      .def_readwrite("score", &Detection::score)
      .def_readwrite("category", &Detection::category)
      .def_readwrite("source", &Detection::source)
      .def(py::self == py::self);

  py::class_<DetectionSet>(m, "DetectionSet")
      .def(py::init([](std::vector<Detection> d, Source s) { return make_detection_set(std::move(d), s); }),
           py::arg("detections"), py::arg("source") = Source::kFused)
      .def_readwrite("detections", &DetectionSet::detections)
      .def_readwrite("source", &DetectionSet::source)
      .def_readwrite("image_universe", &DetectionSet::image_universe)
      .def("__len__", &DetectionSet::size);

  py::class_<AnnotatedImage>(m, "AnnotatedImage")
      .def_readonly("image_id", &AnnotatedImage::image_id)
      .def_readonly("width", &AnnotatedImage::width)
      .def_readonly("height", &AnnotatedImage::height)
      .def_readonly("file_name", &AnnotatedImage::file_name);

  py::class_<GroundTruthAnnotation>(m, "GroundTruthAnnotation")
      .def_readonly("annotation_id", &GroundTruthAnnotation::annotation_id)
      .def_readonly("image_id", &GroundTruthAnnotation::image_id)
      .def_readonly("box", &GroundTruthAnnotation::box)
      .def_readonly("category", &GroundTruthAnnotation::category);

  py::class_<AnnotatedDataset>(m, "AnnotatedDataset")
      .def_readonly("images", &AnnotatedDataset::images)
      .def_readonly("annotations", &AnnotatedDataset::annotations)
      .def_readonly("warnings", &AnnotatedDataset::warnings)
      .def_property_readonly("label_schema",
                             [](const AnnotatedDataset& d) { return d.label_schema.name(); });

  m.def("load_ground_truth", [](const std::filesystem::path& p) { return parse_ground_truth(p); },
        py::arg("path"));
  m.def("load_detections",
        [](const std::filesystem::path& p, Source s) { return parse_detections(p, s); }, py::arg("path"),
        py::arg("source") = Source::kFused);
  m.def("save_detections",
        [](const DetectionSet& d, const std::filesystem::path& p) { write_detections(d.detections, p); },
        py::arg("detections"), py::arg("path"));
  m.def("save_ground_truth", &write_ground_truth, py::arg("dataset"), py::arg("path"));

  m.def(
      "threshold_ensemble",
      [](const DetectionSet& a, const DetectionSet& b, double tau, bool allow_mismatch) {
        EnsembleConfig cfg;
        cfg.tau = tau;
        cfg.allow_universe_mismatch = allow_mismatch;
        return threshold_ensemble(a, b, cfg);
      },
      py::arg("primary"), py::arg("secondary"), py::arg("tau") = 0.05, py::arg("allow_mismatch") = false);

  m.def(
      "integrate",
      [](const DetectionSet& enums, const DetectionSet& diags, double gate, std::optional<double> max_distance,
         bool keep_unmatched) {
        IntegrationConfig cfg;
        cfg.enum_score_gate = gate;
        cfg.max_match_distance = max_distance;
        cfg.unmatched_policy = keep_unmatched ? UnmatchedPolicy::kKeepWithoutEnumeration : UnmatchedPolicy::kDrop;
        validate(cfg);
        auto out = integrate(enums, diags, cfg);
        return make_detection_set(to_detections(out), Source::kFused);
      },
      py::arg("enums"), py::arg("diags"), py::arg("gate") = 0.7, py::arg("max_distance") = py::none(),
      py::arg("keep_unmatched") = true);

  m.def(
      "evaluate",
      [](const AnnotatedDataset& gt, const DetectionSet& dets, const std::string& axis, std::size_t max_dets,
         int enumeration_classes, unsigned threads) {
        EvalConfig cfg;
        cfg.max_dets = max_dets;
        cfg.enumeration_classes = enumeration_classes;
        cfg.threads = threads;
        EvaluationReport r;
        {
          py::gil_scoped_release release;
          r = evaluate(gt, dets.detections, axis_arg(axis), cfg);
        }
        return report_dict(r);
      },
      py::arg("gt"), py::arg("dets"), py::arg("axis") = "disease", py::arg("max_dets") = 100,
      py::arg("enumeration_classes") = 32, py::arg("threads") = 1);

  m.def(
      "generate_scene",
      [](std::size_t images, std::uint64_t seed, double missing_teeth_rate, bool diagnosis_only) {
        ScenePlan plan;
        plan.image_count = images;
        plan.seed = seed;
        plan.missing_teeth_rate = missing_teeth_rate;
        AnnotatedDataset ds = generate_scene(plan);
        return diagnosis_only ? diagnosis_view(ds) : ds;
      },
      py::arg("images") = 10, py::arg("seed") = 0, py::arg("missing_teeth_rate") = 0.1,
      py::arg("diagnosis_only") = false);

  m.def(
      "simulate_detector",
      [](const AnnotatedDataset& ds, const std::string& profile, std::uint64_t seed) {
        return simulate_detector(ds, load_detector_profile(profile), seed);
      },
      py::arg("dataset"), py::arg("profile"), py::arg("seed") = 0);
  m.def("builtin_profiles", &builtin_profile_names);

  m.def(
      "oversample_plan",
      [](const AnnotatedDataset& ds) {
        const BalancePlan p = oversample_plan(audit_balance(ds).counts);
        py::dict out;
        for (Disease d : kAllDiseases) {
          py::dict row;
          row["count"] = p.counts.at(d);
          row["multiplier"] = p.multipliers.at(d);
          row["planned"] = p.planned(d);
          out[py::str(std::string(disease_name(d)))] = row;
        }
        return out;
      },
      py::arg("dataset"));

  m.def(
      "split_ids",
      [](const std::vector<ImageId>& ids, std::size_t train, std::size_t val, std::size_t test, std::uint64_t seed) {
        const IdSplit s = split_ids(ids, SplitSpec{train, val, test, seed});
        return py::make_tuple(s.train, s.val, s.test);
      },
      py::arg("ids"), py::arg("train"), py::arg("val"), py::arg("test"), py::arg("seed") = 0);

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config) {
        std::ostringstream log;
        PipelineConfig cfg;
        try {
          cfg = load_pipeline_config(config);
        } catch (const Error& e) {
          throw StageError("config", e.what());
        }
        const PipelineResult r = run_pipeline(cfg, log);
        py::list reports;
        for (const auto& rep : r.reports) reports.append(report_dict(rep));
        py::dict out;
        out["reports"] = reports;
        out["warnings"] = r.warnings;
        out["stage_files"] = r.stage_files;
        out["log"] = log.str();
        return out;
      },
      py::arg("config"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
