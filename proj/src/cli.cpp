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

#include "detfuse/cli.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "detfuse/complementary.hpp"
#include "detfuse/ensemble.hpp"
#include "detfuse/error.hpp"
#include "detfuse/ingestion.hpp"
#include "detfuse/integrate.hpp"
#include "detfuse/metrics.hpp"
#include "detfuse/pipeline.hpp"
#include "detfuse/synth.hpp"

namespace detfuse {

namespace {

struct Options {
  unsigned threads = 1;

  struct {
    std::string primary, secondary, out;
    double tau = 0.05;
    bool allow_mismatch = false;
  } ensemble;

  struct {
    std::string enums, diag, out;
    double gate = 0.7;
    std::optional<double> max_distance;
    std::string unmatched = "keep";
  } integrate;

  struct {
    std::string enums, gt, out;
    double gate = 0.7;
    double pad = 0.0;
  } crops;

  struct {
    std::string enums, cls, integrated, gt, out, crops_out;
    double gate = 0.7;
    double pad = 0.0;
    double overlap_iou = 0.5;
    double min_confidence = 0.5;
  } complement;

  struct {
    std::string gt, cls, report_json;
    std::vector<std::string> boost;
  } balance;

  struct {
    std::string gt, dets, pr_csv, report_json;
    std::vector<std::string> axes{"disease"};
    int enum_classes = 32;
    std::size_t max_dets = 100;
  } evaluate;

  struct {
    std::string plan, profile = "perfect", out_gt, out_dets, gt_view = "full";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> images;
    std::string crops, out_cls;
    double accuracy = 1.0;
    double confidence = 0.9;
  } synth;

  struct {
    std::optional<std::size_t> n;
    std::string gt, counts, out_dir = ".";
    std::uint64_t seed = 0;
  } split;

  struct {
    std::string config;
  } pipeline;
};

std::string balance_table(const BalancePlan& plan) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof(line), "%-18s %8s %10s %8s\n", "class", "count", "multiplier",
                "planned");
  os << line;
  for (Disease d : kAllDiseases) {
    const int mult = plan.multipliers.count(d) ? plan.multipliers.at(d) : 1;
    const std::size_t count = plan.counts.count(d) ? plan.counts.at(d) : 0;
    std::snprintf(line, sizeof(line), "%-18s %8zu %10d %8zu\n",
                  std::string(disease_name(d)).c_str(), count, mult, plan.planned(d));
    os << line;
  }
  return os.str();
}

std::string balance_json(const BalancePlan& plan) {
  std::ostringstream os;
  os << "{\n";
  bool first = true;
  for (Disease d : kAllDiseases) {
    os << (first ? "" : ",\n") << "  \"" << disease_name(d) << "\": {\"count\": "
       << plan.counts.at(d) << ", \"multiplier\": " << plan.multipliers.at(d)
       << ", \"planned\": " << plan.planned(d) << "}";
    first = false;
  }
  os << "\n}\n";
  return os.str();
}

std::map<Disease, int> parse_boost(const std::vector<std::string>& specs) {
  std::map<Disease, int> boost = default_boost();
  for (const std::string& s : specs) {
    const auto eq = s.find('=');
    const auto d = disease_from_name(s.substr(0, eq));
    if (eq == std::string::npos || !d) {
      throw CLI::ValidationError("--boost", "expected <disease>=<multiplier>, got '" + s + "'");
    }
    boost[*d] = std::stoi(s.substr(eq + 1));
  }
  return boost;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> counts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v < 0) throw std::invalid_argument(part);
      counts.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--counts", "'" + part + "' is not a count");
    }
  }
  if (counts.size() != 3) throw CLI::ValidationError("--counts", "expected train,val,test");
  return counts;
}

void write_id_list(const std::filesystem::path& path, const std::vector<ImageId>& ids) {
  std::string text;
  for (ImageId id : ids) text += std::to_string(id) + "\n";
  write_text_file(path, text);
}

int cmd_ensemble(const Options& o, std::ostream&) {
  const DetectionSet primary = parse_detections(o.ensemble.primary, Source::kDiagnosisA);
  const DetectionSet secondary = parse_detections(o.ensemble.secondary, Source::kDiagnosisB);
  EnsembleConfig cfg;
  cfg.tau = o.ensemble.tau;
  cfg.allow_universe_mismatch = o.ensemble.allow_mismatch;
  write_detections(threshold_ensemble(primary, secondary, cfg).detections, o.ensemble.out);
  return kExitOk;
}

UnmatchedPolicy parse_policy(const std::string& s) {
  return s == "drop" ? UnmatchedPolicy::kDrop : UnmatchedPolicy::kKeepWithoutEnumeration;
}

int cmd_integrate(const Options& o, std::ostream&) {
  const DetectionSet enums = parse_detections(o.integrate.enums, Source::kEnumerationModel);
  const DetectionSet diags = parse_detections(o.integrate.diag, Source::kFused);
  IntegrationConfig cfg;
  cfg.enum_score_gate = o.integrate.gate;
  cfg.max_match_distance = o.integrate.max_distance;
  cfg.unmatched_policy = parse_policy(o.integrate.unmatched);
  write_detections(to_detections(integrate(enums, diags, cfg)), o.integrate.out);
  return kExitOk;
}

std::vector<CropAssignment> crops_for(const std::string& enum_path, const std::string& gt_path,
                                      double gate, double pad) {
  const DetectionSet enums = parse_detections(enum_path, Source::kEnumerationModel);
  const AnnotatedDataset gt = parse_ground_truth(gt_path);
  return assign_crops(filter_enumeration(enums, gate), gt.images, pad);
}

int cmd_crops(const Options& o, std::ostream&) {
  const auto crops = crops_for(o.crops.enums, o.crops.gt, o.crops.gate, o.crops.pad);
  write_text_file(o.crops.out, serialize_crops(crops));
  return kExitOk;
}

int cmd_complement(const Options& o, std::ostream&) {
  const auto& c = o.complement;
  const auto crops = crops_for(c.enums, c.gt, c.gate, c.pad);
  if (!c.crops_out.empty()) write_text_file(c.crops_out, serialize_crops(crops));
  const auto cls = parse_classifications(c.cls);
  const DetectionSet comp = classifications_to_detections(crops, cls, c.min_confidence);
  const DetectionSet integrated_set = parse_detections(c.integrated, Source::kFused);
  const auto integrated = from_detections(integrated_set.detections);
  MergeConfig merge{c.overlap_iou, c.min_confidence};
  write_detections(to_detections(merge_complementary(integrated, comp, merge)), c.out);
  return kExitOk;
}

int cmd_balance(const Options& o, std::ostream& out) {
  BalancePlan audited;
  if (!o.balance.gt.empty()) {
    audited = audit_balance(parse_ground_truth(o.balance.gt));
  } else {
    audited = audit_balance(parse_classifications(o.balance.cls));
  }
  const BalancePlan plan = oversample_plan(audited.counts, parse_boost(o.balance.boost));
  out << balance_table(plan);
  if (!o.balance.report_json.empty()) write_text_file(o.balance.report_json, balance_json(plan));
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const AnnotatedDataset gt = parse_ground_truth(o.evaluate.gt);
  const DetectionSet dets = parse_detections(o.evaluate.dets, Source::kFused);
  EvalConfig cfg;
  cfg.enumeration_classes = o.evaluate.enum_classes;
  cfg.max_dets = o.evaluate.max_dets;
  cfg.threads = o.threads;
  cfg.collect_pr = !o.evaluate.pr_csv.empty();
  std::vector<Axis> axes;
  for (const std::string& name : o.evaluate.axes) {
    if (name == "all") {
      axes = {Axis::kQuadrant, Axis::kEnumeration, Axis::kDisease};
      break;
    }
    axes.push_back(*axis_from_name(name));
  }
  std::vector<EvaluationReport> reports;
  for (Axis a : axes) reports.push_back(evaluate(gt, dets.detections, a, cfg));
  out << format_report_table(reports);
  if (!o.evaluate.report_json.empty()) {
    // A single axis is written in the same shape as a pipeline report file.
    write_text_file(o.evaluate.report_json, reports.size() == 1 ? report_to_json(reports[0])
                                                                : reports_to_json(reports));
  }
  if (!o.evaluate.pr_csv.empty()) {
    std::string csv;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const std::string part = pr_points_to_csv(reports[i]);
      // One header for the whole file.
      csv += i == 0 ? part : part.substr(part.find('\n') + 1);
    }
    write_text_file(o.evaluate.pr_csv, csv);
  }
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const auto& s = o.synth;
  ScenePlan plan;
  if (!s.plan.empty()) plan = parse_scene_plan_text(read_text_file(s.plan));
  if (s.images) plan.image_count = *s.images;
  const AnnotatedDataset scene = generate_scene(plan);
  const std::uint64_t seed = s.seed.value_or(plan.seed);
  if (!s.out_gt.empty()) {
    write_ground_truth(s.gt_view == "diagnosis" ? diagnosis_view(scene) : scene, s.out_gt);
  }
  if (!s.out_dets.empty()) {
    const DetectionSet dets = simulate_detector(scene, load_detector_profile(s.profile), seed);
    write_detections(dets.detections, s.out_dets);
    out << "wrote " << dets.size() << " detections for " << scene.images.size()
        << " images\n";
  }
  if (!s.out_cls.empty()) {
    const auto crops = parse_crops_text(read_text_file(s.crops));
    ClassifierProfile profile{s.accuracy, {s.confidence, 0.0}};
    write_text_file(s.out_cls,
                    serialize_classifications(simulate_classifier(scene, crops, profile, seed)));
  }
  const BalancePlan audited = audit_balance(scene);
  for (Disease d : kAllDiseases) {
    out << disease_name(d) << ": " << audited.counts.at(d) << "\n";
  }
  return kExitOk;
}

int cmd_split(const Options& o, std::ostream& out) {
  const auto counts = parse_counts(o.split.counts);
  SplitSpec spec{counts[0], counts[1], counts[2], o.split.seed};
  const std::filesystem::path dir = o.split.out_dir;
  IdSplit ids;
  if (!o.split.gt.empty()) {
    const AnnotatedDataset gt = parse_ground_truth(o.split.gt);
    const DatasetSplit parts = split_dataset(gt, spec);
    write_ground_truth(parts.train, dir / "train.json");
    write_ground_truth(parts.val, dir / "val.json");
    write_ground_truth(parts.test, dir / "test.json");
    for (const auto* p : {&parts.train, &parts.val, &parts.test}) {
      std::vector<ImageId>& dst = p == &parts.train ? ids.train : p == &parts.val ? ids.val : ids.test;
      for (const auto& img : p->images) dst.push_back(img.image_id);
    }
  } else {
    std::vector<ImageId> all(*o.split.n);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<ImageId>(i) + 1;
    ids = split_ids(all, spec);
  }
  write_id_list(dir / "train.txt", ids.train);
  write_id_list(dir / "val.txt", ids.val);
  write_id_list(dir / "test.txt", ids.test);
  out << "train " << ids.train.size() << ", val " << ids.val.size() << ", test "
      << ids.test.size() << "\n";
  return kExitOk;
}

int cmd_pipeline(const Options& o, std::ostream& out) {
  PipelineConfig cfg;
  try {
    cfg = load_pipeline_config(o.pipeline.config);
  } catch (const Error& e) {
    throw StageError("config", e.what());
  }
  cfg.eval.threads = o.threads;
  const PipelineResult result = run_pipeline(cfg, out);
  for (const auto& f : result.stage_files) out << "wrote " << f.string() << "\n";
  for (const auto& f : result.report_files) out << "wrote " << f.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"detfuse: detection fusion and evaluation for dental panoramic findings"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "Worker threads for evaluation")
      ->check(CLI::PositiveNumber);
  const auto unit = CLI::Range(0.0, 1.0);
  const auto nonneg = CLI::NonNegativeNumber;

  auto* ens = app.add_subcommand("ensemble", "Threshold ensemble of two diagnosis streams");
  ens->add_option("--primary", o.ensemble.primary, "High-precision detections")->required();
  ens->add_option("--secondary", o.ensemble.secondary, "High-recall detections")->required();
  ens->add_option("--tau", o.ensemble.tau, "Score threshold")->check(unit);
  ens->add_option("--out", o.ensemble.out)->required();
  ens->add_flag("--allow-mismatch", o.ensemble.allow_mismatch,
                "Union differing image sets instead of failing");

  auto* integ = app.add_subcommand("integrate", "Attach diagnosis boxes to the nearest tooth");
  integ->add_option("--enum", o.integrate.enums)->required();
  integ->add_option("--diag", o.integrate.diag)->required();
  integ->add_option("--gate", o.integrate.gate, "Enumeration score gate")->check(unit);
  integ->add_option("--max-distance", o.integrate.max_distance, "Pixels; unbounded by default")
      ->check(CLI::PositiveNumber);
  integ->add_option("--unmatched", o.integrate.unmatched)
      ->check(CLI::IsMember({"keep", "drop"}));
  integ->add_option("--out", o.integrate.out)->required();

  auto* crops = app.add_subcommand("crops", "Emit the per-tooth crop manifest");
  crops->add_option("--enum", o.crops.enums)->required();
  crops->add_option("--gt", o.crops.gt, "Dataset supplying image sizes")->required();
  crops->add_option("--gate", o.crops.gate)->check(unit);
  crops->add_option("--pad", o.crops.pad)->check(nonneg);
  crops->add_option("--out", o.crops.out)->required();

  auto* comp = app.add_subcommand("complement", "Merge classifier-derived detections");
  comp->add_option("--enum", o.complement.enums)->required();
  comp->add_option("--cls", o.complement.cls)->required();
  comp->add_option("--integrated", o.complement.integrated)->required();
  comp->add_option("--gt", o.complement.gt, "Dataset supplying image sizes")->required();
  comp->add_option("--gate", o.complement.gate)->check(unit);
  comp->add_option("--pad", o.complement.pad)->check(nonneg);
  comp->add_option("--overlap-iou", o.complement.overlap_iou)->check(unit);
  comp->add_option("--min-confidence", o.complement.min_confidence)->check(unit);
  comp->add_option("--crops-out", o.complement.crops_out);
  comp->add_option("--out", o.complement.out)->required();

  auto* bal = app.add_subcommand("balance", "Disease histogram and oversampling plan");
  auto* bal_gt = bal->add_option("--gt", o.balance.gt);
  auto* bal_cls = bal->add_option("--cls", o.balance.cls);
  bal_gt->excludes(bal_cls);
  bal->add_option("--boost", o.balance.boost, "Override, e.g. caries=3");
  bal->add_option("--report-json", o.balance.report_json);

  auto* ev = app.add_subcommand("evaluate", "COCO-style mAP/AP50/AP75/AR");
  ev->add_option("--gt", o.evaluate.gt)->required();
  ev->add_option("--dets", o.evaluate.dets)->required();
  ev->add_option("--axis", o.evaluate.axes)
      ->check(CLI::IsMember({"quadrant", "enumeration", "disease", "agnostic", "all"}));
  ev->add_option("--enum-classes", o.evaluate.enum_classes)->check(CLI::IsMember({8, 32}));
  ev->add_option("--max-dets", o.evaluate.max_dets)->check(CLI::PositiveNumber);
  ev->add_option("--pr-csv", o.evaluate.pr_csv);
  ev->add_option("--report-json", o.evaluate.report_json);

  auto* syn = app.add_subcommand("synth", "Generate a synthetic scene and detections");
  syn->add_option("--plan", o.synth.plan, "Scene plan JSON");
  syn->add_option("--images", o.synth.images, "Override the plan's image count");
  syn->add_option("--profile", o.synth.profile, "Builtin profile name or JSON file");
  syn->add_option("--seed", o.synth.seed, "Detector seed (defaults to the plan seed)");
  syn->add_option("--out-gt", o.synth.out_gt);
  syn->add_option("--gt-view", o.synth.gt_view)->check(CLI::IsMember({"full", "diagnosis"}));
  syn->add_option("--out-dets", o.synth.out_dets);
  auto* syn_crops = syn->add_option("--crops", o.synth.crops, "Crop manifest to classify");
  syn->add_option("--out-cls", o.synth.out_cls)->needs(syn_crops);
  syn->add_option("--classifier-accuracy", o.synth.accuracy)->check(unit);
  syn->add_option("--classifier-confidence", o.synth.confidence)->check(unit);

  auto* spl = app.add_subcommand("split", "Seeded train/val/test split");
  auto* spl_n = spl->add_option("--n", o.split.n, "Split ids 1..n");
  auto* spl_gt = spl->add_option("--gt", o.split.gt, "Split a dataset file");
  spl_n->excludes(spl_gt);
  spl->add_option("--counts", o.split.counts, "train,val,test")->required();
  spl->add_option("--seed", o.split.seed);
  spl->add_option("--out-dir", o.split.out_dir);

  auto* pipe = app.add_subcommand("pipeline", "Run every stage from one config file");
  pipe->add_option("--config", o.pipeline.config)->required()->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (bal->parsed() && o.balance.gt.empty() && o.balance.cls.empty()) {
      throw CLI::RequiredError("balance needs --gt or --cls");
    }
    if (spl->parsed() && !o.split.n && o.split.gt.empty()) {
      throw CLI::RequiredError("split needs --n or --gt");
    }
    if (bal->parsed()) (void)parse_boost(o.balance.boost);
    if (spl->parsed()) (void)parse_counts(o.split.counts);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  }

  try {
    if (ens->parsed()) return cmd_ensemble(o, out);
    if (integ->parsed()) return cmd_integrate(o, out);
    if (crops->parsed()) return cmd_crops(o, out);
    if (comp->parsed()) return cmd_complement(o, out);
    if (bal->parsed()) return cmd_balance(o, out);
    if (ev->parsed()) return cmd_evaluate(o, out);
    if (syn->parsed()) return cmd_synth(o, out);
    if (spl->parsed()) return cmd_split(o, out);
    if (pipe->parsed()) return cmd_pipeline(o, out);
  } catch (const StageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsageError;
}

}  // namespace detfuse
