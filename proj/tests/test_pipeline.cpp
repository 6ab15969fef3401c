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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "detfuse/cli.hpp"
#include "detfuse/error.hpp"
#include "detfuse/pipeline.hpp"
#include "test_util.hpp"

namespace detfuse {
namespace {

namespace fs = std::filesystem;

const fs::path kFixture = fs::path(DETFUSE_TEST_DATA) / "pipeline";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string in(const char* name) { return (kFixture / name).string(); }

PipelineConfig fixture_config(const fs::path& out_dir) {
  PipelineConfig cfg = load_pipeline_config(kFixture / "config.json");
  auto& p = cfg.paths;
  p.ground_truth = kFixture / *p.ground_truth;
  p.enumeration = kFixture / *p.enumeration;
  p.diagnosis_a = kFixture / *p.diagnosis_a;
  p.diagnosis_b = kFixture / *p.diagnosis_b;
  p.classifications = kFixture / *p.classifications;
  p.output_dir = out_dir;
  return cfg;
}

TEST(Pipeline, GoldenOutputs) {
  testing::TempDir tmp("golden");
  std::ostringstream log;
  const PipelineResult r = run_pipeline(fixture_config(tmp.path()), log);
  ASSERT_EQ(r.stage_files.size(), 4u);
  ASSERT_EQ(r.report_files.size(), 3u);
  EXPECT_TRUE(r.warnings.empty());
  for (const char* name : {kFusedFile, kIntegratedFile, kCropsFile, kFinalFile}) {
    EXPECT_EQ(slurp(tmp / name), slurp(kFixture / "expected" / name)) << name;
  }
  for (Axis axis : {Axis::kQuadrant, Axis::kEnumeration, Axis::kDisease}) {
    const std::string name = report_file_name(axis);
    EXPECT_EQ(slurp(tmp / name), slurp(kFixture / "expected" / name)) << name;
  }
  EXPECT_NE(log.str().find("enumeration"), std::string::npos);
}

TEST(Pipeline, RerunIsIdentical) {
  testing::TempDir a("rerun_a"), b("rerun_b");
  std::ostringstream log;
  run_pipeline(fixture_config(a.path()), log);
  run_pipeline(fixture_config(b.path()), log);
  for (const auto& entry : fs::directory_iterator(a.path())) {
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename().string()));
  }
}

TEST(Pipeline, MissingSecondaryPassesPrimaryThrough) {
  testing::TempDir tmp("no_b");
  PipelineConfig cfg = fixture_config(tmp.path());
  cfg.paths.diagnosis_b.reset();
  std::ostringstream log;
  const PipelineResult r = run_pipeline(cfg, log);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(log.str().find("warning"), std::string::npos);
  const DetectionSet fused = parse_detections(tmp / kFusedFile, Source::kFused);
  const DetectionSet a = parse_detections(in("diag_a.json"), Source::kDiagnosisA);
  ASSERT_EQ(fused.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(fused.detections[i].box, a.detections[i].box);
    EXPECT_EQ(fused.detections[i].score, a.detections[i].score);
  }
}

TEST(Pipeline, MissingClassifierSkipsComplement) {
  testing::TempDir tmp("no_cls");
  PipelineConfig cfg = fixture_config(tmp.path());
  cfg.paths.classifications.reset();
  std::ostringstream log;
  const PipelineResult r = run_pipeline(cfg, log);
  EXPECT_EQ(r.stage_files.size(), 3u);
  EXPECT_FALSE(fs::exists(tmp / kCropsFile));
  EXPECT_EQ(slurp(tmp / kFinalFile), slurp(tmp / kIntegratedFile));
}

TEST(Pipeline, InvalidTauFailsBeforeAnyStage) {
  testing::TempDir tmp("bad_tau");
  PipelineConfig cfg = fixture_config(tmp / "out");
  cfg.ensemble.tau = 1.5;
  std::ostringstream log;
  try {
    run_pipeline(cfg, log);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "config");
  }
  EXPECT_FALSE(fs::exists(tmp / "out"));
}

TEST(Pipeline, StageFailureKeepsEarlierOutputs) {
  testing::TempDir tmp("partial");
  write_text_file(tmp / "broken.json", "[{\"crop_id\": 0}]");
  PipelineConfig cfg = fixture_config(tmp / "out");
  cfg.paths.classifications = tmp / "broken.json";
  std::ostringstream log;
  try {
    run_pipeline(cfg, log);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "complement");
    EXPECT_EQ(std::string(e.what()).rfind("[complement]", 0), 0u);
  }
  EXPECT_TRUE(fs::exists(tmp / "out" / kFusedFile));
  EXPECT_TRUE(fs::exists(tmp / "out" / kIntegratedFile));
  EXPECT_FALSE(fs::exists(tmp / "out" / kFinalFile));
}

TEST(PipelineConfig, RoundTripAndVersion) {
  const PipelineConfig cfg = load_pipeline_config(kFixture / "config.json");
  EXPECT_EQ(cfg.ensemble.tau, 0.05);
  EXPECT_EQ(cfg.integration.enum_score_gate, 0.7);
  EXPECT_EQ(cfg.pad_fraction, 0.1);
  const std::string text = serialize_pipeline_config(cfg);
  EXPECT_EQ(serialize_pipeline_config(parse_pipeline_config_text(text)), text);
  EXPECT_THROW(parse_pipeline_config_text(R"({"schema_version": 2, "paths": {}})"), Error);
  EXPECT_THROW(parse_pipeline_config_text(R"({"paths": {}})"), Error);
}

// Each stage through the CLI, feeding it the previous stage's file.
TEST(Cli, StagesComposeToPipeline) {
  testing::TempDir pipe("compose_pipe"), step("compose_step");
  std::ostringstream log;
  run_pipeline(fixture_config(pipe.path()), log);

  auto s = [&](const char* name) { return (step / name).string(); };
  ASSERT_EQ(cli({"ensemble", "--primary", in("diag_a.json"), "--secondary", in("diag_b.json"), "--tau", "0.05",
                 "--out", s(kFusedFile)}).code, kExitOk);
  ASSERT_EQ(cli({"integrate", "--enum", in("enum.json"), "--diag", s(kFusedFile), "--gate", "0.7", "--out",
                 s(kIntegratedFile)}).code, kExitOk);
  ASSERT_EQ(cli({"complement", "--enum", in("enum.json"), "--cls", in("cls.json"), "--integrated",
                 s(kIntegratedFile), "--gt", in("gt.json"), "--pad", "0.1", "--crops-out", s(kCropsFile), "--out",
                 s(kFinalFile)}).code, kExitOk);
  for (Axis axis : {Axis::kQuadrant, Axis::kEnumeration, Axis::kDisease}) {
    const std::string name = report_file_name(axis);
    ASSERT_EQ(cli({"evaluate", "--gt", in("gt.json"), "--dets", s(kFinalFile), "--axis",
                   std::string(axis_name(axis)), "--report-json", (step / name).string()}).code, kExitOk);
  }
  for (const auto& entry : fs::directory_iterator(pipe.path())) {
    const std::string name = entry.path().filename().string();
    EXPECT_EQ(slurp(entry.path()), slurp(step / name)) << name;
  }
  // crops subcommand alone writes the same manifest
  ASSERT_EQ(cli({"crops", "--enum", in("enum.json"), "--gt", in("gt.json"), "--pad", "0.1", "--out",
                 s("crops_only.json")}).code, kExitOk);
  EXPECT_EQ(slurp(step / "crops_only.json"), slurp(pipe / kCropsFile));
}

TEST(Cli, PipelineCommand) {
  testing::TempDir tmp("cli_pipe");
  write_text_file(tmp / "config.json", serialize_pipeline_config(fixture_config(tmp / "out")));
  const CliRun r = cli({"pipeline", "--config", (tmp / "config.json").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(tmp / "out" / kFinalFile), slurp(kFixture / "expected" / kFinalFile));

  PipelineConfig bad = fixture_config(tmp / "out2");
  bad.ensemble.tau = 1.5;
  std::string text = serialize_pipeline_config(bad);
  write_text_file(tmp / "bad.json", text);
  const CliRun b = cli({"pipeline", "--config", (tmp / "bad.json").string()});
  EXPECT_EQ(b.code, kExitDataError);
  EXPECT_NE(b.err.find("[config]"), std::string::npos);
  EXPECT_FALSE(fs::exists(tmp / "out2"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({}).code, kExitUsageError);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsageError);
  EXPECT_EQ(cli({"ensemble", "--primary", in("diag_a.json")}).code, kExitUsageError);
  EXPECT_EQ(cli({"evaluate", "--gt", in("gt.json"), "--dets", in("diag_a.json"), "--axis", "colour"}).code,
            kExitUsageError);
  EXPECT_EQ(cli({"ensemble", "--primary", in("diag_a.json"), "--secondary", in("diag_b.json"), "--tau", "1.5",
                 "--out", "/dev/null"}).code, kExitUsageError);
  const CliRun missing = cli({"evaluate", "--gt", "/nonexistent/gt.json", "--dets", in("diag_a.json")});
  EXPECT_EQ(missing.code, kExitDataError);
  EXPECT_FALSE(missing.err.empty());
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, EvaluateIdentityRow) {
  testing::TempDir tmp("identity");
  const AnnotatedDataset gt = parse_ground_truth(in("gt.json"));
  std::vector<Detection> echo;
  for (const auto& a : gt.annotations) echo.push_back({a.image_id, a.box, 1.0, a.category, Source::kFused});
  write_detections(echo, tmp / "echo.json");
  const CliRun r = cli({"evaluate", "--gt", in("gt.json"), "--dets", (tmp / "echo.json").string(), "--pr-csv",
                        (tmp / "pr.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("disease        1.000   1.000   1.000   1.000"), std::string::npos) << r.out;
  EXPECT_EQ(slurp(tmp / "pr.csv").rfind("recall,precision,iou_threshold\n", 0), 0u);
  const CliRun all = cli({"--threads", "3", "evaluate", "--gt", in("gt.json"), "--dets",
                          (tmp / "echo.json").string(), "--axis", "all"});
  EXPECT_NE(all.out.find("quadrant       1.000"), std::string::npos) << all.out;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(f, l);) out.push_back(l);
  return out;
}

TEST(Cli, SplitSizes) {
  testing::TempDir tmp("split");
  const CliRun r = cli({"split", "--n", "634", "--counts", "534,50,50", "--seed", "0", "--out-dir",
                        tmp.path().string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(lines(tmp / "train.txt").size(), 534u);
  EXPECT_EQ(lines(tmp / "val.txt").size(), 50u);
  EXPECT_EQ(lines(tmp / "test.txt").size(), 50u);
  EXPECT_EQ(cli({"split", "--n", "10", "--counts", "5,5,5", "--out-dir", tmp.path().string()}).code,
            kExitDataError);
  EXPECT_EQ(cli({"split", "--n", "10", "--counts", "5,x,5"}).code, kExitUsageError);

  const CliRun g = cli({"split", "--gt", in("gt.json"), "--counts", "1,1,1", "--seed", "3", "--out-dir",
                        tmp.path().string()});
  ASSERT_EQ(g.code, kExitOk) << g.err;
  EXPECT_EQ(parse_ground_truth(tmp / "val.json").images.size(), 1u);
}

TEST(Cli, BalanceMatchesGeneratorLedger) {
  testing::TempDir tmp("balance");
  const CliRun s = cli({"synth", "--plan", in("plan.json"), "--images", "40", "--out-gt", (tmp / "gt.json").string()});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  std::map<std::string, std::size_t> ledger;
  std::istringstream ss(s.out);
  for (std::string l; std::getline(ss, l);) {
    const auto colon = l.find(": ");
    if (colon != std::string::npos) ledger[l.substr(0, colon)] = std::stoul(l.substr(colon + 2));
  }
  ASSERT_EQ(ledger.size(), 4u);
  const CliRun b = cli({"balance", "--gt", (tmp / "gt.json").string(), "--report-json", (tmp / "plan.json").string()});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  std::istringstream table(b.out);
  std::string header;
  std::getline(table, header);
  std::size_t rows = 0;
  for (std::string name; table >> name;) {
    std::size_t count = 0, planned = 0;
    int mult = 0;
    table >> count >> mult >> planned;
    EXPECT_EQ(count, ledger.at(name)) << name;
    EXPECT_EQ(planned, count * static_cast<std::size_t>(mult));
    if (name == "periapical-lesion" || name == "deep-caries") EXPECT_EQ(mult, 2);
    ++rows;
  }
  EXPECT_EQ(rows, 4u);
  EXPECT_NE(slurp(tmp / "plan.json").find("\"periapical-lesion\""), std::string::npos);
  EXPECT_EQ(cli({"balance"}).code, kExitUsageError);
  EXPECT_EQ(cli({"balance", "--gt", (tmp / "gt.json").string(), "--boost", "tartar=2"}).code, kExitUsageError);
}

}  // namespace
}  // namespace detfuse
