// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "rxonset/csv.hpp"
#include "rxonset/errors.hpp"
#include "rxonset/pipeline.hpp"
#include "test_support.hpp"

namespace rxonset {
namespace {

using testing::TempDir;

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cohort_dir_ = new TempDir("pipeline_cohort");
    auto scenario = presets::demo();
    scenario.n_patients = 4000;
    cmd_simulate(scenario, cohort_dir_->path(), 0);
  }
  static void TearDownTestSuite() {
    delete cohort_dir_;
    cohort_dir_ = nullptr;
  }

  PipelineConfig config(const std::filesystem::path& out) const {
    PipelineConfig c;
    c.prescriptions = cohort_dir_->path() / "prescriptions.csv";
    c.diagnoses = cohort_dir_->path() / "diagnoses.csv";
    c.out_dir = out;
    return c;
  }

  static TempDir* cohort_dir_;
};

TempDir* PipelineTest::cohort_dir_ = nullptr;

TEST_F(PipelineTest, EmitsEveryArtifact) {
  TempDir out("pipeline_out");
  const auto reports = cmd_pipeline(config(out.path()));
  EXPECT_EQ(reports.size(), 6u);
  for (const char* f : {"train_ids.txt", "test_ids.txt", "params.json", "onsets_test.csv",
                        "onsets_train.csv", "dictionary.json", "disease_onsets.csv",
                        "timediff.csv", "recall.csv", "density.csv", "summary.json",
                        "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(out.path() / f)) << f;
  }
  const auto manifest = csv::read_file(out.path() / "manifest.json");
  const auto fp = config_fingerprint(config(out.path()));
  EXPECT_NE(manifest.find(fp), std::string::npos);
  EXPECT_NE(csv::read_file(out.path() / "summary.json").find(fp), std::string::npos);
}

TEST_F(PipelineTest, RerunIsByteIdentical) {
  TempDir a("pipeline_a"), b("pipeline_b");
  cmd_pipeline(config(a.path()));
  auto cb = config(b.path());
  cb.threads = 3;
  cmd_pipeline(cb);
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    const auto name = entry.path().filename();
    EXPECT_EQ(csv::read_file(entry.path()), csv::read_file(b.path() / name)) << name;
  }
}

TEST_F(PipelineTest, MissingStageInputNamesTheStage) {
  TempDir out("pipeline_missing");
  auto c = config(out.path());
  try {
    cmd_fit_params(c);
    FAIL() << "expected DependencyError";
  } catch (const DependencyError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("train_ids.txt"), std::string::npos) << what;
    EXPECT_NE(what.find("split"), std::string::npos) << what;
  }
  cmd_split(c);
  try {
    cmd_detect(c);
    FAIL() << "expected DependencyError";
  } catch (const DependencyError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("params.json"), std::string::npos) << what;
    EXPECT_NE(what.find("fit-params"), std::string::npos) << what;
  }
}

TEST_F(PipelineTest, LeakageIsAHardError) {
  TempDir out("pipeline_leak");
  auto c = config(out.path());
  cmd_split(c);
  cmd_fit_params(c);
  // Scoring every patient includes the training patients.
  auto all = c;
  all.detect_cohort = DetectCohort::All;
  EXPECT_THROW(cmd_detect(all), LeakageError);
  all.leakage_guard = false;
  EXPECT_NO_THROW(cmd_detect(all));

  // A test patient injected into the training list.
  auto train = read_id_list(out.path() / "train_ids.txt");
  const auto test = read_id_list(out.path() / "test_ids.txt");
  train.push_back(test.front());
  std::sort(train.begin(), train.end());
  write_id_list(out.path() / "train_ids.txt", train);
  EXPECT_THROW(cmd_fit_params(c), LeakageError);
}

TEST(PipelineConfig, FingerprintTracksSettingsButNotThreads) {
  PipelineConfig a;
  PipelineConfig b = a;
  b.threads = 7;
  EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
  b.detection.epsilon = 0.1;
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(PipelineConfig, JsonOverridesAndValidation) {
  PipelineConfig c;
  apply_config_json(c, R"({"epsilon": 0.5, "min_prescriptions": 8, "deltas": [10, 20],
                            "train_fraction": 0.3, "seed": 9, "cohort": "all",
                            "dictionary": {"min_support": 40},
                            "estimation": {"min_trajectory_events": 3}})");
  EXPECT_EQ(c.detection.epsilon, 0.5);
  EXPECT_EQ(c.detection.min_prescriptions, 8u);
  EXPECT_EQ(c.deltas, (std::vector<std::int32_t>{10, 20}));
  EXPECT_EQ(c.train_fraction, 0.3);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.detect_cohort, DetectCohort::All);
  EXPECT_EQ(c.dictionary_config.min_support, 40u);
  EXPECT_EQ(c.estimation.min_trajectory_events, 3u);
  EXPECT_THROW(apply_config_json(c, R"({"unknown_key": 1})"), UsageError);
  EXPECT_THROW(apply_config_json(c, "{bad"), UsageError);
  c.train_fraction = 1.5;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(PipelineConfig, ParseDeltas) {
  EXPECT_EQ(parse_deltas("30,60,365"), (std::vector<std::int32_t>{30, 60, 365}));
  EXPECT_THROW(parse_deltas("30,x"), UsageError);
  EXPECT_THROW(parse_deltas(""), UsageError);
}

#ifdef RXONSET_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(RXONSET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  const auto d = dir.path().string();
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("no-such-command"), 1);
  EXPECT_EQ(run_cli("detect --epsilon -3 --out-dir " + d), 1);
  EXPECT_EQ(run_cli("detect --prescriptions " + d + "/missing.csv --diagnoses " + d +
                    "/missing.csv --out-dir " + d),
            2);
  EXPECT_EQ(run_cli("simulate --preset nope --out-dir " + d), 1);
  EXPECT_EQ(run_cli("simulate --preset demo --patients 300 --out-dir " + d + "/cohort"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "cohort" / "prescriptions.csv"));
  EXPECT_EQ(run_cli("split --prescriptions " + d + "/cohort/prescriptions.csv --diagnoses " + d +
                    "/cohort/diagnoses.csv --out-dir " + d + "/out --train-fraction 0.5"),
            0);
  const auto train = read_id_list(dir.path() / "out" / "train_ids.txt");
  const auto test = read_id_list(dir.path() / "out" / "test_ids.txt");
  EXPECT_EQ(train.size(), (train.size() + test.size()) / 2);
}
#endif

}  // namespace
}  // namespace rxonset
