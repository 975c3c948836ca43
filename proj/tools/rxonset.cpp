// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

// rxonset: train, freeze and apply treated-phenotype onset models.

#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rxonset/errors.hpp"
#include "rxonset/pipeline.hpp"

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// Flags shared by the pipeline stages. Unset flags leave the config file's
// value (or the default) in place.
struct Flags {
  std::string config;
  std::optional<std::string> prescriptions, diagnoses, params, dict, out_dir;
  std::optional<double> epsilon, train_fraction;
  std::optional<std::size_t> min_prescriptions;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> deltas;
  std::optional<unsigned> threads;
  std::optional<std::string> cohort;
  bool no_leakage_guard = false;
  std::optional<std::string> cutover, cutover_icd;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  cmd->add_option("--prescriptions", f.prescriptions, "Prescription CSV");
  cmd->add_option("--diagnoses", f.diagnoses, "Diagnosis CSV");
  cmd->add_option("--params", f.params, "Parameter file (default <out-dir>/params.json)");
  cmd->add_option("--dict", f.dict, "Dictionary file (default <out-dir>/dictionary.json)");
  cmd->add_option("--out-dir", f.out_dir, "Artifact directory");
  cmd->add_option("--epsilon", f.epsilon, "Change-point acceptance margin");
  cmd->add_option("--min-prescriptions", f.min_prescriptions,
                  "Minimum prescriptions per trajectory");
  cmd->add_option("--train-fraction", f.train_fraction, "Share of patients used for training");
  cmd->add_option("--seed", f.seed, "Split seed");
  cmd->add_option("--deltas", f.deltas, "Recall tolerances in days, e.g. 30,90,365");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

rxonset::PipelineConfig resolve(const Flags& f) {
  rxonset::PipelineConfig c;
  if (!f.config.empty()) rxonset::apply_config_file(c, f.config);
  if (f.prescriptions) c.prescriptions = *f.prescriptions;
  if (f.diagnoses) c.diagnoses = *f.diagnoses;
  if (f.params) c.params = *f.params;
  if (f.dict) c.dictionary = *f.dict;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.epsilon) c.detection.epsilon = *f.epsilon;
  if (f.min_prescriptions) c.detection.min_prescriptions = *f.min_prescriptions;
  if (f.train_fraction) c.train_fraction = *f.train_fraction;
  if (f.seed) c.seed = *f.seed;
  if (f.deltas) c.deltas = rxonset::parse_deltas(*f.deltas);
  if (f.threads) c.threads = *f.threads;
  if (f.cohort) c.detect_cohort = rxonset::detect_cohort_from_string(*f.cohort);
  if (f.no_leakage_guard) c.leakage_guard = false;
  if (f.cutover) {
    c.cutover = rxonset::parse_iso_date(*f.cutover);
    if (!c.cutover) throw rxonset::UsageError("bad --cutover date '" + *f.cutover + "'");
  }
  if (f.cutover_icd) c.cutover_icd = *f.cutover_icd;
  if (c.cutover && c.cutover_icd.empty()) {
    throw rxonset::UsageError("--cutover needs --cutover-icd");
  }
  c.validate();
  return c;
}

void print(const rxonset::StageReport& r) {
  std::fprintf(stderr, "[%s]\n", r.stage.c_str());
  for (const auto& n : r.notes) std::fprintf(stderr, "  %s\n", n.c_str());
  for (const auto& p : r.written) std::fprintf(stderr, "  wrote %s\n", p.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Treated-phenotype onset detection from prescription trajectories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rxonset 0.1.0");
  Flags flags;
  std::function<void()> action;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic cohort");
  std::string preset, scenario_file, sim_out = ".";
  std::optional<std::size_t> sim_patients;
  std::optional<std::uint64_t> sim_seed;
  unsigned sim_threads = 0;
  auto* preset_opt = sim->add_option("--preset", preset, "Bundled scenario name");
  sim->add_option("--scenario", scenario_file, "Scenario JSON")->excludes(preset_opt);
  sim->add_option("--out-dir", sim_out, "Output directory");
  sim->add_option("--patients", sim_patients, "Override the patient count");
  sim->add_option("--seed", sim_seed, "Override the scenario seed");
  sim->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");
  sim->callback([&] {
    action = [&] {
      rxonset::ScenarioConfig s;
      if (!scenario_file.empty()) {
        s = rxonset::load_scenario(scenario_file);
      } else if (!preset.empty()) {
        s = rxonset::presets::by_name(preset);
      } else {
        throw rxonset::UsageError("simulate needs --preset or --scenario");
      }
      if (sim_patients) s.n_patients = *sim_patients;
      if (sim_seed) s.seed = *sim_seed;
      print(rxonset::cmd_simulate(s, sim_out, sim_threads));
    };
  });

  const auto stage = [&](const char* name, const char* help,
                         rxonset::StageReport (*fn)(const rxonset::PipelineConfig&)) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, flags);
    cmd->callback([&, fn] { action = [&, fn] { print(fn(resolve(flags))); }; });
    return cmd;
  };

  stage("split", "Split patients into training and test lists", rxonset::cmd_split);
  stage("fit-params", "Fit per-drug chronic interval models on training patients",
        rxonset::cmd_fit_params);
  auto* detect = stage("detect", "Detect drug-level onsets with frozen parameters",
                       rxonset::cmd_detect);
  detect->add_option("--cohort", flags.cohort, "Patients to score: test (default) or all");
  detect->add_flag("--no-leakage-guard", flags.no_leakage_guard,
                   "Allow scoring patients the parameters were fitted on");
  stage("build-dict", "Build the ICD-to-drug dictionary from training onsets",
        rxonset::cmd_build_dict);
  stage("infer", "Infer disease onsets (change-point and naive)", rxonset::cmd_infer);
  auto* evaluate = stage("evaluate", "Compute evaluation metrics", rxonset::cmd_evaluate);
  evaluate->add_option("--cutover", flags.cutover, "Report onsets before this date");
  evaluate->add_option("--cutover-icd", flags.cutover_icd, "ICD for --cutover");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");
  add_common(pipeline, flags);
  pipeline->add_option("--cutover", flags.cutover, "Report onsets before this date");
  pipeline->add_option("--cutover-icd", flags.cutover_icd, "ICD for --cutover");
  pipeline->callback([&] {
    action = [&] {
      for (const auto& r : rxonset::cmd_pipeline(resolve(flags))) print(r);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    action();
  } catch (const rxonset::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const rxonset::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
  return kOk;
}
