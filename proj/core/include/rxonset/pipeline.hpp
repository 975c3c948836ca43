// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rxonset/changepoint.hpp"
#include "rxonset/evalharness.hpp"
#include "rxonset/phenotype.hpp"
#include "rxonset/population.hpp"
#include "rxonset/synthcohort.hpp"

namespace rxonset {

/// Which patients cmd_detect scores.
enum class DetectCohort { Test, All };

std::string_view to_string(DetectCohort cohort);
DetectCohort detect_cohort_from_string(std::string_view text);

struct PipelineConfig {
  std::filesystem::path prescriptions;
  std::filesystem::path diagnoses;
  std::filesystem::path params;      // empty: <out_dir>/params.json
  std::filesystem::path dictionary;  // empty: <out_dir>/dictionary.json
  std::filesystem::path out_dir = ".";

  double train_fraction = 0.42;
  std::uint64_t seed = 42;
  DetectionConfig detection;
  DictionaryConfig dictionary_config;
  /// Pools only trajectories long enough to be scanned.
  EstimationConfig estimation{.min_trajectory_events = 6};
  std::vector<std::int32_t> deltas = kDefaultDeltas;
  unsigned threads = 0;

  DetectCohort detect_cohort = DetectCohort::Test;
  bool leakage_guard = true;

  /// Optional sanity check: share of `cutover_icd` onsets before `cutover`.
  std::optional<Day> cutover;
  std::string cutover_icd;

  void validate() const;
  std::filesystem::path params_path() const;
  std::filesystem::path dictionary_path() const;
  std::filesystem::path artifact(std::string_view name) const;
};

/// Settings that shape outputs, as canonical JSON (paths and thread count
/// excluded).
std::string settings_json(const PipelineConfig& config);
/// 16 hex digits of FNV-1a 64 over settings_json.
std::string config_fingerprint(const PipelineConfig& config);
std::uint64_t fnv1a64(std::string_view bytes);

/// Applies the keys present in a JSON config file onto `config`.
void apply_config_json(PipelineConfig& config, std::string_view text);
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

/// Parses "30,60,90"; throws UsageError on malformed input.
std::vector<std::int32_t> parse_deltas(std::string_view text);

struct StageReport {
  std::string stage;
  std::vector<std::filesystem::path> written;
  std::vector<std::string> notes;
};

StageReport cmd_simulate(const ScenarioConfig& scenario, const std::filesystem::path& out_dir,
                         unsigned threads = 0);
StageReport cmd_split(const PipelineConfig& config);
StageReport cmd_fit_params(const PipelineConfig& config);
StageReport cmd_detect(const PipelineConfig& config);
StageReport cmd_build_dict(const PipelineConfig& config);
StageReport cmd_infer(const PipelineConfig& config);
StageReport cmd_evaluate(const PipelineConfig& config);
/// split, fit-params, detect, build-dict, infer, evaluate.
std::vector<StageReport> cmd_pipeline(const PipelineConfig& config);

}  // namespace rxonset
