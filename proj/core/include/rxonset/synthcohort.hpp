// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rxonset/date.hpp"
#include "rxonset/events.hpp"
#include "rxonset/random.hpp"
#include "rxonset/renewal.hpp"

namespace rxonset {

struct DrugProfile {
  std::string code;
  WeibullParams renewable{2.5, 350.0};
  WeibullParams nonrenewable{2.0, 100.0};
  /// Sporadic (Poisson) prescriptions per day for a patient who uses the
  /// drug outside sustained therapy.
  double background_rate = 0.0;
  double background_user_fraction = 1.0;
  /// Probability a sporadic prescription carries the chronic label.
  double spurious_chronic_prob = 0.0;
  /// Probability a sustained-therapy prescription is labelled acute.
  double missed_chronic_prob = 0.0;
};

struct DiseaseProfile {
  std::string icd;
  std::vector<std::string> drugs;  // one is drawn per treated patient
  double prevalence = 0.0;
  Day onset_start;  // true onset ~ uniform day in [onset_start, onset_end]
  Day onset_end;
  double treated_fraction = 1.0;
  /// First sustained prescription is uniform in [onset, onset + lag_max].
  std::int32_t therapy_lag_max = 0;
  /// Diagnosis date - onset ~ uniform integer in [delay_min, delay_max].
  std::int32_t delay_min = 0;
  std::int32_t delay_max = 0;
  /// Probability that a diagnosis falling in a calendar year is recorded.
  /// Years outside the map use the nearest configured year; empty means 1.
  std::map<int, double> adoption;
  /// Non-renewable prescriptions issued before switching to renewable;
  /// -1 never switches, 0 starts renewable.
  std::int32_t switch_after_events = -1;
  /// Repeat codings of a recorded diagnosis, per year after the first one
  /// (each also subject to the adoption ramp).
  double recoding_rate = 0.0;
};

struct ScenarioConfig {
  std::size_t n_patients = 1000;
  Day study_start;
  Day study_end;
  std::vector<DrugProfile> drugs;
  std::vector<DiseaseProfile> diseases;
  /// Unrelated diagnoses, uniform over the window and over noise_icds.
  std::vector<std::string> noise_icds;
  double noise_diagnosis_rate = 0.0;  // per patient-year
  std::uint64_t seed = 1;
  std::string patient_prefix = "P";

  /// Throws UsageError on out-of-range probabilities, unordered dates,
  /// invalid Weibull parameters or unknown drug references.
  void validate() const;
  const DrugProfile* find_drug(std::string_view code) const;
};

struct TrueOnset {
  std::string patient_id;
  std::string icd_code;
  Day onset_date;           // may precede the study window
  std::string drug_code;    // treating drug, empty if untreated
};

struct TrueTransition {
  std::string patient_id;
  std::string drug_code;
  /// 0-based index of the first sustained prescription in the (patient,
  /// drug) trajectory built from the emitted events; absent when none
  /// survives censoring.
  std::optional<std::size_t> first_sustained_event;
};

struct GroundTruth {
  std::vector<TrueOnset> onsets;            // ordered by (patient, icd)
  std::vector<TrueTransition> transitions;  // ordered by (patient, drug)
};

struct Cohort {
  std::vector<PrescriptionEvent> prescriptions;  // ordered by (patient, drug, date)
  std::vector<DiagnosisEvent> diagnoses;         // ordered by (patient, date, icd)
  GroundTruth truth;
};

/// Inverse-CDF draw scale * (-ln u)^(1/shape), rounded to whole days with a
/// floor of one day.
std::int32_t weibull_days_from_uniform(const WeibullParams& p, double u);
std::int32_t sample_weibull(const WeibullParams& p, Rng& rng);

/// Generates a cohort. Each patient draws from its own stream derived from
/// the seed, so output is identical for any thread count.
Cohort simulate(const ScenarioConfig& config, unsigned threads = 0);

std::string scenario_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// `patient_id,icd,true_onset_date`
std::string format_ground_truth_csv(const GroundTruth& truth);

/// Writes prescriptions.csv, diagnoses.csv, ground_truth.csv and
/// scenario.json into `dir`.
void write_cohort(const Cohort& cohort, const ScenarioConfig& config,
                  const std::filesystem::path& dir);

/// Bundled scenarios.
namespace presets {
/// 10k patients, three chronic diseases with partial left censoring and a
/// diagnosis-adoption ramp.
ScenarioConfig demo();
/// One dense chronic disease, 15% spurious chronic labels on sporadic use.
ScenarioConfig onset_accuracy();
/// 30% of true onsets before the study window.
ScenarioConfig left_censored();
/// A disease whose sustained therapy only exists after a cutover date.
ScenarioConfig covid_analog();
Day covid_cutover();
/// Five diseases spanning sparse to dense prescribing.
ScenarioConfig density_sweep();
/// Forty drugs with varied regularity and 20% chronic-label noise.
ScenarioConfig label_noise();

std::vector<std::string> names();
/// Throws UsageError for an unknown name.
ScenarioConfig by_name(std::string_view name);
}  // namespace presets

}  // namespace rxonset
