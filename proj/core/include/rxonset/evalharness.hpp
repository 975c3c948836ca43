// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rxonset/changepoint.hpp"
#include "rxonset/events.hpp"
#include "rxonset/phenotype.hpp"
#include "rxonset/synthcohort.hpp"

namespace rxonset {

inline const std::vector<Method> kBothMethods{Method::ChangePoint, Method::Naive};

/// Earliest recorded diagnosis per (patient, icd). An empty `icds` keeps
/// every code.
std::map<std::pair<std::string, std::string>, Day> earliest_diagnoses(
    std::span<const DiagnosisEvent> diagnoses, std::span<const std::string> icds = {});

struct TimeDiffSample {
  std::string icd_code;
  Method method = Method::ChangePoint;
  std::string patient_id;
  std::int32_t diff_days = 0;  // diagnosis - onset; negative = onset first
};

struct TimeDiffSummary {
  std::string icd_code;
  Method method = Method::ChangePoint;
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct TimeDiffStats {
  std::vector<TimeDiffSample> samples;    // ordered by (icd, method, patient)
  std::vector<TimeDiffSummary> summaries; // one per (icd, method) with samples
  /// Diagnosed pairs per ICD and, per (icd, method), how many had no onset.
  std::map<std::string, std::size_t> diagnosed;
  std::map<std::pair<std::string, Method>, std::size_t> unmatched;
};

TimeDiffStats time_differences(std::span<const DiseaseOnset> onsets,
                               std::span<const DiagnosisEvent> diagnoses,
                               std::span<const std::string> icds = {},
                               std::span<const Method> methods = kBothMethods);

struct RecallPoint {
  std::int32_t delta_days = 0;
  double recall = 0.0;
  std::size_t detected = 0;
};

struct RecallSeries {
  std::string icd_code;
  Method method = Method::ChangePoint;
  std::size_t n_diagnosed = 0;
  std::vector<RecallPoint> points;  // ascending delta
};

struct RecallCurve {
  std::vector<RecallSeries> series;  // ordered by (icd, method)
  std::vector<std::string> warnings;

  const RecallSeries* find(std::string_view icd, Method method) const;
};

inline const std::vector<std::int32_t> kDefaultDeltas{30, 60, 90, 180, 365, 730};

/// recall(delta) = diagnosed patients with an onset within +-delta days of
/// their earliest diagnosis / diagnosed patients. ICDs in scope without any
/// diagnosed patient are skipped with a warning.
RecallCurve recall_at(std::span<const DiseaseOnset> onsets,
                      std::span<const DiagnosisEvent> diagnoses,
                      std::span<const std::int32_t> deltas = kDefaultDeltas,
                      std::span<const std::string> icds = {},
                      std::span<const Method> methods = kBothMethods);

struct IcdDensity {
  std::string icd_code;
  double density = 0.0;  // median prescriptions of the ICD's drugs per diagnosed patient
  double recall_changepoint = 0.0;
  double recall_naive = 0.0;
};

struct DensityRecall {
  std::vector<IcdDensity> icds;
  double r_changepoint = 0.0;
  double r_naive = 0.0;
};

/// Relates each ICD's prescription density to its recall at `delta`
/// (365 days by default). Throws UndefinedStatisticError with fewer than
/// three ICDs or zero variance.
DensityRecall density_recall_correlation(const RecallCurve& curve,
                                         std::span<const PrescriptionEvent> prescriptions,
                                         std::span<const DiagnosisEvent> diagnoses,
                                         const PhenotypeDictionary& dictionary,
                                         std::int32_t delta = 365);

/// Share of an ICD's onsets dated before `cutover`, per method; absent when
/// the method has no onsets for the ICD.
std::map<Method, std::optional<double>> pre_cutover_fraction(std::span<const DiseaseOnset> onsets,
                                                             Day cutover, std::string_view icd);

/// Share of onsets (all ICDs) falling in [window_start, window_start + days).
std::map<Method, std::optional<double>> early_window_fraction(
    std::span<const DiseaseOnset> onsets, Day window_start, std::int32_t days);

std::map<Method, std::size_t> count_by_method(std::span<const DiseaseOnset> onsets);

/// |inferred - true onset| per method, for (patient, icd) pairs present in
/// both. Synthetic cohorts only.
std::map<Method, std::vector<double>> onset_errors(std::span<const DiseaseOnset> onsets,
                                                   std::span<const TrueOnset> truth);

/// `icd,method,patient_id,diff_days`
std::string format_timediff_csv(const TimeDiffStats& stats);
/// `icd,method,delta,recall,n_diagnosed`
std::string format_recall_csv(const RecallCurve& curve);
/// `icd,density,recall365_changepoint,recall365_naive`
std::string format_density_csv(std::span<const IcdDensity> rows);

}  // namespace rxonset
