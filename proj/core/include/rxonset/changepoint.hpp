// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rxonset/date.hpp"
#include "rxonset/errors.hpp"
#include "rxonset/events.hpp"
#include "rxonset/population.hpp"
#include "rxonset/renewal.hpp"

namespace rxonset {

/// Trajectory shorter than DetectionConfig::min_prescriptions.
class TooFewEventsError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct DetectionConfig {
  double epsilon = 0.05;                // minimum log-likelihood improvement
  std::size_t min_prescriptions = 6;

  void validate() const;
  friend bool operator==(const DetectionConfig&, const DetectionConfig&) = default;
};

struct ChangePointResult {
  bool accepted = false;
  std::optional<std::size_t> c_hat;  // 1-based index of the first chronic interval
  std::optional<Day> onset_date;     // date of event c_hat
  // Always populated, for the best candidate even when rejected.
  std::size_t best_c = 0;
  double loglik_at_c = 0.0;
  double loglik_null = 0.0;
  double margin = 0.0;
  ExpParams null_rate;
};

/// Two-regime log-likelihood for candidate c (1 <= c <= n intervals):
/// intervals before c under the exponential null, the rest under the
/// Weibull for their own regime. Throws MissingParamsError if the table
/// lacks the drug.
double changepoint_loglik(const Trajectory& trajectory, const RegimeParamTable& params,
                          const ExpParams& null_rate, std::size_t c);

/// Single change-point scan. The null rate is the trajectory's own MLE and
/// is shared by the null model and every pre-change segment. The argmax
/// prefers the smallest c on ties, and a change-point is accepted only when
/// it beats the null by strictly more than epsilon.
ChangePointResult detect_onset(const Trajectory& trajectory, const RegimeParamTable& params,
                               const DetectionConfig& config = {});

enum class Method { ChangePoint, Naive };

std::string_view to_string(Method method);
Method method_from_string(std::string_view text);

/// Inferred treated-phenotype onset; `code` is a drug (drug-level onsets)
/// or an ICD code (disease-level onsets).
struct OnsetRecord {
  std::string patient_id;
  std::string code;
  Day onset_date;
  double margin = 0.0;
  Method method = Method::ChangePoint;

  friend bool operator==(const OnsetRecord&, const OnsetRecord&) = default;
};

struct TrajectoryError {
  std::string patient_id;
  std::string drug_code;
  std::string message;
};

struct DetectionReport {
  std::size_t trajectories = 0;
  std::size_t filtered_short = 0;
  std::size_t scanned = 0;
  std::size_t accepted = 0;
  std::vector<TrajectoryError> errors;
};

struct DetectionBatch {
  std::vector<OnsetRecord> onsets;  // ordered by (patient_id, code)
  DetectionReport report;
};

/// Runs detect_onset over every trajectory with at least min_prescriptions
/// events. Failures are collected in the report; the batch continues.
DetectionBatch detect_all(std::span<const Trajectory> trajectories,
                          const RegimeParamTable& params, const DetectionConfig& config = {},
                          unsigned threads = 0);

/// `patient_id,drug_atc,onset_date,margin,method`
std::string format_onsets_csv(std::span<const OnsetRecord> onsets);
std::vector<OnsetRecord> parse_onsets_csv(std::string_view contents,
                                          const std::filesystem::path& origin = "<memory>");
std::vector<OnsetRecord> read_onsets_csv(const std::filesystem::path& path);

}  // namespace rxonset
