// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rxonset/date.hpp"

namespace rxonset {

/// Dispensing policy of a prescription.
enum class Regime : std::uint8_t { Renewable, NonRenewable };

std::string_view to_string(Regime regime);
Regime regime_from_string(std::string_view text);

struct PrescriptionEvent {
  std::string patient_id;
  std::string drug_code;  // ATC level 5
  Day date;
  bool chronic_label = false;
  bool renewable = false;

  friend bool operator==(const PrescriptionEvent&, const PrescriptionEvent&) = default;
};

struct DiagnosisEvent {
  std::string patient_id;
  std::string icd_code;
  Day date;

  friend bool operator==(const DiagnosisEvent&, const DiagnosisEvent&) = default;
};

/// One prescription inside a trajectory; patient and drug live on the
/// trajectory itself.
struct TrajectoryEvent {
  Day date;
  bool chronic_label = false;
  bool renewable = false;

  friend bool operator==(const TrajectoryEvent&, const TrajectoryEvent&) = default;
};

/// Gap between consecutive prescriptions. Regime and label come from the
/// opening prescription.
struct Interval {
  std::int32_t tau = 0;
  Regime regime = Regime::NonRenewable;
  bool chronic_label = false;

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Prescription history of one (patient, drug) pair. Event dates are
/// strictly increasing and intervals()[i].tau is the gap between events i
/// and i + 1.
class Trajectory {
 public:
  /// `events` must already be sorted with strictly increasing dates.
  Trajectory(std::string patient_id, std::string drug_code,
             std::vector<TrajectoryEvent> events);

  const std::string& patient_id() const noexcept { return patient_id_; }
  const std::string& drug_code() const noexcept { return drug_code_; }
  std::span<const TrajectoryEvent> events() const noexcept { return events_; }
  std::span<const Interval> intervals() const noexcept { return intervals_; }

  /// Full prescription records, e.g. for rebuilding.
  std::vector<PrescriptionEvent> prescriptions() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::string patient_id_;
  std::string drug_code_;
  std::vector<TrajectoryEvent> events_;
  std::vector<Interval> intervals_;
};

/// One row that could not be parsed.
struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::vector<RowError> errors;
};

/// Column names for the prescription file. Defaults match the
/// `patient_id,drug_atc,date,chronic,renewable` schema.
struct PrescriptionSchema {
  std::string patient_id = "patient_id";
  std::string drug_code = "drug_atc";
  std::string date = "date";
  std::string chronic = "chronic";
  std::string renewable = "renewable";
};

struct DiagnosisSchema {
  std::string patient_id = "patient_id";
  std::string icd_code = "icd";
  std::string date = "date";
};

struct PrescriptionBatch {
  std::vector<PrescriptionEvent> events;
  IngestReport report;
};

struct DiagnosisBatch {
  std::vector<DiagnosisEvent> events;
  IngestReport report;
};

/// Reads a prescription CSV. Malformed rows are skipped and tallied in the
/// report with their line numbers; a missing file or header column throws.
PrescriptionBatch ingest_prescriptions(const std::filesystem::path& path,
                                       const PrescriptionSchema& schema = {});
PrescriptionBatch parse_prescriptions(std::string_view contents,
                                      const PrescriptionSchema& schema = {},
                                      const std::filesystem::path& origin = "<memory>");

DiagnosisBatch ingest_diagnoses(const std::filesystem::path& path,
                                const DiagnosisSchema& schema = {});
DiagnosisBatch parse_diagnoses(std::string_view contents,
                               const DiagnosisSchema& schema = {},
                               const std::filesystem::path& origin = "<memory>");

std::string format_prescriptions_csv(std::span<const PrescriptionEvent> events);
std::string format_diagnoses_csv(std::span<const DiagnosisEvent> events);

/// Groups events into one trajectory per (patient, drug), ordered by
/// (patient_id, drug_code). Same-day duplicates are merged with OR-ed
/// flags. `threads` = 0 uses all hardware threads.
std::vector<Trajectory> build_trajectories(std::span<const PrescriptionEvent> events,
                                           unsigned threads = 0);

struct PatientSplit {
  std::vector<std::string> train;  // sorted
  std::vector<std::string> test;   // sorted
};

/// Random patient-level split with floor(train_fraction * n) training
/// patients. Deterministic for a given seed and patient set, independent of
/// the order patients are supplied in.
PatientSplit split_patients(std::span<const std::string> patients, double train_fraction,
                            std::uint64_t seed);

/// Sorted, de-duplicated patient identifiers.
std::vector<std::string> unique_patients(std::span<const PrescriptionEvent> prescriptions,
                                         std::span<const DiagnosisEvent> diagnoses = {});

std::vector<std::string> read_id_list(const std::filesystem::path& path);
void write_id_list(const std::filesystem::path& path, std::span<const std::string> ids);

}  // namespace rxonset
