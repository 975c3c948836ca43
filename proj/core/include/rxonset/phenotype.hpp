// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rxonset/changepoint.hpp"
#include "rxonset/events.hpp"

namespace rxonset {

struct DictionaryConfig {
  std::int32_t window_before_days = 90;   // three months
  std::int32_t window_after_days = 365;   // twelve months
  std::size_t min_support = 25;           // pairs need support > min_support
  double min_alignment_rate = 0.05;       // drugs need rate > min_alignment_rate
  std::size_t max_drugs_per_icd = 30;
  std::size_t min_drugs_per_icd = 10;
  /// Count each ICD at most once per onset instead of every diagnosis event.
  bool dedupe_diagnoses = false;

  void validate() const;
  friend bool operator==(const DictionaryConfig&, const DictionaryConfig&) = default;
};

struct DrugAlignment {
  std::string drug_code;
  double alignment_rate = 0.0;
  std::size_t support = 0;

  friend bool operator==(const DrugAlignment&, const DrugAlignment&) = default;
};

/// Per-ICD drug lists ranked by alignment rate (descending, ties by drug
/// code).
class PhenotypeDictionary {
 public:
  using Lists = std::map<std::string, std::vector<DrugAlignment>, std::less<>>;

  PhenotypeDictionary() = default;
  PhenotypeDictionary(DictionaryConfig config, Lists lists);

  const Lists& lists() const noexcept { return lists_; }
  const DictionaryConfig& config() const noexcept { return config_; }
  const std::vector<DrugAlignment>* find(std::string_view icd) const;
  std::vector<std::string> icds() const;
  bool empty() const noexcept { return lists_.empty(); }

  /// Threshold violations, empty when the dictionary is conformant.
  std::vector<std::string> audit() const;

  const std::vector<std::string>& training_patients() const noexcept {
    return training_patients_;
  }
  void set_training_patients(std::vector<std::string> ids);
  bool trained_on(std::string_view patient_id) const;

  const std::string& fingerprint() const noexcept { return fingerprint_; }
  void set_fingerprint(std::string fp) { fingerprint_ = std::move(fp); }

  friend bool operator==(const PhenotypeDictionary&, const PhenotypeDictionary&) = default;

 private:
  DictionaryConfig config_;
  Lists lists_;
  std::vector<std::string> training_patients_;
  std::string fingerprint_;
};

struct DictionaryBuild {
  PhenotypeDictionary dictionary;
  std::vector<std::string> warnings;
};

/// Associates every diagnosis in [onset - before, onset + after] with the
/// onset's drug, keeps pairs with enough support, and ranks drugs per ICD
/// by alignment rate = associated diagnoses / detected onsets of the drug.
DictionaryBuild build_dictionary(std::span<const OnsetRecord> onsets,
                                 std::span<const DiagnosisEvent> diagnoses,
                                 const DictionaryConfig& config = {});

struct DiseaseOnset {
  std::string patient_id;
  std::string icd_code;
  Day onset_date;
  std::string source_drug;
  Method method = Method::ChangePoint;

  friend bool operator==(const DiseaseOnset&, const DiseaseOnset&) = default;
};

/// Earliest drug-level onset among each ICD's drugs, per patient. Equal
/// dates go to the drug with the higher alignment rate, then the smaller
/// drug code. Output is ordered by (patient_id, icd_code).
std::vector<DiseaseOnset> infer_disease_onsets(std::span<const OnsetRecord> onsets,
                                               const PhenotypeDictionary& dictionary);

/// First chronic-labelled prescription of any of the ICD's drugs. A single
/// prescription is enough.
std::vector<DiseaseOnset> naive_baseline(std::span<const Trajectory> trajectories,
                                         const PhenotypeDictionary& dictionary);

inline constexpr int kDictionarySchemaVersion = 1;

std::string dictionary_to_json(const PhenotypeDictionary& dictionary);
PhenotypeDictionary dictionary_from_json(std::string_view text);
void save_dictionary(const PhenotypeDictionary& dictionary, const std::filesystem::path& path);
PhenotypeDictionary load_dictionary(const std::filesystem::path& path);

/// `patient_id,icd,onset_date,source_drug,method`
std::string format_disease_onsets_csv(std::span<const DiseaseOnset> onsets);
std::vector<DiseaseOnset> parse_disease_onsets_csv(std::string_view contents,
                                                   const std::filesystem::path& origin = "<memory>");
std::vector<DiseaseOnset> read_disease_onsets_csv(const std::filesystem::path& path);

}  // namespace rxonset
