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

#include "rxonset/events.hpp"
#include "rxonset/renewal.hpp"

namespace rxonset {

/// Which intervals feed the population fit.
enum class LabelFilter { ChronicOnly, All };

std::string_view to_string(LabelFilter filter);
LabelFilter label_filter_from_string(std::string_view text);

/// How an entry's parameters were obtained.
enum class ParamSource {
  Fitted,         // own (drug, regime) pool
  DrugPooled,     // regime-agnostic pool of the same drug
  RegimeDefault,  // global default for the regime
};

std::string_view to_string(ParamSource source);

struct EstimationConfig {
  LabelFilter label_filter = LabelFilter::ChronicOnly;
  std::size_t min_intervals = 100;
  /// Trajectories with fewer events contribute no intervals (0 = pool all).
  std::size_t min_trajectory_events = 0;
  // Defaults used at the bottom of the fallback ladder.
  double default_shape = 1.5;
  double default_scale_renewable = 350.0;
  double default_scale_nonrenewable = 100.0;

  WeibullParams regime_default(Regime regime) const;
  friend bool operator==(const EstimationConfig&, const EstimationConfig&) = default;
};

struct ParamEntry {
  WeibullParams params;
  std::size_t n_intervals = 0;  // size of the (drug, regime) pool
  bool fallback = false;
  ParamSource source = ParamSource::Fitted;
  int iterations = 0;  // Newton/bisection steps of the fit that produced params
  std::string note;    // why a fallback happened

  friend bool operator==(const ParamEntry&, const ParamEntry&) = default;
};

struct RegimeKey {
  std::string drug_code;
  Regime regime = Regime::NonRenewable;
};

struct RegimeKeyLess {
  using is_transparent = void;
  template <typename A, typename B>
  bool operator()(const A& a, const B& b) const {
    const std::string_view da = a.drug_code, db = b.drug_code;
    if (da != db) return da < db;
    return a.regime < b.regime;
  }
};

/// Frozen per-(drug, regime) Weibull parameters.
class RegimeParamTable {
 public:
  using Entries = std::map<RegimeKey, ParamEntry, RegimeKeyLess>;

  RegimeParamTable() = default;
  RegimeParamTable(EstimationConfig config, Entries entries,
                   std::vector<std::string> training_patients = {});

  const ParamEntry* find(std::string_view drug_code, Regime regime) const;
  /// Throws MissingParamsError naming the drug.
  const ParamEntry& at(std::string_view drug_code, Regime regime) const;

  const Entries& entries() const noexcept { return entries_; }
  const EstimationConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Sorted ids of the patients the table was estimated from (may be empty
  /// when provenance is unknown).
  const std::vector<std::string>& training_patients() const noexcept {
    return training_patients_;
  }
  bool trained_on(std::string_view patient_id) const;
  void set_training_patients(std::vector<std::string> ids);

  const std::string& fingerprint() const noexcept { return fingerprint_; }
  void set_fingerprint(std::string fp) { fingerprint_ = std::move(fp); }

  friend bool operator==(const RegimeParamTable& a, const RegimeParamTable& b) {
    return a.config_ == b.config_ && a.training_patients_ == b.training_patients_ &&
           a.fingerprint_ == b.fingerprint_ && a.entries_ == b.entries_;
  }

 private:
  EstimationConfig config_;
  Entries entries_;
  std::vector<std::string> training_patients_;
  std::string fingerprint_;
};

inline bool operator==(const RegimeKey& a, const RegimeKey& b) {
  return a.drug_code == b.drug_code && a.regime == b.regime;
}

/// Pools intervals across patients per (drug, regime) and fits a Weibull to
/// each pool. Every drug seen gets an entry for both regimes. Pools smaller
/// than min_intervals, or whose fit fails, fall back first to the drug's
/// regime-agnostic pool and then to the regime default. Pools are sorted
/// before fitting, so the table does not depend on trajectory order.
RegimeParamTable estimate_params(std::span<const Trajectory> trajectories,
                                 const EstimationConfig& config = {}, unsigned threads = 0);

struct ShapePair {
  std::string drug_code;
  Regime regime = Regime::NonRenewable;
  double k_all = 0.0;
  double k_chronic = 0.0;
  std::size_t n_all = 0;
  std::size_t n_chronic = 0;
};

struct LabelComparison {
  std::vector<ShapePair> pairs;
  double pearson_r = 0.0;
  double slope = 0.0;  // k_chronic regressed on k_all
  double intercept = 0.0;
};

/// Fits every (drug, regime) with the All and ChronicOnly filters and
/// compares the shape estimates where both pools were fitted directly.
/// Throws UndefinedStatisticError with fewer than three pairs.
LabelComparison compare_label_filters(std::span<const Trajectory> trajectories,
                                      const EstimationConfig& config = {},
                                      unsigned threads = 0);

inline constexpr int kParamSchemaVersion = 1;

std::string params_to_json(const RegimeParamTable& table);
RegimeParamTable params_from_json(std::string_view text);
void save_params(const RegimeParamTable& table, const std::filesystem::path& path);
/// Throws DependencyError if missing, DataError on a malformed file or a
/// schema_version other than kParamSchemaVersion.
RegimeParamTable load_params(const std::filesystem::path& path);

}  // namespace rxonset
