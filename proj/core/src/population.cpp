// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/population.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include "json.hpp"
#include "rxonset/csv.hpp"
#include "rxonset/errors.hpp"
#include "rxonset/parallel.hpp"
#include "rxonset/stats.hpp"

namespace rxonset {

using json = nlohmann::json;

std::string_view to_string(LabelFilter filter) {
  return filter == LabelFilter::ChronicOnly ? "chronic_only" : "all";
}

LabelFilter label_filter_from_string(std::string_view text) {
  if (text == "chronic_only") return LabelFilter::ChronicOnly;
  if (text == "all") return LabelFilter::All;
  throw UsageError("unknown label filter '" + std::string(text) +
                   "' (expected chronic_only or all)");
}

std::string_view to_string(ParamSource source) {
  switch (source) {
    case ParamSource::Fitted:
      return "fitted";
    case ParamSource::DrugPooled:
      return "drug_pooled";
    case ParamSource::RegimeDefault:
      return "regime_default";
  }
  return "fitted";
}

namespace {

ParamSource param_source_from_string(std::string_view text) {
  if (text == "fitted") return ParamSource::Fitted;
  if (text == "drug_pooled") return ParamSource::DrugPooled;
  if (text == "regime_default") return ParamSource::RegimeDefault;
  throw DataError("unknown parameter source '" + std::string(text) + "'");
}

struct RegimeKeyView {
  std::string_view drug_code;
  Regime regime;
};

constexpr std::array<Regime, 2> kRegimes{Regime::Renewable, Regime::NonRenewable};

std::size_t regime_slot(Regime r) { return r == Regime::Renewable ? 0 : 1; }

struct DrugPools {
  std::array<std::vector<double>, 2> by_regime;
};

using PoolMap = std::map<std::string, DrugPools, std::less<>>;

PoolMap collect_pools(std::span<const Trajectory> trajectories, const EstimationConfig& config) {
  const LabelFilter filter = config.label_filter;
  PoolMap pools;
  for (const auto& t : trajectories) {
    auto it = pools.find(t.drug_code());
    if (it == pools.end()) it = pools.emplace(t.drug_code(), DrugPools{}).first;
    if (t.events().size() < config.min_trajectory_events) continue;
    for (const auto& iv : t.intervals()) {
      if (filter == LabelFilter::ChronicOnly && !iv.chronic_label) continue;
      it->second.by_regime[regime_slot(iv.regime)].push_back(static_cast<double>(iv.tau));
    }
  }
  for (auto& [drug, p] : pools) {
    for (auto& v : p.by_regime) std::sort(v.begin(), v.end());
  }
  return pools;
}

struct Attempt {
  bool ok = false;
  WeibullFit fit;
  std::string reason;
};

Attempt try_fit(std::span<const double> pool, std::size_t min_intervals) {
  Attempt a;
  if (pool.size() < min_intervals) {
    a.reason = std::to_string(pool.size()) + " intervals < min_intervals " +
               std::to_string(min_intervals);
    return a;
  }
  try {
    a.fit = fit_weibull_detailed(pool);
    a.ok = true;
  } catch (const FitError& e) {
    a.reason = e.what();
  }
  return a;
}

std::array<ParamEntry, 2> fit_drug(const DrugPools& pools, const EstimationConfig& config) {
  std::array<ParamEntry, 2> out;
  std::optional<Attempt> pooled;
  for (Regime regime : kRegimes) {
    const auto slot = regime_slot(regime);
    const auto& pool = pools.by_regime[slot];
    auto& entry = out[slot];
    entry.n_intervals = pool.size();
    auto own = try_fit(pool, config.min_intervals);
    if (own.ok) {
      entry.params = own.fit.params;
      entry.iterations = own.fit.iterations;
      entry.source = ParamSource::Fitted;
      continue;
    }
    entry.fallback = true;
    if (!pooled) {
      std::vector<double> merged;
      merged.reserve(pools.by_regime[0].size() + pools.by_regime[1].size());
      std::merge(pools.by_regime[0].begin(), pools.by_regime[0].end(),
                 pools.by_regime[1].begin(), pools.by_regime[1].end(),
                 std::back_inserter(merged));
      pooled = try_fit(merged, config.min_intervals);
    }
    if (pooled->ok) {
      entry.params = pooled->fit.params;
      entry.iterations = pooled->fit.iterations;
      entry.source = ParamSource::DrugPooled;
      entry.note = own.reason;
    } else {
      entry.params = config.regime_default(regime);
      entry.source = ParamSource::RegimeDefault;
      entry.note = own.reason + "; drug pool: " + pooled->reason;
    }
  }
  return out;
}

}  // namespace

WeibullParams EstimationConfig::regime_default(Regime regime) const {
  return {default_shape, regime == Regime::Renewable ? default_scale_renewable
                                                     : default_scale_nonrenewable};
}

RegimeParamTable::RegimeParamTable(EstimationConfig config, Entries entries,
                                   std::vector<std::string> training_patients)
    : config_(config), entries_(std::move(entries)) {
  for (const auto& [key, entry] : entries_) entry.params.validate();
  set_training_patients(std::move(training_patients));
}

const ParamEntry* RegimeParamTable::find(std::string_view drug_code, Regime regime) const {
  const auto it = entries_.find(RegimeKeyView{drug_code, regime});
  return it == entries_.end() ? nullptr : &it->second;
}

const ParamEntry& RegimeParamTable::at(std::string_view drug_code, Regime regime) const {
  if (const auto* e = find(drug_code, regime)) return *e;
  throw MissingParamsError("no parameters for drug " + std::string(drug_code) + " (" +
                           std::string(to_string(regime)) + ")");
}

bool RegimeParamTable::trained_on(std::string_view patient_id) const {
  return std::binary_search(training_patients_.begin(), training_patients_.end(), patient_id,
                            std::less<>{});
}

void RegimeParamTable::set_training_patients(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  training_patients_ = std::move(ids);
}

RegimeParamTable estimate_params(std::span<const Trajectory> trajectories,
                                 const EstimationConfig& config, unsigned threads) {
  if (trajectories.empty()) throw PreconditionError("estimate_params needs training trajectories");
  const auto pools = collect_pools(trajectories, config);

  std::vector<const PoolMap::value_type*> drugs;
  drugs.reserve(pools.size());
  for (const auto& kv : pools) drugs.push_back(&kv);
  std::vector<std::array<ParamEntry, 2>> fitted(drugs.size());
  parallel_for_chunks(drugs.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) fitted[i] = fit_drug(drugs[i]->second, config);
  });

  RegimeParamTable::Entries entries;
  for (std::size_t i = 0; i < drugs.size(); ++i) {
    for (Regime regime : kRegimes) {
      entries.emplace(RegimeKey{drugs[i]->first, regime}, fitted[i][regime_slot(regime)]);
    }
  }
  std::vector<std::string> patients;
  patients.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    if (patients.empty() || patients.back() != t.patient_id()) patients.push_back(t.patient_id());
  }
  return RegimeParamTable(config, std::move(entries), std::move(patients));
}

LabelComparison compare_label_filters(std::span<const Trajectory> trajectories,
                                      const EstimationConfig& config, unsigned threads) {
  auto all_cfg = config;
  all_cfg.label_filter = LabelFilter::All;
  auto chronic_cfg = config;
  chronic_cfg.label_filter = LabelFilter::ChronicOnly;
  const auto all = estimate_params(trajectories, all_cfg, threads);
  const auto chronic = estimate_params(trajectories, chronic_cfg, threads);

  LabelComparison cmp;
  for (const auto& [key, a] : all.entries()) {
    const auto* c = chronic.find(key.drug_code, key.regime);
    if (c == nullptr || a.source != ParamSource::Fitted || c->source != ParamSource::Fitted) {
      continue;
    }
    cmp.pairs.push_back(
        {key.drug_code, key.regime, a.params.shape, c->params.shape, a.n_intervals, c->n_intervals});
  }
  if (cmp.pairs.size() < 3) {
    throw UndefinedStatisticError("label comparison needs at least 3 drugs fitted under both "
                                  "filters, got " + std::to_string(cmp.pairs.size()));
  }
  std::vector<double> x, y;
  for (const auto& p : cmp.pairs) {
    x.push_back(p.k_all);
    y.push_back(p.k_chronic);
  }
  cmp.pearson_r = stats::pearson(x, y);
  const auto line = stats::least_squares(x, y);
  cmp.slope = line.slope;
  cmp.intercept = line.intercept;
  return cmp;
}

std::string params_to_json(const RegimeParamTable& table) {
  const auto& cfg = table.config();
  json doc;
  doc["schema_version"] = kParamSchemaVersion;
  doc["config"] = {
      {"label_filter", to_string(cfg.label_filter)},
      {"min_intervals", cfg.min_intervals},
      {"min_trajectory_events", cfg.min_trajectory_events},
      {"default_shape", cfg.default_shape},
      {"default_scale_renewable", cfg.default_scale_renewable},
      {"default_scale_nonrenewable", cfg.default_scale_nonrenewable},
  };
  doc["fingerprint"] = table.fingerprint();
  doc["training_patients"] = table.training_patients();
  json entries = json::object();
  for (const auto& [key, e] : table.entries()) {
    json item = {
        {"k", e.params.shape},
        {"lambda", e.params.scale},
        {"n_intervals", e.n_intervals},
        {"fallback", e.fallback},
        {"source", to_string(e.source)},
        {"iterations", e.iterations},
    };
    if (!e.note.empty()) item["note"] = e.note;
    entries[key.drug_code + "|" + std::string(to_string(key.regime))] = std::move(item);
  }
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

RegimeParamTable params_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed parameter file: ") + e.what());
  }
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kParamSchemaVersion) {
      throw DataError("parameter file schema_version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kParamSchemaVersion) + ")");
    }
    const auto& c = doc.at("config");
    EstimationConfig cfg;
    cfg.label_filter = label_filter_from_string(c.at("label_filter").get<std::string>());
    cfg.min_intervals = c.at("min_intervals").get<std::size_t>();
    cfg.min_trajectory_events = c.value("min_trajectory_events", std::size_t{0});
    cfg.default_shape = c.at("default_shape").get<double>();
    cfg.default_scale_renewable = c.at("default_scale_renewable").get<double>();
    cfg.default_scale_nonrenewable = c.at("default_scale_nonrenewable").get<double>();

    RegimeParamTable::Entries entries;
    for (const auto& [name, item] : doc.at("entries").items()) {
      const auto bar = name.rfind('|');
      if (bar == std::string::npos || bar == 0) {
        throw DataError("parameter key '" + name + "' is not of the form drug|regime");
      }
      ParamEntry e;
      e.params = {item.at("k").get<double>(), item.at("lambda").get<double>()};
      e.n_intervals = item.at("n_intervals").get<std::size_t>();
      e.fallback = item.at("fallback").get<bool>();
      e.source = param_source_from_string(item.value("source", std::string("fitted")));
      e.iterations = item.value("iterations", 0);
      e.note = item.value("note", std::string());
      entries.emplace(RegimeKey{name.substr(0, bar), regime_from_string(name.substr(bar + 1))},
                      std::move(e));
    }
    RegimeParamTable table(cfg, std::move(entries),
                           doc.value("training_patients", std::vector<std::string>{}));
    table.set_fingerprint(doc.value("fingerprint", std::string()));
    return table;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed parameter file: ") + e.what());
  } catch (const PreconditionError& e) {
    throw DataError(std::string("invalid parameters in file: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("invalid parameter file config: ") + e.what());
  }
}

void save_params(const RegimeParamTable& table, const std::filesystem::path& path) {
  csv::write_file(path, params_to_json(table));
}

RegimeParamTable load_params(const std::filesystem::path& path) {
  return params_from_json(csv::read_file(path));
}

}  // namespace rxonset
