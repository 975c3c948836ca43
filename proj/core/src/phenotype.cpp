// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/phenotype.hpp"

#include <algorithm>
#include <unordered_map>

#include "json.hpp"
#include "rxonset/csv.hpp"
#include "rxonset/errors.hpp"

namespace rxonset {

using json = nlohmann::json;

void DictionaryConfig::validate() const {
  if (window_before_days < 0 || window_after_days < 0) {
    throw UsageError("dictionary windows must be non-negative");
  }
  if (!(min_alignment_rate >= 0.0 && min_alignment_rate <= 1.0)) {
    throw UsageError("min_alignment_rate must lie in [0, 1]");
  }
  if (max_drugs_per_icd == 0 || min_drugs_per_icd > max_drugs_per_icd) {
    throw UsageError("need 0 < min_drugs_per_icd <= max_drugs_per_icd");
  }
}

PhenotypeDictionary::PhenotypeDictionary(DictionaryConfig config, Lists lists)
    : config_(config), lists_(std::move(lists)) {}

const std::vector<DrugAlignment>* PhenotypeDictionary::find(std::string_view icd) const {
  const auto it = lists_.find(icd);
  return it == lists_.end() ? nullptr : &it->second;
}

std::vector<std::string> PhenotypeDictionary::icds() const {
  std::vector<std::string> out;
  out.reserve(lists_.size());
  for (const auto& [icd, list] : lists_) out.push_back(icd);
  return out;
}

std::vector<std::string> PhenotypeDictionary::audit() const {
  std::vector<std::string> problems;
  for (const auto& [icd, list] : lists_) {
    if (list.size() < config_.min_drugs_per_icd || list.size() > config_.max_drugs_per_icd) {
      problems.push_back(icd + ": " + std::to_string(list.size()) + " drugs outside [" +
                         std::to_string(config_.min_drugs_per_icd) + ", " +
                         std::to_string(config_.max_drugs_per_icd) + "]");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& d = list[i];
      if (!(d.support > config_.min_support)) {
        problems.push_back(icd + "/" + d.drug_code + ": support " + std::to_string(d.support) +
                           " not > " + std::to_string(config_.min_support));
      }
      if (!(d.alignment_rate > config_.min_alignment_rate)) {
        problems.push_back(icd + "/" + d.drug_code + ": alignment rate " +
                           std::to_string(d.alignment_rate) + " not > " +
                           std::to_string(config_.min_alignment_rate));
      }
      if (i > 0 && list[i - 1].alignment_rate < d.alignment_rate) {
        problems.push_back(icd + ": drugs not sorted by descending alignment rate");
      }
    }
  }
  return problems;
}

void PhenotypeDictionary::set_training_patients(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  training_patients_ = std::move(ids);
}

bool PhenotypeDictionary::trained_on(std::string_view patient_id) const {
  return std::binary_search(training_patients_.begin(), training_patients_.end(), patient_id,
                            std::less<>{});
}

namespace {

struct PairKey {
  std::string drug;
  std::string icd;
  auto operator<=>(const PairKey&) const = default;
};

bool ranks_before(const DrugAlignment& a, const DrugAlignment& b) {
  if (a.alignment_rate != b.alignment_rate) return a.alignment_rate > b.alignment_rate;
  return a.drug_code < b.drug_code;
}

}  // namespace

DictionaryBuild build_dictionary(std::span<const OnsetRecord> onsets,
                                 std::span<const DiagnosisEvent> diagnoses,
                                 const DictionaryConfig& config) {
  config.validate();
  DictionaryBuild out;
  out.dictionary = PhenotypeDictionary(config, {});
  if (onsets.empty() || diagnoses.empty()) {
    out.warnings.push_back(onsets.empty() ? "no onsets supplied; dictionary is empty"
                                          : "no diagnoses supplied; dictionary is empty");
    return out;
  }

  // Diagnoses grouped by patient, date-ordered within a patient.
  std::vector<const DiagnosisEvent*> dx;
  dx.reserve(diagnoses.size());
  for (const auto& d : diagnoses) dx.push_back(&d);
  std::sort(dx.begin(), dx.end(), [](const DiagnosisEvent* a, const DiagnosisEvent* b) {
    return std::tie(a->patient_id, a->date, a->icd_code) <
           std::tie(b->patient_id, b->date, b->icd_code);
  });
  std::unordered_map<std::string_view, std::pair<std::size_t, std::size_t>> by_patient;
  for (std::size_t i = 0; i < dx.size();) {
    std::size_t j = i;
    while (j < dx.size() && dx[j]->patient_id == dx[i]->patient_id) ++j;
    by_patient.emplace(dx[i]->patient_id, std::make_pair(i, j));
    i = j;
  }

  std::map<std::string, std::size_t, std::less<>> onset_counts;
  std::map<PairKey, std::size_t> support;
  std::vector<std::string_view> seen;
  for (const auto& o : onsets) {
    ++onset_counts[o.code];
    const auto it = by_patient.find(o.patient_id);
    if (it == by_patient.end()) continue;
    const Day lo = o.onset_date - config.window_before_days;
    const Day hi = o.onset_date + config.window_after_days;
    seen.clear();
    for (std::size_t i = it->second.first; i < it->second.second; ++i) {
      const auto& d = *dx[i];
      if (d.date < lo) continue;
      if (d.date > hi) break;
      if (config.dedupe_diagnoses) {
        if (std::find(seen.begin(), seen.end(), d.icd_code) != seen.end()) continue;
        seen.push_back(d.icd_code);
      }
      ++support[PairKey{o.code, d.icd_code}];
    }
  }

  PhenotypeDictionary::Lists lists;
  for (const auto& [key, count] : support) {
    if (count <= config.min_support) continue;
    const double rate =
        static_cast<double>(count) / static_cast<double>(onset_counts.find(key.drug)->second);
    if (!(rate > config.min_alignment_rate)) continue;
    lists[key.icd].push_back({key.drug, rate, count});
  }
  for (auto it = lists.begin(); it != lists.end();) {
    auto& list = it->second;
    std::sort(list.begin(), list.end(), ranks_before);
    if (list.size() > config.max_drugs_per_icd) list.resize(config.max_drugs_per_icd);
    if (list.size() < config.min_drugs_per_icd) {
      it = lists.erase(it);
    } else {
      ++it;
    }
  }
  if (lists.empty()) out.warnings.push_back("no ICD code met the dictionary thresholds");
  out.dictionary = PhenotypeDictionary(config, std::move(lists));
  std::vector<std::string> patients;
  patients.reserve(onsets.size());
  for (const auto& o : onsets) patients.push_back(o.patient_id);
  out.dictionary.set_training_patients(std::move(patients));
  return out;
}

namespace {

struct Listing {
  std::string_view icd;
  double rate;
};

// drug -> every ICD list containing it
std::unordered_map<std::string_view, std::vector<Listing>> index_by_drug(
    const PhenotypeDictionary& dictionary) {
  std::unordered_map<std::string_view, std::vector<Listing>> index;
  for (const auto& [icd, list] : dictionary.lists()) {
    for (const auto& d : list) index[d.drug_code].push_back({icd, d.alignment_rate});
  }
  return index;
}

struct Best {
  Day date;
  double rate;
  std::string_view drug;
};

bool better(Day date, double rate, std::string_view drug, const Best& cur) {
  if (date != cur.date) return date < cur.date;
  if (rate != cur.rate) return rate > cur.rate;
  return drug < cur.drug;
}

// Collects per-(patient, icd) earliest candidates. Candidates must arrive
// grouped by patient.
class EarliestPerIcd {
 public:
  EarliestPerIcd(const PhenotypeDictionary& dictionary, Method method)
      : index_(index_by_drug(dictionary)), method_(method) {}

  void offer(std::string_view patient, std::string_view drug, Day date) {
    if (patient != patient_) flush(patient);
    const auto it = index_.find(drug);
    if (it == index_.end()) return;
    for (const auto& l : it->second) {
      auto [slot, inserted] = current_.try_emplace(l.icd, Best{date, l.rate, drug});
      if (!inserted && better(date, l.rate, drug, slot->second)) {
        slot->second = Best{date, l.rate, drug};
      }
    }
  }

  std::vector<DiseaseOnset> finish() {
    flush({});
    std::sort(out_.begin(), out_.end(), [](const DiseaseOnset& a, const DiseaseOnset& b) {
      return std::tie(a.patient_id, a.icd_code) < std::tie(b.patient_id, b.icd_code);
    });
    return std::move(out_);
  }

 private:
  void flush(std::string_view next) {
    for (const auto& [icd, best] : current_) {
      out_.push_back({std::string(patient_), std::string(icd), best.date,
                      std::string(best.drug), method_});
    }
    current_.clear();
    patient_ = next;
  }

  std::unordered_map<std::string_view, std::vector<Listing>> index_;
  Method method_;
  std::string_view patient_;
  std::map<std::string_view, Best> current_;
  std::vector<DiseaseOnset> out_;
};

}  // namespace

std::vector<DiseaseOnset> infer_disease_onsets(std::span<const OnsetRecord> onsets,
                                               const PhenotypeDictionary& dictionary) {
  std::vector<const OnsetRecord*> sorted;
  sorted.reserve(onsets.size());
  for (const auto& o : onsets) sorted.push_back(&o);
  std::stable_sort(sorted.begin(), sorted.end(), [](const OnsetRecord* a, const OnsetRecord* b) {
    return a->patient_id < b->patient_id;
  });
  EarliestPerIcd collector(dictionary, Method::ChangePoint);
  for (const auto* o : sorted) collector.offer(o->patient_id, o->code, o->onset_date);
  return collector.finish();
}

std::vector<DiseaseOnset> naive_baseline(std::span<const Trajectory> trajectories,
                                         const PhenotypeDictionary& dictionary) {
  std::vector<const Trajectory*> sorted;
  sorted.reserve(trajectories.size());
  for (const auto& t : trajectories) sorted.push_back(&t);
  std::stable_sort(sorted.begin(), sorted.end(), [](const Trajectory* a, const Trajectory* b) {
    return a->patient_id() < b->patient_id();
  });
  EarliestPerIcd collector(dictionary, Method::Naive);
  for (const auto* t : sorted) {
    for (const auto& e : t->events()) {
      if (e.chronic_label) {
        collector.offer(t->patient_id(), t->drug_code(), e.date);
        break;
      }
    }
  }
  return collector.finish();
}

std::string dictionary_to_json(const PhenotypeDictionary& dictionary) {
  const auto& c = dictionary.config();
  json doc;
  doc["schema_version"] = kDictionarySchemaVersion;
  doc["config"] = {
      {"window_before_days", c.window_before_days},
      {"window_after_days", c.window_after_days},
      {"min_support", c.min_support},
      {"min_alignment_rate", c.min_alignment_rate},
      {"max_drugs_per_icd", c.max_drugs_per_icd},
      {"min_drugs_per_icd", c.min_drugs_per_icd},
      {"dedupe_diagnoses", c.dedupe_diagnoses},
  };
  doc["fingerprint"] = dictionary.fingerprint();
  doc["training_patients"] = dictionary.training_patients();
  json icds = json::object();
  for (const auto& [icd, list] : dictionary.lists()) {
    json arr = json::array();
    for (const auto& d : list) {
      arr.push_back({{"drug", d.drug_code},
                     {"alignment_rate", d.alignment_rate},
                     {"support", d.support}});
    }
    icds[icd] = std::move(arr);
  }
  doc["dictionary"] = std::move(icds);
  return doc.dump(2) + "\n";
}

PhenotypeDictionary dictionary_from_json(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    const int version = doc.at("schema_version").get<int>();
    if (version != kDictionarySchemaVersion) {
      throw DataError("dictionary schema_version " + std::to_string(version) +
                      " is not supported (expected " +
                      std::to_string(kDictionarySchemaVersion) + ")");
    }
    const auto& c = doc.at("config");
    DictionaryConfig cfg;
    cfg.window_before_days = c.at("window_before_days").get<std::int32_t>();
    cfg.window_after_days = c.at("window_after_days").get<std::int32_t>();
    cfg.min_support = c.at("min_support").get<std::size_t>();
    cfg.min_alignment_rate = c.at("min_alignment_rate").get<double>();
    cfg.max_drugs_per_icd = c.at("max_drugs_per_icd").get<std::size_t>();
    cfg.min_drugs_per_icd = c.at("min_drugs_per_icd").get<std::size_t>();
    cfg.dedupe_diagnoses = c.at("dedupe_diagnoses").get<bool>();
    PhenotypeDictionary::Lists lists;
    for (const auto& [icd, arr] : doc.at("dictionary").items()) {
      auto& list = lists[icd];
      for (const auto& item : arr) {
        list.push_back({item.at("drug").get<std::string>(),
                        item.at("alignment_rate").get<double>(),
                        item.at("support").get<std::size_t>()});
      }
    }
    PhenotypeDictionary dict(cfg, std::move(lists));
    dict.set_training_patients(doc.value("training_patients", std::vector<std::string>{}));
    dict.set_fingerprint(doc.value("fingerprint", std::string()));
    return dict;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed dictionary file: ") + e.what());
  }
}

void save_dictionary(const PhenotypeDictionary& dictionary, const std::filesystem::path& path) {
  csv::write_file(path, dictionary_to_json(dictionary));
}

PhenotypeDictionary load_dictionary(const std::filesystem::path& path) {
  return dictionary_from_json(csv::read_file(path));
}

std::string format_disease_onsets_csv(std::span<const DiseaseOnset> onsets) {
  std::string out = "patient_id,icd,onset_date,source_drug,method\n";
  for (const auto& o : onsets) {
    out += o.patient_id;
    out += ',';
    out += o.icd_code;
    out += ',';
    append_iso_date(out, o.onset_date);
    out += ',';
    out += o.source_drug;
    out += ',';
    out += to_string(o.method);
    out += '\n';
  }
  return out;
}

std::vector<DiseaseOnset> parse_disease_onsets_csv(std::string_view contents,
                                                   const std::filesystem::path& origin) {
  std::vector<DiseaseOnset> out;
  csv::LineReader lines(contents);
  std::string_view line;
  if (!lines.next(line)) return out;
  const auto cols = csv::resolve_columns(
      line, {"patient_id", "icd", "onset_date", "source_drug", "method"}, origin);
  std::vector<std::string_view> f;
  while (lines.next(line)) {
    if (line.empty()) continue;
    csv::split_fields(line, f);
    const auto where = origin.string() + ":" + std::to_string(lines.line_number());
    if (f.size() < 5) throw DataError(where + ": expected 5 fields");
    const auto d = parse_iso_date(f[cols[2]]);
    if (!d) throw DataError(where + ": unparseable onset_date");
    out.push_back({std::string(f[cols[0]]), std::string(f[cols[1]]), *d,
                   std::string(f[cols[3]]), method_from_string(f[cols[4]])});
  }
  return out;
}

std::vector<DiseaseOnset> read_disease_onsets_csv(const std::filesystem::path& path) {
  return parse_disease_onsets_csv(csv::read_file(path), path);
}

}  // namespace rxonset
