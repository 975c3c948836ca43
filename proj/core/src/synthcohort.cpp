// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/synthcohort.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "json.hpp"
#include "rxonset/csv.hpp"
#include "rxonset/errors.hpp"
#include "rxonset/parallel.hpp"

namespace rxonset {

using json = nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError("invalid scenario: " + what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void require_weibull(const WeibullParams& p, const std::string& where) {
  require(p.shape > 0.0 && std::isfinite(p.shape) && p.scale > 0.0 && std::isfinite(p.scale),
          where + " Weibull parameters must be positive");
}

double adoption_probability(const std::map<int, double>& ramp, int year) {
  if (ramp.empty()) return 1.0;
  auto it = ramp.upper_bound(year);
  if (it == ramp.begin()) return it->second;
  return std::prev(it)->second;
}

std::string patient_name(const std::string& prefix, std::size_t index, std::size_t width) {
  return fmt::format("{}{:0{}}", prefix, index, width);
}

}  // namespace

void ScenarioConfig::validate() const {
  require(n_patients > 0, "n_patients must be positive");
  require(study_start <= study_end, "study_start must not be after study_end");
  std::set<std::string, std::less<>> codes;
  for (const auto& d : drugs) {
    require(!d.code.empty(), "drug code must be non-empty");
    require(codes.insert(d.code).second, "duplicate drug code " + d.code);
    require_weibull(d.renewable, d.code + " renewable");
    require_weibull(d.nonrenewable, d.code + " nonrenewable");
    require(d.background_rate >= 0.0 && std::isfinite(d.background_rate),
            d.code + " background_rate must be >= 0");
    require(is_probability(d.background_user_fraction),
            d.code + " background_user_fraction must lie in [0, 1]");
    require(is_probability(d.spurious_chronic_prob),
            d.code + " spurious_chronic_prob must lie in [0, 1]");
    require(is_probability(d.missed_chronic_prob),
            d.code + " missed_chronic_prob must lie in [0, 1]");
  }
  for (const auto& dz : diseases) {
    require(!dz.icd.empty(), "disease icd must be non-empty");
    require(is_probability(dz.prevalence), dz.icd + " prevalence must lie in [0, 1]");
    require(is_probability(dz.treated_fraction), dz.icd + " treated_fraction must lie in [0, 1]");
    require(dz.onset_start <= dz.onset_end, dz.icd + " onset_start must not be after onset_end");
    require(dz.delay_min <= dz.delay_max, dz.icd + " delay_min must not exceed delay_max");
    require(dz.therapy_lag_max >= 0, dz.icd + " therapy_lag_max must be >= 0");
    require(dz.switch_after_events >= -1, dz.icd + " switch_after_events must be >= -1");
    require(dz.recoding_rate >= 0.0, dz.icd + " recoding_rate must be >= 0");
    for (const auto& [year, p] : dz.adoption) {
      require(is_probability(p), dz.icd + " adoption probability for " + std::to_string(year) +
                                     " must lie in [0, 1]");
    }
    require(!dz.drugs.empty() || dz.prevalence == 0.0 || dz.treated_fraction == 0.0,
            dz.icd + " has treated patients but no drugs");
    for (const auto& code : dz.drugs) {
      require(codes.count(code) == 1, dz.icd + " references unknown drug " + code);
    }
  }
  require(noise_diagnosis_rate >= 0.0, "noise_diagnosis_rate must be >= 0");
  require(noise_diagnosis_rate == 0.0 || !noise_icds.empty(),
          "noise_diagnosis_rate > 0 needs noise_icds");
}

const DrugProfile* ScenarioConfig::find_drug(std::string_view code) const {
  for (const auto& d : drugs) {
    if (d.code == code) return &d;
  }
  return nullptr;
}

std::int32_t weibull_days_from_uniform(const WeibullParams& p, double u) {
  const double tau = p.scale * std::pow(-std::log(u), 1.0 / p.shape);
  return static_cast<std::int32_t>(std::max(1.0, std::round(tau)));
}

std::int32_t sample_weibull(const WeibullParams& p, Rng& rng) {
  return weibull_days_from_uniform(p, rng.uniform_open());
}

namespace {

struct RawEvent {
  std::size_t drug;
  Day date;
  bool chronic;
  bool renewable;
  bool sustained;
};

struct PatientOutput {
  std::vector<PrescriptionEvent> prescriptions;
  std::vector<DiagnosisEvent> diagnoses;
  std::vector<TrueOnset> onsets;
  std::vector<TrueTransition> transitions;
};

class PatientSimulator {
 public:
  explicit PatientSimulator(const ScenarioConfig& cfg) : cfg_(cfg) {
    for (const auto& dz : cfg.diseases) {
      std::vector<std::size_t> idx;
      for (const auto& code : dz.drugs) {
        for (std::size_t k = 0; k < cfg.drugs.size(); ++k) {
          if (cfg.drugs[k].code == code) idx.push_back(k);
        }
      }
      disease_drugs_.push_back(std::move(idx));
    }
    width_ = std::max<std::size_t>(6, std::to_string(cfg.n_patients - 1).size());
  }

  void run(std::size_t index, PatientOutput& out) const {
    Rng rng = Rng::derive(cfg_.seed, index);
    const std::string id = patient_name(cfg_.patient_prefix, index, width_);
    std::vector<RawEvent> events;
    // earliest sustained-therapy start per drug
    std::vector<std::optional<Day>> therapy(cfg_.drugs.size());
    const auto first_diagnosis = static_cast<std::ptrdiff_t>(out.diagnoses.size());
    const auto first_onset = static_cast<std::ptrdiff_t>(out.onsets.size());

    for (std::size_t z = 0; z < cfg_.diseases.size(); ++z) {
      const auto& dz = cfg_.diseases[z];
      if (!rng.bernoulli(dz.prevalence)) continue;
      const Day onset(static_cast<std::int32_t>(
          rng.between(dz.onset_start.count(), dz.onset_end.count())));
      TrueOnset truth{id, dz.icd, onset, {}};
      if (!disease_drugs_[z].empty() && rng.bernoulli(dz.treated_fraction)) {
        const auto drug = disease_drugs_[z][rng.below(disease_drugs_[z].size())];
        const Day start = onset + static_cast<std::int32_t>(rng.between(0, dz.therapy_lag_max));
        emit_sustained(rng, dz, drug, start, events);
        if (!therapy[drug] || start < *therapy[drug]) therapy[drug] = start;
        truth.drug_code = cfg_.drugs[drug].code;
      }
      emit_diagnoses(rng, dz, id, onset, out.diagnoses);
      out.onsets.push_back(std::move(truth));
    }

    for (std::size_t k = 0; k < cfg_.drugs.size(); ++k) {
      const auto& drug = cfg_.drugs[k];
      if (drug.background_rate <= 0.0 || !rng.bernoulli(drug.background_user_fraction)) continue;
      double t = static_cast<double>(cfg_.study_start.count());
      while (true) {
        t += rng.exponential(drug.background_rate);
        const Day day(static_cast<std::int32_t>(std::floor(t)));
        if (day > cfg_.study_end || (therapy[k] && day >= *therapy[k])) break;
        events.push_back({k, day, rng.bernoulli(drug.spurious_chronic_prob), false, false});
      }
    }

    if (cfg_.noise_diagnosis_rate > 0.0) {
      const double per_day = cfg_.noise_diagnosis_rate / 365.25;
      double t = static_cast<double>(cfg_.study_start.count());
      while (true) {
        t += rng.exponential(per_day);
        const Day day(static_cast<std::int32_t>(std::floor(t)));
        if (day > cfg_.study_end) break;
        out.diagnoses.push_back({id, cfg_.noise_icds[rng.below(cfg_.noise_icds.size())], day});
      }
    }

    std::sort(events.begin(), events.end(), [&](const RawEvent& a, const RawEvent& b) {
      const auto& ca = cfg_.drugs[a.drug].code;
      const auto& cb = cfg_.drugs[b.drug].code;
      return std::tie(ca, a.date, a.sustained, a.chronic, a.renewable) <
             std::tie(cb, b.date, b.sustained, b.chronic, b.renewable);
    });
    for (const auto& e : events) {
      out.prescriptions.push_back({id, cfg_.drugs[e.drug].code, e.date, e.chronic, e.renewable});
    }
    record_transitions(id, events, therapy, out.transitions);

    std::sort(out.diagnoses.begin() + first_diagnosis, out.diagnoses.end(),
              [](const DiagnosisEvent& a, const DiagnosisEvent& b) {
                return std::tie(a.date, a.icd_code) < std::tie(b.date, b.icd_code);
              });
    std::sort(out.onsets.begin() + first_onset, out.onsets.end(), [](const TrueOnset& a, const TrueOnset& b) {
      return a.icd_code < b.icd_code;
    });
  }

 private:
  void emit_sustained(Rng& rng, const DiseaseProfile& dz, std::size_t drug, Day start,
                      std::vector<RawEvent>& events) const {
    const auto& profile = cfg_.drugs[drug];
    Day t = start;
    for (std::int32_t j = 0; t <= cfg_.study_end; ++j) {
      const bool renewable = dz.switch_after_events >= 0 && j >= dz.switch_after_events;
      const bool chronic = !rng.bernoulli(profile.missed_chronic_prob);
      if (t >= cfg_.study_start) events.push_back({drug, t, chronic, renewable, true});
      t = t + sample_weibull(renewable ? profile.renewable : profile.nonrenewable, rng);
    }
  }

  void emit_diagnoses(Rng& rng, const DiseaseProfile& dz, const std::string& id, Day onset,
                      std::vector<DiagnosisEvent>& out) const {
    Day date = onset + static_cast<std::int32_t>(rng.between(dz.delay_min, dz.delay_max));
    const bool recorded = date >= cfg_.study_start && date <= cfg_.study_end &&
                          rng.bernoulli(adoption_probability(dz.adoption, calendar_year(date)));
    if (!recorded) return;
    out.push_back({id, dz.icd, date});
    if (dz.recoding_rate <= 0.0) return;
    double t = static_cast<double>(date.count());
    const double per_day = dz.recoding_rate / 365.25;
    while (true) {
      t += rng.exponential(per_day);
      const Day day(static_cast<std::int32_t>(std::floor(t)));
      if (day > cfg_.study_end) break;
      if (rng.bernoulli(adoption_probability(dz.adoption, calendar_year(day)))) {
        out.push_back({id, dz.icd, day});
      }
    }
  }

  void record_transitions(const std::string& id, const std::vector<RawEvent>& events,
                          const std::vector<std::optional<Day>>& therapy,
                          std::vector<TrueTransition>& out) const {
    std::vector<std::size_t> treated;
    for (std::size_t k = 0; k < therapy.size(); ++k) {
      if (therapy[k]) treated.push_back(k);
    }
    std::sort(treated.begin(), treated.end(), [&](std::size_t a, std::size_t b) {
      return cfg_.drugs[a].code < cfg_.drugs[b].code;
    });
    for (const auto k : treated) {
      TrueTransition tr{id, cfg_.drugs[k].code, std::nullopt};
      std::size_t distinct = 0;
      std::optional<Day> last;
      for (const auto& e : events) {
        if (e.drug != k) continue;
        if (!last || e.date != *last) {
          ++distinct;
          last = e.date;
        }
        if (e.sustained) {
          tr.first_sustained_event = distinct - 1;
          break;
        }
      }
      out.push_back(std::move(tr));
    }
  }

  const ScenarioConfig& cfg_;
  std::vector<std::vector<std::size_t>> disease_drugs_;
  std::size_t width_ = 6;
};

}  // namespace

Cohort simulate(const ScenarioConfig& config, unsigned threads) {
  config.validate();
  const PatientSimulator sim(config);
  const std::size_t chunks = chunk_count(config.n_patients, threads);
  std::vector<PatientOutput> parts(chunks);
  parallel_for_chunks(config.n_patients, threads,
                      [&](std::size_t begin, std::size_t end, std::size_t w) {
                        for (std::size_t i = begin; i < end; ++i) sim.run(i, parts[w]);
                      });
  Cohort cohort;
  for (auto& p : parts) {
    std::move(p.prescriptions.begin(), p.prescriptions.end(),
              std::back_inserter(cohort.prescriptions));
    std::move(p.diagnoses.begin(), p.diagnoses.end(), std::back_inserter(cohort.diagnoses));
    std::move(p.onsets.begin(), p.onsets.end(), std::back_inserter(cohort.truth.onsets));
    std::move(p.transitions.begin(), p.transitions.end(),
              std::back_inserter(cohort.truth.transitions));
  }
  return cohort;
}

namespace {

json weibull_json(const WeibullParams& p) { return {{"k", p.shape}, {"lambda", p.scale}}; }

WeibullParams weibull_from(const json& j) {
  return {j.at("k").get<double>(), j.at("lambda").get<double>()};
}

}  // namespace

std::string scenario_to_json(const ScenarioConfig& c) {
  json doc;
  doc["n_patients"] = c.n_patients;
  doc["study_start"] = format_iso_date(c.study_start);
  doc["study_end"] = format_iso_date(c.study_end);
  doc["seed"] = c.seed;
  doc["patient_prefix"] = c.patient_prefix;
  doc["noise_icds"] = c.noise_icds;
  doc["noise_diagnosis_rate"] = c.noise_diagnosis_rate;
  json drugs = json::array();
  for (const auto& d : c.drugs) {
    drugs.push_back({{"code", d.code},
                     {"renewable", weibull_json(d.renewable)},
                     {"nonrenewable", weibull_json(d.nonrenewable)},
                     {"background_rate", d.background_rate},
                     {"background_user_fraction", d.background_user_fraction},
                     {"spurious_chronic_prob", d.spurious_chronic_prob},
                     {"missed_chronic_prob", d.missed_chronic_prob}});
  }
  doc["drugs"] = std::move(drugs);
  json diseases = json::array();
  for (const auto& z : c.diseases) {
    json adoption = json::object();
    for (const auto& [year, p] : z.adoption) adoption[std::to_string(year)] = p;
    diseases.push_back({{"icd", z.icd},
                        {"drugs", z.drugs},
                        {"prevalence", z.prevalence},
                        {"onset_start", format_iso_date(z.onset_start)},
                        {"onset_end", format_iso_date(z.onset_end)},
                        {"treated_fraction", z.treated_fraction},
                        {"therapy_lag_max", z.therapy_lag_max},
                        {"diagnosis_delay", {{"min", z.delay_min}, {"max", z.delay_max}}},
                        {"adoption", std::move(adoption)},
                        {"switch_after_events", z.switch_after_events},
                        {"recoding_rate", z.recoding_rate}});
  }
  doc["diseases"] = std::move(diseases);
  return doc.dump(2) + "\n";
}

ScenarioConfig scenario_from_json(std::string_view text) {
  ScenarioConfig c;
  try {
    const auto doc = json::parse(text);
    c.n_patients = doc.at("n_patients").get<std::size_t>();
    c.study_start = iso_date(doc.at("study_start").get<std::string>());
    c.study_end = iso_date(doc.at("study_end").get<std::string>());
    c.seed = doc.value("seed", std::uint64_t{1});
    c.patient_prefix = doc.value("patient_prefix", std::string("P"));
    c.noise_icds = doc.value("noise_icds", std::vector<std::string>{});
    c.noise_diagnosis_rate = doc.value("noise_diagnosis_rate", 0.0);
    for (const auto& d : doc.at("drugs")) {
      DrugProfile p;
      p.code = d.at("code").get<std::string>();
      p.renewable = weibull_from(d.at("renewable"));
      p.nonrenewable = weibull_from(d.at("nonrenewable"));
      p.background_rate = d.value("background_rate", 0.0);
      p.background_user_fraction = d.value("background_user_fraction", 1.0);
      p.spurious_chronic_prob = d.value("spurious_chronic_prob", 0.0);
      p.missed_chronic_prob = d.value("missed_chronic_prob", 0.0);
      c.drugs.push_back(std::move(p));
    }
    for (const auto& z : doc.at("diseases")) {
      DiseaseProfile p;
      p.icd = z.at("icd").get<std::string>();
      p.drugs = z.at("drugs").get<std::vector<std::string>>();
      p.prevalence = z.at("prevalence").get<double>();
      p.onset_start = iso_date(z.at("onset_start").get<std::string>());
      p.onset_end = iso_date(z.at("onset_end").get<std::string>());
      p.treated_fraction = z.value("treated_fraction", 1.0);
      p.therapy_lag_max = z.value("therapy_lag_max", 0);
      if (z.contains("diagnosis_delay")) {
        p.delay_min = z["diagnosis_delay"].value("min", 0);
        p.delay_max = z["diagnosis_delay"].value("max", 0);
      }
      if (z.contains("adoption")) {
        for (const auto& [year, prob] : z["adoption"].items()) {
          p.adoption[std::stoi(year)] = prob.get<double>();
        }
      }
      p.switch_after_events = z.value("switch_after_events", -1);
      p.recoding_rate = z.value("recoding_rate", 0.0);
      c.diseases.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed scenario: ") + e.what());
  } catch (const DataError& e) {
    throw UsageError(std::string("malformed scenario: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw UsageError("malformed scenario: adoption years must be integers");
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(csv::read_file(path));
}

std::string format_ground_truth_csv(const GroundTruth& truth) {
  std::string out = "patient_id,icd,true_onset_date\n";
  for (const auto& t : truth.onsets) {
    out += t.patient_id;
    out += ',';
    out += t.icd_code;
    out += ',';
    append_iso_date(out, t.onset_date);
    out += '\n';
  }
  return out;
}

void write_cohort(const Cohort& cohort, const ScenarioConfig& config,
                  const std::filesystem::path& dir) {
  csv::write_file(dir / "prescriptions.csv", format_prescriptions_csv(cohort.prescriptions));
  csv::write_file(dir / "diagnoses.csv", format_diagnoses_csv(cohort.diagnoses));
  csv::write_file(dir / "ground_truth.csv", format_ground_truth_csv(cohort.truth));
  csv::write_file(dir / "scenario.json", scenario_to_json(config));
}

}  // namespace rxonset
