// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>

#include "rxonset/errors.hpp"
#include "rxonset/synthcohort.hpp"

namespace rxonset::presets {
namespace {

struct DrugTemplate {
  WeibullParams nonrenewable;
  WeibullParams renewable;
  double background_rate = 0.0;
  double background_user_fraction = 0.0;
  double spurious_chronic_prob = 0.0;
  double missed_chronic_prob = 0.0;
};

// Appends `count` drugs named <stem>01, <stem>02, ... and returns their codes.
std::vector<std::string> add_drugs(ScenarioConfig& cfg, const std::string& stem, int count,
                                   const DrugTemplate& t) {
  std::vector<std::string> codes;
  for (int i = 1; i <= count; ++i) {
    DrugProfile d;
    d.code = fmt::format("{}{:02d}", stem, i);
    d.nonrenewable = t.nonrenewable;
    d.renewable = t.renewable;
    d.background_rate = t.background_rate;
    d.background_user_fraction = t.background_user_fraction;
    d.spurious_chronic_prob = t.spurious_chronic_prob;
    d.missed_chronic_prob = t.missed_chronic_prob;
    codes.push_back(d.code);
    cfg.drugs.push_back(std::move(d));
  }
  return codes;
}

ScenarioConfig base(std::size_t n_patients, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.n_patients = n_patients;
  cfg.study_start = iso_date("2016-01-01");
  cfg.study_end = iso_date("2022-12-31");
  cfg.seed = seed;
  cfg.noise_icds = {"J06", "M54", "R51", "Z00"};
  return cfg;
}

// Diagnosis recording rising over the years the window spans.
std::map<int, double> adoption_ramp() {
  return {{2016, 0.3}, {2017, 0.45}, {2018, 0.6}, {2019, 0.75}, {2020, 0.9}};
}

}  // namespace

ScenarioConfig demo() {
  auto cfg = base(10000, 20160101);

  DrugTemplate diabetes{{2.4, 95.0}, {3.0, 350.0}, 1.0 / 1500.0, 0.3, 0.05, 0.05};
  DiseaseProfile e11;
  e11.icd = "E11";
  e11.drugs = add_drugs(cfg, "A10BX", 10, diabetes);
  e11.prevalence = 0.35;
  e11.onset_start = iso_date("2012-01-01");
  e11.onset_end = iso_date("2022-06-30");
  e11.delay_min = -30;
  e11.delay_max = 120;
  e11.adoption = adoption_ramp();
  e11.switch_after_events = 4;
  e11.recoding_rate = 2.0;
  e11.treated_fraction = 0.9;
  cfg.diseases.push_back(e11);

  DrugTemplate hypertension{{2.0, 100.0}, {2.6, 360.0}, 1.0 / 1500.0, 0.3, 0.05, 0.05};
  DiseaseProfile i10;
  i10.icd = "I10";
  i10.drugs = add_drugs(cfg, "C09XA", 10, hypertension);
  i10.prevalence = 0.4;
  i10.onset_start = iso_date("2010-01-01");
  i10.onset_end = iso_date("2022-06-30");
  i10.delay_min = -60;
  i10.delay_max = 90;
  i10.adoption = adoption_ramp();
  i10.switch_after_events = 3;
  i10.recoding_rate = 2.0;
  i10.treated_fraction = 0.9;
  cfg.diseases.push_back(i10);

  DrugTemplate depression{{1.8, 60.0}, {2.2, 180.0}, 1.0 / 1200.0, 0.3, 0.05, 0.05};
  DiseaseProfile f32;
  f32.icd = "F32";
  f32.drugs = add_drugs(cfg, "N06XA", 10, depression);
  f32.prevalence = 0.3;
  f32.onset_start = iso_date("2014-01-01");
  f32.onset_end = iso_date("2022-06-30");
  f32.delay_min = -30;
  f32.delay_max = 60;
  f32.adoption = adoption_ramp();
  f32.recoding_rate = 2.0;
  f32.treated_fraction = 0.8;
  cfg.diseases.push_back(f32);

  return cfg;
}

ScenarioConfig onset_accuracy() {
  auto cfg = base(10000, 5150);
  // Sporadic use of the disease drugs is common; 15% of it is labelled
  // chronic.
  DrugTemplate dense{{2.5, 100.0}, {2.5, 350.0}, 1.0 / 1000.0, 0.6, 0.15, 0.0};
  DiseaseProfile d;
  d.icd = "E78";
  d.drugs = add_drugs(cfg, "C10XA", 10, dense);
  d.prevalence = 0.4;
  d.onset_start = iso_date("2017-01-01");
  d.onset_end = iso_date("2021-01-01");
  d.delay_min = -30;
  d.delay_max = 90;
  d.recoding_rate = 1.0;
  cfg.diseases.push_back(d);
  return cfg;
}

ScenarioConfig left_censored() {
  auto cfg = base(12000, 7331);
  DrugTemplate tmpl{{2.5, 100.0}, {3.0, 350.0}, 1.0 / 300.0, 0.5, 0.15, 0.0};
  DiseaseProfile d;
  d.icd = "I25";
  d.drugs = add_drugs(cfg, "B01XA", 10, tmpl);
  d.prevalence = 0.35;
  // 30% of the uniform onset range lies before the study window.
  d.onset_end = cfg.study_end - 365;
  d.onset_start = d.onset_end - static_cast<std::int32_t>((d.onset_end - cfg.study_start) / 0.7);
  d.delay_min = -30;
  d.delay_max = 90;
  d.adoption = adoption_ramp();
  d.switch_after_events = 4;
  d.recoding_rate = 1.0;
  cfg.diseases.push_back(d);
  return cfg;
}

Day covid_cutover() { return iso_date("2020-03-01"); }

ScenarioConfig covid_analog() {
  auto cfg = base(12000, 2019);
  // Sparse sporadic use spread over most patients.
  DrugTemplate tmpl{{2.2, 45.0}, {2.5, 120.0}, 1.0 / 2500.0, 0.8, 0.15, 0.0};
  DiseaseProfile d;
  d.icd = "U07";
  d.drugs = add_drugs(cfg, "R05XA", 10, tmpl);
  d.prevalence = 0.4;
  d.onset_start = covid_cutover();
  d.onset_end = iso_date("2022-06-30");
  d.delay_min = -14;
  d.delay_max = 30;
  d.recoding_rate = 2.0;
  cfg.diseases.push_back(d);
  return cfg;
}

ScenarioConfig density_sweep() {
  auto cfg = base(20000, 424242);
  struct Spec {
    const char* icd;
    const char* stem;
    double scale;
    double treated;
  };
  // Refill scale and treated share set the prescription density, from
  // roughly 4 to 40 prescriptions per diagnosed patient.
  const Spec specs[] = {
      {"G40", "N03XA", 45.0, 0.95},  {"E03", "H03XA", 90.0, 0.9}, {"J45", "R03XA", 150.0, 0.75},
      {"M81", "M05XA", 500.0, 0.6}, {"L40", "D05XA", 900.0, 0.45},
  };
  for (const auto& s : specs) {
    DrugTemplate tmpl{{2.3, s.scale}, {2.8, 350.0}, 1.0 / 2000.0, 0.2, 0.03, 0.0};
    DiseaseProfile d;
    d.icd = s.icd;
    d.drugs = add_drugs(cfg, s.stem, 10, tmpl);
    d.prevalence = 0.2;
    d.onset_start = iso_date("2016-01-01");
    d.onset_end = iso_date("2021-12-31");
    d.delay_min = -30;
    d.delay_max = 90;
    d.treated_fraction = s.treated;
    d.recoding_rate = 1.0;
    cfg.diseases.push_back(d);
  }
  return cfg;
}

ScenarioConfig label_noise() {
  auto cfg = base(20000, 8686);
  cfg.noise_diagnosis_rate = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double k = 1.2 + 0.08 * i;  // 1.2 .. 4.32
    const double scale = 60.0 + 10.0 * (i % 10);
    DrugTemplate tmpl{{k, scale}, {k + 0.5, 350.0}, 1.0 / 700.0, 0.3, 0.2, 0.2};
    auto codes = add_drugs(cfg, fmt::format("Z{:02d}XA", i), 1, tmpl);
    DiseaseProfile d;
    d.icd = fmt::format("Q{:02d}", i);
    d.drugs = codes;
    d.prevalence = 0.05;
    d.onset_start = iso_date("2014-01-01");
    d.onset_end = iso_date("2021-06-30");
    cfg.diseases.push_back(d);
  }
  return cfg;
}

std::vector<std::string> names() {
  return {"demo", "onset_accuracy", "left_censored", "covid_analog", "density_sweep",
          "label_noise"};
}

ScenarioConfig by_name(std::string_view name) {
  if (name == "demo") return demo();
  if (name == "onset_accuracy") return onset_accuracy();
  if (name == "left_censored") return left_censored();
  if (name == "covid_analog") return covid_analog();
  if (name == "density_sweep") return density_sweep();
  if (name == "label_noise") return label_noise();
  throw UsageError("unknown preset '" + std::string(name) + "'");
}

}  // namespace rxonset::presets
