// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/evalharness.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include <fmt/format.h>

#include "rxonset/errors.hpp"
#include "rxonset/stats.hpp"

namespace rxonset {

const RecallSeries* RecallCurve::find(std::string_view icd, Method method) const {
  for (const auto& s : series) {
    if (s.icd_code == icd && s.method == method) return &s;
  }
  return nullptr;
}

namespace {

using PatientDays = std::map<std::string, Day, std::less<>>;

bool in_scope(std::span<const std::string> icds, std::string_view icd) {
  return icds.empty() || std::find(icds.begin(), icds.end(), icd) != icds.end();
}

// icd -> patient -> earliest diagnosis.
std::map<std::string, PatientDays, std::less<>> diagnoses_by_icd(
    std::span<const DiagnosisEvent> diagnoses, std::span<const std::string> icds) {
  std::map<std::string, PatientDays, std::less<>> out;
  for (const auto& [key, day] : earliest_diagnoses(diagnoses, icds)) {
    out[key.second].emplace(key.first, day);
  }
  return out;
}

// (icd, method) -> patient -> onset.
std::map<std::pair<std::string, Method>, PatientDays> onsets_by_icd(
    std::span<const DiseaseOnset> onsets) {
  std::map<std::pair<std::string, Method>, PatientDays> out;
  for (const auto& o : onsets) {
    auto& days = out[{o.icd_code, o.method}];
    auto [it, inserted] = days.emplace(o.patient_id, o.onset_date);
    if (!inserted && o.onset_date < it->second) it->second = o.onset_date;
  }
  return out;
}

const PatientDays* lookup(const std::map<std::pair<std::string, Method>, PatientDays>& index,
                          const std::string& icd, Method method) {
  const auto it = index.find({icd, method});
  return it == index.end() ? nullptr : &it->second;
}

}  // namespace

std::map<std::pair<std::string, std::string>, Day> earliest_diagnoses(
    std::span<const DiagnosisEvent> diagnoses, std::span<const std::string> icds) {
  std::map<std::pair<std::string, std::string>, Day> out;
  for (const auto& d : diagnoses) {
    if (!in_scope(icds, d.icd_code)) continue;
    auto [it, inserted] = out.try_emplace({d.patient_id, d.icd_code}, d.date);
    if (!inserted && d.date < it->second) it->second = d.date;
  }
  return out;
}

TimeDiffStats time_differences(std::span<const DiseaseOnset> onsets,
                               std::span<const DiagnosisEvent> diagnoses,
                               std::span<const std::string> icds,
                               std::span<const Method> methods) {
  const auto dx = diagnoses_by_icd(diagnoses, icds);
  const auto index = onsets_by_icd(onsets);
  TimeDiffStats stats;
  for (const auto& [icd, patients] : dx) {
    stats.diagnosed[icd] = patients.size();
    for (const Method m : methods) {
      const auto* found = lookup(index, icd, m);
      std::vector<double> diffs;
      std::size_t unmatched = 0;
      for (const auto& [patient, diagnosed_on] : patients) {
        const auto it = found ? found->find(patient) : PatientDays::const_iterator{};
        if (!found || it == found->end()) {
          ++unmatched;
          continue;
        }
        const std::int32_t diff = diagnosed_on - it->second;
        stats.samples.push_back({icd, m, patient, diff});
        diffs.push_back(static_cast<double>(diff));
      }
      stats.unmatched[{icd, m}] = unmatched;
      if (!diffs.empty()) {
        stats.summaries.push_back({icd, m, diffs.size(), stats::mean(diffs),
                                   stats::median(diffs), stats::quantile(diffs, 0.25),
                                   stats::quantile(diffs, 0.75)});
      }
    }
  }
  return stats;
}

RecallCurve recall_at(std::span<const DiseaseOnset> onsets,
                      std::span<const DiagnosisEvent> diagnoses,
                      std::span<const std::int32_t> deltas, std::span<const std::string> icds,
                      std::span<const Method> methods) {
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] <= 0) throw UsageError("recall deltas must be positive");
    if (i > 0 && deltas[i] <= deltas[i - 1]) {
      throw UsageError("recall deltas must be strictly increasing");
    }
  }
  const auto dx = diagnoses_by_icd(diagnoses, icds);
  const auto index = onsets_by_icd(onsets);

  RecallCurve curve;
  std::set<std::string, std::less<>> wanted(icds.begin(), icds.end());
  if (icds.empty()) {
    for (const auto& [key, _] : index) wanted.insert(key.first);
    for (const auto& [icd, _] : dx) wanted.insert(icd);
  }
  for (const auto& icd : wanted) {
    const auto d = dx.find(icd);
    if (d == dx.end() || d->second.empty()) {
      curve.warnings.push_back("ICD " + icd + " has no diagnosed patients; excluded from recall");
      continue;
    }
    const auto& patients = d->second;
    for (const Method m : methods) {
      const auto* found = lookup(index, icd, m);
      // Absolute distance per diagnosed patient with an onset.
      std::vector<std::int32_t> gaps;
      if (found) {
        for (const auto& [patient, diagnosed_on] : patients) {
          const auto it = found->find(patient);
          if (it != found->end()) gaps.push_back(std::abs(diagnosed_on - it->second));
        }
      }
      std::sort(gaps.begin(), gaps.end());
      RecallSeries s{icd, m, patients.size(), {}};
      for (const auto delta : deltas) {
        const auto hit = static_cast<std::size_t>(
            std::upper_bound(gaps.begin(), gaps.end(), delta) - gaps.begin());
        s.points.push_back(
            {delta, static_cast<double>(hit) / static_cast<double>(patients.size()), hit});
      }
      curve.series.push_back(std::move(s));
    }
  }
  return curve;
}

DensityRecall density_recall_correlation(const RecallCurve& curve,
                                         std::span<const PrescriptionEvent> prescriptions,
                                         std::span<const DiagnosisEvent> diagnoses,
                                         const PhenotypeDictionary& dictionary,
                                         std::int32_t delta) {
  const auto recall_of = [&](const std::string& icd, Method m) -> std::optional<double> {
    const auto* s = curve.find(icd, m);
    if (!s) return std::nullopt;
    for (const auto& p : s->points) {
      if (p.delta_days == delta) return p.recall;
    }
    throw UsageError("recall curve has no point at delta " + std::to_string(delta));
  };

  std::map<std::pair<std::string_view, std::string_view>, std::size_t> counts;
  for (const auto& p : prescriptions) ++counts[{p.patient_id, p.drug_code}];

  const auto dx = diagnoses_by_icd(diagnoses, {});
  DensityRecall out;
  for (const auto& [icd, patients] : dx) {
    const auto* drugs = dictionary.find(icd);
    if (!drugs) continue;
    const auto rc = recall_of(icd, Method::ChangePoint);
    const auto rn = recall_of(icd, Method::Naive);
    if (!rc || !rn) continue;
    std::vector<double> per_patient;
    per_patient.reserve(patients.size());
    for (const auto& [patient, _] : patients) {
      std::size_t n = 0;
      for (const auto& d : *drugs) {
        const auto it = counts.find({patient, d.drug_code});
        if (it != counts.end()) n += it->second;
      }
      per_patient.push_back(static_cast<double>(n));
    }
    out.icds.push_back({icd, stats::median(per_patient), *rc, *rn});
  }

  if (out.icds.size() < 3) {
    throw UndefinedStatisticError("density-recall correlation needs at least 3 ICDs, have " +
                                  std::to_string(out.icds.size()));
  }
  std::vector<double> density, rec_c, rec_n;
  for (const auto& row : out.icds) {
    density.push_back(row.density);
    rec_c.push_back(row.recall_changepoint);
    rec_n.push_back(row.recall_naive);
  }
  out.r_changepoint = stats::pearson(density, rec_c);
  out.r_naive = stats::pearson(density, rec_n);
  return out;
}

std::map<Method, std::optional<double>> pre_cutover_fraction(std::span<const DiseaseOnset> onsets,
                                                             Day cutover, std::string_view icd) {
  std::map<Method, std::pair<std::size_t, std::size_t>> tally;  // (before, total)
  for (const auto& o : onsets) {
    if (o.icd_code != icd) continue;
    auto& t = tally[o.method];
    ++t.second;
    if (o.onset_date < cutover) ++t.first;
  }
  std::map<Method, std::optional<double>> out;
  for (const Method m : kBothMethods) {
    const auto it = tally.find(m);
    if (it == tally.end() || it->second.second == 0) {
      out[m] = std::nullopt;
    } else {
      out[m] = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    }
  }
  return out;
}

std::map<Method, std::optional<double>> early_window_fraction(
    std::span<const DiseaseOnset> onsets, Day window_start, std::int32_t days) {
  std::map<Method, std::pair<std::size_t, std::size_t>> tally;
  const Day end = window_start + days;
  for (const auto& o : onsets) {
    auto& t = tally[o.method];
    ++t.second;
    if (o.onset_date >= window_start && o.onset_date < end) ++t.first;
  }
  std::map<Method, std::optional<double>> out;
  for (const Method m : kBothMethods) {
    const auto it = tally.find(m);
    if (it == tally.end()) {
      out[m] = std::nullopt;
    } else {
      out[m] = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    }
  }
  return out;
}

std::map<Method, std::size_t> count_by_method(std::span<const DiseaseOnset> onsets) {
  std::map<Method, std::size_t> out{{Method::ChangePoint, 0}, {Method::Naive, 0}};
  for (const auto& o : onsets) ++out[o.method];
  return out;
}

std::map<Method, std::vector<double>> onset_errors(std::span<const DiseaseOnset> onsets,
                                                   std::span<const TrueOnset> truth) {
  std::map<std::pair<std::string_view, std::string_view>, Day> true_days;
  for (const auto& t : truth) {
    true_days.emplace(std::pair<std::string_view, std::string_view>(t.patient_id, t.icd_code),
                      t.onset_date);
  }
  std::map<Method, std::vector<double>> out;
  for (const auto& o : onsets) {
    const auto it = true_days.find({o.patient_id, o.icd_code});
    if (it == true_days.end()) continue;
    out[o.method].push_back(std::abs(static_cast<double>(o.onset_date - it->second)));
  }
  return out;
}

std::string format_timediff_csv(const TimeDiffStats& stats) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "icd,method,patient_id,diff_days\n");
  for (const auto& s : stats.samples) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", s.icd_code, to_string(s.method),
                   s.patient_id, s.diff_days);
  }
  return fmt::to_string(buf);
}

std::string format_recall_csv(const RecallCurve& curve) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "icd,method,delta,recall,n_diagnosed\n");
  for (const auto& s : curve.series) {
    for (const auto& p : s.points) {
      fmt::format_to(std::back_inserter(buf), "{},{},{},{:.6f},{}\n", s.icd_code,
                     to_string(s.method), p.delta_days, p.recall, s.n_diagnosed);
    }
  }
  return fmt::to_string(buf);
}

std::string format_density_csv(std::span<const IcdDensity> rows) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "icd,density,recall365_changepoint,recall365_naive\n");
  for (const auto& r : rows) {
    fmt::format_to(std::back_inserter(buf), "{},{:.1f},{:.6f},{:.6f}\n", r.icd_code, r.density,
                   r.recall_changepoint, r.recall_naive);
  }
  return fmt::to_string(buf);
}

}  // namespace rxonset
