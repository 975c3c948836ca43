// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/events.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "rxonset/csv.hpp"
#include "rxonset/errors.hpp"
#include "rxonset/parallel.hpp"
#include "rxonset/random.hpp"

namespace rxonset {

std::string_view to_string(Regime regime) {
  return regime == Regime::Renewable ? "renewable" : "nonrenewable";
}

Regime regime_from_string(std::string_view text) {
  if (text == "renewable") return Regime::Renewable;
  if (text == "nonrenewable") return Regime::NonRenewable;
  throw DataError("unknown regime '" + std::string(text) + "'");
}

Trajectory::Trajectory(std::string patient_id, std::string drug_code,
                       std::vector<TrajectoryEvent> events)
    : patient_id_(std::move(patient_id)),
      drug_code_(std::move(drug_code)),
      events_(std::move(events)) {
  if (events_.empty()) throw PreconditionError("trajectory needs at least one event");
  intervals_.reserve(events_.size() - 1);
  for (std::size_t i = 0; i + 1 < events_.size(); ++i) {
    const auto tau = events_[i + 1].date - events_[i].date;
    if (tau <= 0) {
      throw PreconditionError("trajectory events for " + patient_id_ + "/" + drug_code_ +
                              " are not strictly increasing");
    }
    intervals_.push_back(Interval{
        tau, events_[i].renewable ? Regime::Renewable : Regime::NonRenewable,
        events_[i].chronic_label});
  }
}

std::vector<PrescriptionEvent> Trajectory::prescriptions() const {
  std::vector<PrescriptionEvent> out;
  out.reserve(events_.size());
  for (const auto& e : events_) {
    out.push_back({patient_id_, drug_code_, e.date, e.chronic_label, e.renewable});
  }
  return out;
}

namespace {

bool parse_flag(std::string_view field, bool& out) {
  if (field == "1") {
    out = true;
    return true;
  }
  if (field == "0") {
    out = false;
    return true;
  }
  return false;
}

std::string quote(std::string_view v) { return "'" + std::string(v) + "'"; }

}  // namespace

PrescriptionBatch parse_prescriptions(std::string_view contents,
                                      const PrescriptionSchema& schema,
                                      const std::filesystem::path& origin) {
  PrescriptionBatch batch;
  csv::LineReader lines(contents);
  std::string_view line;
  if (!lines.next(line)) return batch;
  const auto cols = csv::resolve_columns(
      line, {schema.patient_id, schema.drug_code, schema.date, schema.chronic,
             schema.renewable},
      origin);
  const std::size_t width = *std::max_element(cols.begin(), cols.end()) + 1;

  batch.events.reserve(contents.size() / 32);
  std::vector<std::string_view> fields;
  while (lines.next(line)) {
    if (line.empty()) continue;
    ++batch.report.rows_read;
    const auto row = lines.line_number();
    csv::split_fields(line, fields);
    if (fields.size() < width) {
      batch.report.errors.push_back({row, "expected at least " + std::to_string(width) +
                                              " fields, got " +
                                              std::to_string(fields.size())});
      continue;
    }
    const auto patient = fields[cols[0]];
    const auto drug = fields[cols[1]];
    if (patient.empty() || drug.empty()) {
      batch.report.errors.push_back({row, "empty patient_id or drug code"});
      continue;
    }
    const auto date = parse_iso_date(fields[cols[2]]);
    if (!date) {
      batch.report.errors.push_back({row, "unparseable date " + quote(fields[cols[2]])});
      continue;
    }
    bool chronic = false, renewable = false;
    if (!parse_flag(fields[cols[3]], chronic)) {
      batch.report.errors.push_back({row, "unknown boolean encoding " + quote(fields[cols[3]])});
      continue;
    }
    if (!parse_flag(fields[cols[4]], renewable)) {
      batch.report.errors.push_back({row, "unknown boolean encoding " + quote(fields[cols[4]])});
      continue;
    }
    batch.events.push_back(
        {std::string(patient), std::string(drug), *date, chronic, renewable});
  }
  return batch;
}

PrescriptionBatch ingest_prescriptions(const std::filesystem::path& path,
                                       const PrescriptionSchema& schema) {
  const auto contents = csv::read_file(path);
  return parse_prescriptions(contents, schema, path);
}

DiagnosisBatch parse_diagnoses(std::string_view contents, const DiagnosisSchema& schema,
                               const std::filesystem::path& origin) {
  DiagnosisBatch batch;
  csv::LineReader lines(contents);
  std::string_view line;
  if (!lines.next(line)) return batch;
  const auto cols =
      csv::resolve_columns(line, {schema.patient_id, schema.icd_code, schema.date}, origin);
  const std::size_t width = *std::max_element(cols.begin(), cols.end()) + 1;

  std::vector<std::string_view> fields;
  while (lines.next(line)) {
    if (line.empty()) continue;
    ++batch.report.rows_read;
    const auto row = lines.line_number();
    csv::split_fields(line, fields);
    if (fields.size() < width) {
      batch.report.errors.push_back({row, "expected at least " + std::to_string(width) +
                                              " fields, got " +
                                              std::to_string(fields.size())});
      continue;
    }
    if (fields[cols[0]].empty() || fields[cols[1]].empty()) {
      batch.report.errors.push_back({row, "empty patient_id or icd code"});
      continue;
    }
    const auto date = parse_iso_date(fields[cols[2]]);
    if (!date) {
      batch.report.errors.push_back({row, "unparseable date " + quote(fields[cols[2]])});
      continue;
    }
    batch.events.push_back({std::string(fields[cols[0]]), std::string(fields[cols[1]]), *date});
  }
  return batch;
}

DiagnosisBatch ingest_diagnoses(const std::filesystem::path& path,
                                const DiagnosisSchema& schema) {
  const auto contents = csv::read_file(path);
  return parse_diagnoses(contents, schema, path);
}

std::string format_prescriptions_csv(std::span<const PrescriptionEvent> events) {
  std::string out = "patient_id,drug_atc,date,chronic,renewable\n";
  out.reserve(out.size() + events.size() * 36);
  for (const auto& e : events) {
    out += e.patient_id;
    out += ',';
    out += e.drug_code;
    out += ',';
    append_iso_date(out, e.date);
    out += e.chronic_label ? ",1" : ",0";
    out += e.renewable ? ",1\n" : ",0\n";
  }
  return out;
}

std::string format_diagnoses_csv(std::span<const DiagnosisEvent> events) {
  std::string out = "patient_id,icd,date\n";
  out.reserve(out.size() + events.size() * 28);
  for (const auto& e : events) {
    out += e.patient_id;
    out += ',';
    out += e.icd_code;
    out += ',';
    append_iso_date(out, e.date);
    out += '\n';
  }
  return out;
}

namespace {

// Dense rank of every distinct string, in lexicographic order.
std::vector<std::uint32_t> rank_strings(std::span<const PrescriptionEvent> events,
                                        const std::string PrescriptionEvent::*member,
                                        std::vector<std::string_view>& names) {
  std::unordered_map<std::string_view, std::uint32_t> index;
  names.clear();
  std::vector<std::uint32_t> provisional(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string_view key = events[i].*member;
    auto [it, inserted] = index.try_emplace(key, static_cast<std::uint32_t>(names.size()));
    if (inserted) names.push_back(key);
    provisional[i] = it->second;
  }
  std::vector<std::uint32_t> order(names.size());
  std::iota(order.begin(), order.end(), 0U);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return names[a] < names[b]; });
  std::vector<std::uint32_t> rank(names.size());
  std::vector<std::string_view> sorted(names.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = r;
    sorted[r] = names[order[r]];
  }
  names = std::move(sorted);
  for (auto& p : provisional) p = rank[p];
  return provisional;
}

struct Keyed {
  std::uint32_t patient;
  std::uint32_t drug;
  std::int32_t date;
  std::uint8_t chronic;
  std::uint8_t renewable;

  auto key() const { return std::tuple(patient, drug, date); }
};

}  // namespace

std::vector<Trajectory> build_trajectories(std::span<const PrescriptionEvent> events,
                                           unsigned threads) {
  if (events.empty()) return {};
  std::vector<std::string_view> patients, drugs;
  const auto patient_rank = rank_strings(events, &PrescriptionEvent::patient_id, patients);
  const auto drug_rank = rank_strings(events, &PrescriptionEvent::drug_code, drugs);

  std::vector<Keyed> rows(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    rows[i] = {patient_rank[i], drug_rank[i], events[i].date.count(),
               static_cast<std::uint8_t>(events[i].chronic_label),
               static_cast<std::uint8_t>(events[i].renewable)};
  }
  std::sort(rows.begin(), rows.end(),
            [](const Keyed& a, const Keyed& b) { return a.key() < b.key(); });

  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == 0 || rows[i].patient != rows[i - 1].patient || rows[i].drug != rows[i - 1].drug) {
      starts.push_back(i);
    }
  }
  starts.push_back(rows.size());

  const std::size_t groups = starts.size() - 1;
  const std::size_t chunks = chunk_count(groups, threads);
  std::vector<std::vector<Trajectory>> parts(chunks);
  parallel_for_chunks(groups, threads, [&](std::size_t begin, std::size_t end, std::size_t w) {
    auto& out = parts[w];
    out.reserve(end - begin);
    std::vector<TrajectoryEvent> buf;
    for (std::size_t g = begin; g < end; ++g) {
      buf.clear();
      for (std::size_t i = starts[g]; i < starts[g + 1]; ++i) {
        const auto& r = rows[i];
        if (!buf.empty() && buf.back().date.count() == r.date) {
          buf.back().chronic_label = buf.back().chronic_label || r.chronic;
          buf.back().renewable = buf.back().renewable || r.renewable;
        } else {
          buf.push_back({Day(r.date), r.chronic != 0, r.renewable != 0});
        }
      }
      const auto& head = rows[starts[g]];
      out.emplace_back(std::string(patients[head.patient]), std::string(drugs[head.drug]), buf);
    }
  });

  std::vector<Trajectory> result;
  result.reserve(groups);
  for (auto& part : parts) {
    std::move(part.begin(), part.end(), std::back_inserter(result));
  }
  return result;
}

PatientSplit split_patients(std::span<const std::string> patients, double train_fraction,
                            std::uint64_t seed) {
  if (patients.empty()) throw PreconditionError("cannot split an empty patient set");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw PreconditionError("train_fraction must lie strictly between 0 and 1");
  }
  std::vector<std::string> ids(patients.begin(), patients.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  // Fisher-Yates over the sorted ids so the result depends only on the set.
  Rng rng(mix_seed(seed));
  for (std::size_t i = ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(ids[i - 1], ids[j]);
  }
  // The epsilon keeps products like 0.29 * 100 = 28.999999999999996 at 29.
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(ids.size()) + 1e-9));

  PatientSplit split;
  split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::string> unique_patients(std::span<const PrescriptionEvent> prescriptions,
                                         std::span<const DiagnosisEvent> diagnoses) {
  std::vector<std::string> ids;
  ids.reserve(prescriptions.size() / 8 + diagnoses.size() / 4);
  std::string_view last;
  for (const auto& p : prescriptions) {
    if (p.patient_id != last) {
      ids.push_back(p.patient_id);
      last = p.patient_id;
    }
  }
  for (const auto& d : diagnoses) ids.push_back(d.patient_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
  const auto contents = csv::read_file(path);
  csv::LineReader lines(contents);
  std::vector<std::string> ids;
  std::string_view line;
  while (lines.next(line)) {
    if (!line.empty()) ids.emplace_back(line);
  }
  return ids;
}

void write_id_list(const std::filesystem::path& path, std::span<const std::string> ids) {
  std::string out;
  for (const auto& id : ids) {
    out += id;
    out += '\n';
  }
  csv::write_file(path, out);
}

}  // namespace rxonset
