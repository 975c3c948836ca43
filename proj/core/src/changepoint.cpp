// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/changepoint.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "rxonset/csv.hpp"
#include "rxonset/exact_sum.hpp"
#include "rxonset/parallel.hpp"

namespace rxonset {

void DetectionConfig::validate() const {
  if (!(epsilon >= 0.0)) throw UsageError("epsilon must be >= 0");
  if (min_prescriptions < 2) throw UsageError("min_prescriptions must be >= 2");
}

std::string_view to_string(Method method) {
  return method == Method::ChangePoint ? "changepoint" : "naive";
}

Method method_from_string(std::string_view text) {
  if (text == "changepoint") return Method::ChangePoint;
  if (text == "naive") return Method::Naive;
  throw DataError("unknown method '" + std::string(text) + "'");
}

namespace {

// Per-regime chronic log-densities for one drug.
struct ChronicModel {
  WeibullLogDensity renewable;
  WeibullLogDensity nonrenewable;

  ChronicModel(const RegimeParamTable& params, std::string_view drug)
      : renewable(params.at(drug, Regime::Renewable).params),
        nonrenewable(params.at(drug, Regime::NonRenewable).params) {}

  double operator()(const Interval& iv) const {
    const double tau = static_cast<double>(iv.tau);
    return iv.regime == Regime::Renewable ? renewable(tau) : nonrenewable(tau);
  }
};

ExpParams own_null_rate(const Trajectory& t) {
  ExactSum total;
  for (const auto& iv : t.intervals()) total.add(static_cast<double>(iv.tau));
  return ExpParams{static_cast<double>(t.intervals().size()) / total.value()};
}

}  // namespace

double changepoint_loglik(const Trajectory& trajectory, const RegimeParamTable& params,
                          const ExpParams& null_rate, std::size_t c) {
  null_rate.validate();
  const auto intervals = trajectory.intervals();
  if (c < 1 || c > intervals.size()) {
    throw PreconditionError("change-point candidate " + std::to_string(c) + " outside [1, " +
                            std::to_string(intervals.size()) + "]");
  }
  const ChronicModel chronic(params, trajectory.drug_code());
  const ExpLogDensity null_logpdf(null_rate);
  ExactSum before, after;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (i + 1 < c) {
      before.add(null_logpdf(static_cast<double>(intervals[i].tau)));
    } else {
      after.add(chronic(intervals[i]));
    }
  }
  return before.value() + after.value();
}

ChangePointResult detect_onset(const Trajectory& trajectory, const RegimeParamTable& params,
                               const DetectionConfig& config) {
  const auto events = trajectory.events();
  if (events.size() < config.min_prescriptions) {
    throw TooFewEventsError("trajectory " + trajectory.patient_id() + "/" +
                            trajectory.drug_code() + " has " + std::to_string(events.size()) +
                            " prescriptions, need " + std::to_string(config.min_prescriptions));
  }
  const auto intervals = trajectory.intervals();
  const std::size_t n = intervals.size();
  if (n == 0) throw TooFewEventsError("trajectory has no intervals");

  const ChronicModel chronic(params, trajectory.drug_code());
  ChangePointResult result;
  result.null_rate = own_null_rate(trajectory);
  const ExpLogDensity null_logpdf(result.null_rate);

  // suffix[c - 1] = chronic log-likelihood of intervals c..n (1-based).
  // Sums are exact until the final rounding, so every value equals what a
  // direct evaluation of that segment would give.
  std::vector<double> suffix(n);
  ExactSum after;
  for (std::size_t i = n; i-- > 0;) {
    after.add(chronic(intervals[i]));
    suffix[i] = after.value();
  }

  ExactSum before;
  double best = 0.0;
  std::size_t best_c = 0;
  for (std::size_t c = 1; c <= n; ++c) {
    const double ll = before.value() + suffix[c - 1];
    if (best_c == 0 || ll > best) {
      best = ll;
      best_c = c;
    }
    before.add(null_logpdf(static_cast<double>(intervals[c - 1].tau)));
  }

  result.best_c = best_c;
  result.loglik_at_c = best;
  result.loglik_null = before.value();
  result.margin = best - result.loglik_null;
  result.accepted = result.margin > config.epsilon;
  if (result.accepted) {
    result.c_hat = best_c;
    result.onset_date = events[best_c - 1].date;
  }
  return result;
}

DetectionBatch detect_all(std::span<const Trajectory> trajectories,
                          const RegimeParamTable& params, const DetectionConfig& config,
                          unsigned threads) {
  config.validate();
  struct Part {
    std::vector<OnsetRecord> onsets;
    std::vector<TrajectoryError> errors;
    std::size_t filtered = 0;
  };
  const std::size_t chunks = chunk_count(trajectories.size(), threads);
  std::vector<Part> parts(chunks);
  parallel_for_chunks(trajectories.size(), threads,
                      [&](std::size_t begin, std::size_t end, std::size_t w) {
                        auto& part = parts[w];
                        for (std::size_t i = begin; i < end; ++i) {
                          const auto& t = trajectories[i];
                          if (t.events().size() < config.min_prescriptions) {
                            ++part.filtered;
                            continue;
                          }
                          try {
                            const auto r = detect_onset(t, params, config);
                            if (r.accepted) {
                              part.onsets.push_back({t.patient_id(), t.drug_code(),
                                                     *r.onset_date, r.margin,
                                                     Method::ChangePoint});
                            }
                          } catch (const Error& e) {
                            part.errors.push_back({t.patient_id(), t.drug_code(), e.what()});
                          }
                        }
                      });

  DetectionBatch batch;
  batch.report.trajectories = trajectories.size();
  for (auto& part : parts) {
    batch.report.filtered_short += part.filtered;
    std::move(part.onsets.begin(), part.onsets.end(), std::back_inserter(batch.onsets));
    std::move(part.errors.begin(), part.errors.end(), std::back_inserter(batch.report.errors));
  }
  batch.report.scanned = batch.report.trajectories - batch.report.filtered_short;
  batch.report.accepted = batch.onsets.size();
  const auto by_key = [](const auto& a, const auto& b) {
    return std::tie(a.patient_id, a.code) < std::tie(b.patient_id, b.code);
  };
  if (!std::is_sorted(batch.onsets.begin(), batch.onsets.end(), by_key)) {
    std::sort(batch.onsets.begin(), batch.onsets.end(), by_key);
  }
  std::sort(batch.report.errors.begin(), batch.report.errors.end(),
            [](const TrajectoryError& a, const TrajectoryError& b) {
              return std::tie(a.patient_id, a.drug_code) < std::tie(b.patient_id, b.drug_code);
            });
  return batch;
}

std::string format_onsets_csv(std::span<const OnsetRecord> onsets) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "patient_id,drug_atc,onset_date,margin,method\n");
  std::string date;
  for (const auto& o : onsets) {
    date.clear();
    append_iso_date(date, o.onset_date);
    fmt::format_to(std::back_inserter(buf), "{},{},{},{:.6f},{}\n", o.patient_id, o.code, date,
                   o.margin, to_string(o.method));
  }
  return fmt::to_string(buf);
}

std::vector<OnsetRecord> parse_onsets_csv(std::string_view contents,
                                          const std::filesystem::path& origin) {
  std::vector<OnsetRecord> out;
  csv::LineReader lines(contents);
  std::string_view line;
  if (!lines.next(line)) return out;
  const auto cols = csv::resolve_columns(
      line, {"patient_id", "drug_atc", "onset_date", "margin", "method"}, origin);
  std::vector<std::string_view> f;
  while (lines.next(line)) {
    if (line.empty()) continue;
    csv::split_fields(line, f);
    const auto where = origin.string() + ":" + std::to_string(lines.line_number());
    if (f.size() < 5) throw DataError(where + ": expected 5 fields");
    OnsetRecord r;
    r.patient_id = std::string(f[cols[0]]);
    r.code = std::string(f[cols[1]]);
    const auto d = parse_iso_date(f[cols[2]]);
    if (!d) throw DataError(where + ": unparseable onset_date");
    r.onset_date = *d;
    const auto m = f[cols[3]];
    const auto [ptr, ec] = std::from_chars(m.data(), m.data() + m.size(), r.margin);
    if (ec != std::errc{} || ptr != m.data() + m.size()) throw DataError(where + ": bad margin");
    r.method = method_from_string(f[cols[4]]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<OnsetRecord> read_onsets_csv(const std::filesystem::path& path) {
  return parse_onsets_csv(csv::read_file(path), path);
}

}  // namespace rxonset
