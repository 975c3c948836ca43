// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <iterator>

#include "json.hpp"
#include "rxonset/csv.hpp"
#include "rxonset/errors.hpp"

namespace rxonset {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(DetectCohort cohort) {
  return cohort == DetectCohort::Test ? "test" : "all";
}

DetectCohort detect_cohort_from_string(std::string_view text) {
  if (text == "test") return DetectCohort::Test;
  if (text == "all") return DetectCohort::All;
  throw UsageError("unknown cohort '" + std::string(text) + "' (expected test or all)");
}

void PipelineConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  detection.validate();
  dictionary_config.validate();
  if (deltas.empty()) throw UsageError("at least one recall delta is required");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] <= 0 || (i > 0 && deltas[i] <= deltas[i - 1])) {
      throw UsageError("deltas must be positive and strictly increasing");
    }
  }
}

fs::path PipelineConfig::params_path() const {
  return params.empty() ? out_dir / "params.json" : params;
}

fs::path PipelineConfig::dictionary_path() const {
  return dictionary.empty() ? out_dir / "dictionary.json" : dictionary;
}

fs::path PipelineConfig::artifact(std::string_view name) const { return out_dir / name; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return out;
}

ordered_json settings(const PipelineConfig& c) {
  ordered_json j;
  j["train_fraction"] = c.train_fraction;
  j["seed"] = c.seed;
  j["epsilon"] = c.detection.epsilon;
  j["min_prescriptions"] = c.detection.min_prescriptions;
  const auto& d = c.dictionary_config;
  j["dictionary"] = {{"window_before_days", d.window_before_days},
                     {"window_after_days", d.window_after_days},
                     {"min_support", d.min_support},
                     {"min_alignment_rate", d.min_alignment_rate},
                     {"max_drugs_per_icd", d.max_drugs_per_icd},
                     {"min_drugs_per_icd", d.min_drugs_per_icd},
                     {"dedupe_diagnoses", d.dedupe_diagnoses}};
  const auto& e = c.estimation;
  j["estimation"] = {{"label_filter", to_string(e.label_filter)},
                     {"min_intervals", e.min_intervals},
                     {"min_trajectory_events", e.min_trajectory_events},
                     {"default_shape", e.default_shape},
                     {"default_scale_renewable", e.default_scale_renewable},
                     {"default_scale_nonrenewable", e.default_scale_nonrenewable}};
  j["deltas"] = c.deltas;
  j["detect_cohort"] = to_string(c.detect_cohort);
  j["leakage_guard"] = c.leakage_guard;
  if (c.cutover) {
    j["cutover"] = format_iso_date(*c.cutover);
    j["cutover_icd"] = c.cutover_icd;
  }
  return j;
}

}  // namespace

std::string settings_json(const PipelineConfig& config) { return settings(config).dump(); }

std::string config_fingerprint(const PipelineConfig& config) {
  return hex64(fnv1a64(settings_json(config)));
}

std::vector<std::int32_t> parse_deltas(std::string_view text) {
  std::vector<std::int32_t> out;
  std::vector<std::string_view> parts;
  csv::split_fields(text, parts);
  for (const auto p : parts) {
    std::int32_t v = 0;
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
    if (p.empty() || ec != std::errc{} || ptr != p.data() + p.size()) {
      throw UsageError("bad delta '" + std::string(p) + "' in --deltas");
    }
    out.push_back(v);
  }
  return out;
}

void apply_config_json(PipelineConfig& c, std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static constexpr std::string_view kKeys[] = {
      "prescriptions", "diagnoses", "params",  "dict",          "out_dir",    "train_fraction",
      "seed",          "epsilon",   "min_prescriptions", "deltas", "threads",   "cohort",
      "leakage_guard", "cutover",   "cutover_icd",       "dictionary", "estimation"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  try {
    if (j.contains("prescriptions")) c.prescriptions = j["prescriptions"].get<std::string>();
    if (j.contains("diagnoses")) c.diagnoses = j["diagnoses"].get<std::string>();
    if (j.contains("params")) c.params = j["params"].get<std::string>();
    if (j.contains("dict")) c.dictionary = j["dict"].get<std::string>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("train_fraction")) c.train_fraction = j["train_fraction"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("epsilon")) c.detection.epsilon = j["epsilon"].get<double>();
    if (j.contains("min_prescriptions")) {
      c.detection.min_prescriptions = j["min_prescriptions"].get<std::size_t>();
    }
    if (j.contains("deltas")) c.deltas = j["deltas"].get<std::vector<std::int32_t>>();
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
    if (j.contains("cohort")) {
      c.detect_cohort = detect_cohort_from_string(j["cohort"].get<std::string>());
    }
    if (j.contains("leakage_guard")) c.leakage_guard = j["leakage_guard"].get<bool>();
    if (j.contains("cutover")) {
      const auto s = j["cutover"].get<std::string>();
      c.cutover = parse_iso_date(s);
      if (!c.cutover) throw UsageError("bad cutover date '" + s + "'");
    }
    if (j.contains("cutover_icd")) c.cutover_icd = j["cutover_icd"].get<std::string>();
    if (j.contains("dictionary")) {
      const auto& d = j["dictionary"];
      auto& t = c.dictionary_config;
      t.window_before_days = d.value("window_before_days", t.window_before_days);
      t.window_after_days = d.value("window_after_days", t.window_after_days);
      t.min_support = d.value("min_support", t.min_support);
      t.min_alignment_rate = d.value("min_alignment_rate", t.min_alignment_rate);
      t.max_drugs_per_icd = d.value("max_drugs_per_icd", t.max_drugs_per_icd);
      t.min_drugs_per_icd = d.value("min_drugs_per_icd", t.min_drugs_per_icd);
      t.dedupe_diagnoses = d.value("dedupe_diagnoses", t.dedupe_diagnoses);
    }
    if (j.contains("estimation")) {
      const auto& e = j["estimation"];
      auto& t = c.estimation;
      if (e.contains("label_filter")) {
        t.label_filter = label_filter_from_string(e["label_filter"].get<std::string>());
      }
      t.min_intervals = e.value("min_intervals", t.min_intervals);
      t.min_trajectory_events = e.value("min_trajectory_events", t.min_trajectory_events);
      t.default_shape = e.value("default_shape", t.default_shape);
      t.default_scale_renewable = e.value("default_scale_renewable", t.default_scale_renewable);
      t.default_scale_nonrenewable =
          e.value("default_scale_nonrenewable", t.default_scale_nonrenewable);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
}

void apply_config_file(PipelineConfig& config, const fs::path& path) {
  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const DependencyError&) {
    throw UsageError("config file not found: " + path.string());
  }
  apply_config_json(config, text);
}

namespace {

void require_input(const fs::path& path, std::string_view what, std::string_view producer) {
  if (path.empty()) throw UsageError(std::string(what) + " path is required");
  if (!fs::exists(path)) {
    throw DependencyError("missing " + std::string(what) + " '" + path.string() + "'" +
                          (producer.empty() ? std::string()
                                            : "; run `rxonset " + std::string(producer) +
                                                  "` first"));
  }
}

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError("cannot create output directory '" + dir.string() + "'");
  }
}

bool contains_sorted(std::span<const std::string> sorted, std::string_view id) {
  return std::binary_search(sorted.begin(), sorted.end(), id, std::less<>{});
}

std::vector<std::string> intersect(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::string> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::string> sorted_ids(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

[[noreturn]] void leakage(std::string_view what, std::span<const std::string> overlap) {
  std::string msg = "leakage: " + std::string(what) + " (" + std::to_string(overlap.size()) +
                    " patient(s), e.g. " + overlap.front() + ")";
  throw LeakageError(msg);
}

// Train and test lists from the split stage, checked for overlap.
struct SplitLists {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

SplitLists load_split(const PipelineConfig& c) {
  const auto train_path = c.artifact("train_ids.txt");
  const auto test_path = c.artifact("test_ids.txt");
  require_input(train_path, "training id list", "split");
  require_input(test_path, "test id list", "split");
  SplitLists s{sorted_ids(read_id_list(train_path)), sorted_ids(read_id_list(test_path))};
  if (const auto overlap = intersect(s.train, s.test); !overlap.empty()) {
    leakage("training and test id lists overlap", overlap);
  }
  return s;
}

void note_ingest(StageReport& report, const fs::path& path, const IngestReport& ingest) {
  if (ingest.errors.empty()) return;
  report.notes.push_back(path.string() + ": skipped " + std::to_string(ingest.errors.size()) +
                         " malformed row(s), first at line " +
                         std::to_string(ingest.errors.front().line) + ": " +
                         ingest.errors.front().message);
}

std::vector<PrescriptionEvent> load_prescriptions(const PipelineConfig& c, StageReport& report) {
  require_input(c.prescriptions, "prescriptions file", "");
  auto batch = ingest_prescriptions(c.prescriptions);
  note_ingest(report, c.prescriptions, batch.report);
  return std::move(batch.events);
}

std::vector<DiagnosisEvent> load_diagnoses(const PipelineConfig& c, StageReport& report) {
  require_input(c.diagnoses, "diagnoses file", "");
  auto batch = ingest_diagnoses(c.diagnoses);
  note_ingest(report, c.diagnoses, batch.report);
  return std::move(batch.events);
}

template <typename Event>
std::vector<Event> keep_patients(std::vector<Event> events, std::span<const std::string> ids) {
  std::erase_if(events, [&](const Event& e) { return !contains_sorted(ids, e.patient_id); });
  return events;
}

// Records an artifact's fingerprint and content hash in manifest.json.
void record(const PipelineConfig& c, StageReport& report, const fs::path& path) {
  const auto manifest_path = c.artifact("manifest.json");
  ordered_json manifest;
  if (fs::exists(manifest_path)) {
    try {
      manifest = ordered_json::parse(csv::read_file(manifest_path));
    } catch (const nlohmann::json::exception&) {
      manifest = ordered_json();
    }
  }
  if (!manifest.is_object() || !manifest.contains("artifacts")) {
    manifest = ordered_json{{"schema_version", 1}, {"artifacts", ordered_json::object()}};
  }
  const auto contents = csv::read_file(path);
  manifest["artifacts"][path.filename().string()] = {
      {"stage", report.stage},
      {"fingerprint", config_fingerprint(c)},
      {"fnv1a64", hex64(fnv1a64(contents))},
      {"bytes", contents.size()}};
  csv::write_file(manifest_path, manifest.dump(2) + "\n");
  report.written.push_back(path);
}

void write_artifact(const PipelineConfig& c, StageReport& report, const fs::path& path,
                    std::string_view contents) {
  csv::write_file(path, contents);
  record(c, report, path);
}

void check_params_split(const RegimeParamTable& params, const SplitLists& split,
                        const fs::path& path) {
  if (const auto overlap = intersect(params.training_patients(), split.test); !overlap.empty()) {
    leakage("parameters in " + path.string() + " were fitted on test patients", overlap);
  }
}

}  // namespace

StageReport cmd_simulate(const ScenarioConfig& scenario, const fs::path& out_dir,
                         unsigned threads) {
  scenario.validate();
  ensure_out_dir(out_dir);
  StageReport report{"simulate", {}, {}};
  const auto cohort = simulate(scenario, threads);
  write_cohort(cohort, scenario, out_dir);
  for (const char* name : {"prescriptions.csv", "diagnoses.csv", "ground_truth.csv",
                           "scenario.json"}) {
    report.written.push_back(out_dir / name);
  }
  report.notes.push_back(std::to_string(scenario.n_patients) + " patients, " +
                         std::to_string(cohort.prescriptions.size()) + " prescriptions, " +
                         std::to_string(cohort.diagnoses.size()) + " diagnoses");
  return report;
}

StageReport cmd_split(const PipelineConfig& c) {
  c.validate();
  ensure_out_dir(c.out_dir);
  StageReport report{"split", {}, {}};
  const auto rx = load_prescriptions(c, report);
  const auto dx = load_diagnoses(c, report);
  const auto ids = unique_patients(rx, dx);
  const auto split = split_patients(ids, c.train_fraction, c.seed);
  write_id_list(c.artifact("train_ids.txt"), split.train);
  record(c, report, c.artifact("train_ids.txt"));
  write_id_list(c.artifact("test_ids.txt"), split.test);
  record(c, report, c.artifact("test_ids.txt"));
  report.notes.push_back(std::to_string(split.train.size()) + " training, " +
                         std::to_string(split.test.size()) + " test patients");
  return report;
}

StageReport cmd_fit_params(const PipelineConfig& c) {
  c.validate();
  ensure_out_dir(c.out_dir);
  StageReport report{"fit-params", {}, {}};
  const auto split = load_split(c);
  const auto rx = keep_patients(load_prescriptions(c, report), split.train);
  const auto trajectories = build_trajectories(rx, c.threads);
  auto table = estimate_params(trajectories, c.estimation, c.threads);
  table.set_training_patients(split.train);
  table.set_fingerprint(config_fingerprint(c));
  std::size_t fallbacks = 0;
  for (const auto& [key, entry] : table.entries()) fallbacks += entry.fallback ? 1 : 0;
  save_params(table, c.params_path());
  record(c, report, c.params_path());
  report.notes.push_back(std::to_string(table.entries().size()) + " (drug, regime) entries, " +
                         std::to_string(fallbacks) + " fallback(s)");
  return report;
}

StageReport cmd_detect(const PipelineConfig& c) {
  c.validate();
  ensure_out_dir(c.out_dir);
  StageReport report{"detect", {}, {}};
  require_input(c.params_path(), "parameter file", "fit-params");
  const auto params = load_params(c.params_path());

  auto rx = load_prescriptions(c, report);
  if (c.detect_cohort == DetectCohort::Test) {
    const auto split = load_split(c);
    if (c.leakage_guard) check_params_split(params, split, c.params_path());
    rx = keep_patients(std::move(rx), split.test);
  }
  if (c.leakage_guard) {
    const auto scored = unique_patients(rx);
    if (const auto overlap = intersect(scored, params.training_patients()); !overlap.empty()) {
      leakage("detect would score patients the parameters were fitted on", overlap);
    }
  }
  const auto trajectories = build_trajectories(rx, c.threads);
  const auto batch = detect_all(trajectories, params, c.detection, c.threads);
  const auto out = c.artifact(c.detect_cohort == DetectCohort::Test ? "onsets_test.csv"
                                                                      : "onsets_all.csv");
  write_artifact(c, report, out, format_onsets_csv(batch.onsets));
  const auto& r = batch.report;
  report.notes.push_back(std::to_string(r.trajectories) + " trajectories, " +
                         std::to_string(r.filtered_short) + " below min-prescriptions, " +
                         std::to_string(r.scanned) + " scanned, " + std::to_string(r.accepted) +
                         " onsets");
  if (!r.errors.empty()) {
    report.notes.push_back(std::to_string(r.errors.size()) + " trajectory error(s), first " +
                           r.errors.front().patient_id + "/" + r.errors.front().drug_code + ": " +
                           r.errors.front().message);
  }
  return report;
}

StageReport cmd_build_dict(const PipelineConfig& c) {
  c.validate();
  ensure_out_dir(c.out_dir);
  StageReport report{"build-dict", {}, {}};
  require_input(c.params_path(), "parameter file", "fit-params");
  const auto params = load_params(c.params_path());
  const auto split = load_split(c);
  check_params_split(params, split, c.params_path());

  const auto rx = keep_patients(load_prescriptions(c, report), split.train);
  const auto dx = keep_patients(load_diagnoses(c, report), split.train);
  const auto trajectories = build_trajectories(rx, c.threads);
  const auto batch = detect_all(trajectories, params, c.detection, c.threads);
  write_artifact(c, report, c.artifact("onsets_train.csv"), format_onsets_csv(batch.onsets));

  auto built = build_dictionary(batch.onsets, dx, c.dictionary_config);
  built.dictionary.set_training_patients(split.train);
  built.dictionary.set_fingerprint(config_fingerprint(c));
  if (const auto violations = built.dictionary.audit(); !violations.empty()) {
    throw Error("dictionary audit failed: " + violations.front());
  }
  save_dictionary(built.dictionary, c.dictionary_path());
  record(c, report, c.dictionary_path());
  report.notes.push_back(std::to_string(built.dictionary.lists().size()) + " ICD(s) in dictionary");
  for (auto& w : built.warnings) report.notes.push_back(std::move(w));
  return report;
}

StageReport cmd_infer(const PipelineConfig& c) {
  c.validate();
  ensure_out_dir(c.out_dir);
  StageReport report{"infer", {}, {}};
  require_input(c.dictionary_path(), "dictionary file", "build-dict");
  const auto onsets_path = c.artifact("onsets_test.csv");
  require_input(onsets_path, "drug-level onsets", "detect");
  const auto dictionary = load_dictionary(c.dictionary_path());
  const auto split = load_split(c);
  if (const auto overlap = intersect(dictionary.training_patients(), split.test);
      !overlap.empty()) {
    leakage("dictionary was built from test patients", overlap);
  }
  const auto onsets = read_onsets_csv(onsets_path);
  for (const auto& o : onsets) {
    if (!contains_sorted(split.test, o.patient_id)) {
      throw LeakageError("onset for non-test patient " + o.patient_id + " in " +
                         onsets_path.string());
    }
  }

  auto disease = infer_disease_onsets(onsets, dictionary);
  const auto rx = keep_patients(load_prescriptions(c, report), split.test);
  const auto trajectories = build_trajectories(rx, c.threads);
  auto naive = naive_baseline(trajectories, dictionary);
  std::move(naive.begin(), naive.end(), std::back_inserter(disease));
  std::sort(disease.begin(), disease.end(), [](const DiseaseOnset& a, const DiseaseOnset& b) {
    return std::tie(a.patient_id, a.icd_code, a.method) <
           std::tie(b.patient_id, b.icd_code, b.method);
  });
  write_artifact(c, report, c.artifact("disease_onsets.csv"), format_disease_onsets_csv(disease));
  const auto counts = count_by_method(disease);
  report.notes.push_back(std::to_string(counts.at(Method::ChangePoint)) + " changepoint, " +
                         std::to_string(counts.at(Method::Naive)) + " naive disease onsets");
  return report;
}

namespace {

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

StageReport cmd_evaluate(const PipelineConfig& c) {
  c.validate();
  ensure_out_dir(c.out_dir);
  StageReport report{"evaluate", {}, {}};
  require_input(c.dictionary_path(), "dictionary file", "build-dict");
  const auto onsets_path = c.artifact("disease_onsets.csv");
  require_input(onsets_path, "disease onsets", "infer");
  const auto dictionary = load_dictionary(c.dictionary_path());
  const auto split = load_split(c);
  const auto onsets = read_disease_onsets_csv(onsets_path);

  const auto rx_all = load_prescriptions(c, report);
  const auto dx_test = keep_patients(load_diagnoses(c, report), split.test);
  const auto rx_test = keep_patients(rx_all, split.test);
  const auto icds = dictionary.icds();

  const auto diffs = time_differences(onsets, dx_test, icds);
  write_artifact(c, report, c.artifact("timediff.csv"), format_timediff_csv(diffs));

  const auto recall = recall_at(onsets, dx_test, c.deltas, icds);
  write_artifact(c, report, c.artifact("recall.csv"), format_recall_csv(recall));
  for (const auto& w : recall.warnings) report.notes.push_back(w);

  ordered_json summary;
  summary["schema_version"] = 1;
  summary["fingerprint"] = config_fingerprint(c);
  summary["settings"] = settings(c);
  summary["patients"] = {{"train", split.train.size()}, {"test", split.test.size()}};
  const auto counts = count_by_method(onsets);
  summary["disease_onsets"] = {{"changepoint", counts.at(Method::ChangePoint)},
                               {"naive", counts.at(Method::Naive)}};

  ordered_json td = ordered_json::array();
  for (const auto& s : diffs.summaries) {
    td.push_back({{"icd", s.icd_code},
                  {"method", to_string(s.method)},
                  {"n", s.n},
                  {"unmatched", diffs.unmatched.at({s.icd_code, s.method})},
                  {"mean", s.mean},
                  {"median", s.median},
                  {"q1", s.q1},
                  {"q3", s.q3}});
  }
  summary["time_differences"] = td;

  const std::int32_t density_delta = 365;
  const bool has_365 = std::find(c.deltas.begin(), c.deltas.end(), density_delta) != c.deltas.end();
  ordered_json density = {{"delta", density_delta}};
  if (!has_365) {
    density["error"] = "delta grid lacks 365";
  } else {
    try {
      const auto dr = density_recall_correlation(recall, rx_test, dx_test, dictionary);
      write_artifact(c, report, c.artifact("density.csv"), format_density_csv(dr.icds));
      density["r_changepoint"] = dr.r_changepoint;
      density["r_naive"] = dr.r_naive;
      density["n_icds"] = dr.icds.size();
    } catch (const UndefinedStatisticError& e) {
      density["error"] = e.what();
      write_artifact(c, report, c.artifact("density.csv"), format_density_csv({}));
      report.notes.push_back(std::string("density-recall correlation undefined: ") + e.what());
    }
  }
  summary["density_recall"] = density;

  ordered_json labels;
  try {
    const auto rx_train = keep_patients(rx_all, split.train);
    const auto cmp =
        compare_label_filters(build_trajectories(rx_train, c.threads), c.estimation, c.threads);
    labels = {{"pairs", cmp.pairs.size()},
              {"pearson_r", cmp.pearson_r},
              {"slope", cmp.slope},
              {"intercept", cmp.intercept}};
  } catch (const UndefinedStatisticError& e) {
    labels = {{"error", e.what()}};
  }
  summary["label_robustness"] = labels;

  if (c.cutover) {
    const auto frac = pre_cutover_fraction(onsets, *c.cutover, c.cutover_icd);
    summary["pre_cutover"] = {{"icd", c.cutover_icd},
                              {"cutover", format_iso_date(*c.cutover)},
                              {"changepoint", optional_number(frac.at(Method::ChangePoint))},
                              {"naive", optional_number(frac.at(Method::Naive))}};
  }
  summary["warnings"] = recall.warnings;
  write_artifact(c, report, c.artifact("summary.json"), summary.dump(2) + "\n");
  return report;
}

std::vector<StageReport> cmd_pipeline(const PipelineConfig& c) {
  if (c.detect_cohort != DetectCohort::Test) {
    throw UsageError("the pipeline always scores the test cohort");
  }
  if (!c.leakage_guard) throw UsageError("the pipeline cannot run with the leakage guard off");
  ensure_out_dir(c.out_dir);
  fs::remove(c.artifact("manifest.json"));
  std::vector<StageReport> reports;
  reports.push_back(cmd_split(c));
  reports.push_back(cmd_fit_params(c));
  reports.push_back(cmd_detect(c));
  reports.push_back(cmd_build_dict(c));
  reports.push_back(cmd_infer(c));
  reports.push_back(cmd_evaluate(c));
  return reports;
}

}  // namespace rxonset
