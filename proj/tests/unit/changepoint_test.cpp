// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "rxonset/changepoint.hpp"
#include "rxonset/errors.hpp"
#include "rxonset/renewal.hpp"
#include "test_support.hpp"

namespace rxonset {
namespace {

using testing::brute_force_scan;
using testing::fixed_table;
using testing::random_trajectory;

RegimeParamTable single_drug_table(const std::string& drug, WeibullParams p) {
  RegimeParamTable::Entries e;
  e[{drug, Regime::NonRenewable}] = ParamEntry{p, 1000, false, ParamSource::Fitted, 1, {}};
  e[{drug, Regime::Renewable}] = ParamEntry{p, 1000, false, ParamSource::Fitted, 1, {}};
  return RegimeParamTable(EstimationConfig{}, std::move(e));
}

Trajectory from_gaps(const std::vector<int>& gaps, std::int32_t start = 17000,
                     const std::string& drug = "D") {
  std::vector<TrajectoryEvent> ev{{Day(start), false, false}};
  for (int g : gaps) ev.push_back({ev.back().date + g, false, false});
  return Trajectory("P", drug, std::move(ev));
}

TEST(ChangepointLoglik, HandEvaluation) {
  const auto t = from_gaps({5, 7, 98, 102});
  const auto table = single_drug_table("D", {3.0, 110.0});
  const ExpParams null{1.0 / 6.0};
  const double expected = (std::log(1.0 / 6) - 5.0 / 6) + (std::log(1.0 / 6) - 7.0 / 6) +
                          testing::weibull_term(3.0, 110.0, 98) +
                          testing::weibull_term(3.0, 110.0, 102);
  EXPECT_NEAR(changepoint_loglik(t, table, null, 3), expected, 1e-12);
}

TEST(ChangepointLoglik, FirstCandidateIsAllChronic) {
  const auto t = from_gaps({40, 60, 80});
  const auto table = single_drug_table("D", {2.0, 70.0});
  EXPECT_EQ(changepoint_loglik(t, table, {0.01}, 1),
            weibull_loglik(std::vector<double>{40, 60, 80}, {2.0, 70.0}));
}

TEST(ChangepointLoglik, EqualsSumOfSegmentLikelihoods) {
  const auto t = from_gaps({12, 300, 45, 90, 88, 91, 87, 95, 100});
  const auto table = single_drug_table("D", {4.0, 95.0});
  const ExpParams null{0.0123};
  std::vector<double> taus;
  for (const auto& i : t.intervals()) taus.push_back(i.tau);
  for (std::size_t c = 1; c <= taus.size(); ++c) {
    const std::span<const double> all(taus);
    const double split = exp_loglik(all.first(c - 1), null) +
                         weibull_loglik(all.subspan(c - 1), {4.0, 95.0});
    EXPECT_EQ(changepoint_loglik(t, table, null, c), split) << "c=" << c;
  }
}

TEST(ChangepointLoglik, RejectsOutOfRangeAndMissingDrug) {
  const auto t = from_gaps({10, 20});
  const auto table = single_drug_table("D", {2.0, 15.0});
  EXPECT_THROW(changepoint_loglik(t, table, {0.1}, 0), PreconditionError);
  EXPECT_THROW(changepoint_loglik(t, table, {0.1}, 3), PreconditionError);
  EXPECT_THROW(changepoint_loglik(from_gaps({10, 20}, 0, "X"), table, {0.1}, 1),
               MissingParamsError);
}

TEST(DetectOnset, FindsSwitchToRegularRefills) {
  const auto t = from_gaps({40, 260, 150, 97, 103, 100, 95, 105, 101, 99, 102});
  const auto table = single_drug_table("D", {25.0, 102.0});
  const auto r = detect_onset(t, table);
  ASSERT_TRUE(r.accepted);
  EXPECT_EQ(r.c_hat, 4u);
  EXPECT_EQ(r.onset_date, t.events()[3].date);
  const auto oracle = brute_force_scan(t, table);
  EXPECT_EQ(oracle.best_c, 4u);
  EXPECT_EQ(r.loglik_at_c, oracle.best);
}

TEST(DetectOnset, RejectsExponentialTrajectories) {
  // A sharply regular chronic model at several scales against sporadic
  // data with mean gap 150 days.
  for (double scale : {30.0, 60.0, 100.0, 300.0}) {
    const auto table = single_drug_table("D", {50.0, scale});
    Rng rng(77);
    int rejected = 0;
    for (int rep = 0; rep < 1000; ++rep) {
      std::vector<int> gaps;
      for (int i = 0; i < 10; ++i) {
        gaps.push_back(std::max(1, static_cast<int>(std::lround(rng.exponential(1.0 / 150.0)))));
      }
      if (!detect_onset(from_gaps(gaps), table).accepted) ++rejected;
    }
    EXPECT_GT(rejected, 950) << "scale " << scale;
  }
}

TEST(DetectOnset, StrictInequalityAtZeroEpsilon) {
  // Rate 1/4 and Weibull(1, 4) give identical terms, so every candidate ties
  // with the null.
  const auto t = from_gaps({4, 4, 4, 4, 4, 4});
  const auto table = single_drug_table("D", {1.0, 4.0});
  DetectionConfig cfg;
  cfg.epsilon = 0.0;
  const auto r = detect_onset(t, table, cfg);
  EXPECT_EQ(r.margin, 0.0);
  EXPECT_FALSE(r.accepted);
  EXPECT_FALSE(r.c_hat);
  EXPECT_FALSE(r.onset_date);
  EXPECT_EQ(r.best_c, 1u);
}

TEST(DetectOnset, TooFewEvents) {
  const auto table = single_drug_table("D", {2.0, 50.0});
  EXPECT_THROW(detect_onset(from_gaps({10, 20, 30, 40}), table), TooFewEventsError);
  DetectionConfig cfg;
  cfg.min_prescriptions = 5;
  EXPECT_NO_THROW(detect_onset(from_gaps({10, 20, 30, 40}), table, cfg));
}

TEST(DetectionConfig, Validation) {
  DetectionConfig cfg;
  cfg.epsilon = -1.0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = {};
  cfg.min_prescriptions = 1;
  EXPECT_THROW(cfg.validate(), UsageError);
}

class ScanProperties : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(2024);
    table_ = fixed_table(8, rng);
    for (int i = 0; i < 1000; ++i) {
      const auto n = 6 + static_cast<std::size_t>(rng.below(45));
      trajectories_.push_back(random_trajectory("P" + std::to_string(i),
                                                "D" + std::to_string(rng.below(8)), n, rng));
    }
  }
  RegimeParamTable table_;
  std::vector<Trajectory> trajectories_;
};

TEST_F(ScanProperties, MatchesExhaustiveOracle) {
  for (const auto& t : trajectories_) {
    const auto oracle = brute_force_scan(t, table_);
    const auto r = detect_onset(t, table_);
    ASSERT_EQ(r.best_c, oracle.best_c) << t.patient_id();
    ASSERT_EQ(r.loglik_at_c, oracle.best) << t.patient_id();
    ASSERT_EQ(r.loglik_null, oracle.null_loglik) << t.patient_id();
    ASSERT_EQ(r.null_rate.rate, oracle.null_rate);
    for (std::size_t c = 1; c <= oracle.loglik.size(); ++c) {
      ASSERT_EQ(changepoint_loglik(t, table_, r.null_rate, c), oracle.loglik[c - 1]);
    }
  }
}

TEST_F(ScanProperties, AcceptanceSoundness) {
  for (double eps : {0.0, 0.05, 1.0, 5.0}) {
    DetectionConfig cfg;
    cfg.epsilon = eps;
    for (const auto& t : trajectories_) {
      const auto r = detect_onset(t, table_, cfg);
      const auto oracle = brute_force_scan(t, table_);
      if (r.accepted) {
        EXPECT_GT(r.loglik_at_c, r.loglik_null + eps);
        EXPECT_EQ(r.onset_date, t.events()[*r.c_hat - 1].date);
      } else {
        double best = oracle.loglik.front();
        for (double v : oracle.loglik) best = std::max(best, v);
        EXPECT_LE(best - oracle.null_loglik, eps);
        EXPECT_FALSE(r.c_hat);
      }
    }
  }
}

TEST_F(ScanProperties, AcceptedSetShrinksWithEpsilon) {
  std::set<std::string> previous;
  bool first = true;
  for (double eps : {0.0, 0.05, 0.5, 2.0, 10.0}) {
    DetectionConfig cfg;
    cfg.epsilon = eps;
    std::set<std::string> accepted;
    for (const auto& t : trajectories_) {
      if (detect_onset(t, table_, cfg).accepted) accepted.insert(t.patient_id());
    }
    if (!first) {
      EXPECT_TRUE(std::includes(previous.begin(), previous.end(), accepted.begin(), accepted.end()));
    }
    previous = std::move(accepted);
    first = false;
  }
}

TEST_F(ScanProperties, TimeShiftEquivariance) {
  for (std::int32_t shift : {-5000, -1, 1, 365, 20000}) {
    for (std::size_t i = 0; i < 200; ++i) {
      const auto& t = trajectories_[i];
      std::vector<TrajectoryEvent> ev(t.events().begin(), t.events().end());
      for (auto& e : ev) e.date = e.date + shift;
      const Trajectory moved(t.patient_id(), t.drug_code(), std::move(ev));
      const auto a = detect_onset(t, table_);
      const auto b = detect_onset(moved, table_);
      ASSERT_EQ(a.accepted, b.accepted);
      EXPECT_EQ(a.loglik_at_c, b.loglik_at_c);
      EXPECT_EQ(a.loglik_null, b.loglik_null);
      EXPECT_EQ(a.c_hat, b.c_hat);
      if (a.accepted) EXPECT_EQ(*b.onset_date - *a.onset_date, shift);
    }
  }
}

TEST_F(ScanProperties, BatchMatchesPerItemDetection) {
  std::size_t accepted = 0;
  for (const auto& t : trajectories_) accepted += detect_onset(t, table_).accepted ? 1 : 0;
  const auto batch = detect_all(trajectories_, table_, {}, 1);
  EXPECT_EQ(batch.onsets.size(), accepted);
  EXPECT_EQ(batch.report.accepted, accepted);
  EXPECT_EQ(batch.report.scanned, trajectories_.size());
  for (unsigned threads : {2u, 3u, 8u}) {
    EXPECT_EQ(detect_all(trajectories_, table_, {}, threads).onsets, batch.onsets);
  }
  // One record per trajectory at most, and ordered.
  for (std::size_t i = 1; i < batch.onsets.size(); ++i) {
    const auto& a = batch.onsets[i - 1];
    const auto& b = batch.onsets[i];
    EXPECT_LT(std::tie(a.patient_id, a.code), std::tie(b.patient_id, b.code));
  }
}

TEST(DetectAll, EmptyAndFiltered) {
  const auto table = single_drug_table("D", {2.0, 50.0});
  EXPECT_TRUE(detect_all({}, table).onsets.empty());
  const std::vector<Trajectory> five{from_gaps({50, 50, 50, 50})};
  const auto batch = detect_all(five, table);
  EXPECT_TRUE(batch.onsets.empty());
  EXPECT_EQ(batch.report.filtered_short, 1u);
  EXPECT_EQ(batch.report.scanned, 0u);
}

TEST(DetectAll, CollectsErrorsWithoutAborting) {
  const auto table = single_drug_table("D", {20.0, 100.0});
  std::vector<Trajectory> t{from_gaps({400, 30, 100, 100, 101, 99, 100}, 17000, "D"),
                            from_gaps({400, 30, 100, 100, 101, 99, 100}, 17000, "UNKNOWN")};
  const auto batch = detect_all(t, table, {}, 1);
  ASSERT_EQ(batch.report.errors.size(), 1u);
  EXPECT_EQ(batch.report.errors[0].drug_code, "UNKNOWN");
  EXPECT_EQ(batch.onsets.size(), 1u);
}

TEST(OnsetCsv, RoundTripAndHeader) {
  std::vector<OnsetRecord> onsets{{"P1", "A01", Day(17000), 3.25, Method::ChangePoint},
                                  {"P2", "B02", Day(17100), 0.5, Method::Naive}};
  const auto text = format_onsets_csv(onsets);
  EXPECT_EQ(text.substr(0, text.find('\n')), "patient_id,drug_atc,onset_date,margin,method");
  const auto back = parse_onsets_csv(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].patient_id, "P1");
  EXPECT_EQ(back[1].method, Method::Naive);
  EXPECT_EQ(back[1].onset_date, Day(17100));
  EXPECT_NEAR(back[0].margin, 3.25, 1e-6);
  EXPECT_THROW(parse_onsets_csv("patient_id,drug_atc\nP,A\n"), DataError);
}

}  // namespace
}  // namespace rxonset
