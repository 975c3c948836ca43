// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>

namespace rxonset {

/// Homogeneous Poisson process: exponential inter-arrival times with
/// `rate` events per day.
struct ExpParams {
  double rate = 1.0;

  void validate() const;
  friend bool operator==(const ExpParams&, const ExpParams&) = default;
};

/// Two-parameter Weibull renewal model. `shape` is the regularity index
/// (1 = memoryless, > 1 regular refills, < 1 bursty); `scale` is in days.
struct WeibullParams {
  double shape = 1.0;
  double scale = 1.0;

  void validate() const;
  /// Expected inter-arrival time, scale * Gamma(1 + 1/shape).
  double mean_interval() const;

  friend bool operator==(const WeibullParams&, const WeibullParams&) = default;
};

inline double mean_interval(const WeibullParams& p) { return p.mean_interval(); }

/// Log-density of one exponential inter-arrival time.
class ExpLogDensity {
 public:
  explicit ExpLogDensity(const ExpParams& p) : rate_(p.rate), log_rate_(std::log(p.rate)) {}
  double operator()(double tau) const { return log_rate_ - rate_ * tau; }

 private:
  double rate_;
  double log_rate_;
};

/// Log-density of one Weibull inter-arrival time with constants hoisted.
class WeibullLogDensity {
 public:
  explicit WeibullLogDensity(const WeibullParams& p)
      : shape_(p.shape), scale_(p.scale), log_norm_(std::log(p.shape / p.scale)) {}

  double operator()(double tau) const {
    const double z = tau / scale_;
    return log_norm_ + (shape_ - 1.0) * std::log(z) - std::pow(z, shape_);
  }

 private:
  double shape_;
  double scale_;
  double log_norm_;
};

/// Sum of exponential log-densities. The sum is correctly rounded, so any
/// split of `taus` into segments reproduces the same per-segment values.
/// Throws PreconditionError on a non-positive tau.
double exp_loglik(std::span<const double> taus, const ExpParams& p);

/// Sum of Weibull log-densities, correctly rounded.
double weibull_loglik(std::span<const double> taus, const WeibullParams& p);

/// Closed-form MLE rate = n / sum(taus). Throws PreconditionError when
/// empty.
ExpParams fit_exponential(std::span<const double> taus);

struct WeibullFitOptions {
  double shape_lower = 0.01;
  double shape_upper = 50.0;
  double tolerance = 1e-8;
  int max_iterations = 100;
};

struct WeibullFit {
  WeibullParams params;
  int iterations = 0;
};

/// Profile maximum likelihood. The shape solves the profile score equation
///   sum(t^k ln t) / sum(t^k) - 1/k - mean(ln t) = 0
/// by Newton steps that fall back to bisection whenever a step leaves the
/// current bracket; scale = (sum(t^k) / n)^(1/k).
///
/// Throws DegenerateFitError for fewer than two values or zero spread, and
/// FitError (carrying the last shape iterate) when the root lies outside
/// the bracket or the iteration limit is hit.
WeibullFit fit_weibull_detailed(std::span<const double> taus,
                                const WeibullFitOptions& options = {});

inline WeibullParams fit_weibull(std::span<const double> taus,
                                 const WeibullFitOptions& options = {}) {
  return fit_weibull_detailed(taus, options).params;
}

}  // namespace rxonset
