// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/renewal.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "rxonset/errors.hpp"
#include "rxonset/exact_sum.hpp"

namespace rxonset {

void ExpParams::validate() const {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw PreconditionError("exponential rate must be positive and finite");
  }
}

void WeibullParams::validate() const {
  if (!(shape > 0.0) || !std::isfinite(shape) || !(scale > 0.0) || !std::isfinite(scale)) {
    throw PreconditionError("Weibull shape and scale must be positive and finite");
  }
}

double WeibullParams::mean_interval() const { return scale * std::tgamma(1.0 + 1.0 / shape); }

namespace {

void check_taus(std::span<const double> taus) {
  for (double t : taus) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw PreconditionError("inter-arrival times must be positive, got " + std::to_string(t));
    }
  }
}

struct ProfileScore {
  double value;
  double slope;
};

// Score of the profile log-likelihood in the shape, on values rescaled to
// (0, 1] so t^k cannot overflow inside the bracket. The score is invariant
// under that rescaling.
ProfileScore profile_score(std::span<const double> log_x, double mean_log_x, double k) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (double lx : log_x) {
    const double w = std::exp(k * lx);
    s0 += w;
    s1 += w * lx;
    s2 += w * lx * lx;
  }
  const double ratio = s1 / s0;
  return {ratio - 1.0 / k - mean_log_x, (s2 / s0 - ratio * ratio) + 1.0 / (k * k)};
}

}  // namespace

double exp_loglik(std::span<const double> taus, const ExpParams& p) {
  p.validate();
  check_taus(taus);
  const ExpLogDensity logpdf(p);
  ExactSum sum;
  for (double t : taus) sum.add(logpdf(t));
  return sum.value();
}

double weibull_loglik(std::span<const double> taus, const WeibullParams& p) {
  p.validate();
  check_taus(taus);
  const WeibullLogDensity logpdf(p);
  ExactSum sum;
  for (double t : taus) sum.add(logpdf(t));
  return sum.value();
}

ExpParams fit_exponential(std::span<const double> taus) {
  if (taus.empty()) throw PreconditionError("fit_exponential needs at least one interval");
  check_taus(taus);
  ExactSum total;
  for (double t : taus) total.add(t);
  return ExpParams{static_cast<double>(taus.size()) / total.value()};
}

WeibullFit fit_weibull_detailed(std::span<const double> taus, const WeibullFitOptions& options) {
  check_taus(taus);
  if (taus.size() < 2) throw DegenerateFitError("Weibull fit needs at least two intervals");
  const auto [min_it, max_it] = std::minmax_element(taus.begin(), taus.end());
  if (*min_it == *max_it) {
    throw DegenerateFitError("Weibull fit on intervals with zero spread (all equal to " +
                             std::to_string(*min_it) + ")");
  }

  const double top = *max_it;
  const double log_top = std::log(top);
  std::vector<double> log_x(taus.size());
  double mean_log_x = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    log_x[i] = std::log(taus[i]) - log_top;
    mean_log_x += log_x[i];
  }
  mean_log_x /= static_cast<double>(taus.size());

  double lo = options.shape_lower;
  double hi = options.shape_upper;
  if (profile_score(log_x, mean_log_x, lo).value > 0.0) {
    throw FitError("Weibull shape MLE lies below " + std::to_string(lo), lo);
  }
  if (profile_score(log_x, mean_log_x, hi).value < 0.0) {
    throw FitError("Weibull shape MLE lies above " + std::to_string(hi), hi);
  }

  // Moment start: sd(ln t) = pi / (k sqrt 6) for a Weibull variable.
  double var = 0.0;
  for (double lx : log_x) var += (lx - mean_log_x) * (lx - mean_log_x);
  var /= static_cast<double>(taus.size());
  double k = std::clamp(1.2825498301618641 / std::sqrt(var), lo, hi);

  int iter = 0;
  bool converged = false;
  while (iter < options.max_iterations) {
    ++iter;
    const auto score = profile_score(log_x, mean_log_x, k);
    if (score.value == 0.0) {
      converged = true;
      break;
    }
    if (score.value < 0.0) {
      lo = k;
    } else {
      hi = k;
    }
    double next = k - score.value / score.slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - k);
    k = next;
    if (step < options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw FitError("Weibull shape iteration did not converge in " +
                       std::to_string(options.max_iterations) + " iterations",
                   k);
  }

  double s0 = 0.0;
  for (double lx : log_x) s0 += std::exp(k * lx);
  const double scale = top * std::pow(s0 / static_cast<double>(taus.size()), 1.0 / k);
  return WeibullFit{WeibullParams{k, scale}, iter};
}

}  // namespace rxonset
