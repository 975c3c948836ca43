// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rxonset/errors.hpp"

namespace rxonset::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw UndefinedStatisticError("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw UndefinedStatisticError("quantile of an empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(pos));
  const auto above = std::min(below + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(below);
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

namespace {

struct Moments {
  double mx, my, sxx, syy, sxy;
};

Moments moments(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x);
  const double my = mean(y);
  Moments m{mx, my, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y, std::size_t min_points) {
  if (x.size() != y.size()) throw UndefinedStatisticError("pearson: length mismatch");
  if (x.size() < min_points) {
    throw UndefinedStatisticError("pearson: need at least " + std::to_string(min_points) +
                                  " points, got " + std::to_string(x.size()));
  }
  const auto m = moments(x, y);
  if (m.sxx <= 0.0 || m.syy <= 0.0) {
    throw UndefinedStatisticError("pearson: zero variance");
  }
  return m.sxy / std::sqrt(m.sxx * m.syy);
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw UndefinedStatisticError("least_squares: need two or more paired points");
  }
  const auto m = moments(x, y);
  if (m.sxx <= 0.0) throw UndefinedStatisticError("least_squares: zero variance in x");
  const double slope = m.sxy / m.sxx;
  return {slope, m.my - slope * m.mx};
}

}  // namespace rxonset::stats
