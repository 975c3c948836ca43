// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

namespace rxonset::stats {

double mean(std::span<const double> xs);

/// Linear-interpolated quantile (type 7), q in [0, 1].
double quantile(std::span<const double> xs, double q);

inline double median(std::span<const double> xs) { return quantile(xs, 0.5); }

/// Pearson correlation. Throws UndefinedStatisticError for fewer than
/// `min_points` pairs or zero variance in either variable.
double pearson(std::span<const double> x, std::span<const double> y, std::size_t min_points = 3);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of y on x.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace rxonset::stats
