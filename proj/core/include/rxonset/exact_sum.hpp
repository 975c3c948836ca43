// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace rxonset {

/// Running sum of doubles kept as a list of non-overlapping partials
/// (Shewchuk). value() is the correctly rounded sum of everything added, so
/// the result does not depend on summation order or grouping.
class ExactSum {
 public:
  void add(double x);
  double value() const;
  void clear() { partials_.clear(); }

 private:
  std::vector<double> partials_;
};

}  // namespace rxonset
