// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_GRADCHECK_HPP
#define IMORE_GRADCHECK_HPP

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "imore/params.hpp"

namespace imore {

struct GradCheckTensor {
  std::string name;
  double max_rel_err = 0.0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  int checked_coords = 0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckTensor> tensors;
  bool pass = true;
  double worst_rel_err = 0.0;
  std::string worst_tensor;

  std::string to_text() const {
    std::ostringstream out;
    for (const auto& t : tensors) {
      out << (t.pass ? "pass " : "FAIL ") << t.name << " max_rel_err " << t.max_rel_err
          << " (analytic " << t.analytic_at_worst << ", numeric " << t.numeric_at_worst
          << ", coords " << t.checked_coords << ")\n";
    }
    out << (pass ? "PASS" : "FAIL") << " worst " << worst_rel_err << " at "
        << (worst_tensor.empty() ? "-" : worst_tensor) << "\n";
    return out.str();
  }
};

/// Central-difference verification of analytic parameter gradients.
///
/// `loss_fn` recomputes the scalar loss from the registry's current values
/// (deterministic, dropout disabled). `analytic` are per-parameter gradients
/// aligned with the registry order. Large tensors are spot-checked on
/// `coords_per_tensor` seeded coordinates.
template <class T>
GradCheckReport grad_check(ParamRegistry<T>& params, const std::function<double()>& loss_fn,
                           const std::vector<Mat<T>>& analytic, double eps, double tol,
                           std::uint64_t seed = 0, int coords_per_tensor = 64) {
  if (static_cast<int>(analytic.size()) != params.size()) {
    throw ShapeError("grad_check: analytic gradient count mismatch");
  }
  GradCheckReport report;
  Rng rng(seed);
  for (int i = 0; i < params.size(); ++i) {
    Param<T>& p = params.at(i);
    GradCheckTensor entry;
    entry.name = p.name;
    const long long total = p.value.size();
    std::vector<long long> coords;
    if (total <= coords_per_tensor) {
      for (long long k = 0; k < total; ++k) coords.push_back(k);
    } else {
      for (int k = 0; k < coords_per_tensor; ++k) {
        coords.push_back(static_cast<long long>(rng.below(static_cast<std::uint64_t>(total))));
      }
    }
    for (long long flat : coords) {
      const int r = static_cast<int>(flat / p.value.cols());
      const int c = static_cast<int>(flat % p.value.cols());
      const T saved = p.value(r, c);
      p.value(r, c) = saved + static_cast<T>(eps);
      const double up = loss_fn();
      p.value(r, c) = saved - static_cast<T>(eps);
      const double down = loss_fn();
      p.value(r, c) = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NonFiniteValueError("non-finite loss while probing " + p.name);
      }
      const double numeric = (up - down) / (2.0 * eps);
      const double ana = static_cast<double>(analytic[i](r, c));
      if (!std::isfinite(ana)) throw NonFiniteValueError("non-finite gradient in " + p.name);
      const double denom = std::max({std::fabs(ana), std::fabs(numeric), 1e-3});
      const double rel = std::fabs(ana - numeric) / denom;
      if (rel > entry.max_rel_err) {
        entry.max_rel_err = rel;
        entry.analytic_at_worst = ana;
        entry.numeric_at_worst = numeric;
      }
      ++entry.checked_coords;
    }
    entry.pass = entry.max_rel_err < tol;
    report.pass &= entry.pass;
    if (entry.max_rel_err > report.worst_rel_err) {
      report.worst_rel_err = entry.max_rel_err;
      report.worst_tensor = entry.name;
    }
    report.tensors.push_back(std::move(entry));
  }
  return report;
}

}  // namespace imore

#endif
