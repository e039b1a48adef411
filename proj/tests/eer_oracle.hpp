// tests/eer_oracle.hpp

// Copyright 2026  The attrsv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ATTRSV_TESTS_EER_ORACLE_HPP
#define ATTRSV_TESTS_EER_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace attrsv::testing {

// Brute-force O(n^2) equal-error-rate scan.  Same mathematical definition as
// the production path (candidate thresholds are the scores plus +-inf
// sentinels, FAR counts negatives >= t, FRR counts positives < t, linear
// interpolation at the sign change of FAR-FRR) but counts by direct loops
// with no shared code.
inline double brute_force_eer(const std::vector<double> &scores,
                              const std::vector<int> &targets) {
  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  for (double s : scores) thresholds.push_back(s);
  thresholds.push_back(std::numeric_limits<double>::infinity());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  long n_pos = 0, n_neg = 0;
  for (int t : targets) (t ? n_pos : n_neg)++;

  std::vector<double> far(thresholds.size()), frr(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    long fa = 0, fr = 0;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (targets[j] == 0 && scores[j] >= thresholds[i]) ++fa;
      if (targets[j] == 1 && scores[j] < thresholds[i]) ++fr;
    }
    far[i] = static_cast<double>(fa) / n_neg;
    frr[i] = static_cast<double>(fr) / n_pos;
  }

  std::size_t lo = 0;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double d = far[i] - frr[i];
    if (d == 0.0) return far[i];
    if (d > 0.0) lo = i;
    if (d < 0.0) break;
  }
  const std::size_t hi = lo + 1;
  const double d_lo = far[lo] - frr[lo];
  const double d_hi = far[hi] - frr[hi];
  if (std::isfinite(thresholds[lo]) && std::isfinite(thresholds[hi])) {
    const double alpha = d_lo / (d_lo - d_hi);
    return far[lo] + alpha * (far[hi] - far[lo]);
  }
  const std::size_t pick = std::abs(d_lo) <= std::abs(d_hi) ? lo : hi;
  return 0.5 * (far[pick] + frr[pick]);
}

}  // namespace attrsv::testing

#endif  // ATTRSV_TESTS_EER_ORACLE_HPP
