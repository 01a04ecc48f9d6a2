// Copyright 2026 The trilink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRILINK_DETECTION_H_
#define TRILINK_DETECTION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include "trilink/core.h"
#include "trilink/statistics.h"

namespace trilink {

/// Per-arm quantum efficiencies. When eta_uniform is set it overrides all
/// three arms.
struct DetectionConfig {
    double eta_1 = 1.0;
    double eta_2 = 1.0;
    double eta_3 = 1.0;
    std::optional<double> eta_uniform;

    static DetectionConfig uniform(double eta) {
        DetectionConfig d;
        d.eta_uniform = eta;
        return d;
    }

    /// Effective efficiency of arm 1, 2 or 3.
    double eta(int arm) const;
    std::array<double, 3> etas() const { return {eta(1), eta(2), eta(3)}; }
    /// True when all three effective efficiencies are equal.
    bool is_uniform() const;
    void validate() const;
};

/// Bernoulli-loss detector weight eta^m (1 - eta)^(n - m) C(n, m); zero for m > n.
double povm_weight(double eta, std::int64_t n, std::int64_t m);

/// Moments of detected counts: mean eta N, variance eta^2 var(n) + eta (1 - eta) N,
/// covariance eta_j eta_k cov(n_j, n_k).
MomentSet detected_moments(const ModeMeans &m, const DetectionConfig &d);

/// Same transformation applied to any photon-number moment set.
MomentSet thin_moments(const MomentSet &photons, const std::array<double, 3> &eta);

/// Exact detected correlation coefficient. For k1_23 with uniform eta this is
/// eta (1 + N1) / (1 + eta N1). Throws kUndefinedCorrelation when a detected
/// variance vanishes.
double detected_correlation(const ModeMeans &m, const DetectionConfig &d, Grouping g);

/// Large-N expansion of the detected correlation for uniform efficiency.
double detected_correlation_large_n(const ModeMeans &m, double eta, Grouping g);

/// Noise-reduction factor Var(difference) / (sum of detected means).
/// Uniform efficiency uses the closed forms (R_1_23 = 1 - eta exactly);
/// otherwise the value follows from detected_moments.
/// Throws kDivisionByZero when the detected means of the grouping sum to zero.
double noise_reduction(const ModeMeans &m, const DetectionConfig &d, Grouping g);

/// Noise reduction of an arbitrary detected moment set.
double noise_reduction_from_moments(const MomentSet &s, Grouping g);

/// (R_1_2 < 1, R_1_3 < 1) from the threshold N1 < N_k + sqrt(2 N_k), which
/// holds for every eta > 0.
std::pair<bool, bool> bipartite_nonclassicality_region(const ModeMeans &m);

}  // namespace trilink

#endif  // TRILINK_DETECTION_H_
