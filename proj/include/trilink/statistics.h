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

#ifndef TRILINK_STATISTICS_H_
#define TRILINK_STATISTICS_H_

#include <array>
#include <cstdint>
#include <string_view>

#include "trilink/core.h"

namespace trilink {

/// Mode groupings for correlation coefficients and noise-reduction factors.
/// k1_23 pairs mode 1 with the sum of modes 2 and 3.
enum class Grouping { k12, k13, k23, k1_23 };

inline constexpr std::array<Grouping, 4> kAllGroupings = {Grouping::k12, Grouping::k13, Grouping::k23,
                                                          Grouping::k1_23};

/// Short label used in CSV headers and key-value reports ("1_2", "1_23", ...).
std::string_view grouping_label(Grouping g);
Grouping parse_grouping(std::string_view label);

/// Means, variances and covariances of photon (or photoelectron) counts.
struct MomentSet {
    std::array<double, 3> mean{};
    std::array<double, 3> var{};
    double cov_12 = 0.0;
    double cov_13 = 0.0;
    double cov_23 = 0.0;

    double cov(int j, int k) const;
    /// cov_23 - cov_12 - cov_13.
    double gamma_comb() const { return cov_23 - cov_12 - cov_13; }

    /// Variance of the difference photocurrent for the grouping,
    /// e.g. Var(n1 - n2 - n3) for k1_23.
    double difference_variance(Grouping g) const;
    /// Sum of the means entering the grouping.
    double grouping_mean(Grouping g) const;
    /// Covariance and the two variances whose ratio is the correlation
    /// coefficient of the grouping.
    struct Pair {
        double cov;
        double var_a;
        double var_b;
    };
    Pair pair(Grouping g) const;
};

/// Box edge for oracle sums over the joint distribution: every photon number
/// up to ceil(40 + 20 * n1). The thermal tail beyond it is below 1e-10 for
/// n1 <= 5.
std::int64_t truncation_limit(const ModeMeans &m);

/// P(n, p, r) for the state evolved from vacuum: zero unless n == p + r.
/// Evaluated in log space.
double joint_pmf(const ModeMeans &m, std::int64_t n, std::int64_t p, std::int64_t r);

/// Thermal marginal N^n / (1 + N)^(n+1) of one mode.
double marginal_pmf(const ModeMeans &m, int mode, std::int64_t n);

/// Exact moments of the state evolved from vacuum.
MomentSet photon_moments(const ModeMeans &m);

/// Correlation coefficient cov / (sigma_a sigma_b). Returns exactly 1 for
/// k1_23. Throws kUndefinedCorrelation when an involved mean is zero.
double correlation_coefficient(const ModeMeans &m, Grouping g);

/// Correlation coefficient of an arbitrary moment set. Throws
/// kUndefinedCorrelation on a non-positive variance.
double correlation_from_moments(const MomentSet &s, Grouping g);

/// Large-N expansions 1 - (b1 - bk)/(2 b1 bk N) and 1 - (b2 + b3)/(2 b2 b3 N)
/// with b_j the photon fractions of the total N. Not defined for k1_23.
double correlation_large_n(const ModeMeans &m, Grouping g);

}  // namespace trilink

#endif  // TRILINK_STATISTICS_H_
