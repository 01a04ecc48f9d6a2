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

#include "trilink/statistics.h"

#include <cmath>
#include <string>

namespace trilink {

namespace {

double log_factorial(std::int64_t n) {
    int sign = 0;
    return lgamma_r(static_cast<double>(n) + 1.0, &sign);
}

// p * log(x) with the convention 0 * log(0) = 0.
double xlogy(std::int64_t p, double x) {
    if (p == 0) return 0.0;
    return static_cast<double>(p) * std::log(x);
}

void require_count(std::int64_t n, const char *name) {
    if (n < 0) {
        throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must be >= 0");
    }
}

}  // namespace

std::string_view grouping_label(Grouping g) {
    switch (g) {
        case Grouping::k12: return "1_2";
        case Grouping::k13: return "1_3";
        case Grouping::k23: return "2_3";
        case Grouping::k1_23: return "1_23";
    }
    return "?";
}

Grouping parse_grouping(std::string_view label) {
    for (Grouping g : kAllGroupings) {
        if (grouping_label(g) == label) return g;
    }
    if (label == "12") return Grouping::k12;
    if (label == "13") return Grouping::k13;
    if (label == "23") return Grouping::k23;
    if (label == "1,2+3" || label == "1_2+3") return Grouping::k1_23;
    throw Error(ErrorCode::kInvalidArgument, "unknown grouping '" + std::string(label) + "'");
}

double MomentSet::cov(int j, int k) const {
    if (j > k) std::swap(j, k);
    if (j == k && j >= 1 && j <= 3) return var[j - 1];
    if (j == 1 && k == 2) return cov_12;
    if (j == 1 && k == 3) return cov_13;
    if (j == 2 && k == 3) return cov_23;
    throw Error(ErrorCode::kInvalidArgument, "mode index out of range");
}

double MomentSet::difference_variance(Grouping g) const {
    switch (g) {
        case Grouping::k12: return var[0] + var[1] - 2.0 * cov_12;
        case Grouping::k13: return var[0] + var[2] - 2.0 * cov_13;
        case Grouping::k23: return var[1] + var[2] - 2.0 * cov_23;
        case Grouping::k1_23:
            return var[0] + var[1] + var[2] - 2.0 * cov_12 - 2.0 * cov_13 + 2.0 * cov_23;
    }
    return 0.0;
}

double MomentSet::grouping_mean(Grouping g) const {
    switch (g) {
        case Grouping::k12: return mean[0] + mean[1];
        case Grouping::k13: return mean[0] + mean[2];
        case Grouping::k23: return mean[1] + mean[2];
        case Grouping::k1_23: return mean[0] + mean[1] + mean[2];
    }
    return 0.0;
}

MomentSet::Pair MomentSet::pair(Grouping g) const {
    switch (g) {
        case Grouping::k12: return {cov_12, var[0], var[1]};
        case Grouping::k13: return {cov_13, var[0], var[2]};
        case Grouping::k23: return {cov_23, var[1], var[2]};
        case Grouping::k1_23: return {cov_12 + cov_13, var[0], var[1] + var[2] + 2.0 * cov_23};
    }
    return {};
}

std::int64_t truncation_limit(const ModeMeans &m) {
    return static_cast<std::int64_t>(std::ceil(40.0 + 20.0 * m.n1));
}

double joint_pmf(const ModeMeans &m, std::int64_t n, std::int64_t p, std::int64_t r) {
    m.require_conserved();
    require_count(n, "n");
    require_count(p, "p");
    require_count(r, "r");
    if (n != p + r) return 0.0;
    if ((p > 0 && m.n2 == 0.0) || (r > 0 && m.n3 == 0.0)) return 0.0;
    double log_p = xlogy(p, m.n2) + xlogy(r, m.n3) - static_cast<double>(1 + p + r) * std::log1p(m.n1) +
                   log_factorial(p + r) - log_factorial(p) - log_factorial(r);
    return std::exp(log_p);
}

double marginal_pmf(const ModeMeans &m, int mode, std::int64_t n) {
    double mean = m[mode];
    require_count(n, "n");
    if (mean < 0.0 || !std::isfinite(mean)) {
        throw Error(ErrorCode::kInvalidArgument, "mean photon number must be finite and >= 0");
    }
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(xlogy(n, mean) - static_cast<double>(n + 1) * std::log1p(mean));
}

MomentSet photon_moments(const ModeMeans &m) {
    m.require_conserved();
    MomentSet s;
    s.mean = {m.n1, m.n2, m.n3};
    s.var = {m.n1 * (1.0 + m.n1), m.n2 * (1.0 + m.n2), m.n3 * (1.0 + m.n3)};
    s.cov_23 = m.n2 * m.n3;
    s.cov_12 = m.n2 * (1.0 + m.n1);
    s.cov_13 = m.n3 * (1.0 + m.n1);
    return s;
}

double correlation_coefficient(const ModeMeans &m, Grouping g) {
    m.require_conserved();
    auto undefined = [g]() {
        return Error(ErrorCode::kUndefinedCorrelation,
                     "zero photon-number variance in grouping " + std::string(grouping_label(g)));
    };
    switch (g) {
        case Grouping::k1_23:
            if (m.n1 == 0.0) throw undefined();
            return 1.0;
        case Grouping::k12:
        case Grouping::k13: {
            double nk = g == Grouping::k12 ? m.n2 : m.n3;
            if (m.n1 == 0.0 || nk == 0.0) throw undefined();
            return std::sqrt(nk * (1.0 + m.n1) / (m.n1 * (1.0 + nk)));
        }
        case Grouping::k23:
            if (m.n2 == 0.0 || m.n3 == 0.0) throw undefined();
            return std::sqrt(m.n2 * m.n3 / ((1.0 + m.n2) * (1.0 + m.n3)));
    }
    throw undefined();
}

double correlation_from_moments(const MomentSet &s, Grouping g) {
    auto p = s.pair(g);
    if (!(p.var_a > 0.0) || !(p.var_b > 0.0)) {
        throw Error(ErrorCode::kUndefinedCorrelation,
                    "non-positive variance in grouping " + std::string(grouping_label(g)));
    }
    return p.cov / std::sqrt(p.var_a * p.var_b);
}

double correlation_large_n(const ModeMeans &m, Grouping g) {
    double n = m.total();
    if (n <= 0.0) {
        throw Error(ErrorCode::kDivisionByZero, "large-N expansion needs a nonzero total");
    }
    double b1 = m.n1 / n, b2 = m.n2 / n, b3 = m.n3 / n;
    switch (g) {
        case Grouping::k12: return 1.0 - (b1 - b2) / (2.0 * b1 * b2 * n);
        case Grouping::k13: return 1.0 - (b1 - b3) / (2.0 * b1 * b3 * n);
        case Grouping::k23: return 1.0 - (b2 + b3) / (2.0 * b2 * b3 * n);
        case Grouping::k1_23: break;
    }
    throw Error(ErrorCode::kInvalidArgument, "no large-N expansion for grouping 1_23; it is exactly 1");
}

}  // namespace trilink
