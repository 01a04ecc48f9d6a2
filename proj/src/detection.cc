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

#include "trilink/detection.h"

#include <cmath>
#include <string>

#include "trilink/kv_text.h"

namespace trilink {

namespace {

void require_efficiency(double eta, const char *name) {
    if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(name) + " must lie in [0, 1], got " + format_double(eta));
    }
}

}  // namespace

double DetectionConfig::eta(int arm) const {
    if (eta_uniform) return *eta_uniform;
    switch (arm) {
        case 1: return eta_1;
        case 2: return eta_2;
        case 3: return eta_3;
        default: throw Error(ErrorCode::kInvalidArgument, "arm index must be 1, 2 or 3");
    }
}

bool DetectionConfig::is_uniform() const {
    return eta_uniform.has_value() || (eta_1 == eta_2 && eta_2 == eta_3);
}

void DetectionConfig::validate() const {
    if (eta_uniform) {
        require_efficiency(*eta_uniform, "eta");
        return;
    }
    require_efficiency(eta_1, "eta_1");
    require_efficiency(eta_2, "eta_2");
    require_efficiency(eta_3, "eta_3");
}

double povm_weight(double eta, std::int64_t n, std::int64_t m) {
    require_efficiency(eta, "eta");
    if (n < 0 || m < 0) {
        throw Error(ErrorCode::kInvalidArgument, "photon counts must be >= 0");
    }
    if (m > n) return 0.0;
    if (eta == 1.0) return m == n ? 1.0 : 0.0;
    if (eta == 0.0) return m == 0 ? 1.0 : 0.0;
    int sign = 0;
    double log_binom = lgamma_r(static_cast<double>(n) + 1.0, &sign) -
                       lgamma_r(static_cast<double>(m) + 1.0, &sign) -
                       lgamma_r(static_cast<double>(n - m) + 1.0, &sign);
    return std::exp(log_binom + static_cast<double>(m) * std::log(eta) +
                    static_cast<double>(n - m) * std::log1p(-eta));
}

MomentSet thin_moments(const MomentSet &photons, const std::array<double, 3> &eta) {
    MomentSet s;
    for (int j = 0; j < 3; ++j) {
        s.mean[j] = eta[j] * photons.mean[j];
        s.var[j] = eta[j] * eta[j] * photons.var[j] + eta[j] * (1.0 - eta[j]) * photons.mean[j];
    }
    s.cov_12 = eta[0] * eta[1] * photons.cov_12;
    s.cov_13 = eta[0] * eta[2] * photons.cov_13;
    s.cov_23 = eta[1] * eta[2] * photons.cov_23;
    return s;
}

MomentSet detected_moments(const ModeMeans &m, const DetectionConfig &d) {
    d.validate();
    return thin_moments(photon_moments(m), d.etas());
}

double detected_correlation(const ModeMeans &m, const DetectionConfig &d, Grouping g) {
    MomentSet s = detected_moments(m, d);
    if (g == Grouping::k1_23 && d.is_uniform()) {
        double eta = d.eta(1);
        if (!(s.var[0] > 0.0)) {
            throw Error(ErrorCode::kUndefinedCorrelation, "zero detected variance in grouping 1_23");
        }
        return eta * (1.0 + m.n1) / (1.0 + eta * m.n1);
    }
    return correlation_from_moments(s, g);
}

double detected_correlation_large_n(const ModeMeans &m, double eta, Grouping g) {
    require_efficiency(eta, "eta");
    double n = m.total();
    if (n <= 0.0 || eta == 0.0) {
        throw Error(ErrorCode::kDivisionByZero, "large-N expansion needs nonzero total and eta");
    }
    double b1 = m.n1 / n, b2 = m.n2 / n, b3 = m.n3 / n;
    switch (g) {
        case Grouping::k1_23: return 1.0 - (1.0 - eta) / (eta * b1 * n);
        case Grouping::k12: return 1.0 - (b1 + b2 - 2.0 * eta * b2) / (2.0 * eta * b1 * b2 * n);
        case Grouping::k13: return 1.0 - (b1 + b3 - 2.0 * eta * b3) / (2.0 * eta * b1 * b3 * n);
        case Grouping::k23: return 1.0 - (b2 + b3) / (2.0 * eta * b2 * b3 * n);
    }
    return 0.0;
}

double noise_reduction_from_moments(const MomentSet &s, Grouping g) {
    double denom = s.grouping_mean(g);
    if (!(denom > 0.0)) {
        throw Error(ErrorCode::kDivisionByZero,
                    "zero mean photocurrent in grouping " + std::string(grouping_label(g)));
    }
    return s.difference_variance(g) / denom;
}

double noise_reduction(const ModeMeans &m, const DetectionConfig &d, Grouping g) {
    MomentSet s = detected_moments(m, d);
    if (!(s.grouping_mean(g) > 0.0)) {
        throw Error(ErrorCode::kDivisionByZero,
                    "zero mean photocurrent in grouping " + std::string(grouping_label(g)));
    }
    if (!d.is_uniform()) return noise_reduction_from_moments(s, g);
    double eta = d.eta(1);
    switch (g) {
        case Grouping::k1_23: return 1.0 - eta;
        case Grouping::k12:
        case Grouping::k13: {
            double nk = g == Grouping::k12 ? m.n2 : m.n3;
            double diff = m.n1 - nk;
            return 1.0 + eta * (diff * diff - 2.0 * nk) / (m.n1 + nk);
        }
        case Grouping::k23: {
            double diff = m.n2 - m.n3;
            return 1.0 + eta * diff * diff / (m.n2 + m.n3);
        }
    }
    return noise_reduction_from_moments(s, g);
}

std::pair<bool, bool> bipartite_nonclassicality_region(const ModeMeans &m) {
    m.require_conserved();
    auto below = [&](double nk) { return m.n1 < nk + std::sqrt(2.0 * nk); };
    return {below(m.n2), below(m.n3)};
}

}  // namespace trilink
