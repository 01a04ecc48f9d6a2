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

#include "trilink/scan.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace trilink {

void CoherenceMismatch::validate() const {
    if (!(matched_g1_sq > 0.0) || !std::isfinite(matched_g1_sq)) {
        throw Error(ErrorCode::kConfig, "mismatch reference g1_sq must be > 0");
    }
    if (!(strength >= 0.0) || !std::isfinite(strength)) {
        throw Error(ErrorCode::kConfig, "mismatch strength must be >= 0");
    }
    if (!(max_mismatch >= 0.0 && max_mismatch < 1.0)) {
        throw Error(ErrorCode::kConfig, "max_mismatch must lie in [0, 1)");
    }
}

NoiseModel CoherenceMismatch::apply(const NoiseModel &base, double g1_sq, const ModeMeans &means) const {
    NoiseModel nm = base;
    double d = std::min(max_mismatch, strength * std::abs(g1_sq / matched_g1_sq - 1.0));
    if (g1_sq > matched_g1_sq) {
        nm.collect[0] *= 1.0 - d;
    } else if (g1_sq < matched_g1_sq) {
        nm.spurious[0] += d * means.n1;
    }
    return nm;
}

void ScanConfig::validate() const {
    if (g1_grid.empty() || g2_grid.empty()) throw Error(ErrorCode::kConfig, "scan grids must be nonempty");
    if (shots < 100) throw Error(ErrorCode::kConfig, "scan needs at least 100 shots per grid point");
    try {
        detection.validate();
        noise.validate();
        for (double g1 : g1_grid) {
            for (double g2 : g2_grid) CouplingConfig{g1, g2, z}.validate();
        }
        if (mismatch) mismatch->validate();
    } catch (const Error &e) {
        throw Error(ErrorCode::kConfig, e.what());
    }
}

std::uint64_t scan_point_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x5CA9ull));
}

std::vector<ScanRow> run_scan(const ScanConfig &cfg) {
    cfg.validate();
    const std::size_t n2 = cfg.g2_grid.size();
    std::vector<ScanRow> rows(cfg.g1_grid.size() * n2);
    parallel_for(static_cast<std::int64_t>(rows.size()), cfg.threads, [&](std::int64_t idx) {
        ScanRow &row = rows[static_cast<std::size_t>(idx)];
        row.g1_sq = cfg.g1_grid[static_cast<std::size_t>(idx) / n2];
        row.g2_sq = cfg.g2_grid[static_cast<std::size_t>(idx) % n2];
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.m1_th = row.msum_th = row.eps_1_23_th = row.r_1_23_th = row.r_1_23_model = nan;
        try {
            CouplingConfig c{row.g1_sq, row.g2_sq, cfg.z};
            ModeMeans means = mode_means(c);
            NoiseModel nm = cfg.mismatch ? cfg.mismatch->apply(cfg.noise, row.g1_sq, means) : cfg.noise;
            double mu = static_cast<double>(cfg.noise.mu);
            MomentSet ideal = detected_moments(means, cfg.detection);
            row.m1_th = mu * ideal.mean[0];
            row.msum_th = mu * (ideal.mean[1] + ideal.mean[2]);
            row.eps_1_23_th = detected_correlation(means, cfg.detection, Grouping::k1_23);
            row.r_1_23_th = noise_reduction(means, cfg.detection, Grouping::k1_23);
            row.r_1_23_model = noise_reduction_from_moments(expected_moments(means, cfg.detection, nm), Grouping::k1_23);

            std::uint64_t seed = scan_point_seed(cfg.seed, static_cast<std::uint64_t>(idx));
            ShotSet signal = sample_run(c, cfg.detection, nm, cfg.shots, seed, 1);
            if (nm.has_electronic_noise()) {
                ShotSet dark = sample_dark_run(cfg.detection, nm, cfg.shots, seed, 1);
                row.estimate = estimate_statistics(signal, &dark, cfg.estimate);
            } else {
                row.estimate = estimate_statistics(signal, nullptr, cfg.estimate);
            }
        } catch (const Error &e) {
            row.error = std::string(error_code_name(e.code())) + ": " + e.what();
        }
    });
    return rows;
}

std::string scan_csv_header() {
    return "g1_sq,g2_sq,M1,Msum,eps_1_23,R_1_23,stderr_R,M1_th,Msum_th,eps_1_23_th,R_1_23_th,R_1_23_model,error";
}

std::string scan_csv_row(const ScanRow &row) {
    std::ostringstream out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double m1 = nan, msum = nan, eps = nan, r = nan, se = nan;
    std::string error = row.error;
    if (row.estimate) {
        const EstimateReport &e = *row.estimate;
        m1 = e.mean[0];
        msum = e.mean[1] + e.mean[2];
        auto it = e.eps_hat.find(Grouping::k1_23);
        if (it != e.eps_hat.end() && it->second) eps = *it->second;
        auto jt = e.r_hat.find(Grouping::k1_23);
        if (jt != e.r_hat.end() && jt->second) r = *jt->second;
        se = e.stderr_of("R_1_23");
        if (error.empty()) {
            for (const auto &[key, why] : e.errors) {
                if (key == "eps_1_23" || key == "R_1_23") error += (error.empty() ? "" : "; ") + key + " " + why;
            }
        }
    }
    // Commas inside messages would break the column layout.
    std::replace(error.begin(), error.end(), ',', ';');
    out << format_double(row.g1_sq) << ',' << format_double(row.g2_sq) << ',' << format_double(m1) << ','
        << format_double(msum) << ',' << format_double(eps) << ',' << format_double(r) << ',' << format_double(se)
        << ',' << format_double(row.m1_th) << ',' << format_double(row.msum_th) << ','
        << format_double(row.eps_1_23_th) << ',' << format_double(row.r_1_23_th) << ','
        << format_double(row.r_1_23_model) << ',' << error;
    return out.str();
}

void write_scan_table(const std::vector<ScanRow> &rows, std::ostream &out) {
    out << scan_csv_header() << '\n';
    for (const ScanRow &row : rows) out << scan_csv_row(row) << '\n';
}

}  // namespace trilink
