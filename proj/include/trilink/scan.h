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

#ifndef TRILINK_SCAN_H_
#define TRILINK_SCAN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trilink/detection.h"
#include "trilink/estimators.h"
#include "trilink/sampling.h"

namespace trilink {

/// Phenomenological pin-hole mismatch along a g1_sq sweep.
///
/// Coherence areas grow with the downconversion pump. Above `matched_g1_sq`
/// the arm-1 pin-hole clips its area and collects 1 - d of the correlated
/// light; below it the pin-hole also passes light of neighbouring areas,
/// modeled as d * N1 uncorrelated thermal photons per temporal mode on arm 1.
/// d = strength * |g1_sq / matched_g1_sq - 1|, capped at `max_mismatch`.
struct CoherenceMismatch {
    double matched_g1_sq = 1.0;
    double strength = 1.0;
    double max_mismatch = 0.95;

    void validate() const;
    /// Noise model at one grid point, starting from `base`.
    NoiseModel apply(const NoiseModel &base, double g1_sq, const ModeMeans &means) const;
};

struct ScanConfig {
    std::vector<double> g1_grid;
    std::vector<double> g2_grid;
    double z = 1.0;
    DetectionConfig detection;
    NoiseModel noise;
    std::optional<CoherenceMismatch> mismatch;
    std::int64_t shots = 50000;
    std::uint64_t seed = 1;
    EstimateOptions estimate;
    /// Concurrent grid points; 0 means hardware concurrency.
    unsigned threads = 0;

    /// Throws kConfig on empty grids, shots < 100 or invalid components.
    void validate() const;
};

/// One grid point. Sampled columns are empty when the point failed; `error`
/// then carries "<code>: <message>".
struct ScanRow {
    double g1_sq = 0.0;
    double g2_sq = 0.0;
    std::optional<EstimateReport> estimate;
    std::string error;
    // Infinite-shot values of the ideal model (no collection loss, spurious
    // light or electronic noise), including mu.
    double m1_th = 0.0;
    double msum_th = 0.0;
    double eps_1_23_th = 0.0;
    double r_1_23_th = 0.0;
    /// Infinite-shot R_1_23 under the point's full noise model.
    double r_1_23_model = 0.0;
};

std::vector<ScanRow> run_scan(const ScanConfig &cfg);

/// g1_sq,g2_sq,M1,Msum,eps_1_23,R_1_23,stderr_R,M1_th,Msum_th,eps_1_23_th,R_1_23_th,R_1_23_model,error
std::string scan_csv_header();
std::string scan_csv_row(const ScanRow &row);
void write_scan_table(const std::vector<ScanRow> &rows, std::ostream &out);

/// Seed of grid point `index`, shared by its signal and dark runs.
std::uint64_t scan_point_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace trilink

#endif  // TRILINK_SCAN_H_
