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

#ifndef TRILINK_ESTIMATORS_H_
#define TRILINK_ESTIMATORS_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "trilink/kv_text.h"
#include "trilink/sampling.h"
#include "trilink/statistics.h"

namespace trilink {

struct EstimateOptions {
    /// Non-overlapping blocks for the block bootstrap (capped at the shot count).
    int bootstrap_blocks = 200;
    /// Bootstrap replicates; 0 disables standard errors.
    int bootstrap_resamples = 200;
};

/// Sample statistics of a run. Undefined quantities (zero variance, zero
/// mean) are empty optionals with the reason recorded in `errors`.
struct EstimateReport {
    std::array<double, 3> mean{};
    std::map<Grouping, std::optional<double>> eps_hat;
    std::map<Grouping, std::optional<double>> r_hat;
    /// Keys: "M1".."M3", "eps_<grouping>", "R_<grouping>".
    std::map<std::string, double> stderr;
    std::map<std::string, std::string> errors;
    bool dark_corrected = false;
    std::int64_t shots_used = 0;
    int bootstrap_blocks = 0;

    /// Throws kUndefinedCorrelation / kDivisionByZero with the recorded reason.
    double eps(Grouping g) const;
    double r(Grouping g) const;
    /// NaN when no standard error is available.
    double stderr_of(const std::string &key) const;

    KeyValueText to_text() const;
    static std::string csv_header();
    std::string csv_row() const;
};

/// Unbiased (n - 1) moments of the run; with a dark run, dark means are
/// subtracted from signal means and the dark covariance matrix (hence every
/// difference-photocurrent variance) from the signal one before forming
/// correlation coefficients and noise-reduction factors.
///
/// Throws kEmptyInput for an empty run and kOverSubtraction when a
/// dark-corrected variance is not positive.
EstimateReport estimate_statistics(const ShotSet &signal, const ShotSet *dark = nullptr,
                                   const EstimateOptions &options = {});

}  // namespace trilink

#endif  // TRILINK_ESTIMATORS_H_
