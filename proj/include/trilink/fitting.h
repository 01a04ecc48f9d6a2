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

#ifndef TRILINK_FITTING_H_
#define TRILINK_FITTING_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trilink/core.h"
#include "trilink/kv_text.h"

namespace trilink {

/// Which squared coupling a pump-intensity scan varies.
enum class ScanAxis { kG1Sq, kG2Sq };

std::string_view scan_axis_name(ScanAxis axis);
ScanAxis parse_scan_axis(std::string_view name);

struct ScanPoint {
    double x = 0.0;     // scanned squared coupling
    double m1 = 0.0;    // detected mean of arm 1
    double msum = 0.0;  // detected mean of arms 2 + 3
};

struct ScanData {
    std::vector<ScanPoint> points;
    ScanAxis axis = ScanAxis::kG1Sq;
    double z = 1.0;

    /// Throws kInvalidArgument unless x is strictly increasing and means are
    /// non-negative and finite.
    void validate() const;
};

enum class FitParam { kCoupling, kEta1, kEtaSum, kMuScale };
inline constexpr std::array<FitParam, 4> kAllFitParams = {FitParam::kCoupling, FitParam::kEta1, FitParam::kEtaSum,
                                                          FitParam::kMuScale};
std::string_view fit_param_name(FitParam p);

/// One model parameter: held at `value` when fixed, started from `value`
/// and confined to [lower, upper] when free.
struct ParamSpec {
    bool free = false;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct FitSpec {
    /// The squared coupling that is not scanned.
    ParamSpec coupling{true, 1.0, 0.0, 10.0};
    ParamSpec eta1{true, 0.5, 0.0, 1.0};
    ParamSpec eta_sum{true, 0.5, 0.0, 1.0};
    /// Temporal-mode count times unit conversions; only its product with the
    /// efficiencies reaches the data.
    ParamSpec mu_scale{false, 1.0, 0.0, 1e12};

    int max_cycles = 60;
    int max_simplex_iterations = 4000;
    /// Residual-bootstrap refits for confidence intervals; 0 disables them.
    int bootstrap_resamples = 200;
    std::uint64_t seed = 1;

    ParamSpec &operator[](FitParam p);
    const ParamSpec &operator[](FitParam p) const;
    /// Throws kUnidentifiable when mu_scale and both efficiencies are free,
    /// kInvalidArgument on bad bounds or when nothing is free.
    void validate() const;
};

struct FitResult {
    std::array<double, 4> value{};  // indexed by FitParam
    std::array<bool, 4> free{};
    /// 95% residual-bootstrap intervals for free parameters.
    std::array<std::optional<std::array<double, 2>>, 4> interval{};
    double rss = 0.0;         // in squared data units
    double data_scale = 0.0;  // largest detected mean in the scan
    bool converged = false;
    int cycles = 0;
    std::int64_t evaluations = 0;
    /// Best objective after every accepted simplex step and polish.
    std::vector<double> objective_trace;

    double operator[](FitParam p) const { return value[static_cast<int>(p)]; }
    KeyValueText to_text() const;
};

/// Detected means M1 = eta1 * mu_scale * N1(x), Msum = eta_sum * mu_scale * (N2 + N3)(x).
std::array<double, 2> scan_model(ScanAxis axis, double x, double coupling, double z, double eta1, double eta_sum,
                                 double mu_scale);

/// Noiseless scan built from the model.
ScanData synthesize_scan(ScanAxis axis, const std::vector<double> &xs, double coupling, double z, double eta1,
                         double eta_sum, double mu_scale = 1.0);

/// Joint least squares over both series: Nelder-Mead in bound-normalized
/// coordinates followed by golden-section polish of each coordinate,
/// repeated until a full cycle improves the objective by less than 1e-10
/// relative or `max_cycles` is reached (then `converged` is false).
/// Throws kDegenerateData when all x coincide or fewer than 4 points exist.
FitResult fit_pump_scan(const ScanData &data, const FitSpec &spec);

/// CSV `x,M1,Msum` plus a `.meta` sidecar with `axis` and `z`.
void write_scan_data(const ScanData &data, const std::string &path);
ScanData read_scan_data(const std::string &path);

}  // namespace trilink

#endif  // TRILINK_FITTING_H_
