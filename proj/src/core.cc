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

#include "trilink/core.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "trilink/kv_text.h"

namespace trilink {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "invalid_argument";
        case ErrorCode::kInconsistentMeans: return "inconsistent_means";
        case ErrorCode::kUndefinedCorrelation: return "undefined_correlation";
        case ErrorCode::kDivisionByZero: return "division_by_zero";
        case ErrorCode::kOverSubtraction: return "over_subtraction";
        case ErrorCode::kEmptyInput: return "empty_input";
        case ErrorCode::kNonConvergence: return "non_convergence";
        case ErrorCode::kDegenerateData: return "degenerate_data";
        case ErrorCode::kUnidentifiable: return "unidentifiable";
        case ErrorCode::kConfig: return "config";
        case ErrorCode::kIo: return "io";
    }
    return "unknown";
}

namespace {

void require_nonnegative(double value, const char *name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(name) + " must be finite and >= 0, got " + format_double(value));
    }
}

// (sin(x)/x)^2 as a function of s = x^2. Negative s continues analytically to
// (sinh(y)/y)^2 with y^2 = -s.
double sinc_sq(double s) {
    if (std::abs(s) < 1e-3) {
        double sinc = 1.0 + s * (-1.0 / 6.0 + s * (1.0 / 120.0 + s * (-1.0 / 5040.0 + s / 362880.0)));
        return sinc * sinc;
    }
    if (s > 0.0) {
        double x = std::sqrt(s);
        double v = std::sin(x) / x;
        return v * v;
    }
    double y = std::sqrt(-s);
    double v = std::sinh(y) / y;
    return v * v;
}

}  // namespace

void CouplingConfig::validate() const {
    require_nonnegative(g1_sq, "g1_sq");
    require_nonnegative(g2_sq, "g2_sq");
    require_nonnegative(z, "z");
}

Regime CouplingConfig::regime() const {
    double scale = std::max({g1_sq, g2_sq, 1.0});
    if (std::abs(g2_sq - g1_sq) <= kDegenerateTolerance * scale) {
        return Regime::kDegenerate;
    }
    return g2_sq > g1_sq ? Regime::kOscillatory : Regime::kExponential;
}

double CouplingConfig::rate() const { return std::sqrt(std::abs(g2_sq - g1_sq)); }

double ModeMeans::operator[](int mode) const {
    switch (mode) {
        case 1: return n1;
        case 2: return n2;
        case 3: return n3;
        default:
            throw Error(ErrorCode::kInvalidArgument, "mode index must be 1, 2 or 3, got " + std::to_string(mode));
    }
}

double ModeMeans::fraction(int mode) const {
    double n = total();
    if (n <= 0.0) {
        throw Error(ErrorCode::kDivisionByZero, "photon fractions undefined for the vacuum");
    }
    return (*this)[mode] / n;
}

void ModeMeans::validate() const {
    require_nonnegative(n1, "n1");
    require_nonnegative(n2, "n2");
    require_nonnegative(n3, "n3");
}

void ModeMeans::require_conserved() const {
    validate();
    double defect = conservation_defect(*this);
    if (defect > kConservationTolerance * (1.0 + n1)) {
        throw Error(ErrorCode::kInconsistentMeans,
                    "n1 - n2 - n3 = " + format_double(n1 - n2 - n3) + " is not a vacuum-evolved state");
    }
}

ModeMeans mode_means(const CouplingConfig &c) {
    c.validate();
    double z2 = c.z * c.z;
    // Signed detuning (g2_sq - g1_sq) z^2. In the degenerate band it is tiny
    // and sinc_sq falls back to its Taylor series, whose leading terms are the
    // N3 = g1 z^2, N2 = g1 g2 z^4 / 4 limit; both closed forms join it
    // continuously.
    double s = (c.g2_sq - c.g1_sq) * z2;
    // (cos x - 1)^2 = 4 sin^4(x/2), so N2 = g1 g2 z^4 sinc^4(x/2) / 4.
    double half = sinc_sq(s / 4.0);
    ModeMeans m;
    m.n3 = c.g1_sq * z2 * sinc_sq(s);
    m.n2 = c.g1_sq * c.g2_sq * z2 * z2 * half * half / 4.0;
    m.n1 = m.n2 + m.n3;
    if (!std::isfinite(m.n1)) {
        throw Error(ErrorCode::kInvalidArgument, "mean photon numbers overflow double range");
    }
    return m;
}

double conservation_defect(const ModeMeans &m) { return std::abs(m.n1 - m.n2 - m.n3); }

}  // namespace trilink
