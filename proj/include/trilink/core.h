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

#ifndef TRILINK_CORE_H_
#define TRILINK_CORE_H_

#include "trilink/errors.h"

namespace trilink {

/// Relative band around g1_sq == g2_sq inside which the series limit of the
/// mean-photon dynamics is used. Outside it the closed forms keep at least
/// ~8 significant digits.
inline constexpr double kDegenerateTolerance = 1e-7;

/// Relative tolerance on n1 - n2 - n3 for means that describe a state
/// evolved from vacuum.
inline constexpr double kConservationTolerance = 1e-9;

enum class Regime { kOscillatory, kExponential, kDegenerate };

/// Squared couplings of the downconversion (g1) and upconversion (g2) links
/// and the effective interaction length.
///
/// The evolution parameter is a length: the time-dependent solution maps onto
/// propagation by replacing Omega*t with Omega*z. Only the products g_sq*z^2
/// enter the means, so couplings are in units of (interaction length)^-2.
struct CouplingConfig {
    double g1_sq = 0.0;  // m^-2
    double g2_sq = 0.0;  // m^-2
    double z = 0.0;      // m

    /// Throws kInvalidArgument on negative or non-finite fields.
    void validate() const;
    Regime regime() const;
    /// sqrt(|g2_sq - g1_sq|): oscillation frequency or growth rate.
    double rate() const;
};

/// Mean photon numbers of the three generated modes.
struct ModeMeans {
    double n1 = 0.0;
    double n2 = 0.0;
    double n3 = 0.0;

    double total() const { return n1 + n2 + n3; }
    /// N_j / total; throws kDivisionByZero for the vacuum.
    double fraction(int mode) const;
    double operator[](int mode) const;

    void validate() const;
    /// Throws kInconsistentMeans when n1 != n2 + n3 beyond
    /// kConservationTolerance * (1 + n1).
    void require_conserved() const;
};

/// Closed-form means for vacuum input. Oscillatory when g2_sq > g1_sq,
/// hyperbolic when g1_sq > g2_sq, and the z^2 / z^4 series limit in between.
ModeMeans mode_means(const CouplingConfig &c);

/// |n1 - n2 - n3|; zero for any state evolved from vacuum.
double conservation_defect(const ModeMeans &m);

}  // namespace trilink

#endif  // TRILINK_CORE_H_
