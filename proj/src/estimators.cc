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

#include "trilink/estimators.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "trilink/random.h"

namespace trilink {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sufficient statistics of a block of shots, accumulated around a fixed
// shift so that variances do not suffer cancellation at large means.
struct Sums {
    double n = 0.0;
    std::array<double, 3> s{};
    std::array<std::array<double, 3>, 3> ss{};

    void add(const std::array<double, 3> &x) {
        n += 1.0;
        for (int j = 0; j < 3; ++j) {
            s[j] += x[j];
            for (int k = j; k < 3; ++k) ss[j][k] += x[j] * x[k];
        }
    }
    void merge(const Sums &o) {
        n += o.n;
        for (int j = 0; j < 3; ++j) {
            s[j] += o.s[j];
            for (int k = j; k < 3; ++k) ss[j][k] += o.ss[j][k];
        }
    }
};

struct Moments {
    std::array<double, 3> mean{};
    std::array<std::array<double, 3>, 3> cov{};
};

Moments finish(const Sums &t, const std::array<double, 3> &shift) {
    Moments m;
    for (int j = 0; j < 3; ++j) m.mean[j] = shift[j] + t.s[j] / t.n;
    for (int j = 0; j < 3; ++j) {
        for (int k = j; k < 3; ++k) {
            double c = t.n > 1.0 ? (t.ss[j][k] - t.s[j] * t.s[k] / t.n) / (t.n - 1.0) : 0.0;
            m.cov[j][k] = c;
            m.cov[k][j] = c;
        }
    }
    return m;
}

// Weights of the two photocurrents compared by a grouping.
std::pair<std::array<double, 3>, std::array<double, 3>> grouping_weights(Grouping g) {
    switch (g) {
        case Grouping::k12: return {{1, 0, 0}, {0, 1, 0}};
        case Grouping::k13: return {{1, 0, 0}, {0, 0, 1}};
        case Grouping::k23: return {{0, 1, 0}, {0, 0, 1}};
        case Grouping::k1_23: return {{1, 0, 0}, {0, 1, 1}};
    }
    return {};
}

double quad(const std::array<std::array<double, 3>, 3> &c, const std::array<double, 3> &a,
            const std::array<double, 3> &b) {
    double v = 0.0;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) v += a[j] * c[j][k] * b[k];
    return v;
}

struct Values {
    std::array<double, 3> mean{};
    std::map<Grouping, std::optional<double>> eps;
    std::map<Grouping, std::optional<double>> r;
    std::map<std::string, std::string> errors;
};

std::string key_of(const char *prefix, Grouping g) { return std::string(prefix) + std::string(grouping_label(g)); }

// Computes every estimate from signal (and optional dark) moments. When
// `strict` is set, a non-positive dark-corrected variance throws.
Values evaluate(const Moments &sig, const Moments *dark, bool strict) {
    Values v;
    Moments c = sig;
    if (dark) {
        for (int j = 0; j < 3; ++j) {
            c.mean[j] -= dark->mean[j];
            for (int k = 0; k < 3; ++k) c.cov[j][k] -= dark->cov[j][k];
        }
    }
    v.mean = c.mean;
    bool over = false;
    std::string over_what;
    if (dark) {
        for (int j = 0; j < 3; ++j) {
            if (!(c.cov[j][j] > 0.0)) {
                over = true;
                over_what = "variance of arm " + std::to_string(j + 1);
            }
        }
    }
    for (Grouping g : kAllGroupings) {
        auto [a, b] = grouping_weights(g);
        std::array<double, 3> diff{};
        for (int j = 0; j < 3; ++j) diff[j] = a[j] - b[j];
        double var_a = quad(c.cov, a, a);
        double var_b = quad(c.cov, b, b);
        double cov_ab = quad(c.cov, a, b);
        double var_d = quad(c.cov, diff, diff);
        if (dark && !(var_d > 0.0)) {
            over = true;
            over_what = "difference variance " + std::string(grouping_label(g));
        }
        if (var_a > 0.0 && var_b > 0.0) {
            v.eps[g] = std::clamp(cov_ab / std::sqrt(var_a * var_b), -1.0, 1.0);
        } else {
            v.eps[g] = std::nullopt;
            v.errors[key_of("eps_", g)] = "undefined_correlation: zero variance";
        }
        double denom = 0.0;
        for (int j = 0; j < 3; ++j) denom += (a[j] + b[j]) * c.mean[j];
        if (denom > 0.0) {
            v.r[g] = var_d / denom;
        } else {
            v.r[g] = std::nullopt;
            v.errors[key_of("R_", g)] = "division_by_zero: zero mean photocurrent";
        }
    }
    if (over && strict) {
        throw Error(ErrorCode::kOverSubtraction, "dark-corrected " + over_what + " is not positive");
    }
    if (over) {
        for (auto &[g, e] : v.eps) e.reset();
        for (auto &[g, r] : v.r) r.reset();
    }
    return v;
}

struct Blocked {
    std::vector<Sums> blocks;
    std::array<double, 3> shift{};
    Sums total;
};

Blocked block_sums(const ShotSet &set, int max_blocks) {
    Blocked b;
    auto recs = set.records();
    std::int64_t n = static_cast<std::int64_t>(recs.size());
    b.shift = {recs[0].m1, recs[0].m2, recs[0].m3};
    std::int64_t nb = std::max<std::int64_t>(1, std::min<std::int64_t>(max_blocks, n));
    b.blocks.resize(static_cast<std::size_t>(nb));
    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t block = i * nb / n;
        const ShotRecord &r = recs[static_cast<std::size_t>(i)];
        b.blocks[static_cast<std::size_t>(block)].add({r.m1 - b.shift[0], r.m2 - b.shift[1], r.m3 - b.shift[2]});
    }
    for (const Sums &s : b.blocks) b.total.merge(s);
    return b;
}

Sums resample(const Blocked &b, RandomStream &rng) {
    Sums t;
    std::uint64_t nb = b.blocks.size();
    for (std::uint64_t k = 0; k < nb; ++k) {
        // Modulo bias is below 2^-40 for any realistic block count.
        t.merge(b.blocks[static_cast<std::size_t>(rng.next_u64() % nb)]);
    }
    return t;
}

double stddev(const std::vector<double> &xs) {
    if (xs.size() < 2) return kNaN;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

double EstimateReport::eps(Grouping g) const {
    auto it = eps_hat.find(g);
    if (it == eps_hat.end() || !it->second) {
        auto e = errors.find(key_of("eps_", g));
        throw Error(ErrorCode::kUndefinedCorrelation,
                    e != errors.end() ? e->second : "correlation " + std::string(grouping_label(g)) + " undefined");
    }
    return *it->second;
}

double EstimateReport::r(Grouping g) const {
    auto it = r_hat.find(g);
    if (it == r_hat.end() || !it->second) {
        auto e = errors.find(key_of("R_", g));
        throw Error(ErrorCode::kDivisionByZero,
                    e != errors.end() ? e->second : "noise reduction " + std::string(grouping_label(g)) + " undefined");
    }
    return *it->second;
}

double EstimateReport::stderr_of(const std::string &key) const {
    auto it = stderr.find(key);
    return it == stderr.end() ? kNaN : it->second;
}

KeyValueText EstimateReport::to_text() const {
    KeyValueText doc;
    doc.set("shots_used", shots_used);
    doc.set("dark_corrected", dark_corrected);
    doc.set("bootstrap_blocks", bootstrap_blocks);
    for (int j = 0; j < 3; ++j) {
        std::string key = "M" + std::to_string(j + 1);
        doc.set(key, mean[j]);
        doc.set("stderr_" + key, stderr_of(key));
    }
    for (Grouping g : kAllGroupings) {
        for (const char *prefix : {"eps_", "R_"}) {
            std::string key = key_of(prefix, g);
            const auto &table = prefix[0] == 'e' ? eps_hat : r_hat;
            auto it = table.find(g);
            if (it != table.end() && it->second) {
                doc.set(key, *it->second);
            } else {
                auto e = errors.find(key);
                doc.set(key, "undefined");
                doc.set("error_" + key, e != errors.end() ? e->second : std::string("undefined"));
            }
            doc.set("stderr_" + key, stderr_of(key));
        }
    }
    return doc;
}

std::string EstimateReport::csv_header() {
    std::string h = "shots,dark_corrected,M1,M2,M3";
    for (Grouping g : kAllGroupings) h += "," + key_of("eps_", g);
    for (Grouping g : kAllGroupings) h += "," + key_of("R_", g);
    for (Grouping g : kAllGroupings) h += "," + key_of("stderr_R_", g);
    return h;
}

std::string EstimateReport::csv_row() const {
    std::ostringstream row;
    row << shots_used << ',' << (dark_corrected ? 1 : 0);
    for (double m : mean) row << ',' << format_double(m);
    auto put = [&](const std::map<Grouping, std::optional<double>> &table, Grouping g) {
        auto it = table.find(g);
        row << ',' << (it != table.end() && it->second ? format_double(*it->second) : std::string("nan"));
    };
    for (Grouping g : kAllGroupings) put(eps_hat, g);
    for (Grouping g : kAllGroupings) put(r_hat, g);
    for (Grouping g : kAllGroupings) row << ',' << format_double(stderr_of(key_of("R_", g)));
    return row.str();
}

EstimateReport estimate_statistics(const ShotSet &signal, const ShotSet *dark, const EstimateOptions &options) {
    if (signal.empty()) throw Error(ErrorCode::kEmptyInput, "signal run has no shots");
    if (dark && dark->empty()) throw Error(ErrorCode::kEmptyInput, "dark run has no shots");
    if (options.bootstrap_blocks < 1 || options.bootstrap_resamples < 0) {
        throw Error(ErrorCode::kInvalidArgument, "bootstrap blocks must be >= 1 and resamples >= 0");
    }

    Blocked sig = block_sums(signal, options.bootstrap_blocks);
    std::optional<Blocked> drk;
    if (dark) drk = block_sums(*dark, options.bootstrap_blocks);

    Moments sig_m = finish(sig.total, sig.shift);
    std::optional<Moments> dark_m;
    if (drk) dark_m = finish(drk->total, drk->shift);
    Values v = evaluate(sig_m, dark_m ? &*dark_m : nullptr, true);

    EstimateReport report;
    report.mean = v.mean;
    report.eps_hat = v.eps;
    report.r_hat = v.r;
    report.errors = v.errors;
    report.dark_corrected = dark != nullptr;
    report.shots_used = static_cast<std::int64_t>(signal.size());
    report.bootstrap_blocks = static_cast<int>(sig.blocks.size());

    if (options.bootstrap_resamples > 0 && sig.blocks.size() > 1) {
        std::map<std::string, std::vector<double>> samples;
        RandomStream rng(signal.meta().seed, StreamPurpose::kBootstrap, 0);
        for (int b = 0; b < options.bootstrap_resamples; ++b) {
            Moments sm = finish(resample(sig, rng), sig.shift);
            std::optional<Moments> dm;
            if (drk) dm = finish(resample(*drk, rng), drk->shift);
            Values rv = evaluate(sm, dm ? &*dm : nullptr, false);
            for (int j = 0; j < 3; ++j) samples["M" + std::to_string(j + 1)].push_back(rv.mean[j]);
            for (Grouping g : kAllGroupings) {
                if (rv.eps[g]) samples[key_of("eps_", g)].push_back(*rv.eps[g]);
                if (rv.r[g]) samples[key_of("R_", g)].push_back(*rv.r[g]);
            }
        }
        for (const auto &[key, xs] : samples) report.stderr[key] = stddev(xs);
    }
    return report;
}

}  // namespace trilink
