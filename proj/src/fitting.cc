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

#include "trilink/fitting.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>

#include "trilink/random.h"

namespace trilink {

namespace {

constexpr double kRelativeImprovement = 1e-10;
// Scaled objective treated as an exact fit (residuals ~1e-14 of the data scale).
constexpr double kObjectiveFloor = 1e-28;

using Objective = std::function<double(const std::vector<double> &)>;

struct Counter {
    std::int64_t evaluations = 0;
};

std::vector<double> clamp_unit(std::vector<double> u) {
    for (double &x : u) x = std::clamp(x, 0.0, 1.0);
    return u;
}

// Nelder-Mead on the unit box; vertices leaving the box are projected back.
// Returns the best vertex; `trace` receives the best value after each step.
std::vector<double> nelder_mead(const Objective &f, std::vector<double> start, double step, int max_iter,
                                std::vector<double> &trace, double &best_value) {
    const std::size_t d = start.size();
    std::vector<std::vector<double>> simplex(d + 1, start);
    std::vector<double> values(d + 1);
    for (std::size_t i = 0; i < d; ++i) {
        double s = start[i] + step <= 1.0 ? step : -step;
        simplex[i + 1][i] = std::clamp(start[i] + s, 0.0, 1.0);
    }
    for (std::size_t i = 0; i <= d; ++i) values[i] = f(simplex[i]);

    std::vector<std::size_t> order(d + 1);
    for (int iter = 0; iter < max_iter; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
        std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
        trace.push_back(values[best]);

        double spread = values[worst] - values[best];
        double size = 0.0;
        for (std::size_t i = 0; i <= d; ++i)
            for (std::size_t k = 0; k < d; ++k) size = std::max(size, std::abs(simplex[i][k] - simplex[best][k]));
        if ((spread <= 1e-15 * std::abs(values[best]) + 1e-300 && size < 1e-13) || size < 1e-15) break;

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / static_cast<double>(d);
        }
        auto along = [&](double t) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            return clamp_unit(std::move(p));
        };
        std::vector<double> reflected = along(-1.0);
        double fr = f(reflected);
        if (fr < values[best]) {
            std::vector<double> expanded = along(-2.0);
            double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                values[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = std::move(reflected);
            values[worst] = fr;
            continue;
        }
        bool outside = fr < values[worst];
        std::vector<double> contracted = along(outside ? -0.5 : 0.5);
        double fc = f(contracted);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = std::move(contracted);
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < d; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
            values[i] = f(simplex[i]);
        }
    }
    std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    best_value = values[best];
    trace.push_back(best_value);
    return simplex[best];
}

// Golden-section search of one coordinate inside [u - h, u + h] ∩ [0, 1].
// Only accepts a point that improves on the current value.
void golden_polish(const Objective &f, std::vector<double> &u, std::size_t k, double h, double &value) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::max(0.0, u[k] - h), b = std::min(1.0, u[k] + h);
    std::vector<double> p = u;
    auto eval = [&](double x) {
        p[k] = x;
        return f(p);
    };
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = eval(c), fd = eval(d);
    for (int it = 0; it < 200 && (b - a) > 1e-15; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d);
        }
    }
    double x = fc < fd ? c : d;
    double fx = std::min(fc, fd);
    if (fx < value) {
        u[k] = x;
        value = fx;
    }
}

struct Problem {
    const ScanData *data;
    const FitSpec *spec;
    std::vector<FitParam> free;
    double scale = 1.0;

    std::array<double, 4> params(const std::vector<double> &u) const {
        std::array<double, 4> p{};
        for (FitParam q : kAllFitParams) p[static_cast<int>(q)] = (*spec)[q].value;
        for (std::size_t i = 0; i < free.size(); ++i) {
            const ParamSpec &ps = (*spec)[free[i]];
            p[static_cast<int>(free[i])] = ps.lower + u[i] * (ps.upper - ps.lower);
        }
        return p;
    }

    std::vector<double> to_unit(const std::array<double, 4> &p) const {
        std::vector<double> u(free.size());
        for (std::size_t i = 0; i < free.size(); ++i) {
            const ParamSpec &ps = (*spec)[free[i]];
            u[i] = std::clamp((p[static_cast<int>(free[i])] - ps.lower) / (ps.upper - ps.lower), 0.0, 1.0);
        }
        return u;
    }

    double objective(const std::array<double, 4> &p) const {
        double sum = 0.0;
        for (const ScanPoint &pt : data->points) {
            std::array<double, 2> model;
            try {
                model = scan_model(data->axis, pt.x, p[0], data->z, p[1], p[2], p[3]);
            } catch (const Error &) {
                return std::numeric_limits<double>::max();
            }
            double r1 = (model[0] - pt.m1) / scale;
            double r2 = (model[1] - pt.msum) / scale;
            sum += r1 * r1 + r2 * r2;
        }
        return std::isfinite(sum) ? sum : std::numeric_limits<double>::max();
    }
};

struct Solution {
    std::array<double, 4> params{};
    double objective = 0.0;
    bool converged = false;
    int cycles = 0;
    std::int64_t evaluations = 0;
    std::vector<double> trace;
};

Solution solve(const Problem &problem, const std::array<double, 4> &start) {
    Solution sol;
    Objective f = [&](const std::vector<double> &u) {
        ++sol.evaluations;
        return problem.objective(problem.params(u));
    };
    std::vector<double> u = problem.to_unit(start);
    double value = f(u);
    sol.trace.push_back(value);
    double step = 0.05;
    for (int cycle = 0; cycle < problem.spec->max_cycles; ++cycle) {
        sol.cycles = cycle + 1;
        double before = value;
        double nm_value = value;
        std::vector<double> candidate =
            nelder_mead(f, u, step, problem.spec->max_simplex_iterations, sol.trace, nm_value);
        if (nm_value <= value) {
            u = std::move(candidate);
            value = nm_value;
        }
        double h = std::max(1e-9, step);
        for (std::size_t k = 0; k < u.size(); ++k) golden_polish(f, u, k, h, value);
        sol.trace.push_back(value);
        if (value <= kObjectiveFloor || (before - value) <= kRelativeImprovement * before) {
            sol.converged = true;
            break;
        }
        // Restart with a smaller simplex around the improved point.
        step = std::max(1e-6, step * 0.5);
    }
    sol.params = problem.params(u);
    sol.objective = value;
    return sol;
}

}  // namespace

std::string_view scan_axis_name(ScanAxis axis) { return axis == ScanAxis::kG1Sq ? "g1_sq" : "g2_sq"; }

ScanAxis parse_scan_axis(std::string_view name) {
    if (name == "g1_sq" || name == "g1-sq" || name == "g1") return ScanAxis::kG1Sq;
    if (name == "g2_sq" || name == "g2-sq" || name == "g2") return ScanAxis::kG2Sq;
    throw Error(ErrorCode::kInvalidArgument, "unknown scan axis '" + std::string(name) + "'");
}

std::string_view fit_param_name(FitParam p) {
    switch (p) {
        case FitParam::kCoupling: return "coupling";
        case FitParam::kEta1: return "eta1";
        case FitParam::kEtaSum: return "eta_sum";
        case FitParam::kMuScale: return "mu_scale";
    }
    return "?";
}

void ScanData::validate() const {
    if (!std::isfinite(z) || z < 0.0) throw Error(ErrorCode::kInvalidArgument, "z must be finite and >= 0");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const ScanPoint &p = points[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.m1) || !std::isfinite(p.msum) || p.m1 < 0.0 || p.msum < 0.0 ||
            p.x < 0.0) {
            throw Error(ErrorCode::kInvalidArgument, "scan point " + std::to_string(i) + " is not finite and >= 0");
        }
        if (i > 0 && !(p.x > points[i - 1].x)) {
            throw Error(ErrorCode::kInvalidArgument, "scan x values must be strictly increasing");
        }
    }
}

ParamSpec &FitSpec::operator[](FitParam p) {
    switch (p) {
        case FitParam::kCoupling: return coupling;
        case FitParam::kEta1: return eta1;
        case FitParam::kEtaSum: return eta_sum;
        case FitParam::kMuScale: return mu_scale;
    }
    return coupling;
}

const ParamSpec &FitSpec::operator[](FitParam p) const { return const_cast<FitSpec &>(*this)[p]; }

void FitSpec::validate() const {
    if (mu_scale.free && eta1.free && eta_sum.free) {
        throw Error(ErrorCode::kUnidentifiable,
                    "mu_scale and both efficiencies free: only their products are identifiable");
    }
    int n_free = 0;
    for (FitParam p : kAllFitParams) {
        const ParamSpec &ps = (*this)[p];
        std::string name(fit_param_name(p));
        if (!std::isfinite(ps.value)) throw Error(ErrorCode::kInvalidArgument, name + " value must be finite");
        if (!ps.free) continue;
        ++n_free;
        if (!(ps.lower < ps.upper) || !std::isfinite(ps.lower) || !std::isfinite(ps.upper)) {
            throw Error(ErrorCode::kInvalidArgument, name + " needs finite bounds with lower < upper");
        }
        if (ps.lower < 0.0) throw Error(ErrorCode::kInvalidArgument, name + " lower bound must be >= 0");
        if ((p == FitParam::kEta1 || p == FitParam::kEtaSum) && ps.upper > 1.0) {
            throw Error(ErrorCode::kInvalidArgument, name + " upper bound must be <= 1");
        }
    }
    if (n_free == 0) throw Error(ErrorCode::kInvalidArgument, "no free parameter");
    if (max_cycles < 1 || max_simplex_iterations < 1 || bootstrap_resamples < 0) {
        throw Error(ErrorCode::kInvalidArgument, "iteration caps must be positive");
    }
}

KeyValueText FitResult::to_text() const {
    KeyValueText doc;
    for (FitParam p : kAllFitParams) {
        std::string name(fit_param_name(p));
        int i = static_cast<int>(p);
        doc.set(name, value[i]);
        doc.set(name + "_free", free[i]);
        if (interval[i]) {
            doc.set(name + "_ci_low", (*interval[i])[0]);
            doc.set(name + "_ci_high", (*interval[i])[1]);
        }
    }
    doc.set("rss", rss);
    doc.set("data_scale", data_scale);
    doc.set("converged", converged);
    doc.set("cycles", cycles);
    doc.set("evaluations", evaluations);
    return doc;
}

std::array<double, 2> scan_model(ScanAxis axis, double x, double coupling, double z, double eta1, double eta_sum,
                                 double mu_scale) {
    CouplingConfig c = axis == ScanAxis::kG1Sq ? CouplingConfig{x, coupling, z} : CouplingConfig{coupling, x, z};
    ModeMeans m = mode_means(c);
    return {eta1 * mu_scale * m.n1, eta_sum * mu_scale * (m.n2 + m.n3)};
}

ScanData synthesize_scan(ScanAxis axis, const std::vector<double> &xs, double coupling, double z, double eta1,
                         double eta_sum, double mu_scale) {
    ScanData data;
    data.axis = axis;
    data.z = z;
    for (double x : xs) {
        auto m = scan_model(axis, x, coupling, z, eta1, eta_sum, mu_scale);
        data.points.push_back({x, m[0], m[1]});
    }
    return data;
}

FitResult fit_pump_scan(const ScanData &data, const FitSpec &spec) {
    spec.validate();
    data.validate();
    if (data.points.size() < 4) {
        throw Error(ErrorCode::kDegenerateData, "need at least 4 scan points");
    }
    if (data.points.front().x == data.points.back().x) {
        throw Error(ErrorCode::kDegenerateData, "all scan points share the same x");
    }

    Problem problem{&data, &spec, {}, 0.0};
    for (FitParam p : kAllFitParams) {
        if (spec[p].free) problem.free.push_back(p);
    }
    for (const ScanPoint &pt : data.points) problem.scale = std::max({problem.scale, pt.m1, pt.msum});
    if (problem.scale <= 0.0) throw Error(ErrorCode::kDegenerateData, "all detected means are zero");

    std::array<double, 4> start{};
    for (FitParam p : kAllFitParams) start[static_cast<int>(p)] = spec[p].value;
    Solution sol = solve(problem, start);

    FitResult result;
    result.value = sol.params;
    for (FitParam p : kAllFitParams) result.free[static_cast<int>(p)] = spec[p].free;
    result.data_scale = problem.scale;
    result.rss = sol.objective * problem.scale * problem.scale;
    result.converged = sol.converged;
    result.cycles = sol.cycles;
    result.evaluations = sol.evaluations;
    result.objective_trace = std::move(sol.trace);

    if (spec.bootstrap_resamples > 0) {
        std::vector<std::array<double, 2>> fitted;
        std::vector<double> res1, res2;
        for (const ScanPoint &pt : data.points) {
            auto m = scan_model(data.axis, pt.x, sol.params[0], data.z, sol.params[1], sol.params[2], sol.params[3]);
            fitted.push_back(m);
            res1.push_back(pt.m1 - m[0]);
            res2.push_back(pt.msum - m[1]);
        }
        FitSpec inner = spec;
        inner.max_cycles = std::min(spec.max_cycles, 8);
        std::array<std::vector<double>, 4> draws;
        RandomStream rng(spec.seed, StreamPurpose::kBootstrap, 1);
        const std::uint64_t n = data.points.size();
        for (int b = 0; b < spec.bootstrap_resamples; ++b) {
            ScanData resampled = data;
            for (std::size_t i = 0; i < resampled.points.size(); ++i) {
                resampled.points[i].m1 = std::max(0.0, fitted[i][0] + res1[rng.next_u64() % n]);
                resampled.points[i].msum = std::max(0.0, fitted[i][1] + res2[rng.next_u64() % n]);
            }
            Problem p2 = problem;
            p2.data = &resampled;
            p2.spec = &inner;
            Solution s2 = solve(p2, sol.params);
            for (FitParam p : problem.free) draws[static_cast<int>(p)].push_back(s2.params[static_cast<int>(p)]);
        }
        for (FitParam p : problem.free) {
            auto &xs = draws[static_cast<int>(p)];
            std::sort(xs.begin(), xs.end());
            auto pick = [&](double q) {
                double pos = q * static_cast<double>(xs.size() - 1);
                std::size_t lo = static_cast<std::size_t>(std::floor(pos));
                std::size_t hi = std::min(xs.size() - 1, lo + 1);
                return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
            };
            result.interval[static_cast<int>(p)] = std::array<double, 2>{pick(0.025), pick(0.975)};
        }
    }
    return result;
}

void write_scan_data(const ScanData &data, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
    out << "x,M1,Msum\n";
    for (const ScanPoint &p : data.points) {
        out << format_double(p.x) << ',' << format_double(p.m1) << ',' << format_double(p.msum) << '\n';
    }
    KeyValueText meta;
    meta.set("axis", std::string(scan_axis_name(data.axis)));
    meta.set("z", data.z);
    meta.write_file(path + ".meta");
}

ScanData read_scan_data(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,M1,Msum", 0) != 0) {
        throw Error(ErrorCode::kIo, "'" + path + "' lacks the header x,M1,Msum");
    }
    ScanData data;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) {
            throw Error(ErrorCode::kIo, path + ":" + std::to_string(lineno) + ": expected 3 fields");
        }
        std::string_view v(line);
        data.points.push_back({parse_double(v.substr(0, c1), "x"), parse_double(v.substr(c1 + 1, c2 - c1 - 1), "M1"),
                               parse_double(v.substr(c2 + 1), "Msum")});
    }
    KeyValueText meta = KeyValueText::read_file(path + ".meta");
    data.axis = parse_scan_axis(meta.get("axis"));
    data.z = meta.get_double("z");
    return data;
}

}  // namespace trilink
