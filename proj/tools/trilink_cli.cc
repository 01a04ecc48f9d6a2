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

// Command-line driver: analytic dynamics and distributions, sampling runs,
// estimation, grid scans and pump-scan fitting.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trilink/core.h"
#include "trilink/detection.h"
#include "trilink/errors.h"
#include "trilink/estimators.h"
#include "trilink/fitting.h"
#include "trilink/kv_text.h"
#include "trilink/sampling.h"
#include "trilink/scan.h"
#include "trilink/statistics.h"

namespace {

using namespace trilink;

std::vector<double> parse_list(const std::string &text, const std::string &what) {
    std::vector<double> out;
    std::string_view rest = text;
    while (!rest.empty()) {
        auto comma = rest.find(',');
        out.push_back(parse_double(rest.substr(0, comma), what));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (out.empty()) throw Error(ErrorCode::kConfig, what + " is empty");
    return out;
}

std::array<double, 3> per_arm(const std::string &text, const std::string &what) {
    auto v = parse_list(text, what);
    if (v.size() == 1) return {v[0], v[0], v[0]};
    if (v.size() == 3) return {v[0], v[1], v[2]};
    throw Error(ErrorCode::kConfig, what + " takes one value or three comma-separated values");
}

// "a,b,c" or "start:stop:count" (inclusive, linear).
std::vector<double> parse_grid(const std::string &text, const std::string &what) {
    if (text.find(':') == std::string::npos) return parse_list(text, what);
    std::vector<std::string> parts;
    std::string_view rest = text;
    while (true) {
        auto colon = rest.find(':');
        parts.emplace_back(rest.substr(0, colon));
        if (colon == std::string_view::npos) break;
        rest.remove_prefix(colon + 1);
    }
    if (parts.size() != 3) throw Error(ErrorCode::kConfig, what + " range must be start:stop:count");
    double a = parse_double(parts[0], what), b = parse_double(parts[1], what);
    std::int64_t n = parse_int(parts[2], what);
    if (n < 1) throw Error(ErrorCode::kConfig, what + " count must be >= 1");
    std::vector<double> grid;
    for (std::int64_t i = 0; i < n; ++i) {
        grid.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return grid;
}

struct ModelOptions {
    std::optional<double> g1_sq, g2_sq;
    double z = 1.0;
    std::string means;

    void add(CLI::App *app) {
        app->add_option("--g1-sq", g1_sq, "squared downconversion coupling");
        app->add_option("--g2-sq", g2_sq, "squared upconversion coupling");
        app->add_option("--z", z, "effective interaction length")->capture_default_str();
        app->add_option("--means", means, "explicit mean photon numbers n1,n2,n3 (overrides couplings)");
    }
    std::optional<CouplingConfig> coupling() const {
        if (!means.empty()) return std::nullopt;
        if (!g1_sq && !g2_sq) throw Error(ErrorCode::kConfig, "give --g1-sq/--g2-sq or --means");
        return CouplingConfig{g1_sq.value_or(0.0), g2_sq.value_or(0.0), z};
    }
    ModeMeans mode() const {
        if (!means.empty()) {
            auto v = parse_list(means, "--means");
            if (v.size() != 3) throw Error(ErrorCode::kConfig, "--means takes n1,n2,n3");
            ModeMeans m{v[0], v[1], v[2]};
            m.require_conserved();
            return m;
        }
        return mode_means(*coupling());
    }
};

struct DetectionOptions {
    std::optional<double> eta, eta1, eta2, eta3;

    void add(CLI::App *app) {
        app->add_option("--eta", eta, "uniform quantum efficiency");
        app->add_option("--eta1", eta1, "arm-1 efficiency");
        app->add_option("--eta2", eta2, "arm-2 efficiency");
        app->add_option("--eta3", eta3, "arm-3 efficiency");
    }
    DetectionConfig get() const {
        DetectionConfig d;
        if (eta && !eta1 && !eta2 && !eta3) {
            d.eta_uniform = *eta;
        } else {
            double base = eta.value_or(1.0);
            d.eta_1 = eta1.value_or(base);
            d.eta_2 = eta2.value_or(base);
            d.eta_3 = eta3.value_or(base);
        }
        d.validate();
        return d;
    }
};

struct NoiseOptions {
    std::int64_t mu = 1;
    std::string sigma_el = "0", spurious = "0", collect = "1";

    void add(CLI::App *app, bool optics = true) {
        app->add_option("--mu", mu, "temporal modes per shot")->capture_default_str();
        app->add_option("--sigma-el", sigma_el, "electronic noise std, one or three values")->capture_default_str();
        if (optics) {
            app->add_option("--spurious", spurious, "spurious thermal photons per mode, one or three values")
                ->capture_default_str();
            app->add_option("--collect", collect, "collected fraction of correlated light, one or three values")
                ->capture_default_str();
        }
    }
    NoiseModel get() const {
        NoiseModel nm;
        nm.mu = mu;
        nm.sigma_el = per_arm(sigma_el, "--sigma-el");
        nm.spurious = per_arm(spurious, "--spurious");
        nm.collect = per_arm(collect, "--collect");
        nm.validate();
        return nm;
    }
};

std::ostream &output(const std::string &path, std::unique_ptr<std::ofstream> &holder) {
    if (path.empty() || path == "-") return std::cout;
    holder = std::make_unique<std::ofstream>(path);
    if (!*holder) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
    return *holder;
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::kOscillatory: return "oscillatory";
        case Regime::kExponential: return "exponential";
        case Regime::kDegenerate: return "degenerate";
    }
    return "?";
}

// Splices `key = value` lines of --config in front of the command-line
// options of the chosen subcommand, so explicit flags (parsed later, last
// value wins) override file values.
std::vector<std::string> expand_config(int argc, char **argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return args;
    KeyValueText doc = KeyValueText::read_file(path);
    std::vector<std::string> injected;
    for (const auto &[key, value] : doc.entries()) {
        std::string flag = "--" + key;
        for (char &c : flag) c = c == '_' ? '-' : c;
        injected.push_back(flag + "=" + value);
    }
    std::size_t at = 0;
    while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
    if (at < args.size()) ++at;  // after the subcommand name
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
    return args;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"trilink: tripartite photon-number correlation simulator"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;
    app.add_option("--config", config_path, "key = value file; flags override its values");

    // dynamics
    auto *dynamics = app.add_subcommand("dynamics", "mean photon numbers along z or a coupling");
    ModelOptions dyn_model;
    dyn_model.add(dynamics);
    std::string dyn_axis = "z";
    double dyn_from = 0.0;
    std::optional<double> dyn_to;
    int dyn_points = 101;
    std::string dyn_out;
    dynamics->add_option("--axis", dyn_axis, "z, g1-sq or g2-sq")->capture_default_str();
    dynamics->add_option("--from", dyn_from, "axis start")->capture_default_str();
    dynamics->add_option("--to", dyn_to, "axis end (default: the model value)");
    dynamics->add_option("--points", dyn_points, "number of rows")->capture_default_str();
    dynamics->add_option("--out", dyn_out, "output CSV (default stdout)");

    // pmf
    auto *pmf = app.add_subcommand("pmf", "joint or marginal photon-number probabilities");
    ModelOptions pmf_model;
    pmf_model.add(pmf);
    std::string pmf_counts;
    std::optional<int> pmf_mode;
    std::int64_t pmf_count = 0;
    std::optional<std::int64_t> pmf_table;
    std::string pmf_out;
    pmf->add_option("--counts", pmf_counts, "joint probability at n,p,r");
    pmf->add_option("--mode", pmf_mode, "marginal of mode 1, 2 or 3");
    pmf->add_option("--count", pmf_count, "photon number for --mode")->capture_default_str();
    pmf->add_option("--table", pmf_table, "CSV of the joint distribution for n <= value");
    pmf->add_option("--out", pmf_out, "output (default stdout)");

    // sample
    auto *sample = app.add_subcommand("sample", "Monte Carlo run of detected triplets");
    ModelOptions smp_model;
    DetectionOptions smp_det;
    NoiseOptions smp_noise;
    std::int64_t smp_shots = 50000;
    std::uint64_t smp_seed = 1;
    unsigned smp_threads = 0;
    std::string smp_out;
    smp_model.add(sample);
    smp_det.add(sample);
    smp_noise.add(sample);
    sample->add_option("--shots", smp_shots, "number of shots")->capture_default_str();
    sample->add_option("--seed", smp_seed, "random seed")->capture_default_str();
    sample->add_option("--threads", smp_threads, "worker threads (0 = all cores)")->capture_default_str();
    sample->add_option("--out", smp_out, "output CSV; metadata goes to <out>.meta")->required();

    // dark
    auto *dark = app.add_subcommand("dark", "electronic-noise-only run");
    DetectionOptions drk_det;
    NoiseOptions drk_noise;
    std::int64_t drk_shots = 50000;
    std::uint64_t drk_seed = 1;
    unsigned drk_threads = 0;
    std::string drk_out;
    drk_det.add(dark);
    drk_noise.add(dark, false);
    dark->add_option("--shots", drk_shots, "number of shots")->capture_default_str();
    dark->add_option("--seed", drk_seed, "random seed")->capture_default_str();
    dark->add_option("--threads", drk_threads, "worker threads (0 = all cores)")->capture_default_str();
    dark->add_option("--out", drk_out, "output CSV; metadata goes to <out>.meta")->required();

    // estimate
    auto *estimate = app.add_subcommand("estimate", "sample statistics of a run");
    std::string est_in, est_dark, est_out, est_format = "kv";
    EstimateOptions est_opts;
    estimate->add_option("--in", est_in, "shot CSV")->required();
    estimate->add_option("--dark", est_dark, "dark-run CSV for electronic-noise subtraction");
    estimate->add_option("--format", est_format, "kv or csv")->capture_default_str();
    estimate->add_option("--blocks", est_opts.bootstrap_blocks, "bootstrap blocks")->capture_default_str();
    estimate->add_option("--resamples", est_opts.bootstrap_resamples, "bootstrap resamples")->capture_default_str();
    estimate->add_option("--out", est_out, "output (default stdout)");

    // scan
    auto *scan = app.add_subcommand("scan", "sampled and analytic statistics over a coupling grid");
    std::string scan_g1, scan_g2, scan_out, scan_data_out;
    double scan_z = 1.0;
    DetectionOptions scan_det;
    NoiseOptions scan_noise;
    std::int64_t scan_shots = 50000;
    std::uint64_t scan_seed = 1;
    unsigned scan_threads = 0;
    std::optional<double> scan_ref;
    double scan_strength = 1.0;
    scan->add_option("--g1-sq", scan_g1, "g1_sq grid: a,b,c or start:stop:count")->required();
    scan->add_option("--g2-sq", scan_g2, "g2_sq grid: a,b,c or start:stop:count")->required();
    scan->add_option("--z", scan_z, "effective interaction length")->capture_default_str();
    scan_det.add(scan);
    scan_noise.add(scan);
    scan->add_option("--shots", scan_shots, "shots per grid point")->capture_default_str();
    scan->add_option("--seed", scan_seed, "random seed")->capture_default_str();
    scan->add_option("--threads", scan_threads, "concurrent grid points (0 = all cores)")->capture_default_str();
    scan->add_option("--mismatch-ref", scan_ref, "g1_sq at which the arm-1 pin-hole matches the coherence area");
    scan->add_option("--mismatch-strength", scan_strength, "pin-hole mismatch per unit relative detuning")
        ->capture_default_str();
    scan->add_option("--out", scan_out, "output CSV (default stdout)");
    scan->add_option("--scan-data", scan_data_out, "also write sampled x,M1,Msum for `fit` (one axis must be fixed)");

    // fit
    auto *fit = app.add_subcommand("fit", "fit a pump-intensity scan");
    std::string fit_in, fit_out, fit_free = "coupling,eta1,eta_sum";
    double fit_coupling = 1.0, fit_eta1 = 0.5, fit_eta_sum = 0.5, fit_mu = 1.0;
    std::string fit_coupling_bounds = "0,1e7", fit_mu_bounds = "0,1e12";
    int fit_resamples = 200;
    std::uint64_t fit_seed = 1;
    fit->add_option("--in", fit_in, "scan CSV x,M1,Msum with .meta sidecar")->required();
    fit->add_option("--free", fit_free, "free parameters among coupling,eta1,eta_sum,mu_scale")
        ->capture_default_str();
    fit->add_option("--coupling", fit_coupling, "fixed squared coupling: start value")->capture_default_str();
    fit->add_option("--coupling-bounds", fit_coupling_bounds, "lower,upper")->capture_default_str();
    fit->add_option("--eta1", fit_eta1, "arm-1 efficiency: start value")->capture_default_str();
    fit->add_option("--eta-sum", fit_eta_sum, "arm-2+3 efficiency: start value")->capture_default_str();
    fit->add_option("--mu-scale", fit_mu, "mode-count scale: start value")->capture_default_str();
    fit->add_option("--mu-scale-bounds", fit_mu_bounds, "lower,upper")->capture_default_str();
    fit->add_option("--resamples", fit_resamples, "residual-bootstrap refits")->capture_default_str();
    fit->add_option("--seed", fit_seed, "bootstrap seed")->capture_default_str();
    fit->add_option("--out", fit_out, "output (default stdout)");

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: code=usage message=\"" << e.what() << "\"\n";
        return 2;
    } catch (const Error &e) {
        std::cerr << "error: code=" << error_code_name(e.code()) << " message=\"" << e.what() << "\"\n";
        return 1;
    }

    try {
        std::unique_ptr<std::ofstream> file;
        if (*dynamics) {
            auto base = dyn_model.coupling();
            if (!base) throw Error(ErrorCode::kConfig, "dynamics needs couplings, not --means");
            if (dyn_points < 2) throw Error(ErrorCode::kConfig, "--points must be >= 2");
            // Rows are buffered so a bad sweep point leaves no partial table.
            std::ostringstream out;
            out << "z,g1_sq,g2_sq,regime,N1,N2,N3,defect\n";
            double end = dyn_axis == "z" ? base->z : (dyn_axis == "g1-sq" ? base->g1_sq : base->g2_sq);
            if (dyn_axis != "z" && dyn_axis != "g1-sq" && dyn_axis != "g2-sq") {
                throw Error(ErrorCode::kConfig, "--axis must be z, g1-sq or g2-sq");
            }
            if (dyn_to) end = *dyn_to;
            for (int i = 0; i < dyn_points; ++i) {
                double x = dyn_from + (end - dyn_from) * i / (dyn_points - 1);
                CouplingConfig c = *base;
                (dyn_axis == "z" ? c.z : (dyn_axis == "g1-sq" ? c.g1_sq : c.g2_sq)) = x;
                ModeMeans m = mode_means(c);
                out << format_double(c.z) << ',' << format_double(c.g1_sq) << ',' << format_double(c.g2_sq) << ','
                    << regime_name(c.regime()) << ',' << format_double(m.n1) << ',' << format_double(m.n2) << ','
                    << format_double(m.n3) << ',' << format_double(conservation_defect(m)) << '\n';
            }
            output(dyn_out, file) << out.str();
        } else if (*pmf) {
            ModeMeans m = pmf_model.mode();
            std::ostream &out = output(pmf_out, file);
            if (pmf_table) {
                out << "n,p,r,P\n";
                for (std::int64_t n = 0; n <= *pmf_table; ++n) {
                    for (std::int64_t p = 0; p <= n; ++p) {
                        out << n << ',' << p << ',' << n - p << ',' << format_double(joint_pmf(m, n, p, n - p))
                            << '\n';
                    }
                }
            } else if (pmf_mode) {
                KeyValueText doc;
                doc.set("mode", *pmf_mode);
                doc.set("count", pmf_count);
                doc.set("marginal_pmf", marginal_pmf(m, *pmf_mode, pmf_count));
                doc.write(out);
            } else if (!pmf_counts.empty()) {
                auto v = parse_list(pmf_counts, "--counts");
                if (v.size() != 3) throw Error(ErrorCode::kConfig, "--counts takes n,p,r");
                KeyValueText doc;
                doc.set("n1", m.n1);
                doc.set("n2", m.n2);
                doc.set("n3", m.n3);
                doc.set("joint_pmf", joint_pmf(m, static_cast<std::int64_t>(v[0]), static_cast<std::int64_t>(v[1]),
                                               static_cast<std::int64_t>(v[2])));
                doc.write(out);
            } else {
                throw Error(ErrorCode::kConfig, "pmf needs --counts, --mode or --table");
            }
        } else if (*sample) {
            auto c = smp_model.coupling();
            DetectionConfig d = smp_det.get();
            NoiseModel nm = smp_noise.get();
            ShotSet set = c ? sample_run(*c, d, nm, smp_shots, smp_seed, smp_threads)
                            : sample_run(smp_model.mode(), d, nm, smp_shots, smp_seed, smp_threads);
            write_shot_set(set, smp_out);
            set.meta().to_text().write(std::cout);
        } else if (*dark) {
            ShotSet set = sample_dark_run(drk_det.get(), drk_noise.get(), drk_shots, drk_seed, drk_threads);
            write_shot_set(set, drk_out);
            set.meta().to_text().write(std::cout);
        } else if (*estimate) {
            ShotSet signal = read_shot_set(est_in);
            std::optional<ShotSet> dark_set;
            if (!est_dark.empty()) dark_set = read_shot_set(est_dark);
            EstimateReport report = estimate_statistics(signal, dark_set ? &*dark_set : nullptr, est_opts);
            std::ostream &out = output(est_out, file);
            if (est_format == "csv") {
                out << EstimateReport::csv_header() << '\n' << report.csv_row() << '\n';
            } else if (est_format == "kv") {
                report.to_text().write(out);
            } else {
                throw Error(ErrorCode::kConfig, "--format must be kv or csv");
            }
        } else if (*scan) {
            ScanConfig cfg;
            cfg.g1_grid = parse_grid(scan_g1, "--g1-sq");
            cfg.g2_grid = parse_grid(scan_g2, "--g2-sq");
            cfg.z = scan_z;
            cfg.detection = scan_det.get();
            cfg.noise = scan_noise.get();
            cfg.shots = scan_shots;
            cfg.seed = scan_seed;
            cfg.threads = scan_threads;
            if (scan_ref) cfg.mismatch = CoherenceMismatch{*scan_ref, scan_strength};
            auto rows = run_scan(cfg);
            std::ostream &out = output(scan_out, file);
            write_scan_table(rows, out);
            if (!scan_data_out.empty()) {
                bool along_g1 = cfg.g2_grid.size() == 1;
                if (!along_g1 && cfg.g1_grid.size() != 1) {
                    throw Error(ErrorCode::kConfig, "--scan-data needs a single value on one axis");
                }
                ScanData data;
                data.axis = along_g1 ? ScanAxis::kG1Sq : ScanAxis::kG2Sq;
                data.z = cfg.z;
                for (const ScanRow &row : rows) {
                    if (!row.estimate) throw Error(ErrorCode::kInvalidArgument, "grid point failed: " + row.error);
                    data.points.push_back({along_g1 ? row.g1_sq : row.g2_sq, row.estimate->mean[0],
                                           row.estimate->mean[1] + row.estimate->mean[2]});
                }
                write_scan_data(data, scan_data_out);
            }
        } else if (*fit) {
            ScanData data = read_scan_data(fit_in);
            FitSpec spec;
            auto bounds = [](const std::string &text, const std::string &what) {
                auto v = parse_list(text, what);
                if (v.size() != 2) throw Error(ErrorCode::kConfig, what + " takes lower,upper");
                return std::array<double, 2>{v[0], v[1]};
            };
            auto cb = bounds(fit_coupling_bounds, "--coupling-bounds");
            auto mb = bounds(fit_mu_bounds, "--mu-scale-bounds");
            spec.coupling = {false, fit_coupling, cb[0], cb[1]};
            spec.eta1 = {false, fit_eta1, 0.0, 1.0};
            spec.eta_sum = {false, fit_eta_sum, 0.0, 1.0};
            spec.mu_scale = {false, fit_mu, mb[0], mb[1]};
            std::string_view rest = fit_free;
            while (!rest.empty()) {
                auto comma = rest.find(',');
                std::string_view name = rest.substr(0, comma);
                bool known = false;
                for (FitParam p : kAllFitParams) {
                    if (fit_param_name(p) == name) {
                        spec[p].free = true;
                        known = true;
                    }
                }
                if (!known) throw Error(ErrorCode::kConfig, "unknown fit parameter '" + std::string(name) + "'");
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
            spec.bootstrap_resamples = fit_resamples;
            spec.seed = fit_seed;
            FitResult result = fit_pump_scan(data, spec);
            std::ostream &out = output(fit_out, file);
            result.to_text().write(out);
            if (!result.converged) {
                throw Error(ErrorCode::kNonConvergence,
                            "fit did not converge within " + std::to_string(spec.max_cycles) + " cycles");
            }
        }
    } catch (const Error &e) {
        std::cerr << "error: code=" << error_code_name(e.code()) << " message=\"" << e.what() << "\"\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: code=internal message=\"" << e.what() << "\"\n";
        return 1;
    }
    return 0;
}
