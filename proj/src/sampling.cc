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

#include "trilink/sampling.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace trilink {

namespace {

void require_range(double v, double lo, double hi, bool lo_open, const std::string &name) {
    bool ok = std::isfinite(v) && (lo_open ? v > lo : v >= lo) && v <= hi;
    if (!ok) throw Error(ErrorCode::kInvalidArgument, name + " out of range: " + format_double(v));
}

const char *kArmSuffix[3] = {"_1", "_2", "_3"};

}  // namespace

void NoiseModel::validate() const {
    if (mu < 1) throw Error(ErrorCode::kInvalidArgument, "mu must be an integer >= 1");
    for (int j = 0; j < 3; ++j) {
        std::string arm = kArmSuffix[j];
        require_range(sigma_el[j], 0.0, INFINITY, false, "sigma_el" + arm);
        require_range(spurious[j], 0.0, INFINITY, false, "spurious" + arm);
        require_range(collect[j], 0.0, 1.0, true, "collect" + arm);
    }
}

bool NoiseModel::has_electronic_noise() const {
    return sigma_el[0] > 0.0 || sigma_el[1] > 0.0 || sigma_el[2] > 0.0;
}

KeyValueText ShotMeta::to_text() const {
    KeyValueText doc;
    doc.set("kind", dark ? "dark" : "signal");
    doc.set("seed", seed);
    doc.set("shots", shots);
    if (coupling) {
        doc.set("g1_sq", coupling->g1_sq);
        doc.set("g2_sq", coupling->g2_sq);
        doc.set("z", coupling->z);
    }
    doc.set("n1", means.n1);
    doc.set("n2", means.n2);
    doc.set("n3", means.n3);
    if (detection.eta_uniform) doc.set("eta", *detection.eta_uniform);
    for (int j = 0; j < 3; ++j) doc.set(std::string("eta") + kArmSuffix[j], detection.eta(j + 1));
    doc.set("mu", noise.mu);
    for (int j = 0; j < 3; ++j) doc.set(std::string("sigma_el") + kArmSuffix[j], noise.sigma_el[j]);
    for (int j = 0; j < 3; ++j) doc.set(std::string("spurious") + kArmSuffix[j], noise.spurious[j]);
    for (int j = 0; j < 3; ++j) doc.set(std::string("collect") + kArmSuffix[j], noise.collect[j]);
    return doc;
}

ShotMeta ShotMeta::from_text(const KeyValueText &doc) {
    ShotMeta meta;
    meta.dark = doc.get("kind") == "dark";
    meta.seed = doc.get_uint("seed");
    meta.shots = doc.get_int("shots");
    if (doc.has("g1_sq")) {
        meta.coupling = CouplingConfig{doc.get_double("g1_sq"), doc.get_double("g2_sq"), doc.get_double("z")};
    }
    meta.means = {doc.get_double("n1"), doc.get_double("n2"), doc.get_double("n3")};
    if (doc.has("eta")) meta.detection.eta_uniform = doc.get_double("eta");
    meta.detection.eta_1 = doc.get_double("eta_1");
    meta.detection.eta_2 = doc.get_double("eta_2");
    meta.detection.eta_3 = doc.get_double("eta_3");
    meta.noise.mu = doc.get_int("mu");
    for (int j = 0; j < 3; ++j) {
        meta.noise.sigma_el[j] = doc.get_double(std::string("sigma_el") + kArmSuffix[j]);
        meta.noise.spurious[j] = doc.get_double(std::string("spurious") + kArmSuffix[j]);
        meta.noise.collect[j] = doc.get_double(std::string("collect") + kArmSuffix[j]);
    }
    return meta;
}

ShotSet::ShotSet(ShotMeta meta, std::vector<ShotRecord> records) : meta_(std::move(meta)), records_(std::move(records)) {
    if (meta_.shots != static_cast<std::int64_t>(records_.size())) {
        throw Error(ErrorCode::kInvalidArgument, "record count " + std::to_string(records_.size()) +
                                                     " does not match declared shots " + std::to_string(meta_.shots));
    }
}

ShotRecord sample_shot(const ModeMeans &m, const DetectionConfig &d, const NoiseModel &nm, RandomStream &rng) {
    // Summing mu independent modes before splitting and thinning is exact:
    // binomial splits and losses of a sum equal the sum of per-mode ones.
    std::int64_t n1 = sample_multithermal(rng, m.n1, nm.mu);
    double split = m.n1 > 0.0 ? m.n2 / m.n1 : 0.0;
    std::int64_t n2 = sample_binomial(rng, n1, split);
    std::int64_t n3 = n1 - n2;
    std::array<std::int64_t, 3> photons = {n1, n2, n3};
    std::array<double, 3> out{};
    for (int j = 0; j < 3; ++j) {
        double eta = d.eta(j + 1);
        // Collection then detection losses compose into one Bernoulli loss.
        std::int64_t counts = sample_binomial(rng, photons[j], nm.collect[j] * eta);
        if (nm.spurious[j] > 0.0) {
            // A thinned thermal mode is thermal with the thinned mean.
            counts += sample_multithermal(rng, eta * nm.spurious[j], nm.mu);
        }
        out[j] = static_cast<double>(counts);
        if (nm.sigma_el[j] > 0.0) out[j] += nm.sigma_el[j] * sample_normal(rng);
    }
    return {out[0], out[1], out[2]};
}

namespace {

ShotSet run_shots(ShotMeta meta, StreamPurpose purpose, unsigned threads) {
    if (meta.shots < 1) throw Error(ErrorCode::kInvalidArgument, "shots must be >= 1");
    meta.detection.validate();
    meta.noise.validate();
    meta.means.require_conserved();
    std::vector<ShotRecord> records(static_cast<std::size_t>(meta.shots));
    parallel_for(meta.shots, threads, [&](std::int64_t i) {
        RandomStream rng(meta.seed, purpose, static_cast<std::uint64_t>(i));
        records[static_cast<std::size_t>(i)] = sample_shot(meta.means, meta.detection, meta.noise, rng);
    });
    return ShotSet(std::move(meta), std::move(records));
}

}  // namespace

ShotSet sample_run(const ModeMeans &m, const DetectionConfig &d, const NoiseModel &nm, std::int64_t shots,
                   std::uint64_t seed, unsigned threads) {
    ShotMeta meta;
    meta.means = m;
    meta.detection = d;
    meta.noise = nm;
    meta.seed = seed;
    meta.shots = shots;
    return run_shots(std::move(meta), StreamPurpose::kSignal, threads);
}

ShotSet sample_run(const CouplingConfig &c, const DetectionConfig &d, const NoiseModel &nm, std::int64_t shots,
                   std::uint64_t seed, unsigned threads) {
    ShotMeta meta;
    meta.coupling = c;
    meta.means = mode_means(c);
    meta.detection = d;
    meta.noise = nm;
    meta.seed = seed;
    meta.shots = shots;
    return run_shots(std::move(meta), StreamPurpose::kSignal, threads);
}

ShotSet sample_dark_run(const DetectionConfig &d, const NoiseModel &nm, std::int64_t shots, std::uint64_t seed,
                        unsigned threads) {
    ShotMeta meta;
    meta.detection = d;
    meta.noise = nm;
    // No light reaches the detectors.
    meta.noise.spurious = {0, 0, 0};
    meta.seed = seed;
    meta.shots = shots;
    meta.dark = true;
    return run_shots(std::move(meta), StreamPurpose::kDark, threads);
}

MomentSet expected_moments(const ModeMeans &m, const DetectionConfig &d, const NoiseModel &nm) {
    d.validate();
    nm.validate();
    std::array<double, 3> p{};
    for (int j = 0; j < 3; ++j) p[j] = nm.collect[j] * d.eta(j + 1);
    MomentSet s = thin_moments(photon_moments(m), p);
    double mu = static_cast<double>(nm.mu);
    for (int j = 0; j < 3; ++j) {
        double spur = d.eta(j + 1) * nm.spurious[j];
        s.mean[j] = mu * (s.mean[j] + spur);
        s.var[j] = mu * (s.var[j] + spur * (1.0 + spur)) + nm.sigma_el[j] * nm.sigma_el[j];
    }
    s.cov_12 *= mu;
    s.cov_13 *= mu;
    s.cov_23 *= mu;
    return s;
}

void write_shot_set(const ShotSet &set, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
    out << "shot,m1,m2,m3\n";
    std::int64_t i = 0;
    for (const ShotRecord &r : set.records()) {
        out << i++ << ',' << format_double(r.m1) << ',' << format_double(r.m2) << ',' << format_double(r.m3) << '\n';
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
    set.meta().to_text().write_file(path + ".meta");
}

ShotSet read_shot_set(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("shot,m1,m2,m3", 0) != 0) {
        throw Error(ErrorCode::kIo, "'" + path + "' lacks the header shot,m1,m2,m3");
    }
    std::vector<ShotRecord> records;
    std::int64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::array<std::string_view, 4> fields{};
        std::string_view rest = line;
        for (int f = 0; f < 4; ++f) {
            auto comma = rest.find(',');
            if ((comma == std::string_view::npos) != (f == 3)) {
                throw Error(ErrorCode::kIo, path + ":" + std::to_string(lineno) + ": expected 4 fields");
            }
            fields[f] = rest.substr(0, comma);
            if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
        }
        records.push_back({parse_double(fields[1], "m1"), parse_double(fields[2], "m2"), parse_double(fields[3], "m3")});
    }
    ShotMeta meta;
    std::ifstream meta_in(path + ".meta");
    if (meta_in) {
        meta = ShotMeta::from_text(KeyValueText::parse(meta_in));
    } else {
        meta.shots = static_cast<std::int64_t>(records.size());
    }
    return ShotSet(std::move(meta), std::move(records));
}

}  // namespace trilink
