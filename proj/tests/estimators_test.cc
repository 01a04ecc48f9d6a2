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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "trilink/sampling.h"

using namespace trilink;

namespace {

const ModeMeans kSmall{1.0, 0.5, 0.5};

ShotSet make_set(std::vector<ShotRecord> records, std::uint64_t seed = 1) {
    ShotMeta meta;
    meta.seed = seed;
    meta.shots = static_cast<std::int64_t>(records.size());
    return ShotSet(meta, std::move(records));
}

}  // namespace

TEST(estimate_statistics, constant_data) {
    EstimateReport rep = estimate_statistics(make_set(std::vector<ShotRecord>(500, ShotRecord{2, 1, 1})));
    EXPECT_EQ(rep.mean[0], 2.0);
    EXPECT_EQ(rep.r(Grouping::k1_23), 0.0);
    try {
        rep.eps(Grouping::k1_23);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kUndefinedCorrelation);
    }
    EXPECT_FALSE(rep.eps_hat.at(Grouping::k23).has_value());
    EXPECT_EQ(rep.to_text().get("eps_1_23"), "undefined");
}

TEST(estimate_statistics, independent_poisson_arms_sit_at_shot_noise) {
    RandomStream rng(21, StreamPurpose::kTest, 0);
    std::vector<ShotRecord> recs;
    for (int i = 0; i < 100000; ++i) {
        recs.push_back({static_cast<double>(sample_poisson(rng, 3.0)), static_cast<double>(sample_poisson(rng, 1.0)),
                        static_cast<double>(sample_poisson(rng, 2.0))});
    }
    EstimateReport rep = estimate_statistics(make_set(std::move(recs), 21));
    for (Grouping g : kAllGroupings) {
        EXPECT_NEAR(rep.r(g), 1.0, 3 * rep.stderr_of("R_" + std::string(grouping_label(g)))) << grouping_label(g);
    }
    EXPECT_NEAR(rep.eps(Grouping::k12), 0.0, 0.02);
}

TEST(estimate_statistics, ideal_run_reaches_quantum_limit) {
    ShotSet set = sample_run(kSmall, DetectionConfig::uniform(0.28), NoiseModel{}, 50000, 22);
    EstimateReport rep = estimate_statistics(set);
    EXPECT_EQ(rep.shots_used, 50000);
    EXPECT_EQ(rep.bootstrap_blocks, 200);
    EXPECT_FALSE(rep.dark_corrected);
    EXPECT_NEAR(rep.r(Grouping::k1_23), 0.72, 3 * rep.stderr_of("R_1_23"));
}

TEST(estimate_statistics, error_shrinks_like_inverse_root_shots) {
    DetectionConfig d = DetectionConfig::uniform(0.28);
    ModeMeans m{3, 1, 2};
    double prev = 0.0;
    for (std::int64_t shots : {1000, 10000, 100000}) {
        EstimateReport rep = estimate_statistics(sample_run(m, d, NoiseModel{}, shots, 23));
        double se = rep.stderr_of("R_1_2");
        EXPECT_NEAR(rep.r(Grouping::k12), noise_reduction(m, d, Grouping::k12), 4 * se);
        EXPECT_NEAR(rep.eps(Grouping::k23), detected_correlation(m, d, Grouping::k23),
                    4 * rep.stderr_of("eps_2_3"));
        if (prev > 0.0) EXPECT_NEAR(prev / se, std::sqrt(10.0), 0.8);
        prev = se;
    }
}

TEST(estimate_statistics, bootstrap_error_matches_analytic_mean_error) {
    NoiseModel nm;
    nm.mu = 4;
    DetectionConfig d = DetectionConfig::uniform(0.5);
    ShotSet set = sample_run(kSmall, d, nm, 40000, 24);
    EstimateReport rep = estimate_statistics(set);
    double want = std::sqrt(expected_moments(kSmall, d, nm).var[0] / 40000.0);
    EXPECT_NEAR(rep.stderr_of("M1"), want, 0.25 * want);
}

TEST(estimate_statistics, dark_subtraction_recovers_clean_value) {
    DetectionConfig d = DetectionConfig::uniform(0.28);
    NoiseModel nm;
    nm.mu = 20;
    nm.sigma_el = {1.0, 0.8, 0.8};
    ShotSet signal = sample_run(kSmall, d, nm, 50000, 25);
    ShotSet dark = sample_dark_run(d, nm, 50000, 26);
    EstimateReport raw = estimate_statistics(signal);
    EstimateReport fixed = estimate_statistics(signal, &dark);
    EXPECT_TRUE(fixed.dark_corrected);
    EXPECT_GT(raw.r(Grouping::k1_23), 0.72 + 0.05);
    EXPECT_NEAR(fixed.r(Grouping::k1_23), 0.72, 3 * fixed.stderr_of("R_1_23"));
    EXPECT_NEAR(fixed.eps(Grouping::k1_23), detected_correlation(kSmall, d, Grouping::k1_23),
                3 * fixed.stderr_of("eps_1_23"));
    // The corrected error bar carries the dark run's uncertainty too.
    EXPECT_GT(fixed.stderr_of("R_1_23"), 0.0);
}

TEST(estimate_statistics, over_subtraction_is_an_error) {
    DetectionConfig d = DetectionConfig::uniform(0.28);
    NoiseModel weak, strong;
    weak.sigma_el = {0.1, 0.1, 0.1};
    strong.sigma_el = {5, 5, 5};
    ShotSet signal = sample_run(ModeMeans{0.1, 0.05, 0.05}, d, weak, 5000, 27);
    ShotSet dark = sample_dark_run(d, strong, 5000, 28);
    try {
        estimate_statistics(signal, &dark);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kOverSubtraction);
    }
}

TEST(estimate_statistics, classical_mixture_is_correlated_but_not_sub_shot_noise) {
    // Thermally distributed classical intensity split deterministically over
    // the arms, with Poissonian detection.
    RandomStream rng(29, StreamPurpose::kTest, 1);
    const double n1 = 50.0, eta = 0.28;
    std::vector<ShotRecord> recs;
    for (int i = 0; i < 100000; ++i) {
        double intensity = -n1 * std::log(rng.uniform_pos());
        recs.push_back({static_cast<double>(sample_poisson(rng, eta * intensity)),
                        static_cast<double>(sample_poisson(rng, eta * 0.5 * intensity)),
                        static_cast<double>(sample_poisson(rng, eta * 0.5 * intensity))});
    }
    EstimateReport rep = estimate_statistics(make_set(std::move(recs), 29));
    EXPECT_GT(rep.eps(Grouping::k1_23), 0.9);
    EXPECT_GT(rep.r(Grouping::k1_23), 1.0 - 3 * rep.stderr_of("R_1_23"));

    // The quantum state with the same means and efficiency.
    EstimateReport quantum =
        estimate_statistics(sample_run(ModeMeans{n1, n1 / 2, n1 / 2}, DetectionConfig::uniform(eta), NoiseModel{}, 100000, 30));
    EXPECT_GT(quantum.eps(Grouping::k1_23), 0.9);
    EXPECT_LT(quantum.r(Grouping::k1_23), 1.0 - 10 * quantum.stderr_of("R_1_23"));
}

TEST(estimate_statistics, empty_input_and_bad_options) {
    ShotSet empty = make_set({});
    try {
        estimate_statistics(empty);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
    }
    ShotSet one = make_set({{1, 1, 0}});
    EXPECT_THROW(estimate_statistics(one, &empty), Error);
    EXPECT_THROW(estimate_statistics(one, nullptr, {0, 10}), Error);
}

TEST(estimate_statistics, deterministic_and_serializable) {
    ShotSet set = sample_run(kSmall, DetectionConfig::uniform(0.28), NoiseModel{}, 3000, 31);
    EstimateReport a = estimate_statistics(set), b = estimate_statistics(set);
    EXPECT_EQ(a.csv_row(), b.csv_row());
    EXPECT_EQ(a.to_text().to_string(), b.to_text().to_string());

    auto doc = KeyValueText::parse(a.to_text().to_string());
    EXPECT_EQ(doc.get_double("R_1_23"), a.r(Grouping::k1_23));
    EXPECT_EQ(doc.get_double("stderr_R_1_23"), a.stderr_of("R_1_23"));
    EXPECT_EQ(doc.get_int("shots_used"), 3000);

    std::string header = EstimateReport::csv_header();
    std::string row = a.csv_row();
    auto commas = [](const std::string &s) { return std::count(s.begin(), s.end(), ','); };
    EXPECT_EQ(commas(header), commas(row));

    EstimateReport none = estimate_statistics(set, nullptr, {200, 0});
    EXPECT_TRUE(std::isnan(none.stderr_of("R_1_23")));
    EXPECT_EQ(none.r(Grouping::k1_23), a.r(Grouping::k1_23));
}
