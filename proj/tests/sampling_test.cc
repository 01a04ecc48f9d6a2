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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <tuple>

#include "oracles.h"
#include "trilink/estimators.h"

using namespace trilink;

namespace {

const ModeMeans kSmall{1.0, 0.5, 0.5};

struct SampleMoments {
    std::array<double, 3> mean{};
    double var_d = 0.0;  // variance of m1 - m2 - m3
    std::array<double, 3> var{};
};

SampleMoments moments_of(const ShotSet &set) {
    SampleMoments s;
    double n = static_cast<double>(set.size());
    for (const ShotRecord &r : set.records())
        for (int j = 0; j < 3; ++j) s.mean[j] += r[j + 1] / n;
    double md = s.mean[0] - s.mean[1] - s.mean[2];
    for (const ShotRecord &r : set.records()) {
        double d = r.m1 - r.m2 - r.m3 - md;
        s.var_d += d * d / (n - 1);
        for (int j = 0; j < 3; ++j) s.var[j] += (r[j + 1] - s.mean[j]) * (r[j + 1] - s.mean[j]) / (n - 1);
    }
    return s;
}

double r_1_23_analytic(const MomentSet &s) { return noise_reduction_from_moments(s, Grouping::k1_23); }

}  // namespace

TEST(sample_shot, vacuum_gives_zero) {
    RandomStream rng(1, StreamPurpose::kTest, 0);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(sample_shot({0, 0, 0}, DetectionConfig::uniform(0.7), NoiseModel{}, rng), (ShotRecord{0, 0, 0}));
    }
}

TEST(sample_shot, lossless_detection_conserves_counts) {
    RandomStream rng(2, StreamPurpose::kTest, 0);
    for (int i = 0; i < 20000; ++i) {
        ShotRecord r = sample_shot(kSmall, DetectionConfig::uniform(1.0), NoiseModel{}, rng);
        ASSERT_EQ(r.m1, r.m2 + r.m3);
    }
}

TEST(sample_run, multimode_means_and_noise_reduction) {
    NoiseModel nm;
    nm.mu = 10;
    ShotSet set = sample_run(kSmall, DetectionConfig::uniform(0.28), nm, 100000, 3);
    EstimateReport rep = estimate_statistics(set);
    double se_mean = std::sqrt(expected_moments(kSmall, DetectionConfig::uniform(0.28), nm).var[0] / 1e5);
    EXPECT_NEAR(rep.mean[0], 2.8, 3 * se_mean);
    EXPECT_NEAR(rep.r(Grouping::k1_23), 0.72, 3 * rep.stderr_of("R_1_23"));
}

TEST(sample_run, thread_count_does_not_change_records) {
    NoiseModel nm;
    nm.mu = 3;
    nm.sigma_el = {0.5, 0.2, 0.1};
    nm.spurious = {0.1, 0, 0.2};
    ShotSet a = sample_run(kSmall, DetectionConfig::uniform(0.28), nm, 5000, 77, 1);
    ShotSet b = sample_run(kSmall, DetectionConfig::uniform(0.28), nm, 5000, 77, 8);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.records()[i], b.records()[i]) << i;
    ShotSet c = sample_run(kSmall, DetectionConfig::uniform(0.28), nm, 5000, 78, 8);
    int same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a.records()[i] == c.records()[i];
    EXPECT_LT(same, 4000);
}

TEST(sample_run, recovers_detected_sum_correlation) {
    ShotSet set = sample_run(kSmall, DetectionConfig::uniform(0.28), NoiseModel{}, 50000, 4);
    EstimateReport rep = estimate_statistics(set);
    EXPECT_NEAR(rep.eps(Grouping::k1_23), 0.4375, 3 * rep.stderr_of("eps_1_23"));
}

TEST(sample_run, single_shot_and_bad_counts) {
    ShotSet one = sample_run(kSmall, DetectionConfig::uniform(0.28), NoiseModel{}, 1, 4);
    EXPECT_EQ(one.size(), 1u);
    EXPECT_EQ(one.meta().shots, 1);
    EXPECT_THROW(sample_run(kSmall, DetectionConfig::uniform(0.28), NoiseModel{}, 0, 4), Error);
    EXPECT_THROW(sample_run(ModeMeans{3, 2, 0.5}, DetectionConfig::uniform(0.28), NoiseModel{}, 10, 4), Error);
    NoiseModel bad;
    bad.mu = 0;
    EXPECT_THROW(sample_run(kSmall, DetectionConfig::uniform(0.28), bad, 10, 4), Error);
    bad = NoiseModel{};
    bad.collect = {1, 0, 1};
    EXPECT_THROW(sample_run(kSmall, DetectionConfig::uniform(0.28), bad, 10, 4), Error);
}

TEST(sample_run, coupling_overload_records_configuration) {
    CouplingConfig c{1.0, 2.0, 1.5707963267948966};
    ShotSet set = sample_run(c, DetectionConfig::uniform(0.5), NoiseModel{}, 10, 9);
    ASSERT_TRUE(set.meta().coupling.has_value());
    EXPECT_NEAR(set.meta().means.n1, 3.0, 1e-12);
}

TEST(sample_dark_run, noiseless_is_zero_and_gaussian_variance) {
    ShotSet zero = sample_dark_run(DetectionConfig::uniform(0.28), NoiseModel{}, 1000, 5);
    for (const ShotRecord &r : zero.records()) ASSERT_EQ(r, (ShotRecord{0, 0, 0}));
    EXPECT_TRUE(zero.meta().dark);

    NoiseModel nm;
    nm.sigma_el = {1, 1, 1};
    nm.spurious = {3, 3, 3};  // dark runs see no light at all
    const double n = 100000;
    ShotSet dark = sample_dark_run(DetectionConfig::uniform(0.28), nm, 100000, 6);
    SampleMoments s = moments_of(dark);
    for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(s.var[j], 1.0, 3 * std::sqrt(2.0 / (n - 1)));
        EXPECT_NEAR(s.mean[j], 0.0, 4 / std::sqrt(n));
    }
    ShotSet again = sample_dark_run(DetectionConfig::uniform(0.28), nm, 100000, 6, 3);
    for (std::size_t i = 0; i < dark.size(); i += 997) ASSERT_EQ(dark.records()[i], again.records()[i]);
}

TEST(sampler, joint_histogram_matches_joint_pmf) {
    const std::int64_t shots = 200000;
    ShotSet set = sample_run(kSmall, DetectionConfig::uniform(1.0), NoiseModel{}, shots, 10);
    std::map<std::pair<int, int>, std::int64_t> hist;
    for (const ShotRecord &r : set.records()) ++hist[{static_cast<int>(r.m2), static_cast<int>(r.m3)}];
    // Cells with expected count >= 5; everything else pooled into one cell.
    double stat = 0.0, pooled_p = 1.0;
    std::int64_t pooled_n = shots;
    int cells = 0;
    for (int p = 0; p < 40; ++p) {
        for (int r = 0; p + r < 40; ++r) {
            double prob = joint_pmf(kSmall, p + r, p, r);
            double e = prob * static_cast<double>(shots);
            if (e < 5.0) continue;
            auto it = hist.find({p, r});
            double o = it == hist.end() ? 0.0 : static_cast<double>(it->second);
            stat += (o - e) * (o - e) / e;
            pooled_p -= prob;
            pooled_n -= static_cast<std::int64_t>(o);
            ++cells;
        }
    }
    double e = pooled_p * static_cast<double>(shots);
    stat += (static_cast<double>(pooled_n) - e) * (static_cast<double>(pooled_n) - e) / e;
    EXPECT_GT(cells, 20);
    EXPECT_GT(oracle::chi_square_p_value(stat, cells), 1e-3);
}

TEST(expected_moments, agree_with_samples_under_full_noise) {
    NoiseModel nm;
    nm.mu = 4;
    nm.sigma_el = {0.7, 0.3, 0.5};
    nm.spurious = {0.2, 0.05, 0.1};
    nm.collect = {0.9, 1.0, 0.8};
    DetectionConfig d{0.31, 0.28, 0.25, std::nullopt};
    ModeMeans m{2.0, 0.5, 1.5};
    const double n = 200000;
    SampleMoments s = moments_of(sample_run(m, d, nm, 200000, 11));
    MomentSet want = expected_moments(m, d, nm);
    for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(s.mean[j], want.mean[j], 4 * std::sqrt(want.var[j] / n));
        EXPECT_NEAR(s.var[j], want.var[j], 0.03 * want.var[j]);
    }
    EXPECT_NEAR(s.var_d, want.difference_variance(Grouping::k1_23), 0.03 * want.difference_variance(Grouping::k1_23));
}

TEST(expected_moments, reduce_to_detection_module_without_noise) {
    MomentSet a = expected_moments(kSmall, DetectionConfig::uniform(0.28), NoiseModel{});
    MomentSet b = detected_moments(kSmall, DetectionConfig::uniform(0.28));
    EXPECT_DOUBLE_EQ(a.var[0], b.var[0]);
    EXPECT_DOUBLE_EQ(a.cov_23, b.cov_23);
}

TEST(noise_model, multimode_scaling_keeps_noise_reduction) {
    DetectionConfig d = DetectionConfig::uniform(0.28);
    for (std::int64_t mu : {1, 5, 50}) {
        NoiseModel nm;
        nm.mu = mu;
        MomentSet s = expected_moments(kSmall, d, nm);
        EXPECT_NEAR(s.mean[0], static_cast<double>(mu) * 0.28, 1e-12);
        EXPECT_NEAR(r_1_23_analytic(s), 0.72, 1e-12);
    }
    NoiseModel nm;
    nm.mu = 50;
    EstimateReport rep = estimate_statistics(sample_run(kSmall, d, nm, 20000, 12));
    EXPECT_NEAR(rep.mean[0], 14.0, 0.2);
    EXPECT_NEAR(rep.r(Grouping::k1_23), 0.72, 3 * rep.stderr_of("R_1_23"));
}

TEST(noise_model, spurious_light_and_partial_collection_raise_r) {
    DetectionConfig d = DetectionConfig::uniform(0.28);
    double prev = 1 - 0.28;
    for (double spur : {0.05, 0.2, 0.5, 2.0}) {
        NoiseModel nm;
        nm.spurious = {spur, 0, 0};
        double r = r_1_23_analytic(expected_moments(kSmall, d, nm));
        EXPECT_GT(r, prev);
        prev = r;
    }
    EXPECT_GT(prev, 1.0);

    // The excess from partial collection grows with the number of photons.
    double prev_excess = 0.0;
    for (double n1 : {0.5, 2.0, 8.0, 32.0, 128.0}) {
        NoiseModel nm;
        nm.collect = {0.8, 1, 1};
        ModeMeans m{n1, n1 / 2, n1 / 2};
        double excess = r_1_23_analytic(expected_moments(m, d, nm)) - 0.72;
        EXPECT_GT(excess, prev_excess);
        prev_excess = excess;
    }
    // Far enough up the pump scan the correlation is lost below shot noise.
    EXPECT_GT(0.72 + prev_excess, 1.0);

    // Monte Carlo agrees on the direction.
    NoiseModel nm;
    nm.collect = {0.7, 1, 1};
    EstimateReport rep = estimate_statistics(sample_run(ModeMeans{8, 4, 4}, d, nm, 20000, 13));
    EXPECT_GT(rep.r(Grouping::k1_23), 0.72 + 5 * rep.stderr_of("R_1_23"));
}

TEST(noise_model, electronic_noise_adds_its_variance) {
    DetectionConfig d = DetectionConfig::uniform(0.28);
    NoiseModel clean, noisy;
    noisy.sigma_el = {0.5, 1.0, 1.5};
    double extra = 0.25 + 1.0 + 2.25;
    double a = expected_moments(kSmall, d, clean).difference_variance(Grouping::k1_23);
    double b = expected_moments(kSmall, d, noisy).difference_variance(Grouping::k1_23);
    EXPECT_NEAR(b - a, extra, 1e-12);

    // Same seed: the optical counts are identical, so the sample excess is
    // the electronic contribution alone.
    const double n = 100000;
    SampleMoments sa = moments_of(sample_run(kSmall, d, clean, 100000, 14));
    SampleMoments sb = moments_of(sample_run(kSmall, d, noisy, 100000, 14));
    EXPECT_NEAR(sb.var_d - sa.var_d, extra, 4 * std::sqrt(2 * extra * extra / n + 4 * extra * a / n));
}

TEST(shot_set, file_round_trip_preserves_records_and_meta) {
    NoiseModel nm;
    nm.mu = 2;
    nm.sigma_el = {0.3, 0, 0.1};
    CouplingConfig c{1.0, 2.0, 0.7};
    ShotSet set = sample_run(c, DetectionConfig{0.31, 0.28, 0.28, std::nullopt}, nm, 257, 15);
    auto path = (std::filesystem::temp_directory_path() / "trilink_sampling_test.csv").string();
    write_shot_set(set, path);
    ShotSet back = read_shot_set(path);
    ASSERT_EQ(back.size(), set.size());
    for (std::size_t i = 0; i < set.size(); ++i) ASSERT_EQ(back.records()[i], set.records()[i]);
    EXPECT_EQ(back.meta().seed, 15u);
    EXPECT_EQ(back.meta().noise.mu, 2);
    EXPECT_EQ(back.meta().noise.sigma_el[0], 0.3);
    EXPECT_EQ(back.meta().detection.eta_1, 0.31);
    ASSERT_TRUE(back.meta().coupling.has_value());
    EXPECT_EQ(back.meta().coupling->z, 0.7);
    EXPECT_EQ(back.meta().means.n1, set.meta().means.n1);
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".meta");
    EXPECT_THROW(read_shot_set(path), Error);
}

TEST(shot_set, count_must_match_meta) {
    ShotMeta meta;
    meta.shots = 3;
    EXPECT_THROW(ShotSet(meta, std::vector<ShotRecord>(2)), Error);
}

TEST(parallel_for, covers_every_index_once_and_propagates_errors) {
    std::vector<int> hits(1000, 0);
    parallel_for(1000, 7, [&](std::int64_t i) { ++hits[static_cast<std::size_t>(i)]; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(100, 4,
                              [](std::int64_t i) {
                                  if (i == 63) throw Error(ErrorCode::kInvalidArgument, "boom");
                              }),
                 Error);
}
