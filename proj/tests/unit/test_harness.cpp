// Copyright 2026 The tsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tsense/error.hpp"
#include "tsense/harness.hpp"
#include "tsense/stats.hpp"

using namespace tsense;

namespace {

TrialRecord synthetic(long n, double theta_r, bool ok = true, bool boundary = false) {
    TrialRecord r;
    r.n_total = n;
    r.f_n = preliminary_size(n, 0.5);
    r.n_refine = n - 2 * r.f_n;
    r.prelim.theta_p = theta_r + 0.1;
    r.theta_r = theta_r;
    r.boundary = boundary;
    r.status = ok ? TrialStatus::Ok : TrialStatus::ExistenceFailure;
    return r;
}

}  // namespace

TEST(Stats, MomentsAndRms) {
    const std::vector<double> x{1.0, 2.0, 4.0};
    EXPECT_DOUBLE_EQ(stats::mean(x), 7.0 / 3.0);
    EXPECT_NEAR(stats::variance(x), 7.0 / 3.0, 1e-15);
    EXPECT_NEAR(stats::rms_error(x, 2.0), std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(Stats, NormalCdfKnownValues) {
    EXPECT_DOUBLE_EQ(stats::normal_cdf(0.0), 0.5);
    EXPECT_NEAR(stats::normal_cdf(1.959963984540054), 0.975, 1e-12);
    EXPECT_NEAR(stats::normal_cdf(-1.0), 0.15865525393145707, 1e-14);
}

TEST(Stats, KsStatisticByHand) {
    // Uniform CDF, samples 0.1, 0.5, 0.8: sup gap is max over i of
    // i/n - x_i and x_i - (i-1)/n.
    const double d = stats::ks_statistic({0.8, 0.1, 0.5}, [](double x) { return x; });
    EXPECT_NEAR(d, std::max({1.0 / 3 - 0.1, 0.1, 2.0 / 3 - 0.5, 0.5 - 1.0 / 3, 1.0 - 0.8, 0.8 - 2.0 / 3}), 1e-15);
    EXPECT_NEAR(stats::ks_band(2000, 0.01), 1.6276 / std::sqrt(2000.0), 1e-4 / std::sqrt(2000.0));
}

TEST(Stats, KsAcceptsMatchingDistribution) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 2.0);
    std::vector<double> x(4000);
    for (auto& v : x) v = nd(rng);
    EXPECT_LT(stats::ks_statistic(x, [](double z) { return stats::normal_cdf(z / 2.0); }), stats::ks_band(4000, 0.01));
    EXPECT_GT(stats::ks_statistic(x, [](double z) { return stats::normal_cdf(z); }), stats::ks_band(4000, 0.01));
}

TEST(Stats, SpearmanWithTies) {
    EXPECT_NEAR(stats::spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{10, 20, 30, 40}), 1.0, 1e-15);
    EXPECT_NEAR(stats::spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0, 1e-15);
    // ranks (1.5, 1.5, 3) vs (1, 2, 3)
    EXPECT_NEAR(stats::spearman(std::vector<double>{5, 5, 7}, std::vector<double>{1, 2, 3}), 0.8660254037844386, 1e-12);
}

TEST(Harness, TrialSeedsAreDistinct) {
    EXPECT_NE(trial_seed(1, 250, 0), trial_seed(1, 250, 1));
    EXPECT_NE(trial_seed(1, 250, 0), trial_seed(1, 1000, 0));
    EXPECT_EQ(trial_seed(7, 250, 3), trial_seed(7, 250, 3));
}

TEST(Harness, ConsistencyCountsFailuresSeparately) {
    std::vector<TrialRecord> recs{synthetic(250, 0.8), synthetic(250, 1.0, true, true), synthetic(250, 0.0, false),
                                  synthetic(1000, 0.88), synthetic(1000, 0.92)};
    const auto t = consistency_from_records(recs, {250, 1000}, 0.9);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0].trials, 3);
    EXPECT_EQ(t.rows[0].ok, 2);
    EXPECT_EQ(t.rows[0].existence_failures, 1);
    EXPECT_EQ(t.rows[0].boundary, 1);
    EXPECT_NEAR(t.rows[0].rms_refine, std::sqrt((0.01 + 0.01) / 2), 1e-15);
    EXPECT_NEAR(t.rows[1].rms_refine, 0.02, 1e-15);
    EXPECT_NEAR(t.spearman, -1.0, 1e-15);
}

TEST(Harness, NormalityNeedsEnoughTrials) {
    std::vector<TrialRecord> recs;
    for (int i = 0; i < 10; ++i) recs.push_back(synthetic(4000, 0.9 + 0.001 * (i - 5)));
    EXPECT_THROW(normality_from_records(recs, 4000, 0.9, 0.6, 500), InsufficientTrials);
    const auto rep = normality_from_records(recs, 4000, 0.9, 0.6, 5);
    EXPECT_EQ(rep.z_samples.size(), 10u);
    const auto rows = summarize(recs, {4000}, 0.9, 0.6, 500);
    EXPECT_TRUE(std::isnan(rows[0].ks_stat));
    EXPECT_NEAR(rows[0].qcrb_inv, 1.0 / 0.6, 1e-15);
}

TEST(Harness, NormalityOnExactGaussianScores) {
    std::mt19937_64 rng(8);
    const double qfi = 0.62, n = 4000;
    const long nr = 4000 - 128;
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(qfi * nr));
    std::vector<TrialRecord> recs;
    for (int i = 0; i < 2000; ++i) recs.push_back(synthetic(static_cast<long>(n), 0.9 + nd(rng)));
    const auto rep = normality_from_records(recs, 4000, 0.9, qfi, 500);
    EXPECT_LT(rep.ks_stat, stats::ks_band(2000, 0.01));
    EXPECT_NEAR(rep.var_ratio, 1.0, 0.1);
}

TEST(Harness, MseScalesByTotalSampleSize) {
    std::vector<TrialRecord> recs{synthetic(1000, 0.91), synthetic(1000, 0.89)};
    const auto m = mse_from_records(recs, {1000}, 0.9, 0.5);
    EXPECT_NEAR(m[0].n_mse, 1000 * 1e-4, 1e-12);
    EXPECT_DOUBLE_EQ(m[0].qcrb_inv, 2.0);
}

TEST(Harness, SweepIsDeterministicAndOrdered) {
    SweepSpec spec;
    spec.n_list = {300};
    spec.trials_per_n = 30;
    spec.base.channel = ChannelParams{0.9, 0.7, 0.3, 0.4};
    spec.base.seed = 5;
    const auto a = run_sweep(spec, 1);
    const auto b = run_sweep(spec, 2);
    ASSERT_EQ(a.size(), 30u);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a[3].seed, trial_seed(5, 300, 3));
}

TEST(Harness, SweepSpecValidation) {
    SweepSpec spec;
    spec.n_list = {};
    EXPECT_THROW(spec.validate(), InvalidArgument);
    spec.n_list = {1000, 250};
    EXPECT_THROW(spec.validate(), InvalidArgument);
}

TEST(Landscape, BoundedByQfiAndPeaksAtZeroPhaseError) {
    const ChannelParams ch{0.9, 0.7, 0.3, 0.4};
    const auto map = fi_landscape(ch, linspace(-1.5, 1.0, 11), linspace(-0.4, 0.4, 5), FockCutoff{20, 1e-8});
    EXPECT_TRUE(map.all_finite);
    EXPECT_LE(map.max_ratio, 1.0 + 1e-3);
    EXPECT_EQ(map.arg_gamma, 2);
    EXPECT_EQ(map.cfi.rows(), 5);
    EXPECT_EQ(map.cfi.cols(), 11);
    EXPECT_NEAR(map.qfi, 0.6187625, 1e-6);
}

TEST(Landscape, Linspace) {
    const auto x = linspace(-2, 2, 41);
    EXPECT_EQ(x.size(), 41u);
    EXPECT_DOUBLE_EQ(x.front(), -2.0);
    EXPECT_DOUBLE_EQ(x.back(), 2.0);
    EXPECT_NEAR(x[20], 0.0, 1e-15);
    EXPECT_EQ(linspace(1.0, 3.0, 1), std::vector<double>{1.0});
}
