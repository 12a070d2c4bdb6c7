#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "marl_sched/rng.hpp"

using namespace marl_sched;

namespace {

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

TEST(DeriveStream, SameLabelSameSequence) {
    RngStream a = derive_stream(42, "workload");
    RngStream b = derive_stream(42, "workload");
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(DeriveStream, DistinctLabelsDiffer) {
    RngStream a = derive_stream(42, "workload");
    RngStream b = derive_stream(42, "cluster");
    int equal = 0;
    for (int i = 0; i < 10; ++i) equal += a.next_u64() == b.next_u64();
    EXPECT_EQ(equal, 0);
}

TEST(DeriveStream, SeedChangesSequence) {
    EXPECT_NE(derive_stream(42, "x").next_u64(), derive_stream(43, "x").next_u64());
}

TEST(DeriveStream, EmptyLabelRejected) { EXPECT_THROW(derive_stream(42, ""), InputError); }

TEST(RngStream, UniformInHalfOpenUnit) {
    RngStream s = derive_stream(7, "u");
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(RngStream, IndexStaysInRange) {
    RngStream s = derive_stream(7, "idx");
    for (int i = 0; i < 10000; ++i) ASSERT_LT(s.index(7), 7u);
    EXPECT_THROW(s.index(0), InputError);
}

TEST(Pareto, InverseCdfPoints) {
    EXPECT_DOUBLE_EQ(pareto_from_uniform(0.0, 1.5, 5.0), 5.0);
    // 5 * 0.5^(-2/3)
    EXPECT_NEAR(pareto_from_uniform(0.5, 1.5, 5.0), 7.937005259840998, 1e-12);
}

TEST(Pareto, SampleMedian) {
    RngStream s = derive_stream(42, "pareto-test");
    std::vector<double> xs;
    for (int i = 0; i < 10000; ++i) {
        xs.push_back(sample_pareto(s, 1.5, 5.0));
        ASSERT_GE(xs.back(), 5.0);
    }
    const double expected = 5.0 * std::pow(2.0, 1.0 / 1.5);
    EXPECT_NEAR(median(xs), expected, 0.05 * expected);
}

TEST(Pareto, RejectsBadParameters) {
    RngStream s = derive_stream(1, "p");
    EXPECT_THROW(sample_pareto(s, 0.0, 5.0), InputError);
    EXPECT_THROW(sample_pareto(s, 1.5, -1.0), InputError);
}

TEST(LogNormal, TransformPoints) {
    EXPECT_NEAR(lognormal_from_normal(0.0, 0.5, 0.8), 1.6487212707001282, 1e-12);
    EXPECT_NEAR(lognormal_from_normal(1.0, 0.5, 0.8), 3.6692966676192444, 1e-12);
}

TEST(LogNormal, SampleMedian) {
    RngStream s = derive_stream(42, "lognormal-test");
    std::vector<double> xs;
    for (int i = 0; i < 10000; ++i) xs.push_back(sample_lognormal(s, 2.0, 1.0));
    EXPECT_NEAR(median(xs), std::exp(2.0), 0.05 * std::exp(2.0));
}

TEST(LogNormal, RejectsNonPositiveSigma) {
    RngStream s = derive_stream(1, "l");
    EXPECT_THROW(sample_lognormal(s, 0.0, 0.0), InputError);
}

TEST(Exponential, InverseCdfPoints) {
    EXPECT_DOUBLE_EQ(exponential_from_uniform(0.0, 0.5), 0.0);
    EXPECT_NEAR(exponential_from_uniform(0.5, 0.5), 1.3862943611198906, 1e-12);
}

TEST(Exponential, SampleMean) {
    RngStream s = derive_stream(42, "exp-test");
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) sum += sample_exponential(s, 0.5);
    EXPECT_NEAR(sum / 10000.0, 2.0, 0.1);
    EXPECT_THROW(sample_exponential(s, 0.0), InputError);
}

TEST(Categorical, CumulativeThresholds) {
    const std::array<double, 3> w{0.25, 0.60, 0.15};
    EXPECT_EQ(categorical_from_uniform(0.10, w), 0u);
    EXPECT_EQ(categorical_from_uniform(0.50, w), 1u);
    EXPECT_EQ(categorical_from_uniform(0.95, w), 2u);
    EXPECT_EQ(categorical_from_uniform(0.25, w), 1u);
}

TEST(Categorical, RoundoffGapGoesToLastNonzero) {
    const std::array<double, 3> w{0.5, 0.5 - 1e-12, 0.0};
    EXPECT_EQ(categorical_from_uniform(1.0 - 1e-13, w), 1u);
}

TEST(Categorical, RejectsBadWeights) {
    const std::array<double, 2> unnormalized{0.5, 0.6};
    const std::array<double, 2> negative{1.5, -0.5};
    EXPECT_THROW(categorical_from_uniform(0.1, unnormalized), InputError);
    EXPECT_THROW(categorical_from_uniform(0.1, negative), InputError);
    EXPECT_THROW(categorical_from_uniform(0.1, std::span<const double>{}), InputError);
}

TEST(Categorical, FrequenciesMatchWeights) {
    const std::array<double, 3> w{0.25, 0.60, 0.15};
    RngStream s = derive_stream(42, "cat-test");
    std::array<int, 3> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[sample_categorical(s, w)];
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(counts[k] / double(n), w[k], 0.01);
}

TEST(StandardNormal, MomentsProperty) {
    RngStream s = derive_stream(42, "normal-test");
    double sum = 0.0;
    double sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double z = s.standard_normal();
        ASSERT_TRUE(std::isfinite(z));
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.02);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
}
