#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "marl_sched/cluster.hpp"

using namespace marl_sched;

namespace {

NodeSpec spec(double cpu, double mem, double p_idle, double p_dyn) {
    NodeSpec n;
    n.cpu_capacity = cpu;
    n.mem_capacity = mem;
    n.p_idle = p_idle;
    n.p_dyn = p_dyn;
    return n;
}

}  // namespace

TEST(TierCounts, HundredNodes) {
    const auto c = tier_counts(100, default_tiers());
    EXPECT_EQ(c[0], 20u);
    EXPECT_EQ(c[1], 50u);
    EXPECT_EQ(c[2], 30u);
}

TEST(TierCounts, TenNodes) {
    const auto c = tier_counts(10, default_tiers());
    EXPECT_EQ(c[0], 2u);
    EXPECT_EQ(c[1], 5u);
    EXPECT_EQ(c[2], 3u);
}

TEST(TierCounts, AlwaysSumToN) {
    for (std::size_t n = 1; n <= 300; ++n) {
        const auto c = tier_counts(n, default_tiers());
        ASSERT_EQ(c[0] + c[1] + c[2], n) << n;
    }
}

TEST(GenerateCluster, RangesPerTier) {
    RngStream s = derive_stream(42, "cluster-1");
    const auto nodes = generate_cluster(s, 100);
    ASSERT_EQ(nodes.size(), 100u);
    const auto tiers = default_tiers();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const NodeSpec& n = nodes[i];
        EXPECT_EQ(n.id, i);
        const TierConfig& t = tiers[static_cast<std::size_t>(n.tier)];
        EXPECT_TRUE(t.cpu.contains(n.cpu_capacity)) << i;
        EXPECT_EQ(n.cpu_capacity, std::round(n.cpu_capacity));
        EXPECT_TRUE(t.mem.contains(n.mem_capacity)) << i;
        EXPECT_TRUE(t.p_idle.contains(n.p_idle)) << i;
        EXPECT_TRUE(t.p_dyn.contains(n.p_dyn)) << i;
    }
    EXPECT_EQ(nodes[0].tier, Tier::High);
    EXPECT_EQ(nodes[20].tier, Tier::Medium);
    EXPECT_EQ(nodes[70].tier, Tier::Low);
}

TEST(GenerateCluster, RejectsEmptyAndBadFractions) {
    RngStream s = derive_stream(42, "c");
    EXPECT_THROW(generate_cluster(s, 0), InputError);
    auto tiers = default_tiers();
    tiers[0].fraction = 0.5;
    EXPECT_THROW(generate_cluster(s, 10, tiers), InputError);
}

TEST(Power, LinearModel) {
    const NodeSpec n = spec(4, 16, 100, 200);
    EXPECT_EQ(instantaneous_power(n, 0.0), 100.0);
    EXPECT_EQ(instantaneous_power(n, 1.0), 300.0);
    EXPECT_EQ(instantaneous_power(n, 0.5), 200.0);
    EXPECT_THROW(instantaneous_power(n, 1.1), InputError);
    EXPECT_THROW(instantaneous_power(n, -0.1), InputError);
}

TEST(StepEnergy, Examples) {
    const NodeSpec n = spec(4, 16, 100, 200);
    EXPECT_EQ(step_energy(n, 2, 5), 1000.0);
    EXPECT_EQ(step_energy(n, 0, 5), 500.0);
    EXPECT_THROW(step_energy(n, 5, 5), InputError);
    EXPECT_THROW(step_energy(n, 1, 0), InputError);
}

TEST(WriteClusterCsv, Header) {
    RngStream s = derive_stream(1, "c");
    std::ostringstream os;
    write_cluster_csv(os, generate_cluster(s, 10));
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "id,tier,cpu,mem,p_idle,p_dyn");
}
