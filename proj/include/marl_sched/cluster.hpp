#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace marl_sched {

enum class Tier { High, Medium, Low };

inline std::string_view tier_name(Tier t) {
    switch (t) {
        case Tier::High: return "high";
        case Tier::Medium: return "medium";
        case Tier::Low: return "low";
    }
    return "unknown";
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct TierConfig {
    Tier tier = Tier::Medium;
    double fraction = 0.0;
    Interval cpu;
    Interval mem;
    Interval p_idle;
    Interval p_dyn;
};

using TierSet = std::array<TierConfig, 3>;

inline TierSet default_tiers() {
    return {{
        {Tier::High, 0.20, {24, 32}, {96, 128}, {120, 180}, {250, 400}},
        {Tier::Medium, 0.50, {8, 16}, {32, 64}, {60, 100}, {120, 200}},
        {Tier::Low, 0.30, {2, 8}, {8, 32}, {20, 60}, {40, 120}},
    }};
}

struct NodeSpec {
    std::size_t id = 0;
    double cpu_capacity = 0.0;  // cores
    double mem_capacity = 0.0;  // GB
    double p_idle = 0.0;        // W
    double p_dyn = 0.0;         // W at full utilization
    Tier tier = Tier::Medium;
};

/// Node counts per tier: round(fraction * n) for every tier except Medium,
/// which takes whatever is left.
inline std::array<std::size_t, 3> tier_counts(std::size_t n, const TierSet& tiers) {
    std::array<std::size_t, 3> counts{};
    std::size_t assigned = 0;
    std::size_t medium_slot = 1;
    for (std::size_t k = 0; k < tiers.size(); ++k) {
        if (tiers[k].tier == Tier::Medium) {
            medium_slot = k;
            continue;
        }
        counts[k] = static_cast<std::size_t>(std::llround(tiers[k].fraction * static_cast<double>(n)));
        assigned += counts[k];
    }
    if (assigned > n) throw InputError("tier_counts: tier fractions exceed the node count");
    counts[medium_slot] = n - assigned;
    return counts;
}

inline std::vector<NodeSpec> generate_cluster(RngStream& s, std::size_t n, const TierSet& tiers = default_tiers()) {
    if (n == 0) throw InputError("generate_cluster: n must be >= 1");
    double total_fraction = 0.0;
    for (const auto& t : tiers) total_fraction += t.fraction;
    if (std::abs(total_fraction - 1.0) > 1e-9) throw InputError("generate_cluster: tier fractions must sum to 1");

    auto uniform_in = [&s](const Interval& iv) { return iv.lo + (iv.hi - iv.lo) * s.uniform(); };
    const auto counts = tier_counts(n, tiers);

    std::vector<NodeSpec> nodes;
    nodes.reserve(n);
    for (std::size_t k = 0; k < tiers.size(); ++k) {
        const TierConfig& cfg = tiers[k];
        for (std::size_t j = 0; j < counts[k]; ++j) {
            NodeSpec spec;
            spec.id = nodes.size();
            spec.tier = cfg.tier;
            // Core counts are whole numbers.
            const auto lo = static_cast<long long>(std::ceil(cfg.cpu.lo));
            const auto hi = static_cast<long long>(std::floor(cfg.cpu.hi));
            spec.cpu_capacity = static_cast<double>(lo + static_cast<long long>(s.index(static_cast<std::size_t>(hi - lo + 1))));
            spec.mem_capacity = uniform_in(cfg.mem);
            spec.p_idle = uniform_in(cfg.p_idle);
            spec.p_dyn = uniform_in(cfg.p_dyn);
            nodes.push_back(spec);
        }
    }
    return nodes;
}

/// Linear power model, watts.
inline double instantaneous_power(const NodeSpec& spec, double utilization) {
    if (utilization < 0.0 || utilization > 1.0) throw InputError("instantaneous_power: utilization outside [0,1]");
    return spec.p_idle + spec.p_dyn * utilization;
}

/// Joules drawn over dt seconds with aggregate_cpu_in_use cores busy.
inline double step_energy(const NodeSpec& spec, double aggregate_cpu_in_use, double dt) {
    if (aggregate_cpu_in_use < 0.0 || aggregate_cpu_in_use > spec.cpu_capacity)
        throw InputError("step_energy: cpu in use outside [0, capacity]");
    if (!(dt > 0.0)) throw InputError("step_energy: dt must be positive");
    return (spec.p_idle + spec.p_dyn * (aggregate_cpu_in_use / spec.cpu_capacity)) * dt;
}

inline void write_cluster_csv(std::ostream& os, const std::vector<NodeSpec>& nodes) {
    os << "id,tier,cpu,mem,p_idle,p_dyn\n";
    os.precision(17);
    for (const NodeSpec& n : nodes) {
        os << n.id << ',' << tier_name(n.tier) << ',' << n.cpu_capacity << ',' << n.mem_capacity << ','
           << n.p_idle << ',' << n.p_dyn << '\n';
    }
}

}  // namespace marl_sched
