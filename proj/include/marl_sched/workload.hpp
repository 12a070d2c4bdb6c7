#pragma once

#include <array>
#include <cstddef>
#include <ostream>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace marl_sched {

/// Priority classes: 0 = Production, 1 = Batch, 2 = Best-effort.
inline constexpr int kNumPriorities = 3;

struct Task {
    std::size_t id = 0;
    double duration = 0.0;  // seconds
    double cpu = 0.0;       // cores
    double mem = 0.0;       // GB
    double arrival = 0.0;   // seconds
    int priority = 0;
    double deadline = 0.0;  // seconds
};

struct WorkloadParams {
    double pareto_alpha = 1.5;
    double min_duration = 5.0;
    double cpu_mu = 0.5;
    double cpu_sigma = 0.8;
    double mem_mu = 2.0;
    double mem_sigma = 1.0;
    double arrival_rate = 0.5;
    std::array<double, kNumPriorities> priority_mix{0.25, 0.60, 0.15};
};

/// Deadline slack multiplier per priority class.
inline double deadline_multiplier(int priority) {
    static constexpr std::array<double, kNumPriorities> kMultiplier{1.5, 3.0, 5.0};
    if (priority < 0 || priority >= kNumPriorities) throw InputError("priority must be in {0,1,2}");
    return kMultiplier[static_cast<std::size_t>(priority)];
}

inline double deadline_for(double arrival, double duration, int priority) {
    if (!(duration > 0.0)) throw InputError("deadline_for: duration must be positive");
    return arrival + deadline_multiplier(priority) * duration;
}

// Per task the draw order is fixed: inter-arrival, duration, cpu, mem, priority.
inline std::vector<Task> generate_workload(RngStream& s, std::size_t count, const WorkloadParams& p = {}) {
    if (count == 0) throw InputError("generate_workload: count must be >= 1");
    if (!(p.arrival_rate > 0.0)) throw InputError("generate_workload: arrival_rate must be positive");
    std::vector<Task> tasks;
    tasks.reserve(count);
    double clock = 0.0;
    for (std::size_t id = 0; id < count; ++id) {
        Task t;
        t.id = id;
        clock += sample_exponential(s, p.arrival_rate);
        t.arrival = clock;
        t.duration = sample_pareto(s, p.pareto_alpha, p.min_duration);
        t.cpu = sample_lognormal(s, p.cpu_mu, p.cpu_sigma);
        t.mem = sample_lognormal(s, p.mem_mu, p.mem_sigma);
        t.priority = static_cast<int>(sample_categorical(s, p.priority_mix));
        t.deadline = deadline_for(t.arrival, t.duration, t.priority);
        tasks.push_back(t);
    }
    return tasks;
}

inline void write_workload_csv(std::ostream& os, const std::vector<Task>& tasks) {
    os << "id,arrival,duration,cpu,mem,priority,deadline\n";
    os.precision(17);
    for (const Task& t : tasks) {
        os << t.id << ',' << t.arrival << ',' << t.duration << ',' << t.cpu << ',' << t.mem << ','
           << t.priority << ',' << t.deadline << '\n';
    }
}

}  // namespace marl_sched
