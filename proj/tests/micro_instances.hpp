#pragma once

// Small fixed-assignment scenarios with completion times traced by hand.

#include <string>
#include <vector>

#include "marl_sched/simenv.hpp"

namespace micro {

using namespace marl_sched;

inline Task task(std::size_t id, double arrival, double duration, double cpu, double mem, int priority = 1) {
    return {id, duration, cpu, mem, arrival, priority, deadline_for(arrival, duration, priority)};
}

inline NodeSpec node(std::size_t id, double cpu, double mem, double p_idle = 100.0, double p_dyn = 200.0) {
    NodeSpec n;
    n.id = id;
    n.cpu_capacity = cpu;
    n.mem_capacity = mem;
    n.p_idle = p_idle;
    n.p_dyn = p_dyn;
    return n;
}

struct Placement {
    double time;
    std::size_t task_id;
    std::size_t node_id;
};

struct Instance {
    std::string name;
    std::vector<NodeSpec> nodes;
    std::vector<Task> tasks;
    std::vector<Placement> placements;
    std::vector<double> expected_finish;  // per task id
};

inline std::vector<Instance> instances() {
    std::vector<Instance> out;
    // Idle node, task starts at the scan of the step it was placed in.
    out.push_back({"single", {node(0, 4, 16)}, {task(0, 0, 10, 1, 1)}, {{0, 0, 0}}, {10}});
    // Head-of-line blocking; the blocked task starts when the blocker frees at 12.
    out.push_back({"blocked-head",
                   {node(0, 2, 16), node(1, 4, 16)},
                   {task(0, 0, 12, 2, 1), task(1, 0, 7, 1, 1), task(2, 3, 5, 1, 1)},
                   {{0, 0, 0}, {0, 1, 0}, {5, 2, 1}},
                   {12, 19, 10}});
    // Three nodes, five tasks: a release at the exact scan time frees the slot
    // immediately, and a long blocker delays a queued task to t=20.
    out.push_back({"three-node",
                   {node(0, 2, 8), node(1, 2, 8), node(2, 8, 32)},
                   {task(0, 0, 20, 2, 2), task(1, 0, 5, 1, 1), task(2, 1, 6, 1, 1), task(3, 2, 8, 1, 1),
                    task(4, 4, 3, 8, 4)},
                   {{0, 0, 0}, {0, 1, 1}, {5, 2, 1}, {5, 3, 0}, {5, 4, 2}},
                   {20, 5, 11, 28, 8}});
    // Two short tasks share a node and both fit at once.
    out.push_back({"co-resident",
                   {node(0, 4, 8), node(1, 2, 8)},
                   {task(0, 0, 5, 2, 2), task(1, 0, 9, 2, 2), task(2, 0, 4, 2, 2)},
                   {{0, 0, 0}, {0, 1, 0}, {0, 2, 1}},
                   {5, 9, 4}});
    return out;
}

/// Replays the placements and returns each task's finish time (-1 if never finished).
inline std::vector<double> replay(const Instance& inst, SimConfig cfg = {}) {
    SimState s(cfg, inst.tasks, inst.nodes);
    for (int guard = 0; guard < 1000 && !s.all_resolved(); ++guard) {
        for (const Placement& p : inst.placements) {
            if (p.time == s.time()) s.enqueue_assignment(p.task_id, p.node_id);
        }
        s.advance();
    }
    std::vector<double> finish(inst.tasks.size(), -1.0);
    for (const auto& c : s.completions()) finish[c.task_id] = c.finish_time;
    return finish;
}

}  // namespace micro
