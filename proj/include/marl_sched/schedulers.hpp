#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rng.hpp"
#include "simenv.hpp"

namespace marl_sched {

struct SchedulerDecision {
    std::size_t task_id = 0;
    std::optional<std::size_t> node;  // empty = REJECT, task stays pending

    bool rejected() const { return !node.has_value(); }
};

/// Common driver-facing interface. One instance is owned by one episode run at
/// a time; begin_episode() resets all per-episode state.
class Scheduler {
public:
    virtual ~Scheduler() = default;

    virtual std::string name() const = 0;
    virtual void begin_episode(const SimState& /*state*/, std::size_t /*episode*/) {}
    /// Decisions for the currently pending tasks.
    virtual std::vector<SchedulerDecision> decide(const SimState& state) = 0;
    virtual void observe(const StepReport& /*report*/, const SimState& /*state*/) {}
    virtual void end_episode(const SimState& /*state*/) {}
    /// Whether state carries across episodes (forces sequential episodes).
    virtual bool learns() const { return false; }
};

inline SchedulerDecision schedule_random(const SimState& state, const Task& task, RngStream& s) {
    const auto feasible = state.feasible_nodes(task);
    if (feasible.empty()) return {task.id, std::nullopt};
    return {task.id, feasible[s.index(feasible.size())]};
}

/// Smooth weighted round-robin credits, one per node.
struct WrrCursor {
    std::vector<double> credit;

    void reset(std::size_t nodes) { credit.assign(nodes, 0.0); }
};

// Every feasible node gains its capacity in credit; the richest wins (lowest
// id on ties) and pays back the feasible total.
inline SchedulerDecision schedule_weighted_rr(const SimState& state, const Task& task, WrrCursor& cursor) {
    if (cursor.credit.size() != state.node_count()) cursor.reset(state.node_count());
    const auto feasible = state.feasible_nodes(task);
    if (feasible.empty()) return {task.id, std::nullopt};
    double total = 0.0;
    std::size_t best = feasible.front();
    for (std::size_t id : feasible) {
        const double w = state.node(id).spec.cpu_capacity;
        cursor.credit[id] += w;
        total += w;
        if (cursor.credit[id] > cursor.credit[best]) best = id;
    }
    cursor.credit[best] -= total;
    return {task.id, best};
}

/// Priority-first, least-loaded immediate-start assignment. Tasks that no node
/// can start right now are rejected and retried on later steps.
inline std::vector<SchedulerDecision> schedule_priority_minmin(const SimState& state,
                                                               const std::vector<std::size_t>& pending) {
    std::vector<std::size_t> order(pending);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Task& ta = state.task(a);
        const Task& tb = state.task(b);
        if (ta.priority != tb.priority) return ta.priority < tb.priority;
        if (ta.arrival != tb.arrival) return ta.arrival < tb.arrival;
        return a < b;
    });

    const std::size_t n = state.node_count();
    std::vector<double> cpu(n);
    std::vector<double> mem(n);
    for (std::size_t i = 0; i < n; ++i) {
        cpu[i] = state.node(i).cpu_in_use + state.node(i).queued_cpu;
        mem[i] = state.node(i).mem_in_use + state.node(i).queued_mem;
    }

    std::vector<SchedulerDecision> out;
    out.reserve(order.size());
    for (std::size_t id : order) {
        const Task& t = state.task(id);
        std::optional<std::size_t> best;
        double best_u = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const NodeSpec& s = state.node(i).spec;
            if (cpu[i] + t.cpu > s.cpu_capacity || mem[i] + t.mem > s.mem_capacity) continue;
            const double u = cpu[i] / s.cpu_capacity;
            if (!best || u < best_u) {
                best = i;
                best_u = u;
            }
        }
        if (best) {
            cpu[*best] += t.cpu;
            mem[*best] += t.mem;
        }
        out.push_back({id, best});
    }
    return out;
}

class RandomScheduler : public Scheduler {
public:
    explicit RandomScheduler(std::uint64_t master_seed) : seed_(master_seed) {}

    std::string name() const override { return "random"; }

    void begin_episode(const SimState&, std::size_t episode) override {
        stream_ = derive_stream(seed_, "random-" + std::to_string(episode));
    }

    std::vector<SchedulerDecision> decide(const SimState& state) override {
        std::vector<SchedulerDecision> out;
        for (std::size_t id : state.pending()) out.push_back(schedule_random(state, state.task(id), stream_));
        return out;
    }

private:
    std::uint64_t seed_;
    RngStream stream_{0, "random"};
};

class WeightedRoundRobinScheduler : public Scheduler {
public:
    std::string name() const override { return "wrr"; }

    void begin_episode(const SimState& state, std::size_t) override { cursor_.reset(state.node_count()); }

    std::vector<SchedulerDecision> decide(const SimState& state) override {
        std::vector<SchedulerDecision> out;
        for (std::size_t id : state.pending()) out.push_back(schedule_weighted_rr(state, state.task(id), cursor_));
        return out;
    }

    const WrrCursor& cursor() const { return cursor_; }

private:
    WrrCursor cursor_;
};

class PriorityMinMinScheduler : public Scheduler {
public:
    std::string name() const override { return "minmin"; }

    std::vector<SchedulerDecision> decide(const SimState& state) override {
        return schedule_priority_minmin(state, state.pending());
    }
};

}  // namespace marl_sched
