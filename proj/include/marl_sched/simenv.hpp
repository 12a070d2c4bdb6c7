#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cluster.hpp"
#include "errors.hpp"
#include "workload.hpp"

namespace marl_sched {

struct SimConfig {
    double dt = 5.0;
    double max_time = 10'000.0;
    std::size_t queue_feature_window = 8;
    std::size_t neighbor_count = 4;
    std::size_t obs_dim = 50;

    static constexpr std::size_t kNodeFeatures = 7;
    static constexpr std::size_t kNeighborFeatures = 3;
    static constexpr std::size_t kTaskFeatures = 5;

    void validate() const {
        if (!(dt > 0.0)) throw InputError("SimConfig: dt must be positive");
        if (!(max_time > 0.0)) throw InputError("SimConfig: max_time must be positive");
        if (queue_feature_window * kTaskFeatures + kNodeFeatures + kNeighborFeatures != obs_dim)
            throw InputError("SimConfig: queue_feature_window * 5 + 10 must equal obs_dim");
    }
};

enum class TaskStatus { Unarrived, Pending, Queued, Running, Completed, Dropped };

struct RunningTask {
    std::size_t task_id = 0;
    std::size_t node_id = 0;
    double start_time = 0.0;
    double finish_time = 0.0;
};

struct NodeState {
    NodeSpec spec;
    std::vector<RunningTask> running;
    std::deque<std::size_t> queue;
    double energy_joules = 0.0;
    double cpu_in_use = 0.0;
    double mem_in_use = 0.0;
    // Demand of queued (assigned, not yet admitted) tasks.
    double queued_cpu = 0.0;
    double queued_mem = 0.0;

    double utilization() const { return std::clamp(cpu_in_use / spec.cpu_capacity, 0.0, 1.0); }
    double mem_utilization() const { return std::clamp(mem_in_use / spec.mem_capacity, 0.0, 1.0); }
};

struct CompletionRecord {
    std::size_t task_id = 0;
    double arrival = 0.0;
    double finish_time = 0.0;
    double completion_time = 0.0;
    bool met_sla = false;
    int priority = 0;
    std::size_t node_id = 0;
};

struct DropRecord {
    std::size_t task_id = 0;
    double time = 0.0;
    int priority = 0;
};

struct Assignment {
    std::size_t task_id = 0;
    std::size_t node_id = 0;
};

struct StepReport {
    double time_before = 0.0;
    double time_after = 0.0;
    std::vector<Assignment> assignments;  // made since the previous advance
    std::vector<std::size_t> arrived;
    std::vector<CompletionRecord> completed;
    std::vector<DropRecord> dropped;
    std::vector<double> node_energy_joules;
    std::vector<double> utilization;  // per node, after completions and admissions

    double energy_joules() const { return std::accumulate(node_energy_joules.begin(), node_energy_joules.end(), 0.0); }
};

using Observation = std::vector<double>;

inline double population_variance(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size());
}

inline constexpr double kJoulesPerKwh = 3.6e6;

/// Discrete-time cluster simulation for one episode.
///
/// Each call to advance() moves the clock from t to t + dt in a fixed order:
/// release tasks finishing by t + dt, admit queued tasks FIFO (start time t, or
/// the release time that made room),
/// reveal arrivals up to t + dt, drop unassigned tasks past their deadline,
/// accrue energy on the post-admission load, then move the clock.
class SimState {
public:
    SimState(SimConfig config, std::vector<Task> tasks, std::vector<NodeSpec> nodes)
        : config_(config), tasks_(std::move(tasks)) {
        config_.validate();
        if (nodes.empty()) throw InputError("init_episode: node list is empty");
        for (std::size_t i = 1; i < tasks_.size(); ++i) {
            if (tasks_[i].arrival < tasks_[i - 1].arrival) throw InputError("init_episode: tasks not sorted by arrival");
        }
        for (std::size_t i = 0; i < tasks_.size(); ++i) {
            if (tasks_[i].id != i) throw InputError("init_episode: task ids must be 0..n-1 in order");
        }
        nodes_.reserve(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].id != i) throw InputError("init_episode: node ids must be 0..n-1 in order");
            NodeState ns;
            ns.spec = nodes[i];
            nodes_.push_back(std::move(ns));
        }
        freed_.resize(nodes_.size());
        status_.assign(tasks_.size(), TaskStatus::Unarrived);
        // Time 0 is covered at construction: tasks arriving at t <= 0 are visible.
        reveal_arrivals(0.0, nullptr);
    }

    const SimConfig& config() const { return config_; }
    double time() const { return time_; }
    const std::vector<Task>& tasks() const { return tasks_; }
    const Task& task(std::size_t id) const { return tasks_.at(id); }
    const std::vector<NodeState>& nodes() const { return nodes_; }
    const NodeState& node(std::size_t id) const { return nodes_.at(id); }
    std::size_t node_count() const { return nodes_.size(); }
    TaskStatus status(std::size_t task_id) const { return status_.at(task_id); }

    /// Arrived, unassigned tasks in arrival order.
    const std::vector<std::size_t>& pending() const { return pending_; }
    const std::vector<CompletionRecord>& completions() const { return completions_; }
    const std::vector<DropRecord>& drops() const { return drops_; }
    std::size_t steps() const { return steps_; }

    std::size_t count(TaskStatus s) const { return static_cast<std::size_t>(std::count(status_.begin(), status_.end(), s)); }

    bool all_resolved() const { return completions_.size() + drops_.size() == tasks_.size(); }
    bool finished() const { return all_resolved() || time_ >= config_.max_time; }

    std::vector<std::size_t> feasible_nodes(const Task& t) const {
        std::vector<std::size_t> ids;
        for (const NodeState& n : nodes_) {
            if (t.cpu <= n.spec.cpu_capacity && t.mem <= n.spec.mem_capacity) ids.push_back(n.spec.id);
        }
        return ids;
    }

    bool is_feasible(const Task& t, std::size_t node_id) const {
        const NodeSpec& s = nodes_.at(node_id).spec;
        return t.cpu <= s.cpu_capacity && t.mem <= s.mem_capacity;
    }

    /// Append a pending task to a node's FIFO queue. It starts at the first
    /// admission scan where it fits behind everything queued before it.
    void enqueue_assignment(std::size_t task_id, std::size_t node_id) {
        if (task_id >= tasks_.size()) throw InputError("enqueue_assignment: unknown task " + std::to_string(task_id));
        if (node_id >= nodes_.size()) throw AssignmentError("enqueue_assignment: unknown node " + std::to_string(node_id));
        if (status_[task_id] != TaskStatus::Pending)
            throw InputError("enqueue_assignment: task " + std::to_string(task_id) + " is not pending");
        const Task& t = tasks_[task_id];
        if (!is_feasible(t, node_id))
            throw AssignmentError("enqueue_assignment: task " + std::to_string(task_id) + " cannot fit node " +
                                  std::to_string(node_id));
        NodeState& n = nodes_[node_id];
        n.queue.push_back(task_id);
        n.queued_cpu += t.cpu;
        n.queued_mem += t.mem;
        status_[task_id] = TaskStatus::Queued;
        pending_.erase(std::find(pending_.begin(), pending_.end(), task_id));
        assignments_since_step_.push_back({task_id, node_id});
    }

    StepReport advance() {
        StepReport report;
        const double t0 = time_;
        const double t1 = t0 + config_.dt;
        report.time_before = t0;
        report.time_after = t1;
        report.assignments = std::move(assignments_since_step_);
        assignments_since_step_.clear();

        release_finished(t1, report);
        admit_queued(t0);
        reveal_arrivals(t1, &report);
        drop_expired(t1, report);

        report.node_energy_joules.reserve(nodes_.size());
        report.utilization.reserve(nodes_.size());
        for (NodeState& n : nodes_) {
            const double e = step_energy(n.spec, std::min(n.cpu_in_use, n.spec.cpu_capacity), config_.dt);
            n.energy_joules += e;
            report.node_energy_joules.push_back(e);
            report.utilization.push_back(n.utilization());
        }
        util_variance_sum_ += population_variance(report.utilization);
        ++steps_;
        time_ = t1;
        return report;
    }

    std::vector<double> utilizations() const {
        std::vector<double> u;
        u.reserve(nodes_.size());
        for (const NodeState& n : nodes_) u.push_back(n.utilization());
        return u;
    }

    double utilization_variance() const { return population_variance(utilizations()); }

    double mean_step_util_variance() const {
        return steps_ == 0 ? 0.0 : util_variance_sum_ / static_cast<double>(steps_);
    }

    double total_energy_joules() const {
        double e = 0.0;
        for (const NodeState& n : nodes_) e += n.energy_joules;
        return e;
    }

    double total_energy_kwh() const { return total_energy_joules() / kJoulesPerKwh; }

    /// Time the last task was resolved, or max_time if any remain unresolved.
    double makespan() const {
        if (!all_resolved()) return config_.max_time;
        double last = 0.0;
        for (const auto& c : completions_) last = std::max(last, c.finish_time);
        for (const auto& d : drops_) last = std::max(last, d.time);
        return std::min(last, config_.max_time);
    }

    /// Theoretical maximum energy over the horizon, joules.
    double max_energy_joules() const {
        double p = 0.0;
        for (const NodeState& n : nodes_) p += n.spec.p_idle + n.spec.p_dyn;
        return p * config_.max_time;
    }

    /// Local view of one node-agent; every feature lies in [0, 1].
    ///
    /// [0..6]   utilization, memory utilization, min(queue,50)/50, C/32, M/128,
    ///          P_idle/180, P_dyn/400
    /// [7..9]   mean/min/max utilization over the ring neighborhood
    /// [10..]   the oldest pending unassigned tasks, 5 features each, zero-padded
    Observation build_observation(std::size_t node_id) const {
        if (node_id >= nodes_.size()) throw InputError("build_observation: invalid node id");
        Observation o(config_.obs_dim, 0.0);
        const NodeState& n = nodes_[node_id];
        auto clip = [](double x) { return std::clamp(x, 0.0, 1.0); };

        o[0] = n.utilization();
        o[1] = n.mem_utilization();
        o[2] = clip(static_cast<double>(std::min<std::size_t>(n.queue.size(), 50)) / 50.0);
        o[3] = clip(n.spec.cpu_capacity / 32.0);
        o[4] = clip(n.spec.mem_capacity / 128.0);
        o[5] = clip(n.spec.p_idle / 180.0);
        o[6] = clip(n.spec.p_dyn / 400.0);

        const auto neighbors = ring_neighbors(node_id);
        if (!neighbors.empty()) {
            double sum = 0.0;
            double lo = 1.0;
            double hi = 0.0;
            for (std::size_t j : neighbors) {
                const double u = nodes_[j].utilization();
                sum += u;
                lo = std::min(lo, u);
                hi = std::max(hi, u);
            }
            o[7] = sum / static_cast<double>(neighbors.size());
            o[8] = lo;
            o[9] = hi;
        }

        std::size_t pos = SimConfig::kNodeFeatures + SimConfig::kNeighborFeatures;
        const std::size_t window = std::min(config_.queue_feature_window, pending_.size());
        for (std::size_t k = 0; k < window; ++k) {
            const Task& t = tasks_[pending_[k]];
            o[pos++] = clip(t.cpu / 32.0);
            o[pos++] = clip(t.mem / 128.0);
            o[pos++] = clip((3.0 - t.priority) / 3.0);
            o[pos++] = clip((t.deadline - time_) / (t.deadline - t.arrival));
            o[pos++] = clip(std::log(t.duration / 5.0) / std::log(1000.0));
        }
        return o;
    }

    /// Index-adjacent nodes at offsets -k/2..k/2 (excluding self), wrapping.
    std::vector<std::size_t> ring_neighbors(std::size_t node_id) const {
        std::vector<std::size_t> out;
        const auto n = static_cast<long long>(nodes_.size());
        const auto half = static_cast<long long>(config_.neighbor_count / 2);
        for (long long off = 1; off <= half; ++off) {
            for (long long sign : {-1LL, 1LL}) {
                const auto j = static_cast<std::size_t>(((static_cast<long long>(node_id) + sign * off) % n + n) % n);
                if (j != node_id && std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    void release_finished(double t1, StepReport& report) {
        for (NodeState& n : nodes_) {
            auto done = std::stable_partition(n.running.begin(), n.running.end(),
                                              [t1](const RunningTask& r) { return r.finish_time > t1; });
            auto& freed = freed_[n.spec.id];
            freed.clear();
            for (auto it = done; it != n.running.end(); ++it) {
                freed.push_back(*it);
                const Task& t = tasks_[it->task_id];
                CompletionRecord rec;
                rec.task_id = t.id;
                rec.arrival = t.arrival;
                rec.finish_time = it->finish_time;
                rec.completion_time = it->finish_time - t.arrival;
                rec.met_sla = it->finish_time <= t.deadline;
                rec.priority = t.priority;
                rec.node_id = n.spec.id;
                status_[t.id] = TaskStatus::Completed;
                report.completed.push_back(rec);
            }
            n.running.erase(done, n.running.end());
            recompute_load(n);
        }
        std::sort(report.completed.begin(), report.completed.end(), [](const auto& a, const auto& b) {
            return std::pair(a.finish_time, a.task_id) < std::pair(b.finish_time, b.task_id);
        });
        completions_.insert(completions_.end(), report.completed.begin(), report.completed.end());
    }

    // Strict FIFO: a head task that does not fit blocks the rest of the queue.
    // A task that only fits thanks to a release during this step starts at the
    // release time, never before the previous admission.
    void admit_queued(double t0) {
        constexpr double kSlack = 1e-9;
        for (NodeState& n : nodes_) {
            const auto& freed = freed_[n.spec.id];
            double last_start = t0;
            while (!n.queue.empty()) {
                const Task& t = tasks_[n.queue.front()];
                auto fits = [&](double cpu, double mem) {
                    return cpu + t.cpu <= n.spec.cpu_capacity + kSlack && mem + t.mem <= n.spec.mem_capacity + kSlack;
                };
                if (!fits(n.cpu_in_use, n.mem_in_use)) break;
                double start = t0;
                for (;;) {
                    double cpu = n.cpu_in_use;
                    double mem = n.mem_in_use;
                    double next = start;
                    for (const RunningTask& r : freed) {
                        if (r.finish_time <= start) continue;
                        cpu += tasks_[r.task_id].cpu;
                        mem += tasks_[r.task_id].mem;
                        if (next == start || r.finish_time < next) next = r.finish_time;
                    }
                    if (fits(cpu, mem) || next == start) break;
                    start = next;
                }
                start = std::max(start, last_start);
                last_start = start;
                n.queue.pop_front();
                n.running.push_back({t.id, n.spec.id, start, start + t.duration});
                status_[t.id] = TaskStatus::Running;
                recompute_load(n);
            }
        }
    }

    void reveal_arrivals(double t1, StepReport* report) {
        while (next_arrival_ < tasks_.size() && tasks_[next_arrival_].arrival <= t1) {
            status_[next_arrival_] = TaskStatus::Pending;
            pending_.push_back(next_arrival_);
            if (report) report->arrived.push_back(next_arrival_);
            ++next_arrival_;
        }
    }

    void drop_expired(double t1, StepReport& report) {
        auto expired = std::stable_partition(pending_.begin(), pending_.end(),
                                             [&](std::size_t id) { return !(tasks_[id].deadline < t1); });
        for (auto it = expired; it != pending_.end(); ++it) {
            status_[*it] = TaskStatus::Dropped;
            DropRecord d{*it, t1, tasks_[*it].priority};
            drops_.push_back(d);
            report.dropped.push_back(d);
        }
        pending_.erase(expired, pending_.end());
    }

    // Sums are recomputed from scratch so repeated add/remove cannot drift.
    void recompute_load(NodeState& n) const {
        n.cpu_in_use = 0.0;
        n.mem_in_use = 0.0;
        for (const RunningTask& r : n.running) {
            n.cpu_in_use += tasks_[r.task_id].cpu;
            n.mem_in_use += tasks_[r.task_id].mem;
        }
        n.queued_cpu = 0.0;
        n.queued_mem = 0.0;
        for (std::size_t id : n.queue) {
            n.queued_cpu += tasks_[id].cpu;
            n.queued_mem += tasks_[id].mem;
        }
    }

    SimConfig config_;
    std::vector<Task> tasks_;
    std::vector<NodeState> nodes_;
    std::vector<TaskStatus> status_;
    std::vector<std::size_t> pending_;
    std::vector<CompletionRecord> completions_;
    std::vector<DropRecord> drops_;
    std::vector<Assignment> assignments_since_step_;
    std::vector<std::vector<RunningTask>> freed_;  // released during the current advance, per node
    std::size_t next_arrival_ = 0;
    double time_ = 0.0;
    double util_variance_sum_ = 0.0;
    std::size_t steps_ = 0;
};

inline SimState init_episode(const SimConfig& config, std::vector<Task> tasks, std::vector<NodeSpec> nodes) {
    return SimState(config, std::move(tasks), std::move(nodes));
}

}  // namespace marl_sched
