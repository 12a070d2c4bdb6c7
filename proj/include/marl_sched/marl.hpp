#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "rng.hpp"
#include "schedulers.hpp"
#include "simenv.hpp"

namespace marl_sched {

struct Hyperparams {
    std::size_t obs_dim = 50;
    std::size_t hidden = 128;
    std::size_t n_actions = 100;

    double learning_rate = 0.001;
    double lr_decay = 0.9995;  // per update step
    double gamma = 0.99;
    double grad_clip_norm = 1.0;  // global L2 bound on each update; 0 disables

    std::size_t replay_capacity = 10'000;
    std::size_t batch_size = 32;
    double per_epsilon = 0.01;
    double per_exponent = 0.6;

    double explore_epsilon_start = 0.3;
    double explore_epsilon_decay = 0.995;  // per episode
    double explore_epsilon_min = 0.01;

    // Task ordering score: class urgency, remaining slack, resource size.
    double score_class = 0.4;
    double score_slack = 0.3;
    double score_resource = 0.3;

    // Task-to-node assignment score.
    double w_pi = 0.25;
    double w_load = 0.30;
    double w_mem = 0.20;
    double w_compat = 0.15;
    double w_prio = 0.10;

    // Shaped reward.
    double sla_plus = 15.0;
    double sla_minus = 20.0;
    double compl_base = 100.0;
    double compl_slope = 0.5;
    double energy_coef = 0.3;
    double balance_coef = 200.0;

    void validate() const {
        auto in_unit = [](double x) { return x > 0.0 && x <= 1.0; };
        if (!in_unit(learning_rate) || !in_unit(lr_decay) || !in_unit(per_exponent) || !in_unit(explore_epsilon_decay))
            throw InputError("Hyperparams: rates must lie in (0, 1]");
        if (gamma < 0.0 || gamma > 1.0) throw InputError("Hyperparams: gamma must lie in [0, 1]");
        if (!(grad_clip_norm >= 0.0)) throw InputError("Hyperparams: grad_clip_norm must be non-negative");
        if (std::abs(w_pi + w_load + w_mem + w_compat + w_prio - 1.0) > 1e-9)
            throw InputError("Hyperparams: assignment weights must sum to 1");
        if (obs_dim == 0 || hidden == 0 || n_actions == 0 || batch_size == 0 || replay_capacity == 0)
            throw InputError("Hyperparams: sizes must be positive");
    }
};

inline constexpr std::size_t parameter_count(std::size_t obs_dim, std::size_t hidden, std::size_t n_actions) {
    return obs_dim * hidden + hidden + hidden * n_actions + n_actions + hidden + 1;
}

/// Actor-critic weights for one node-agent: a shared ReLU layer feeding a
/// softmax policy head over all nodes and a scalar value head.
struct AgentParams {
    Eigen::MatrixXd w1;  // hidden x obs_dim
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // n_actions x hidden
    Eigen::VectorXd b2;
    Eigen::VectorXd wv;  // hidden
    double bv = 0.0;
    double current_lr = 0.001;

    std::size_t obs_dim() const { return static_cast<std::size_t>(w1.cols()); }
    std::size_t hidden() const { return static_cast<std::size_t>(w1.rows()); }
    std::size_t n_actions() const { return static_cast<std::size_t>(w2.rows()); }

    std::size_t size() const {
        return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + wv.size()) + 1;
    }

    bool all_finite() const {
        return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() && wv.allFinite() &&
               std::isfinite(bv) && std::isfinite(current_lr);
    }

    static AgentParams zeros(std::size_t obs_dim, std::size_t hidden, std::size_t n_actions, double lr = 0.001) {
        AgentParams p;
        const auto o = static_cast<Eigen::Index>(obs_dim);
        const auto h = static_cast<Eigen::Index>(hidden);
        const auto n = static_cast<Eigen::Index>(n_actions);
        p.w1 = Eigen::MatrixXd::Zero(h, o);
        p.b1 = Eigen::VectorXd::Zero(h);
        p.w2 = Eigen::MatrixXd::Zero(n, h);
        p.b2 = Eigen::VectorXd::Zero(n);
        p.wv = Eigen::VectorXd::Zero(h);
        p.bv = 0.0;
        p.current_lr = lr;
        return p;
    }
};

/// Weights uniform in +-sqrt(2 / fan_in); biases zero.
inline AgentParams init_agent(RngStream& s, const Hyperparams& h) {
    AgentParams p = AgentParams::zeros(h.obs_dim, h.hidden, h.n_actions, h.learning_rate);
    auto fill = [&s](Eigen::Ref<Eigen::MatrixXd> m, std::size_t fan_in) {
        const double scale = std::sqrt(6.0 / static_cast<double>(fan_in));  // He-uniform bound
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = scale * (2.0 * s.uniform() - 1.0);
    };
    fill(p.w1, h.obs_dim);
    fill(p.w2, h.hidden);
    fill(p.wv, h.hidden);
    return p;
}

struct ForwardPass {
    Eigen::VectorXd pre;     // W1 o + b1
    Eigen::VectorXd hidden;  // ReLU(pre)
    Eigen::VectorXd policy;
    double value = 0.0;
};

/// Numerically stable softmax (max-logit subtraction).
inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp().matrix();
    return e / e.sum();
}

inline ForwardPass forward(const AgentParams& p, std::span<const double> obs) {
    if (obs.size() != p.obs_dim())
        throw InputError("forward: observation length " + std::to_string(obs.size()) + " != " +
                         std::to_string(p.obs_dim()));
    const Eigen::Map<const Eigen::VectorXd> o(obs.data(), static_cast<Eigen::Index>(obs.size()));
    ForwardPass f;
    f.pre = p.w1 * o + p.b1;
    f.hidden = f.pre.cwiseMax(0.0);
    f.policy = softmax(p.w2 * f.hidden + p.b2);
    f.value = p.wv.dot(f.hidden) + p.bv;
    if (!f.policy.allFinite() || !std::isfinite(f.value)) throw InternalError("forward: non-finite network output");
    return f;
}

inline double value_of(const AgentParams& p, std::span<const double> obs) {
    const Eigen::Map<const Eigen::VectorXd> o(obs.data(), static_cast<Eigen::Index>(obs.size()));
    return p.wv.dot((p.w1 * o + p.b1).cwiseMax(0.0)) + p.bv;
}

struct Transition {
    std::size_t agent_id = 0;
    Observation obs;
    std::size_t action = 0;
    double reward = 0.0;
    Observation next_obs;
    bool terminal = false;
    double priority = 0.01;
};

/// r + gamma * V(o') - V(o), without bootstrap on terminal transitions.
inline double td_error(const AgentParams& p, const Transition& tr, double gamma) {
    const double bootstrap = tr.terminal ? 0.0 : gamma * value_of(p, tr.next_obs);
    return tr.reward + bootstrap - value_of(p, tr.obs);
}

inline double replay_priority(double delta, double epsilon) { return std::abs(delta) + epsilon; }

/// Fixed-capacity ring of transitions with per-item priorities; the oldest
/// item is overwritten once full.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 10'000) : capacity_(capacity) {
        if (capacity == 0) throw InputError("ReplayBuffer: capacity must be positive");
    }

    void add(Transition tr) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(tr));
        } else {
            items_[next_] = std::move(tr);
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }
    const Transition& at(std::size_t i) const { return items_.at(i); }
    void set_priority(std::size_t i, double priority) { items_.at(i).priority = priority; }

    /// Indices drawn with replacement, P(i) proportional to priority^exponent.
    std::vector<std::size_t> sample(std::size_t batch, RngStream& s, double exponent) const {
        if (items_.empty()) throw StateError("ReplayBuffer::sample: buffer is empty");
        std::vector<double> weights(items_.size());
        double total = 0.0;
        for (std::size_t i = 0; i < items_.size(); ++i) {
            weights[i] = std::pow(items_[i].priority, exponent);
            total += weights[i];
        }
        for (double& w : weights) w /= total;
        std::vector<std::size_t> out(batch);
        for (auto& idx : out) idx = sample_categorical(s, weights);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
};

inline void replay_add(ReplayBuffer& buf, Transition tr, double delta, double epsilon) {
    tr.priority = replay_priority(delta, epsilon);
    buf.add(std::move(tr));
}

inline std::vector<Transition> replay_sample(const ReplayBuffer& buf, std::size_t batch, RngStream& s,
                                             double exponent = 0.6) {
    std::vector<Transition> out;
    for (std::size_t i : buf.sample(batch, s, exponent)) out.push_back(buf.at(i));
    return out;
}

struct Gradients {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
    Eigen::VectorXd wv;
    double bv = 0.0;

    bool all_finite() const {
        return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() && wv.allFinite() &&
               std::isfinite(bv);
    }

    double norm() const {
        return std::sqrt(w1.squaredNorm() + b1.squaredNorm() + w2.squaredNorm() + b2.squaredNorm() +
                         wv.squaredNorm() + bv * bv);
    }
};

struct BatchGradients {
    Gradients grad;              // descent direction of the combined loss
    std::vector<double> deltas;  // TD error per transition
};

/// Batch-averaged gradient of
///   -log pi(a|o) * delta  +  0.5 * (target - V(o))^2
/// with delta and target = r + gamma V(o') held constant. Descending it is
/// policy-gradient ascent for the actor and semi-gradient TD for the critic;
/// both heads backpropagate into the shared layer.
inline BatchGradients compute_gradients(const AgentParams& p, std::span<const Transition> batch, double gamma) {
    if (batch.empty()) throw InputError("apply_update: batch is empty");
    const auto b = static_cast<Eigen::Index>(batch.size());
    const auto od = static_cast<Eigen::Index>(p.obs_dim());
    const auto na = static_cast<Eigen::Index>(p.n_actions());

    Eigen::MatrixXd obs(od, b);
    Eigen::MatrixXd next(od, b);
    for (Eigen::Index k = 0; k < b; ++k) {
        const Transition& tr = batch[static_cast<std::size_t>(k)];
        if (static_cast<Eigen::Index>(tr.obs.size()) != od || static_cast<Eigen::Index>(tr.next_obs.size()) != od)
            throw InputError("apply_update: observation length mismatch");
        if (static_cast<Eigen::Index>(tr.action) >= na) throw InputError("apply_update: action out of range");
        obs.col(k) = Eigen::Map<const Eigen::VectorXd>(tr.obs.data(), od);
        next.col(k) = Eigen::Map<const Eigen::VectorXd>(tr.next_obs.data(), od);
    }

    const Eigen::MatrixXd pre = (p.w1 * obs).colwise() + p.b1;
    const Eigen::MatrixXd hid = pre.cwiseMax(0.0);
    const Eigen::RowVectorXd values = (p.wv.transpose() * hid).array() + p.bv;
    const Eigen::RowVectorXd next_values =
        (p.wv.transpose() * ((p.w1 * next).colwise() + p.b1).cwiseMax(0.0)).array() + p.bv;

    Eigen::MatrixXd logits = (p.w2 * hid).colwise() + p.b2;
    Eigen::MatrixXd policy(na, b);
    for (Eigen::Index k = 0; k < b; ++k) policy.col(k) = softmax(logits.col(k));

    BatchGradients out;
    out.deltas.resize(batch.size());
    const double inv_b = 1.0 / static_cast<double>(b);
    Eigen::MatrixXd d_logits(na, b);
    Eigen::RowVectorXd d_value(b);
    for (Eigen::Index k = 0; k < b; ++k) {
        const Transition& tr = batch[static_cast<std::size_t>(k)];
        const double bootstrap = tr.terminal ? 0.0 : gamma * next_values(k);
        const double delta = tr.reward + bootstrap - values(k);
        out.deltas[static_cast<std::size_t>(k)] = delta;
        // d(-log pi(a)) / d logits = pi - onehot(a)
        d_logits.col(k) = policy.col(k) * (delta * inv_b);
        d_logits(static_cast<Eigen::Index>(tr.action), k) -= delta * inv_b;
        d_value(k) = -delta * inv_b;
    }

    Gradients& g = out.grad;
    g.w2 = d_logits * hid.transpose();
    g.b2 = d_logits.rowwise().sum();
    g.wv = hid * d_value.transpose();
    g.bv = d_value.sum();
    Eigen::MatrixXd d_hidden = p.w2.transpose() * d_logits + p.wv * d_value;
    d_hidden = d_hidden.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    g.w1 = d_hidden * obs.transpose();
    g.b1 = d_hidden.rowwise().sum();
    return out;
}

/// One gradient step at the current learning rate, then decay the rate. With
/// clip_norm > 0 the step is rescaled so the gradient norm is at most clip_norm.
/// Returns the TD errors of the batch (computed before the step).
inline std::vector<double> apply_update(AgentParams& p, std::span<const Transition> batch, double gamma,
                                        double lr_decay = 0.9995, double clip_norm = 0.0) {
    BatchGradients bg = compute_gradients(p, batch, gamma);
    if (!bg.grad.all_finite()) throw InternalError("apply_update: non-finite gradient");
    double lr = p.current_lr;
    if (clip_norm > 0.0) {
        const double n = bg.grad.norm();
        if (n > clip_norm) lr *= clip_norm / n;
    }
    p.w1 -= lr * bg.grad.w1;
    p.b1 -= lr * bg.grad.b1;
    p.w2 -= lr * bg.grad.w2;
    p.b2 -= lr * bg.grad.b2;
    p.wv -= lr * bg.grad.wv;
    p.bv -= lr * bg.grad.bv;
    p.current_lr *= lr_decay;
    if (!p.all_finite()) throw InternalError("apply_update: parameters became non-finite");
    return std::move(bg.deltas);
}

inline double decay_explore(double epsilon, double decay = 0.995, double floor = 0.01) {
    return std::max(epsilon * decay, floor);
}

/// Normalized resource demand of a task against the largest node tier.
inline double resource_demand(const Task& t) { return std::clamp((t.cpu / 32.0 + t.mem / 128.0) / 2.0, 0.0, 1.0); }

/// Ordering score; higher is scheduled first.
inline double priority_score(const Task& t, double now, const Hyperparams& h) {
    const double window = t.deadline - t.arrival;
    const double slack = window > 0.0 ? (t.deadline - now) / window : 0.0;
    return h.score_class * (3.0 - t.priority) + h.score_slack * slack + h.score_resource * resource_demand(t);
}

inline double compatibility(const Task& t, const NodeSpec& node) {
    return std::clamp(1.0 - std::abs(t.cpu / node.cpu_capacity - 0.5), 0.0, 1.0);
}

inline double assignment_score(double self_probability, double utilization, double mem_fraction, double compat,
                               int priority, const Hyperparams& h) {
    return h.w_pi * self_probability + h.w_load * (1.0 - utilization) + h.w_mem * (1.0 - mem_fraction) +
           h.w_compat * compat + h.w_prio * priority;
}

/// Score against the node's current (running-task) load.
inline double assignment_score(double self_probability, const SimState& state, const Task& t, std::size_t node_id,
                               const Hyperparams& h) {
    const NodeState& n = state.node(node_id);
    return assignment_score(self_probability, n.utilization(), n.mem_utilization(), compatibility(t, n.spec),
                            t.priority, h);
}

struct SelectionOutcome {
    std::vector<SchedulerDecision> decisions;
    std::vector<Observation> observations;  // per node, as scored; empty when nothing was pending
};

/// Hybrid selection: tasks in descending priority_score order; each goes to the
/// feasible node with the best assignment score (epsilon-greedy over feasible
/// nodes). Load and memory terms use committed demand (running + queued +
/// placed earlier in this round), clipped to 1.
inline SelectionOutcome select_assignments(const SimState& state, const std::vector<AgentParams>& agents,
                                           RngStream& s, const Hyperparams& h, double explore_epsilon) {
    SelectionOutcome out;
    const auto& pending = state.pending();
    if (pending.empty()) return out;
    const std::size_t n = state.node_count();
    if (agents.size() != n) throw InputError("select_assignments: one agent per node required");

    std::vector<double> self_prob(n);
    out.observations.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.observations[i] = state.build_observation(i);
        self_prob[i] = forward(agents[i], out.observations[i]).policy(static_cast<Eigen::Index>(i));
    }

    std::vector<double> cpu(n);
    std::vector<double> mem(n);
    for (std::size_t i = 0; i < n; ++i) {
        cpu[i] = state.node(i).cpu_in_use + state.node(i).queued_cpu;
        mem[i] = state.node(i).mem_in_use + state.node(i).queued_mem;
    }

    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(pending.size());
    for (std::size_t id : pending) order.emplace_back(priority_score(state.task(id), state.time(), h), id);
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    for (const auto& [score, id] : order) {
        const Task& t = state.task(id);
        const auto feasible = state.feasible_nodes(t);
        if (feasible.empty()) {
            out.decisions.push_back({id, std::nullopt});
            continue;
        }
        std::size_t chosen = feasible.front();
        if (explore_epsilon > 0.0 && s.uniform() < explore_epsilon) {
            chosen = feasible[s.index(feasible.size())];
        } else {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i : feasible) {
                const NodeSpec& spec = state.node(i).spec;
                const double u = std::min(1.0, cpu[i] / spec.cpu_capacity);
                const double m = std::min(1.0, mem[i] / spec.mem_capacity);
                const double sc = assignment_score(self_prob[i], u, m, compatibility(t, spec), t.priority, h);
                if (sc > best) {
                    best = sc;
                    chosen = i;
                }
            }
        }
        cpu[chosen] += t.cpu;
        mem[chosen] += t.mem;
        out.decisions.push_back({id, chosen});
    }
    return out;
}

/// Shared team reward for one simulation step.
inline double compute_step_reward(const StepReport& report, const Hyperparams& h) {
    double r = 0.0;
    for (const CompletionRecord& c : report.completed) {
        const double weight = 4.0 - c.priority;
        r += c.met_sla ? h.sla_plus * weight : -h.sla_minus * weight;
        r += std::max(0.0, h.compl_base - h.compl_slope * c.completion_time);
    }
    for (const DropRecord& d : report.dropped) r -= h.sla_minus * (4.0 - d.priority);
    r -= h.energy_coef * (report.energy_joules() / kJoulesPerKwh);
    r -= h.balance_coef * population_variance(report.utilization);
    return r;
}

// Checkpoint: little-endian binary. Header: magic, version, obs_dim, hidden,
// n_actions, agent count, episode, lr; then per agent its parameter count and
// the flat values (w1 row-major, b1, w2 row-major, b2, wv, bv, current_lr).
inline constexpr char kCheckpointMagic[8] = {'M', 'S', 'C', 'H', 'K', 'P', 'T', '1'};

struct CheckpointHeader {
    std::uint64_t obs_dim = 0;
    std::uint64_t hidden = 0;
    std::uint64_t n_actions = 0;
    std::uint64_t agents = 0;
    std::uint64_t episode = 0;
    double lr = 0.0;
};

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw InputError("checkpoint: truncated file");
    return v;
}

}  // namespace detail

inline void save_checkpoint(std::ostream& os, const std::vector<AgentParams>& agents, std::uint64_t episode) {
    if (agents.empty()) throw InputError("save_checkpoint: no agents");
    const AgentParams& a0 = agents.front();
    os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::put<std::uint32_t>(os, 1);
    detail::put<std::uint64_t>(os, a0.obs_dim());
    detail::put<std::uint64_t>(os, a0.hidden());
    detail::put<std::uint64_t>(os, a0.n_actions());
    detail::put<std::uint64_t>(os, agents.size());
    detail::put<std::uint64_t>(os, episode);
    detail::put<double>(os, a0.current_lr);
    for (const AgentParams& a : agents) {
        detail::put<std::uint64_t>(os, a.size());
        for (Eigen::Index r = 0; r < a.w1.rows(); ++r)
            for (Eigen::Index c = 0; c < a.w1.cols(); ++c) detail::put(os, a.w1(r, c));
        for (Eigen::Index i = 0; i < a.b1.size(); ++i) detail::put(os, a.b1(i));
        for (Eigen::Index r = 0; r < a.w2.rows(); ++r)
            for (Eigen::Index c = 0; c < a.w2.cols(); ++c) detail::put(os, a.w2(r, c));
        for (Eigen::Index i = 0; i < a.b2.size(); ++i) detail::put(os, a.b2(i));
        for (Eigen::Index i = 0; i < a.wv.size(); ++i) detail::put(os, a.wv(i));
        detail::put(os, a.bv);
        detail::put(os, a.current_lr);
    }
    if (!os) throw InputError("save_checkpoint: write failed");
}

inline std::vector<AgentParams> load_checkpoint(std::istream& is, CheckpointHeader* header_out = nullptr) {
    char magic[sizeof(kCheckpointMagic)];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw InputError("checkpoint: bad magic");
    if (detail::get<std::uint32_t>(is) != 1) throw InputError("checkpoint: unsupported version");
    CheckpointHeader h;
    h.obs_dim = detail::get<std::uint64_t>(is);
    h.hidden = detail::get<std::uint64_t>(is);
    h.n_actions = detail::get<std::uint64_t>(is);
    h.agents = detail::get<std::uint64_t>(is);
    h.episode = detail::get<std::uint64_t>(is);
    h.lr = detail::get<double>(is);
    if (h.obs_dim == 0 || h.hidden == 0 || h.n_actions == 0 || h.agents == 0 || h.obs_dim > (1u << 20) ||
        h.hidden > (1u << 20) || h.n_actions > (1u << 20) || h.agents > (1u << 20))
        throw InputError("checkpoint: implausible header dimensions");
    const std::size_t expected = parameter_count(h.obs_dim, h.hidden, h.n_actions);
    std::vector<AgentParams> agents;
    agents.reserve(h.agents);
    for (std::uint64_t k = 0; k < h.agents; ++k) {
        const auto count = detail::get<std::uint64_t>(is);
        if (count != expected)
            throw InputError("checkpoint: agent " + std::to_string(k) + " has " + std::to_string(count) +
                             " parameters, expected " + std::to_string(expected));
        AgentParams a = AgentParams::zeros(h.obs_dim, h.hidden, h.n_actions);
        for (Eigen::Index r = 0; r < a.w1.rows(); ++r)
            for (Eigen::Index c = 0; c < a.w1.cols(); ++c) a.w1(r, c) = detail::get<double>(is);
        for (Eigen::Index i = 0; i < a.b1.size(); ++i) a.b1(i) = detail::get<double>(is);
        for (Eigen::Index r = 0; r < a.w2.rows(); ++r)
            for (Eigen::Index c = 0; c < a.w2.cols(); ++c) a.w2(r, c) = detail::get<double>(is);
        for (Eigen::Index i = 0; i < a.b2.size(); ++i) a.b2(i) = detail::get<double>(is);
        for (Eigen::Index i = 0; i < a.wv.size(); ++i) a.wv(i) = detail::get<double>(is);
        a.bv = detail::get<double>(is);
        a.current_lr = detail::get<double>(is);
        if (!a.all_finite()) throw InputError("checkpoint: non-finite parameter values");
        agents.push_back(std::move(a));
    }
    if (header_out) *header_out = h;
    return agents;
}

/// Decentralized actor-critic scheduler: one agent per node, parameters and
/// replay buffers persist across episodes.
class MarlScheduler : public Scheduler {
public:
    MarlScheduler(std::uint64_t master_seed, Hyperparams h)
        : seed_(master_seed), h_(h), explore_epsilon_(h.explore_epsilon_start) {
        h_.validate();
    }

    std::string name() const override { return "drl"; }
    bool learns() const override { return true; }

    void begin_episode(const SimState& state, std::size_t episode) override {
        const std::size_t n = state.node_count();
        if (agents_.empty()) {
            h_.n_actions = n;
            h_.obs_dim = state.config().obs_dim;
            agents_.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                RngStream s = derive_stream(seed_, "agent-init-" + std::to_string(i));
                agents_.push_back(init_agent(s, h_));
            }
            buffers_.assign(n, ReplayBuffer(h_.replay_capacity));
        } else if (agents_.size() != n) {
            throw InputError("MarlScheduler: node count changed between episodes");
        }
        explore_stream_ = derive_stream(seed_, "explore-" + std::to_string(episode));
        replay_stream_ = derive_stream(seed_, "replay-" + std::to_string(episode));
        open_.clear();
        episode_ = episode;
    }

    std::vector<SchedulerDecision> decide(const SimState& state) override {
        SelectionOutcome sel = select_assignments(state, agents_, explore_stream_, h_, explore_epsilon_);
        for (const SchedulerDecision& d : sel.decisions) {
            if (d.node) open_.push_back({*d.node, sel.observations[*d.node]});
        }
        return std::move(sel.decisions);
    }

    void observe(const StepReport& report, const SimState& state) override {
        const double reward = compute_step_reward(report, h_);
        const bool terminal = state.finished();
        for (OpenTransition& ot : open_) {
            Transition tr;
            tr.agent_id = ot.agent;
            tr.obs = std::move(ot.obs);
            tr.action = ot.agent;
            tr.reward = reward;
            tr.next_obs = state.build_observation(ot.agent);
            tr.terminal = terminal;
            const double delta = td_error(agents_[ot.agent], tr, h_.gamma);
            replay_add(buffers_[ot.agent], std::move(tr), delta, h_.per_epsilon);
        }
        open_.clear();

        std::vector<Transition> batch;
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            ReplayBuffer& buf = buffers_[i];
            if (buf.size() < h_.batch_size) continue;
            const auto idx = buf.sample(h_.batch_size, replay_stream_, h_.per_exponent);
            batch.clear();
            for (std::size_t k : idx) batch.push_back(buf.at(k));
            const auto deltas = apply_update(agents_[i], batch, h_.gamma, h_.lr_decay, h_.grad_clip_norm);
            for (std::size_t k = 0; k < idx.size(); ++k) buf.set_priority(idx[k], replay_priority(deltas[k], h_.per_epsilon));
            ++updates_;
        }
    }

    void end_episode(const SimState&) override {
        explore_epsilon_ = decay_explore(explore_epsilon_, h_.explore_epsilon_decay, h_.explore_epsilon_min);
    }

    double explore_epsilon() const { return explore_epsilon_; }
    const std::vector<AgentParams>& agents() const { return agents_; }
    const std::vector<ReplayBuffer>& buffers() const { return buffers_; }
    const Hyperparams& hyperparams() const { return h_; }
    std::size_t updates() const { return updates_; }
    std::size_t episode() const { return episode_; }

    void set_agents(std::vector<AgentParams> agents) {
        agents_ = std::move(agents);
        buffers_.assign(agents_.size(), ReplayBuffer(h_.replay_capacity));
    }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw InputError("cannot open checkpoint for writing: " + path);
        save_checkpoint(os, agents_, episode_);
    }

private:
    struct OpenTransition {
        std::size_t agent;
        Observation obs;
    };

    std::uint64_t seed_;
    Hyperparams h_;
    double explore_epsilon_;
    std::vector<AgentParams> agents_;
    std::vector<ReplayBuffer> buffers_;
    std::vector<OpenTransition> open_;
    RngStream explore_stream_{0, "explore"};
    RngStream replay_stream_{0, "replay"};
    std::size_t episode_ = 0;
    std::size_t updates_ = 0;
};

}  // namespace marl_sched
