#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "errors.hpp"
#include "simenv.hpp"

namespace marl_sched {

struct EpisodeMetrics {
    std::optional<double> atct;  // seconds; empty when nothing completed
    double energy_kwh = 0.0;
    double sla_rate = 0.0;
    double throughput = 0.0;  // completed tasks per 1000 s of makespan
    std::size_t completed = 0;
    std::size_t dropped = 0;
    std::size_t total_tasks = 0;
    double makespan = 0.0;
    double mean_step_util_variance = 0.0;
    double objective_j = 0.0;
    double mean_decision_ms = 0.0;

    double energy_per_task_kwh() const {
        return completed == 0 ? 0.0 : energy_kwh / static_cast<double>(completed);
    }
};

struct ObjectiveWeights {
    double completion = 0.4;
    double energy = 0.2;
    double sla = 0.3;
    double balance = 0.1;
};

/// Weighted multi-objective score (reporting only). ATCT is normalized by the
/// horizon and energy by the all-nodes-at-full-load bound.
inline double objective_J(const EpisodeMetrics& m, double max_time, double e_max_kwh, const ObjectiveWeights& w = {}) {
    const double atct_term = m.atct ? *m.atct / max_time : 0.0;
    const double energy_term = e_max_kwh > 0.0 ? m.energy_kwh / e_max_kwh : 0.0;
    const double violations =
        m.total_tasks == 0 ? 0.0 : 1.0 - m.sla_rate;
    return w.completion * atct_term + w.energy * energy_term + w.sla * violations + w.balance * m.mean_step_util_variance;
}

inline EpisodeMetrics summarize_episode(const SimState& state, const ObjectiveWeights& w = {}) {
    EpisodeMetrics m;
    const auto& records = state.completions();
    m.total_tasks = state.tasks().size();
    m.completed = records.size();
    m.dropped = state.drops().size();
    if (!records.empty()) {
        double sum = 0.0;
        for (const auto& r : records) sum += r.completion_time;
        m.atct = sum / static_cast<double>(records.size());
    }
    const auto met = static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const CompletionRecord& r) { return r.met_sla; }));
    m.sla_rate = m.total_tasks == 0 ? 0.0 : static_cast<double>(met) / static_cast<double>(m.total_tasks);
    m.energy_kwh = state.total_energy_kwh();
    m.makespan = state.makespan();
    m.throughput = (m.completed == 0 || m.makespan <= 0.0)
                       ? 0.0
                       : static_cast<double>(m.completed) / (m.makespan / 1000.0);
    m.mean_step_util_variance = state.mean_step_util_variance();
    m.objective_j = objective_J(m, state.config().max_time, state.max_energy_joules() / kJoulesPerKwh, w);
    return m;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
};

inline MeanStd mean_std(std::span<const double> xs) {
    MeanStd r;
    r.n = xs.size();
    if (xs.empty()) return r;
    double sum = 0.0;
    for (double x : xs) sum += x;
    r.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return r;
}

enum class Metric { Atct, Energy, SlaRate, Throughput, Completed, LoadBalanceVar, ObjectiveJ, EnergyPerTask, DecisionMs };

inline constexpr std::array<Metric, 9> kAllMetrics{Metric::Atct,           Metric::Energy,     Metric::SlaRate,
                                                   Metric::Throughput,     Metric::Completed,  Metric::LoadBalanceVar,
                                                   Metric::ObjectiveJ,     Metric::EnergyPerTask, Metric::DecisionMs};

inline const char* metric_name(Metric m) {
    switch (m) {
        case Metric::Atct: return "atct_s";
        case Metric::Energy: return "energy_kwh";
        case Metric::SlaRate: return "sla_rate";
        case Metric::Throughput: return "throughput_per_1000s";
        case Metric::Completed: return "completed";
        case Metric::LoadBalanceVar: return "load_balance_var";
        case Metric::ObjectiveJ: return "objective_j";
        case Metric::EnergyPerTask: return "energy_per_task_kwh";
        case Metric::DecisionMs: return "mean_decision_ms";
    }
    return "?";
}

inline std::optional<double> metric_value(const EpisodeMetrics& e, Metric m) {
    switch (m) {
        case Metric::Atct: return e.atct;
        case Metric::Energy: return e.energy_kwh;
        case Metric::SlaRate: return e.sla_rate;
        case Metric::Throughput: return e.throughput;
        case Metric::Completed: return static_cast<double>(e.completed);
        case Metric::LoadBalanceVar: return e.mean_step_util_variance;
        case Metric::ObjectiveJ: return e.objective_j;
        case Metric::EnergyPerTask:
            return e.completed == 0 ? std::nullopt : std::optional<double>(e.energy_per_task_kwh());
        case Metric::DecisionMs: return e.mean_decision_ms;
    }
    return std::nullopt;
}

/// Values of one metric over the last k episodes. Episodes where the metric is
/// undefined (ATCT with zero completions) are skipped; `skipped` counts them.
inline std::vector<double> final_window(std::span<const EpisodeMetrics> episodes, std::size_t k, Metric m,
                                        std::size_t* skipped = nullptr) {
    if (k == 0 || episodes.size() < k) throw InputError("aggregate_final: fewer episodes than the final window");
    std::vector<double> out;
    std::size_t missing = 0;
    for (std::size_t i = episodes.size() - k; i < episodes.size(); ++i) {
        if (auto v = metric_value(episodes[i], m)) {
            out.push_back(*v);
        } else {
            ++missing;
        }
    }
    if (skipped) *skipped = missing;
    return out;
}

inline MeanStd aggregate_final(std::span<const EpisodeMetrics> episodes, std::size_t k, Metric m) {
    const auto xs = final_window(episodes, k, m);
    return mean_std(xs);
}

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

/// Two-sided Welch (unequal variance) t-test.
inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw InputError("welch_t_test: each sample needs at least 2 values");
    const MeanStd sa = mean_std(a);
    const MeanStd sb = mean_std(b);
    const double va = sa.std * sa.std / static_cast<double>(sa.n);
    const double vb = sb.std * sb.std / static_cast<double>(sb.n);
    const double se2 = va + vb;
    if (!(se2 > 0.0)) throw InputError("welch_t_test: both samples have zero variance; the t statistic is undefined");
    TTestResult r;
    r.t = (sa.mean - sb.mean) / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));
    const boost::math::students_t dist(r.df);
    r.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))), 0.0, 1.0);
    return r;
}

struct Interval95 {
    double low = 0.0;
    double high = 0.0;
};

inline Interval95 confidence_interval_95(std::span<const double> samples) {
    if (samples.size() < 2) throw InputError("confidence_interval_95: need at least 2 samples");
    const MeanStd s = mean_std(samples);
    const boost::math::students_t dist(static_cast<double>(s.n - 1));
    const double half = boost::math::quantile(dist, 0.975) * s.std / std::sqrt(static_cast<double>(s.n));
    return {s.mean - half, s.mean + half};
}

/// (baseline - candidate) / baseline, as a fraction.
inline double relative_improvement(double baseline, double candidate) {
    if (baseline == 0.0) throw InputError("relative_improvement: baseline is zero");
    return (baseline - candidate) / baseline;
}

inline double bonferroni(double p, std::size_t comparisons) {
    return std::min(1.0, p * static_cast<double>(comparisons));
}

}  // namespace marl_sched
