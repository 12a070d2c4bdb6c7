#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cluster.hpp"
#include "marl.hpp"
#include "metrics.hpp"
#include "schedulers.hpp"
#include "simenv.hpp"
#include "workload.hpp"

namespace marl_sched {

struct ExperimentConfig {
    std::uint64_t master_seed = kDefaultMasterSeed;
    std::size_t n_nodes = 100;
    std::size_t n_tasks = 1000;
    std::size_t episodes = 30;
    std::size_t final_window = 10;
    std::vector<std::string> schedulers{"random", "wrr", "minmin", "drl"};
    SimConfig sim;
    Hyperparams hyper;
    WorkloadParams workload;
    ObjectiveWeights objective;
    std::string output_dir = "results";
    bool trace = false;
    std::size_t threads = 0;  // 0 = MARL_SCHED_THREADS or hardware concurrency

    void validate() const {
        if (n_nodes == 0 || n_tasks == 0) throw InputError("config: nodes and tasks must be positive");
        if (final_window == 0 || episodes < final_window) throw InputError("config: need episodes >= final_window >= 1");
        if (schedulers.empty()) throw InputError("config: scheduler list is empty");
        sim.validate();
        hyper.validate();
    }
};

inline const std::vector<std::string>& known_schedulers() {
    static const std::vector<std::string> names{"random", "wrr", "minmin", "drl"};
    return names;
}

inline std::unique_ptr<Scheduler> make_scheduler(const std::string& name, const ExperimentConfig& cfg) {
    if (name == "random") return std::make_unique<RandomScheduler>(cfg.master_seed);
    if (name == "wrr") return std::make_unique<WeightedRoundRobinScheduler>();
    if (name == "minmin") return std::make_unique<PriorityMinMinScheduler>();
    if (name == "drl") {
        Hyperparams h = cfg.hyper;
        h.n_actions = cfg.n_nodes;
        h.obs_dim = cfg.sim.obs_dim;
        return std::make_unique<MarlScheduler>(cfg.master_seed, h);
    }
    throw InputError("unknown scheduler '" + name + "' (expected random|wrr|minmin|drl)");
}

namespace detail {

inline std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace detail

/// Apply flat dotted keys ("sim.dt", "hyper.gamma", ...) from a JSON object.
inline void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("config: top level must be a JSON object");
    using Setter = std::function<void(const nlohmann::json&)>;
    auto num = [](double& dst) -> Setter { return [&dst](const nlohmann::json& v) { dst = v.get<double>(); }; };
    auto count = [](std::size_t& dst) -> Setter {
        return [&dst](const nlohmann::json& v) {
            if (!v.is_number_integer() || v.get<long long>() < 0) throw InputError("config: expected nonnegative integer");
            dst = v.get<std::size_t>();
        };
    };
    const std::vector<std::pair<std::string, Setter>> table{
        {"master_seed", [&](const nlohmann::json& v) { cfg.master_seed = v.get<std::uint64_t>(); }},
        {"n_nodes", count(cfg.n_nodes)},
        {"n_tasks", count(cfg.n_tasks)},
        {"episodes", count(cfg.episodes)},
        {"final_window", count(cfg.final_window)},
        {"threads", count(cfg.threads)},
        {"output_dir", [&](const nlohmann::json& v) { cfg.output_dir = v.get<std::string>(); }},
        {"trace", [&](const nlohmann::json& v) { cfg.trace = v.get<bool>(); }},
        {"schedulers",
         [&](const nlohmann::json& v) {
             cfg.schedulers = v.is_string() ? detail::split_csv_list(v.get<std::string>())
                                            : v.get<std::vector<std::string>>();
         }},
        {"sim.dt", num(cfg.sim.dt)},
        {"sim.max_time", num(cfg.sim.max_time)},
        {"sim.queue_feature_window", count(cfg.sim.queue_feature_window)},
        {"sim.neighbor_count", count(cfg.sim.neighbor_count)},
        {"sim.obs_dim", count(cfg.sim.obs_dim)},
        {"workload.arrival_rate", num(cfg.workload.arrival_rate)},
        {"workload.pareto_alpha", num(cfg.workload.pareto_alpha)},
        {"workload.min_duration", num(cfg.workload.min_duration)},
        {"hyper.hidden", count(cfg.hyper.hidden)},
        {"hyper.learning_rate", num(cfg.hyper.learning_rate)},
        {"hyper.lr_decay", num(cfg.hyper.lr_decay)},
        {"hyper.gamma", num(cfg.hyper.gamma)},
        {"hyper.grad_clip_norm", num(cfg.hyper.grad_clip_norm)},
        {"hyper.replay_capacity", count(cfg.hyper.replay_capacity)},
        {"hyper.batch_size", count(cfg.hyper.batch_size)},
        {"hyper.per_epsilon", num(cfg.hyper.per_epsilon)},
        {"hyper.per_exponent", num(cfg.hyper.per_exponent)},
        {"hyper.explore_epsilon_start", num(cfg.hyper.explore_epsilon_start)},
        {"hyper.explore_epsilon_decay", num(cfg.hyper.explore_epsilon_decay)},
        {"hyper.explore_epsilon_min", num(cfg.hyper.explore_epsilon_min)},
        {"objective.w1", num(cfg.objective.completion)},
        {"objective.w2", num(cfg.objective.energy)},
        {"objective.w3", num(cfg.objective.sla)},
        {"objective.w4", num(cfg.objective.balance)},
    };
    for (const auto& [key, value] : j.items()) {
        auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
        if (it == table.end()) throw InputError("config: unknown key '" + key + "'");
        try {
            it->second(value);
        } catch (const nlohmann::json::exception& e) {
            throw InputError("config: bad value for '" + key + "': " + e.what());
        }
    }
}

inline ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {}) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config file " + path + " is not valid JSON: " + e.what());
    }
    apply_config_json(base, j);
    return base;
}

inline std::size_t worker_count(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    if (const char* env = std::getenv("MARL_SCHED_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct EpisodeInputs {
    std::vector<Task> tasks;
    std::vector<NodeSpec> nodes;
};

/// Workload and cluster for one episode; both are functions of (seed, episode).
inline EpisodeInputs episode_inputs(const ExperimentConfig& cfg, std::size_t episode) {
    RngStream ws = derive_stream(cfg.master_seed, "workload-" + std::to_string(episode));
    RngStream cs = derive_stream(cfg.master_seed, "cluster-" + std::to_string(episode));
    return {generate_workload(ws, cfg.n_tasks, cfg.workload), generate_cluster(cs, cfg.n_nodes)};
}

namespace detail {

inline void write_trace_line(std::ostream& os, std::size_t episode, const StepReport& r) {
    nlohmann::json j;
    j["episode"] = episode;
    j["time"] = r.time_after;
    auto& a = j["assignments"] = nlohmann::json::array();
    for (const auto& x : r.assignments) a.push_back({x.task_id, x.node_id});
    auto& c = j["completions"] = nlohmann::json::array();
    for (const auto& x : r.completed) c.push_back(x.task_id);
    auto& d = j["drops"] = nlohmann::json::array();
    for (const auto& x : r.dropped) d.push_back(x.task_id);
    j["utilization"] = r.utilization;
    os << j.dump() << '\n';
}

}  // namespace detail

/// Simulate one episode to completion or horizon.
inline EpisodeMetrics run_episode(const ExperimentConfig& cfg, Scheduler& sched, std::size_t episode,
                                  std::ostream* trace = nullptr) {
    EpisodeInputs in = episode_inputs(cfg, episode);
    SimState state(cfg.sim, std::move(in.tasks), std::move(in.nodes));
    sched.begin_episode(state, episode);
    double decide_seconds = 0.0;
    std::size_t decisions = 0;
    while (!state.finished()) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto made = sched.decide(state);
        decide_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        decisions += made.size();
        for (const SchedulerDecision& d : made) {
            if (d.node) state.enqueue_assignment(d.task_id, *d.node);
        }
        const StepReport report = state.advance();
        sched.observe(report, state);
        if (trace) detail::write_trace_line(*trace, episode, report);
    }
    sched.end_episode(state);
    EpisodeMetrics m = summarize_episode(state, cfg.objective);
    m.mean_decision_ms = decisions == 0 ? 0.0 : 1000.0 * decide_seconds / static_cast<double>(decisions);
    return m;
}

struct SchedulerRun {
    std::string name;
    std::vector<EpisodeMetrics> episodes;  // index 0 = episode 1
};

/// Run all episodes for one scheduler. Learning schedulers run sequentially and
/// keep their parameters; the rest fan out over worker threads.
inline SchedulerRun run_scheduler(const ExperimentConfig& cfg, const std::string& name,
                                  const std::function<void(std::size_t, const EpisodeMetrics&)>& progress = {}) {
    cfg.validate();
    SchedulerRun run{name, std::vector<EpisodeMetrics>(cfg.episodes)};
    auto probe = make_scheduler(name, cfg);

    std::unique_ptr<std::ofstream> trace;
    if (cfg.trace) {
        std::filesystem::create_directories(cfg.output_dir);
        const auto path = std::filesystem::path(cfg.output_dir) / (name + "_trace.jsonl");
        trace = std::make_unique<std::ofstream>(path);
        if (!*trace) throw InputError("cannot write trace file " + path.string());
    }

    const std::size_t workers = std::min(worker_count(cfg), cfg.episodes);
    if (probe->learns() || trace || workers <= 1) {
        for (std::size_t e = 1; e <= cfg.episodes; ++e) {
            run.episodes[e - 1] = run_episode(cfg, *probe, e, trace.get());
            if (progress) progress(e, run.episodes[e - 1]);
        }
        if (auto* drl = dynamic_cast<MarlScheduler*>(probe.get())) {
            std::filesystem::create_directories(cfg.output_dir);
            drl->save((std::filesystem::path(cfg.output_dir) / (name + "_checkpoint.bin")).string());
        }
        return run;
    }

    std::atomic<std::size_t> next{1};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                auto sched = make_scheduler(name, cfg);
                for (std::size_t e = next++; e <= cfg.episodes; e = next++) run.episodes[e - 1] = run_episode(cfg, *sched, e);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    if (progress) {
        for (std::size_t e = 1; e <= cfg.episodes; ++e) progress(e, run.episodes[e - 1]);
    }
    return run;
}

namespace detail {

inline std::string num(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

inline std::string num_or_empty(const std::optional<double>& v, int precision = 6) { return v ? num(*v, precision) : ""; }

}  // namespace detail

inline constexpr const char* kEpisodeCsvHeader =
    "episode,scheduler,atct_s,energy_kwh,sla_rate,throughput_per_1000s,completed,load_balance_var,objective_j,"
    "mean_decision_ms";

inline void write_episode_csv(std::ostream& os, const SchedulerRun& run) {
    os << kEpisodeCsvHeader << '\n';
    for (std::size_t i = 0; i < run.episodes.size(); ++i) {
        const EpisodeMetrics& m = run.episodes[i];
        os << (i + 1) << ',' << run.name << ',' << detail::num_or_empty(m.atct) << ',' << detail::num(m.energy_kwh)
           << ',' << detail::num(m.sla_rate) << ',' << detail::num(m.throughput) << ',' << m.completed << ','
           << detail::num(m.mean_step_util_variance, 9) << ',' << detail::num(m.objective_j, 9) << ','
           << detail::num(m.mean_decision_ms, 4) << '\n';
    }
}

inline void write_episode_csv(const std::string& path, const SchedulerRun& run) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write " + path);
    write_episode_csv(os, run);
}

/// Parse an episode CSV back into metrics. Only the columns in the schema are
/// restored; `name` receives the scheduler column.
inline SchedulerRun read_episode_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError(path + ": cannot open");
    std::string line;
    if (!std::getline(is, line) || line != kEpisodeCsvHeader) throw InputError(path + ": missing or malformed header");
    SchedulerRun run;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 10) throw InputError(path + ":" + std::to_string(lineno) + ": expected 10 columns");
        try {
            EpisodeMetrics m;
            if (!f[2].empty()) m.atct = std::stod(f[2]);
            m.energy_kwh = std::stod(f[3]);
            m.sla_rate = std::stod(f[4]);
            m.throughput = std::stod(f[5]);
            m.completed = static_cast<std::size_t>(std::stoull(f[6]));
            m.mean_step_util_variance = std::stod(f[7]);
            m.objective_j = std::stod(f[8]);
            m.mean_decision_ms = std::stod(f[9]);
            run.name = f[1];
            run.episodes.push_back(m);
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    if (run.episodes.empty()) throw InputError(path + ": no episode rows");
    return run;
}

struct PairwiseTest {
    std::optional<TTestResult> test;
    double p_bonferroni = 1.0;
};

struct SchedulerSummary {
    std::string name;
    std::size_t window = 0;
    MeanStd atct;
    MeanStd energy;
    MeanStd sla;
    MeanStd throughput;
    MeanStd completed;
    MeanStd load_balance_var;
    MeanStd objective_j;
    MeanStd decision_ms;
    double energy_per_task = 0.0;
    std::size_t atct_skipped = 0;
    // Versus the learning scheduler; empty for the learner itself.
    std::optional<PairwiseTest> vs_atct, vs_energy, vs_sla, vs_throughput;
    std::optional<double> atct_improvement;  // (baseline - drl) / baseline of window means
    std::optional<Interval95> atct_improvement_ci;
    std::optional<double> energy_improvement;
};

struct ComparisonReport {
    std::size_t final_window = 0;
    std::string reference = "drl";
    std::vector<SchedulerSummary> rows;
};

inline ComparisonReport build_comparison(const std::vector<SchedulerRun>& runs, std::size_t k,
                                         const std::string& reference = "drl") {
    ComparisonReport rep;
    rep.final_window = k;
    rep.reference = reference;
    const SchedulerRun* ref = nullptr;
    for (const auto& r : runs) {
        if (r.name == reference) ref = &r;
    }
    const std::size_t baselines = ref ? runs.size() - 1 : 0;

    for (const auto& r : runs) {
        SchedulerSummary s;
        s.name = r.name;
        s.window = k;
        std::span<const EpisodeMetrics> eps(r.episodes);
        s.atct = mean_std(final_window(eps, k, Metric::Atct, &s.atct_skipped));
        s.energy = aggregate_final(eps, k, Metric::Energy);
        s.sla = aggregate_final(eps, k, Metric::SlaRate);
        s.throughput = aggregate_final(eps, k, Metric::Throughput);
        s.completed = aggregate_final(eps, k, Metric::Completed);
        s.load_balance_var = aggregate_final(eps, k, Metric::LoadBalanceVar);
        s.objective_j = aggregate_final(eps, k, Metric::ObjectiveJ);
        s.decision_ms = aggregate_final(eps, k, Metric::DecisionMs);
        s.energy_per_task = s.completed.mean > 0.0 ? s.energy.mean / s.completed.mean : 0.0;

        if (ref && ref != &r) {
            std::span<const EpisodeMetrics> ref_eps(ref->episodes);
            auto pairwise = [&](Metric m) {
                PairwiseTest pt;
                try {
                    pt.test = welch_t_test(final_window(ref_eps, k, m), final_window(eps, k, m));
                    pt.p_bonferroni = bonferroni(pt.test->p, baselines);
                } catch (const InputError&) {
                    pt.test.reset();
                }
                return pt;
            };
            s.vs_atct = pairwise(Metric::Atct);
            s.vs_energy = pairwise(Metric::Energy);
            s.vs_sla = pairwise(Metric::SlaRate);
            s.vs_throughput = pairwise(Metric::Throughput);

            const MeanStd ref_atct = mean_std(final_window(ref_eps, k, Metric::Atct));
            if (s.atct.n > 0 && ref_atct.n > 0 && s.atct.mean != 0.0)
                s.atct_improvement = relative_improvement(s.atct.mean, ref_atct.mean);
            if (s.energy.mean != 0.0)
                s.energy_improvement =
                    relative_improvement(s.energy.mean, aggregate_final(ref_eps, k, Metric::Energy).mean);

            // Episodes share workloads across schedulers, so improvements pair by episode.
            std::vector<double> paired;
            for (std::size_t i = r.episodes.size() - k; i < r.episodes.size() && i < ref->episodes.size(); ++i) {
                const auto& b = r.episodes[i].atct;
                const auto& d = ref->episodes[i].atct;
                if (b && d && *b != 0.0) paired.push_back(relative_improvement(*b, *d));
            }
            if (paired.size() >= 2) s.atct_improvement_ci = confidence_interval_95(paired);
        }
        rep.rows.push_back(std::move(s));
    }
    return rep;
}

/// Deterministic statistics only; wall-clock latency lives in the text report.
inline void write_comparison_csv(std::ostream& os, const ComparisonReport& rep) {
    using detail::num;
    os << "scheduler,window,atct_mean,atct_std,energy_kwh_mean,energy_kwh_std,sla_rate_mean,sla_rate_std,"
          "throughput_mean,throughput_std,completed_mean,energy_per_task_kwh,load_balance_var_mean,objective_j_mean,"
          "atct_t,atct_p,atct_p_bonferroni,energy_p,energy_p_bonferroni,sla_p,sla_p_bonferroni,throughput_p,"
          "throughput_p_bonferroni,atct_improvement,atct_improvement_ci_low,atct_improvement_ci_high,"
          "energy_improvement\n";
    auto test_cells = [&](const std::optional<PairwiseTest>& pt, bool with_t) {
        std::string out;
        if (with_t) out += (pt && pt->test ? num(pt->test->t) : "") + ",";
        out += (pt && pt->test ? num(pt->test->p, 9) : "") + ",";
        out += (pt && pt->test ? num(pt->p_bonferroni, 9) : "");
        return out;
    };
    for (const auto& s : rep.rows) {
        os << s.name << ',' << s.window << ',' << num(s.atct.mean) << ',' << num(s.atct.std) << ','
           << num(s.energy.mean) << ',' << num(s.energy.std) << ',' << num(s.sla.mean) << ',' << num(s.sla.std)
           << ',' << num(s.throughput.mean) << ',' << num(s.throughput.std) << ',' << num(s.completed.mean, 2)
           << ',' << num(s.energy_per_task, 9) << ',' << num(s.load_balance_var.mean, 9) << ','
           << num(s.objective_j.mean, 9) << ',' << test_cells(s.vs_atct, true) << ','
           << test_cells(s.vs_energy, false) << ',' << test_cells(s.vs_sla, false) << ','
           << test_cells(s.vs_throughput, false) << ',' << detail::num_or_empty(s.atct_improvement) << ','
           << (s.atct_improvement_ci ? num(s.atct_improvement_ci->low) : "") << ','
           << (s.atct_improvement_ci ? num(s.atct_improvement_ci->high) : "") << ','
           << detail::num_or_empty(s.energy_improvement) << '\n';
    }
}

inline void write_comparison_table(std::ostream& os, const ComparisonReport& rep) {
    auto pct = [](double x) { return detail::num(100.0 * x, 1); };
    os << "Results averaged over the final " << rep.final_window << " episodes\n\n";
    os << std::left << std::setw(10) << "Scheduler" << std::right << std::setw(10) << "ATCT(s)" << std::setw(9)
       << "Std(s)" << std::setw(12) << "Energy(kWh)" << std::setw(8) << "SLA(%)" << std::setw(13)
       << "Thr(/1000s)" << std::setw(11) << "Completed" << std::setw(11) << "kWh/task" << std::setw(12)
       << "Decide(ms)" << std::setw(13) << "p(ATCT)vsRef" << '\n';
    for (const auto& s : rep.rows) {
        os << std::left << std::setw(10) << s.name << std::right << std::setw(10) << detail::num(s.atct.mean, 2)
           << std::setw(9) << detail::num(s.atct.std, 2) << std::setw(12) << detail::num(s.energy.mean, 3)
           << std::setw(8) << pct(s.sla.mean) << std::setw(13) << detail::num(s.throughput.mean, 2) << std::setw(11)
           << detail::num(s.completed.mean, 1) << std::setw(11) << detail::num(s.energy_per_task, 5) << std::setw(12)
           << detail::num(s.decision_ms.mean, 4) << std::setw(13)
           << (s.vs_atct && s.vs_atct->test ? detail::num(s.vs_atct->test->p, 5) : std::string("-")) << '\n';
    }
    bool any = false;
    for (const auto& s : rep.rows) {
        if (!s.atct_improvement) continue;
        if (!any) os << "\nImprovement of " << rep.reference << " over each baseline\n";
        any = true;
        os << "  vs " << s.name << ": ATCT " << pct(*s.atct_improvement) << "%";
        if (s.atct_improvement_ci)
            os << " (95% CI [" << pct(s.atct_improvement_ci->low) << "%, " << pct(s.atct_improvement_ci->high) << "%])";
        if (s.energy_improvement) os << ", energy " << pct(*s.energy_improvement) << "%";
        if (s.vs_atct && s.vs_atct->test)
            os << ", Welch p=" << detail::num(s.vs_atct->test->p, 6) << " (Bonferroni "
               << detail::num(s.vs_atct->p_bonferroni, 6) << ")";
        os << '\n';
    }
    for (const auto& s : rep.rows) {
        if (s.atct_skipped > 0)
            os << "warning: " << s.name << " had " << s.atct_skipped
               << " zero-completion episode(s) excluded from ATCT\n";
    }
}

inline std::string episode_csv_path(const ExperimentConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output_dir) / (name + ".csv")).string();
}

inline SchedulerRun cmd_run(const ExperimentConfig& cfg, const std::string& name,
                            const std::function<void(std::size_t, const EpisodeMetrics&)>& progress = {}) {
    cfg.validate();
    make_scheduler(name, cfg);  // reject unknown names before creating files
    std::filesystem::create_directories(cfg.output_dir);
    SchedulerRun run = run_scheduler(cfg, name, progress);
    write_episode_csv(episode_csv_path(cfg, name), run);
    return run;
}

inline ComparisonReport cmd_compare(const ExperimentConfig& cfg,
                                    const std::function<void(const std::string&, std::size_t, const EpisodeMetrics&)>&
                                        progress = {}) {
    cfg.validate();
    for (const auto& name : cfg.schedulers) make_scheduler(name, cfg);
    std::filesystem::create_directories(cfg.output_dir);
    std::vector<SchedulerRun> runs;
    for (const auto& name : cfg.schedulers) {
        runs.push_back(cmd_run(cfg, name, [&](std::size_t e, const EpisodeMetrics& m) {
            if (progress) progress(name, e, m);
        }));
    }
    ComparisonReport rep = build_comparison(runs, cfg.final_window);
    const auto dir = std::filesystem::path(cfg.output_dir);
    {
        std::ofstream os(dir / "comparison.csv");
        if (!os) throw InputError("cannot write comparison.csv in " + cfg.output_dir);
        write_comparison_csv(os, rep);
    }
    {
        std::ofstream os(dir / "comparison.txt");
        write_comparison_table(os, rep);
    }
    return rep;
}

}  // namespace marl_sched
