// Command-line front end: run | compare | plot.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "marl_sched/experiment.hpp"
#include "marl_sched/plot.hpp"

namespace {

struct Overrides {
    std::string config_file;
    std::string scheduler;
    std::optional<std::size_t> episodes;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> nodes;
    std::optional<std::size_t> tasks;
    std::optional<std::string> out;
    bool trace = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_file, "JSON config with flat dotted keys")->check(CLI::ExistingFile);
    cmd->add_option("--episodes", o.episodes, "Episodes per scheduler");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--nodes", o.nodes, "Cluster size");
    cmd->add_option("--tasks", o.tasks, "Tasks per episode");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_flag("--trace", o.trace, "Write per-step JSON-lines traces");
}

marl_sched::ExperimentConfig resolve(const Overrides& o) {
    marl_sched::ExperimentConfig cfg;
    if (!o.config_file.empty()) cfg = marl_sched::load_config_file(o.config_file);
    if (o.episodes) {
        cfg.episodes = *o.episodes;
        cfg.final_window = std::min(cfg.final_window, cfg.episodes);
    }
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.nodes) cfg.n_nodes = *o.nodes;
    if (o.tasks) cfg.n_tasks = *o.tasks;
    if (o.out) cfg.output_dir = *o.out;
    if (o.trace) cfg.trace = true;
    if (!o.scheduler.empty()) cfg.schedulers = {o.scheduler};
    cfg.validate();
    return cfg;
}

void print_episode(const std::string& name, std::size_t e, const marl_sched::EpisodeMetrics& m) {
    std::fprintf(stderr, "%-7s ep %3zu  atct %8.2f s  energy %9.3f kWh  sla %5.1f%%  done %zu/%zu\n", name.c_str(), e,
                 m.atct.value_or(0.0), m.energy_kwh, 100.0 * m.sla_rate, m.completed, m.total_tasks);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent scheduling simulator and experiment runner"};
    app.require_subcommand(1);

    Overrides run_opts, cmp_opts;
    auto* run = app.add_subcommand("run", "Run one scheduler for all episodes");
    add_common(run, run_opts);
    run->add_option("--scheduler", run_opts.scheduler, "random|wrr|minmin|drl")->required();

    auto* cmp = app.add_subcommand("compare", "Run every configured scheduler and compare");
    add_common(cmp, cmp_opts);
    cmp->add_option("--scheduler", cmp_opts.scheduler, "Restrict to one scheduler");

    std::string plot_dir = "results";
    std::string plot_config;
    auto* plot = app.add_subcommand("plot", "Emit SVG plots from result CSVs");
    plot->add_option("--out", plot_dir, "Results directory");
    plot->add_option("--config", plot_config, "Config (for the final window size)")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = resolve(run_opts);
            const auto res = marl_sched::cmd_run(cfg, run_opts.scheduler, [&](std::size_t e, const auto& m) {
                print_episode(run_opts.scheduler, e, m);
            });
            std::cout << "wrote " << marl_sched::episode_csv_path(cfg, res.name) << '\n';
        } else if (*cmp) {
            const auto cfg = resolve(cmp_opts);
            const auto rep = marl_sched::cmd_compare(cfg, print_episode);
            marl_sched::write_comparison_table(std::cout, rep);
        } else if (*plot) {
            std::size_t window = 10;
            if (!plot_config.empty()) window = marl_sched::load_config_file(plot_config).final_window;
            const auto outcome = marl_sched::cmd_plot(plot_dir, window);
            for (const auto& f : outcome.written) std::cout << "wrote " << f << '\n';
            for (const auto& e : outcome.errors) std::cerr << "error: " << e << '\n';
            return outcome.ok() ? 0 : 1;
        }
    } catch (const marl_sched::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
