#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "marl_sched/experiment.hpp"
#include "marl_sched/plot.hpp"

using namespace marl_sched;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("marl_sched_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ExperimentConfig tiny(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.n_nodes = 8;
    cfg.n_tasks = 40;
    cfg.episodes = 4;
    cfg.final_window = 3;
    cfg.output_dir = out.string();
    return cfg;
}

}  // namespace

TEST(Config, Defaults) {
    const ExperimentConfig cfg;
    EXPECT_EQ(cfg.master_seed, 42u);
    EXPECT_EQ(cfg.n_nodes, 100u);
    EXPECT_EQ(cfg.n_tasks, 1000u);
    EXPECT_EQ(cfg.episodes, 30u);
    EXPECT_EQ(cfg.final_window, 10u);
    EXPECT_EQ(cfg.schedulers.size(), 4u);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, Invariants) {
    ExperimentConfig cfg;
    cfg.final_window = 31;
    EXPECT_THROW(cfg.validate(), InputError);
    cfg.final_window = 0;
    EXPECT_THROW(cfg.validate(), InputError);
    cfg = {};
    cfg.schedulers.clear();
    EXPECT_THROW(cfg.validate(), InputError);
}

TEST(Config, DottedKeys) {
    ExperimentConfig cfg;
    apply_config_json(cfg, nlohmann::json::parse(
                               R"({"master_seed": 7, "n_nodes": 20, "schedulers": "random,drl", "sim.dt": 2.5,
                                   "hyper.gamma": 0.9, "workload.arrival_rate": 1.0})"));
    EXPECT_EQ(cfg.master_seed, 7u);
    EXPECT_EQ(cfg.n_nodes, 20u);
    EXPECT_EQ(cfg.schedulers, (std::vector<std::string>{"random", "drl"}));
    EXPECT_EQ(cfg.sim.dt, 2.5);
    EXPECT_EQ(cfg.hyper.gamma, 0.9);
    EXPECT_EQ(cfg.workload.arrival_rate, 1.0);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    ExperimentConfig cfg;
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse(R"({"nodes": 3})")), InputError);
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse(R"({"n_nodes": "many"})")), InputError);
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse(R"([1, 2])")), InputError);
    EXPECT_THROW(load_config_file("/nonexistent/config.json"), InputError);
}

TEST(MakeScheduler, KnownAndUnknown) {
    const ExperimentConfig cfg;
    for (const auto& name : known_schedulers()) EXPECT_EQ(make_scheduler(name, cfg)->name(), name);
    EXPECT_THROW(make_scheduler("fifo", cfg), InputError);
}

TEST(RunEpisode, SameInputsAcrossSchedulers) {
    const ExperimentConfig cfg = tiny(scratch("inputs"));
    const EpisodeInputs a = episode_inputs(cfg, 2);
    const EpisodeInputs b = episode_inputs(cfg, 2);
    const EpisodeInputs c = episode_inputs(cfg, 3);
    EXPECT_EQ(a.tasks.front().duration, b.tasks.front().duration);
    EXPECT_NE(a.tasks.front().duration, c.tasks.front().duration);
}

TEST(RunScheduler, DeterministicAcrossThreadCounts) {
    ExperimentConfig cfg = tiny(scratch("threads"));
    cfg.threads = 1;
    const SchedulerRun serial = run_scheduler(cfg, "random");
    cfg.threads = 3;
    const SchedulerRun parallel = run_scheduler(cfg, "random");
    for (std::size_t i = 0; i < cfg.episodes; ++i) {
        EXPECT_EQ(serial.episodes[i].atct, parallel.episodes[i].atct);
        EXPECT_EQ(serial.episodes[i].energy_kwh, parallel.episodes[i].energy_kwh);
    }
}

TEST(CmdRun, WritesCsvAndCheckpoint) {
    const fs::path out = scratch("run");
    const ExperimentConfig cfg = tiny(out);
    cmd_run(cfg, "drl");
    EXPECT_TRUE(fs::exists(out / "drl_checkpoint.bin"));
    const SchedulerRun back = read_episode_csv((out / "drl.csv").string());
    EXPECT_EQ(back.name, "drl");
    EXPECT_EQ(back.episodes.size(), 4u);
    std::ifstream ck(out / "drl_checkpoint.bin", std::ios::binary);
    CheckpointHeader h;
    const auto agents = load_checkpoint(ck, &h);
    EXPECT_EQ(agents.size(), 8u);
    EXPECT_EQ(h.episode, 4u);
    EXPECT_THROW(cmd_run(cfg, "nope"), InputError);
}

TEST(CmdRun, RepeatedRunsAreByteIdenticalApartFromTiming) {
    const fs::path a = scratch("rep-a");
    const fs::path b = scratch("rep-b");
    cmd_run(tiny(a), "wrr");
    cmd_run(tiny(b), "wrr");
    auto strip_timing = [](const std::string& csv) {
        std::stringstream in(csv), out;
        std::string line;
        while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';
        return out.str();
    };
    EXPECT_EQ(strip_timing(slurp(a / "wrr.csv")), strip_timing(slurp(b / "wrr.csv")));
}

TEST(EpisodeCsv, RoundTrip) {
    SchedulerRun run{"random", {}};
    EpisodeMetrics m;
    m.atct = 17.125;
    m.energy_kwh = 4.5;
    m.sla_rate = 0.95;
    m.throughput = 400.25;
    m.completed = 998;
    run.episodes = {m, EpisodeMetrics{}};
    std::stringstream ss;
    write_episode_csv(ss, run);
    const std::string text = ss.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), kEpisodeCsvHeader);
    const fs::path p = scratch("csv") / "random.csv";
    std::ofstream(p) << text;
    const SchedulerRun back = read_episode_csv(p.string());
    ASSERT_EQ(back.episodes.size(), 2u);
    EXPECT_EQ(*back.episodes[0].atct, 17.125);
    EXPECT_FALSE(back.episodes[1].atct);
    EXPECT_EQ(back.episodes[0].completed, 998u);
}

TEST(EpisodeCsv, MalformedNamesFile) {
    const fs::path p = scratch("bad") / "drl.csv";
    std::ofstream(p) << "wrong,header\n";
    try {
        read_episode_csv(p.string());
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("drl.csv"), std::string::npos);
    }
}

TEST(Comparison, ReportAndDeterministicCsv) {
    const fs::path a = scratch("cmp-a");
    const fs::path b = scratch("cmp-b");
    const ComparisonReport rep = cmd_compare(tiny(a));
    cmd_compare(tiny(b));
    ASSERT_EQ(rep.rows.size(), 4u);
    EXPECT_EQ(slurp(a / "comparison.csv"), slurp(b / "comparison.csv"));
    const std::string table = slurp(a / "comparison.txt");
    EXPECT_NE(table.find("kWh/task"), std::string::npos);
    EXPECT_NE(table.find("Decide(ms)"), std::string::npos);
    for (const auto& row : rep.rows) {
        if (row.name == "drl") {
            EXPECT_FALSE(row.vs_atct);
        } else {
            EXPECT_TRUE(row.vs_atct);
        }
    }
}

TEST(Plot, EmitsAllThree) {
    const fs::path out = scratch("plot");
    ExperimentConfig cfg = tiny(out);
    cfg.schedulers = {"random", "drl"};
    cmd_compare(cfg);
    const PlotOutcome res = cmd_plot(out.string(), cfg.final_window);
    EXPECT_TRUE(res.ok());
    EXPECT_EQ(res.written.size(), 3u);
    const std::string curve = slurp(out / "learning_curve.svg");
    EXPECT_EQ(curve.rfind("<svg", 0), 0u);
    EXPECT_NE(curve.find(">4</text>"), std::string::npos);  // last episode tick
    const std::string bars = slurp(out / "comparison.svg");
    for (const char* label : {"ATCT (s)", "Energy (kWh)", "SLA compliance (%)", "Throughput"})
        EXPECT_NE(bars.find(label), std::string::npos);
    EXPECT_EQ(std::count(bars.begin(), bars.end(), '\n') > 0, true);
}

TEST(Plot, EmptyDrlResultsFailOnlyTheirPlot) {
    const fs::path out = scratch("plot-partial");
    ExperimentConfig cfg = tiny(out);
    cmd_run(cfg, "random");
    cmd_run(cfg, "wrr");
    std::ofstream(out / "drl.csv") << kEpisodeCsvHeader << '\n';
    const PlotOutcome res = cmd_plot(out.string(), cfg.final_window);
    EXPECT_FALSE(res.ok());
    EXPECT_TRUE(fs::exists(out / "learning_curve.svg"));
    EXPECT_TRUE(fs::exists(out / "comparison.svg"));
    EXPECT_FALSE(fs::exists(out / "improvement.svg"));
    bool named = false;
    for (const auto& e : res.errors) named |= e.find("drl.csv") != std::string::npos;
    EXPECT_TRUE(named);
}

TEST(Plot, NoResults) {
    const PlotOutcome res = cmd_plot(scratch("plot-empty").string());
    EXPECT_FALSE(res.ok());
    EXPECT_TRUE(res.written.empty());
}

TEST(Svg, NiceSteps) {
    EXPECT_EQ(svg::nice_step(10.0, 5), 2.0);
    EXPECT_EQ(svg::nice_step(1.0, 4), 0.2);
    EXPECT_EQ(svg::escape("a<b&c"), "a&lt;b&amp;c");
}
