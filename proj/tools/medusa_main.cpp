#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "medusa/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitJobFailure = 2;

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw medusa::ScenarioError("cannot write " + path.string());
    out << content;
}

std::optional<medusa::SchedulerKind> parse_scheduler(const std::string& name) {
    if (name.empty()) return std::nullopt;
    if (name == "medusa") return medusa::SchedulerKind::Medusa;
    if (name == "round_robin") return medusa::SchedulerKind::RoundRobin;
    throw medusa::ScenarioError("unknown scheduler '" + name + "' (medusa | round_robin)");
}

std::string scheduler_name(medusa::SchedulerKind kind) {
    return kind == medusa::SchedulerKind::Medusa ? "medusa" : "round_robin";
}

int cmd_validate(const std::string& scenario_path) {
    medusa::Scenario sc = medusa::load_scenario_file(scenario_path);
    std::cout << "ok: " << sc.name << " clouds=" << sc.clouds.size() << " f=" << sc.fault.f
              << " scheduler=" << scheduler_name(sc.scheduler)
              << " partitions=" << sc.partitions.size()
              << " injections=" << sc.injections.size() << "\n";
    return kExitOk;
}

int cmd_run(const std::string& scenario_path, int repetitions,
            std::optional<std::uint64_t> seed_override, const std::string& scheduler_flag,
            const std::string& output_dir) {
    medusa::Scenario sc = medusa::load_scenario_file(scenario_path);
    std::optional<medusa::SchedulerKind> scheduler = parse_scheduler(scheduler_flag);

    std::vector<std::uint64_t> seeds;
    if (seed_override.has_value())
        seeds.push_back(*seed_override);
    else
        seeds = medusa::scenario_seeds(sc, repetitions);

    std::filesystem::path dir(output_dir);
    std::filesystem::create_directories(dir);

    std::cout << "scenario=" << sc.name << " throughput_window_k=" << sc.throughput_window_k
              << " training_bootstrap=" << sc.training_bootstrap << "\n";

    double multiplier = sc.jobs.size_multipliers.front();
    std::vector<medusa::RunMetrics> metrics;
    bool any_failed = false;
    for (std::uint64_t seed : seeds) {
        medusa::SingleRunResult result = medusa::run_single(sc, seed, multiplier, scheduler);
        write_file(dir / ("trace-" + std::to_string(seed) + ".jsonl"), result.trace_jsonl);
        const medusa::RunMetrics& m = result.metrics;
        std::cout << "seed=" << seed << " scheduler=" << m.scheduler
                  << " makespan_s=" << m.makespan_s << " extra_replicas=" << m.extra_replicas
                  << " bytes_copied=" << m.bytes_copied << " faults=" << m.faults_injected
                  << " correct=" << (m.result_correct ? "true" : "false");
        if (m.failed) std::cout << " FAILED reason=" << m.failure_reason;
        std::cout << "\n";
        any_failed = any_failed || m.failed || !m.result_correct;
        metrics.push_back(m);
    }
    write_file(dir / "metrics.csv",
               medusa::metrics_csv(metrics, static_cast<int>(sc.clouds.size())));
    write_file(dir / "metrics.jsonl", medusa::metrics_jsonl(metrics));
    std::cout << "wrote " << (dir / "metrics.csv").string() << " and metrics.jsonl ("
              << metrics.size() << " runs)\n";
    return any_failed ? kExitJobFailure : kExitOk;
}

int cmd_compare(const std::string& scenario_path, int repetitions,
                const std::string& output_dir) {
    medusa::Scenario sc = medusa::load_scenario_file(scenario_path);
    std::filesystem::path dir(output_dir);
    std::filesystem::create_directories(dir);

    std::cout << "scenario=" << sc.name << " throughput_window_k=" << sc.throughput_window_k
              << " seeds=" << medusa::scenario_seeds(sc, repetitions).size() << "\n";

    medusa::CompareSummary summary = medusa::compare_schedulers(sc, repetitions);
    std::string table = medusa::compare_table(summary);
    std::cout << table;
    write_file(dir / "compare.csv", table);
    write_file(dir / "metrics.csv",
               medusa::metrics_csv(summary.all, static_cast<int>(sc.clouds.size())));
    write_file(dir / "metrics.jsonl", medusa::metrics_jsonl(summary.all));

    bool any_failed = false;
    for (const medusa::RunMetrics& m : summary.all)
        any_failed = any_failed || m.failed || !m.result_correct;
    return any_failed ? kExitJobFailure : kExitOk;
}

int cmd_replay(const std::string& trace_path, const std::string& output_dir) {
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) throw medusa::ScenarioError("cannot open trace file " + trace_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    medusa::RunMetrics m = medusa::metrics_from_trace(medusa::parse_trace_jsonl(text));
    std::vector<medusa::RunMetrics> metrics{m};
    std::cout << medusa::metrics_jsonl(metrics);
    if (!output_dir.empty()) {
        std::filesystem::path dir(output_dir);
        std::filesystem::create_directories(dir);
        write_file(dir / "metrics.csv",
                   medusa::metrics_csv(metrics, static_cast<int>(m.cloud_usage.size())));
        write_file(dir / "metrics.jsonl", medusa::metrics_jsonl(metrics));
    }
    return m.failed || !m.result_correct ? kExitJobFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-cloud fault-tolerant MapReduce simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string trace_path;
    std::string output_dir = ".";
    std::string scheduler_flag;
    int repetitions = 0;
    std::uint64_t seed = 0;

    CLI::App* validate = app.add_subcommand("validate", "load a scenario and check invariants");
    validate->add_option("--scenario", scenario_path, "scenario file")->required();

    CLI::App* run = app.add_subcommand("run", "run one scenario, emit metrics and traces");
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    run->add_option("--repetitions", repetitions, "number of seeded runs (0 = scenario seeds)");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "run a single seed");
    run->add_option("--scheduler", scheduler_flag, "override scheduler (medusa | round_robin)");
    run->add_option("--output", output_dir, "output directory");

    CLI::App* compare = app.add_subcommand("compare", "paired runs under both schedulers");
    compare->add_option("--scenario", scenario_path, "scenario file")->required();
    compare->add_option("--repetitions", repetitions, "number of seeded runs per scheduler");
    compare->add_option("--output", output_dir, "output directory");

    CLI::App* replay = app.add_subcommand("replay", "recompute metrics from a trace file");
    replay->add_option("--trace", trace_path, "trace jsonl file")->required();
    replay->add_option("--output", output_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(scenario_path);
        if (run->parsed()) {
            std::optional<std::uint64_t> seed_override;
            if (seed_opt->count() > 0) seed_override = seed;
            return cmd_run(scenario_path, repetitions, seed_override, scheduler_flag, output_dir);
        }
        if (compare->parsed()) return cmd_compare(scenario_path, repetitions, output_dir);
        if (replay->parsed()) return cmd_replay(trace_path, output_dir);
    } catch (const medusa::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
