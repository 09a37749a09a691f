#ifndef MEDUSA_HARNESS_HPP
#define MEDUSA_HARNESS_HPP

#include "medusa/core.hpp"
#include "medusa/netmodel.hpp"
#include "medusa/protocol.hpp"
#include "medusa/scheduler.hpp"
#include "medusa/simcloud.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace medusa {

class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct LinkOverride {
    CloudId a = -1;
    CloudId b = -1;
    LinkParams params;
};

struct WorkloadSpec {
    int map_tasks = 4;
    int reduce_tasks = 1;
    double output_fraction = 0.1;
    std::vector<double> size_multipliers{1.0};
};

struct Scenario {
    std::string name;
    FaultToleranceConfig fault;
    SchedulerKind scheduler = SchedulerKind::Medusa;
    std::vector<CloudProfile> clouds;
    LinkParams default_link;
    std::vector<LinkOverride> link_overrides;
    std::vector<DataPartition> partitions;
    WorkloadSpec jobs;
    std::vector<std::uint64_t> seeds;
    int training_bootstrap = 30;
    double heartbeat_period_s = 30.0;
    double detection_window_s = 60.0;
    double measurement_period_s = 30.0;
    int throughput_window_k = 10;
    std::vector<FaultInjection> injections;
};

/// Parses and validates a scenario document. Throws ScenarioError naming the
/// offending field path; enforces |clouds| >= 2f+1 and the fault-model guard.
Scenario load_scenario(const nlohmann::json& doc);
Scenario load_scenario_file(const std::string& path);

struct RunMetrics {
    std::string scenario;
    std::string scheduler;
    std::uint64_t seed = 0;
    std::uint64_t input_bytes = 0;
    double makespan_s = 0.0;
    int extra_replicas = 0;
    std::uint64_t bytes_copied = 0;
    std::vector<double> cloud_usage;  // share of executed replicas per cloud
    int faults_injected = 0;
    bool result_correct = false;
    bool failed = false;
    std::string failure_reason;
    std::map<std::string, int> replicas_per_job;

    bool operator==(const RunMetrics&) const = default;
};

struct SingleRunResult {
    RunMetrics metrics;
    std::vector<nlohmann::json> trace;
    std::string trace_jsonl;
};

/// One seeded world: training_bootstrap fault-free submissions to build the
/// throughput and processing-time history, then one measured submission with
/// tracing on and the fault injector armed.
SingleRunResult run_single(const Scenario& scenario, std::uint64_t seed,
                           double size_multiplier = 1.0,
                           std::optional<SchedulerKind> scheduler_override = std::nullopt);

/// Metrics are a pure function of the trace; replaying a logged trace yields
/// the same RunMetrics as the live run.
RunMetrics metrics_from_trace(const std::vector<nlohmann::json>& records);

std::vector<std::uint64_t> scenario_seeds(const Scenario& scenario, int repetitions);

std::vector<RunMetrics> run_experiment(const Scenario& scenario, int repetitions);

struct CompareRow {
    double size_multiplier = 1.0;
    std::string scheduler;
    double mean = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

struct CompareSummary {
    std::vector<CompareRow> rows;
    std::map<double, double> speedup;  // size multiplier -> rr mean / medusa mean
    std::vector<RunMetrics> all;
};

/// Paired seeded runs of both schedulers per configured input size.
CompareSummary compare_schedulers(const Scenario& scenario, int repetitions);

std::string metrics_csv(const std::vector<RunMetrics>& metrics, int num_clouds);
std::string metrics_jsonl(const std::vector<RunMetrics>& metrics);
std::string compare_table(const CompareSummary& summary);

std::vector<nlohmann::json> parse_trace_jsonl(const std::string& text);

}  // namespace medusa

#endif  // MEDUSA_HARNESS_HPP
