#include "medusa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

namespace medusa {

namespace {

const nlohmann::json& need(const nlohmann::json& doc, const std::string& key,
                           const std::string& path) {
    if (!doc.is_object() || !doc.contains(key)) throw ScenarioError(path + "." + key + ": missing");
    return doc.at(key);
}

template <typename T>
T get_as(const nlohmann::json& value, const std::string& path) {
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ScenarioError(path + ": wrong type");
    }
}

template <typename T>
T field(const nlohmann::json& doc, const std::string& key, const std::string& path) {
    return get_as<T>(need(doc, key, path), path + "." + key);
}

template <typename T>
T field_or(const nlohmann::json& doc, const std::string& key, const std::string& path, T fallback) {
    if (!doc.is_object() || !doc.contains(key)) return fallback;
    return get_as<T>(doc.at(key), path + "." + key);
}

LinkParams parse_link_params(const nlohmann::json& doc, const std::string& path,
                             const LinkParams* base) {
    LinkParams p = base != nullptr ? *base : LinkParams{};
    p.rtt_seconds = field_or<double>(doc, "rtt_seconds", path, p.rtt_seconds);
    p.true_throughput_bytes_per_s =
        field_or<double>(doc, "true_throughput_bytes_per_s", path, p.true_throughput_bytes_per_s);
    p.prior_throughput_bytes_per_s = field_or<double>(doc, "prior_throughput_bytes_per_s", path,
                                                      p.prior_throughput_bytes_per_s);
    p.noise_sigma = field_or<double>(doc, "noise_sigma", path, p.noise_sigma);
    if (p.rtt_seconds < 0.0) throw ScenarioError(path + ".rtt_seconds: negative");
    if (p.true_throughput_bytes_per_s <= 0.0)
        throw ScenarioError(path + ".true_throughput_bytes_per_s: must be positive");
    if (p.prior_throughput_bytes_per_s <= 0.0)
        throw ScenarioError(path + ".prior_throughput_bytes_per_s: must be positive");
    if (p.noise_sigma < 0.0) throw ScenarioError(path + ".noise_sigma: negative");
    return p;
}

FaultKind parse_kind(const std::string& text, const std::string& path) {
    if (text == "arbitrary_corruption") return FaultKind::ArbitraryCorruption;
    if (text == "malicious_corruption") return FaultKind::MaliciousCorruption;
    if (text == "collusion") return FaultKind::Collusion;
    if (text == "transmission_tamper") return FaultKind::TransmissionTamper;
    if (text == "outage") return FaultKind::Outage;
    throw ScenarioError(path + ".kind: unknown fault kind '" + text + "'");
}

constexpr double kRunBudgetSeconds = 1e6;  // virtual-time watchdog per submission

}  // namespace

Scenario load_scenario(const nlohmann::json& doc) {
    Scenario sc;
    const std::string root = "scenario";
    sc.name = field_or<std::string>(doc, "name", root, "scenario");

    const nlohmann::json& fconf = need(doc, "f_config", root);
    sc.fault.f = field<int>(fconf, "f", root + ".f_config");
    if (sc.fault.f < 0) throw ScenarioError(root + ".f_config.f: negative");
    std::string mode = field_or<std::string>(fconf, "mode", root + ".f_config", "arbitrary_only");
    if (mode == "arbitrary_only")
        sc.fault.mode = FaultMode::ArbitraryOnly;
    else if (mode == "malicious")
        sc.fault.mode = FaultMode::Malicious;
    else
        throw ScenarioError(root + ".f_config.mode: expected 'arbitrary_only' or 'malicious'");

    std::string sched = field_or<std::string>(doc, "scheduler", root, "medusa");
    if (sched == "medusa")
        sc.scheduler = SchedulerKind::Medusa;
    else if (sched == "round_robin")
        sc.scheduler = SchedulerKind::RoundRobin;
    else
        throw ScenarioError(root + ".scheduler: expected 'medusa' or 'round_robin'");

    const nlohmann::json& clouds = need(doc, "clouds", root);
    if (!clouds.is_array() || clouds.empty()) throw ScenarioError(root + ".clouds: need an array");
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        std::string path = root + ".clouds[" + std::to_string(i) + "]";
        const nlohmann::json& c = clouds.at(i);
        CloudProfile profile;
        profile.id = field<CloudId>(c, "id", path);
        if (profile.id != static_cast<CloudId>(i))
            throw ScenarioError(path + ".id: ids must be dense and in order (expected "
                                + std::to_string(i) + ")");
        profile.capacity.cpu_clock_mhz = field<double>(c, "cpu_clock_mhz", path);
        profile.capacity.cpu_cores = field<int>(c, "cpu_cores", path);
        profile.capacity.memory_mb = field<double>(c, "memory_mb", path);
        profile.base_seconds_per_mb = field<double>(c, "base_seconds_per_mb", path);
        profile.load_penalty_per_job = field_or<double>(c, "load_penalty_per_job", path, 0.0);
        profile.proc_noise_sigma = field_or<double>(c, "proc_noise_sigma", path, 0.0);
        if (profile.capacity.cpu_clock_mhz <= 0.0)
            throw ScenarioError(path + ".cpu_clock_mhz: must be positive");
        if (profile.capacity.cpu_cores < 1)
            throw ScenarioError(path + ".cpu_cores: must be >= 1");
        if (profile.capacity.memory_mb <= 0.0)
            throw ScenarioError(path + ".memory_mb: must be positive");
        if (profile.base_seconds_per_mb <= 0.0)
            throw ScenarioError(path + ".base_seconds_per_mb: must be positive");
        if (profile.load_penalty_per_job < 0.0)
            throw ScenarioError(path + ".load_penalty_per_job: negative");
        if (profile.proc_noise_sigma < 0.0)
            throw ScenarioError(path + ".proc_noise_sigma: negative");
        if (c.contains("background_load")) {
            std::string bpath = path + ".background_load";
            const nlohmann::json& b = c.at("background_load");
            profile.background.mean_interarrival_s =
                field_or<double>(b, "mean_interarrival_s", bpath, 0.0);
            profile.background.size_bytes_min =
                field_or<std::uint64_t>(b, "size_bytes_min", bpath, 0);
            profile.background.size_bytes_max =
                field_or<std::uint64_t>(b, "size_bytes_max", bpath, 0);
            profile.background.map_tasks = field_or<int>(b, "map_tasks", bpath, 4);
            profile.background.reduce_tasks = field_or<int>(b, "reduce_tasks", bpath, 1);
            if (profile.background.mean_interarrival_s > 0.0) {
                if (profile.background.size_bytes_min == 0
                    || profile.background.size_bytes_max < profile.background.size_bytes_min)
                    throw ScenarioError(bpath + ": need 0 < size_bytes_min <= size_bytes_max");
                if (profile.background.map_tasks < 1 || profile.background.reduce_tasks < 1)
                    throw ScenarioError(bpath + ": task counts must be >= 1");
            }
        }
        sc.clouds.push_back(std::move(profile));
    }
    int n = static_cast<int>(sc.clouds.size());
    if (n < 2 * sc.fault.f + 1)
        throw ScenarioError(root + ".f_config.f: needs at least 2f+1 clouds ("
                            + std::to_string(2 * sc.fault.f + 1) + "), got " + std::to_string(n));

    const nlohmann::json& links = need(doc, "links", root);
    sc.default_link = parse_link_params(need(links, "default", root + ".links"),
                                        root + ".links.default", nullptr);
    if (links.contains("overrides")) {
        const nlohmann::json& overrides = links.at("overrides");
        if (!overrides.is_array()) throw ScenarioError(root + ".links.overrides: need an array");
        for (std::size_t i = 0; i < overrides.size(); ++i) {
            std::string path = root + ".links.overrides[" + std::to_string(i) + "]";
            const nlohmann::json& o = overrides.at(i);
            LinkOverride ov;
            ov.a = field<CloudId>(o, "a", path);
            ov.b = field<CloudId>(o, "b", path);
            if (ov.a < 0 || ov.a >= n || ov.b < 0 || ov.b >= n)
                throw ScenarioError(path + ": cloud id out of range");
            if (ov.a == ov.b) throw ScenarioError(path + ": endpoints must differ");
            ov.params = parse_link_params(o, path, &sc.default_link);
            sc.link_overrides.push_back(ov);
        }
    }

    const nlohmann::json& partitions = need(doc, "partitions", root);
    if (!partitions.is_array() || partitions.empty())
        throw ScenarioError(root + ".partitions: need a non-empty array");
    std::set<std::string> seen_ids;
    for (std::size_t i = 0; i < partitions.size(); ++i) {
        std::string path = root + ".partitions[" + std::to_string(i) + "]";
        const nlohmann::json& p = partitions.at(i);
        DataPartition part;
        part.id = field<std::string>(p, "id", path);
        part.size_bytes = field<std::uint64_t>(p, "size_bytes", path);
        part.home_cloud = field<CloudId>(p, "home_cloud", path);
        part.content_seed = field_or<std::uint64_t>(p, "content_seed", path, i + 1);
        if (part.id.empty()) throw ScenarioError(path + ".id: empty");
        if (!seen_ids.insert(part.id).second) throw ScenarioError(path + ".id: duplicate");
        if (part.size_bytes == 0) throw ScenarioError(path + ".size_bytes: must be positive");
        if (part.home_cloud < 0 || part.home_cloud >= n)
            throw ScenarioError(path + ".home_cloud: out of range");
        sc.partitions.push_back(std::move(part));
    }

    const nlohmann::json& jobs = need(doc, "jobs", root);
    sc.jobs.map_tasks = field_or<int>(jobs, "map_tasks", root + ".jobs", 4);
    sc.jobs.reduce_tasks = field_or<int>(jobs, "reduce_tasks", root + ".jobs", 1);
    sc.jobs.output_fraction = field_or<double>(jobs, "output_fraction", root + ".jobs", 0.1);
    if (sc.jobs.map_tasks < 1) throw ScenarioError(root + ".jobs.map_tasks: must be >= 1");
    if (sc.jobs.reduce_tasks < 1) throw ScenarioError(root + ".jobs.reduce_tasks: must be >= 1");
    if (sc.jobs.output_fraction <= 0.0 || sc.jobs.output_fraction > 1.0)
        throw ScenarioError(root + ".jobs.output_fraction: must be in (0, 1]");
    if (jobs.contains("size_multipliers")) {
        sc.jobs.size_multipliers =
            get_as<std::vector<double>>(jobs.at("size_multipliers"),
                                        root + ".jobs.size_multipliers");
        if (sc.jobs.size_multipliers.empty())
            throw ScenarioError(root + ".jobs.size_multipliers: empty");
        for (double m : sc.jobs.size_multipliers)
            if (m <= 0.0) throw ScenarioError(root + ".jobs.size_multipliers: must be positive");
    }

    sc.seeds = field_or<std::vector<std::uint64_t>>(doc, "seeds", root, {});
    sc.training_bootstrap = field_or<int>(doc, "training_bootstrap", root, 30);
    if (sc.training_bootstrap < 0) throw ScenarioError(root + ".training_bootstrap: negative");
    sc.heartbeat_period_s = field_or<double>(doc, "heartbeat_period_s", root, 30.0);
    sc.detection_window_s = field_or<double>(doc, "detection_window_s", root, 60.0);
    sc.measurement_period_s = field_or<double>(doc, "measurement_period_s", root, 30.0);
    if (sc.heartbeat_period_s <= 0.0) throw ScenarioError(root + ".heartbeat_period_s: positive");
    if (sc.measurement_period_s <= 0.0)
        throw ScenarioError(root + ".measurement_period_s: positive");
    if (sc.detection_window_s <= sc.heartbeat_period_s)
        throw ScenarioError(root + ".detection_window_s: must exceed heartbeat_period_s");
    sc.throughput_window_k = field_or<int>(doc, "throughput_window_k", root, 10);
    if (sc.throughput_window_k < 1) throw ScenarioError(root + ".throughput_window_k: >= 1");

    if (doc.contains("injections")) {
        const nlohmann::json& injections = doc.at("injections");
        if (!injections.is_array()) throw ScenarioError(root + ".injections: need an array");
        for (std::size_t i = 0; i < injections.size(); ++i) {
            std::string path = root + ".injections[" + std::to_string(i) + "]";
            const nlohmann::json& inj = injections.at(i);
            FaultInjection f;
            f.kind = parse_kind(field<std::string>(inj, "kind", path), path);
            if (inj.contains("target_cloud") && !inj.at("target_cloud").is_string())
                f.target_cloud = field<CloudId>(inj, "target_cloud", path);
            f.target_job = field_or<std::string>(inj, "target_job", path, "");
            f.count = field_or<int>(inj, "count", path, 1);
            f.trigger_time_s = field_or<double>(inj, "trigger_time_s", path, 0.0);
            if (inj.contains("collusion_clouds"))
                for (CloudId c : get_as<std::vector<CloudId>>(inj.at("collusion_clouds"),
                                                              path + ".collusion_clouds"))
                    f.collusion_clouds.insert(c);
            if (inj.contains("target_link")) {
                auto pair = get_as<std::vector<CloudId>>(inj.at("target_link"),
                                                         path + ".target_link");
                if (pair.size() != 2) throw ScenarioError(path + ".target_link: need [src, dst]");
                f.target_link = std::make_pair(pair[0], pair[1]);
            }
            if (!f.target_job.empty() && f.kind != FaultKind::TransmissionTamper
                && f.kind != FaultKind::Outage) {
                bool known = f.target_job == "global";
                for (const DataPartition& p : sc.partitions)
                    if (f.target_job == "v:" + p.id) known = true;
                if (!known) throw ScenarioError(path + ".target_job: unknown job '"
                                                + f.target_job + "'");
            }
            sc.injections.push_back(std::move(f));
        }
    }
    try {
        validate_injections(sc.injections, sc.fault.f, n);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(root + ".injections: " + e.what());
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(path + ": invalid JSON: " + e.what());
    }
    return load_scenario(doc);
}

namespace {

LinkModel build_link_model(const Scenario& sc) {
    LinkModel link;
    int n = static_cast<int>(sc.clouds.size());
    for (CloudId a = 0; a < n; ++a)
        for (CloudId b = a + 1; b < n; ++b) link.set_link(a, b, sc.default_link);
    for (const LinkOverride& ov : sc.link_overrides) link.set_link(ov.a, ov.b, ov.params);
    return link;
}

}  // namespace

SingleRunResult run_single(const Scenario& scenario, std::uint64_t seed, double size_multiplier,
                           std::optional<SchedulerKind> scheduler_override) {
    SchedulerKind scheduler = scheduler_override.value_or(scenario.scheduler);

    SimEngine engine(seed);
    TraceLog trace;
    ThroughputTracker tracker(scenario.throughput_window_k);
    LinkModel link = build_link_model(scenario);
    FaultInjector injector(scenario.injections);
    MessageQueue mq(engine);

    std::map<CloudId, std::unique_ptr<SimCloud>> storage;
    std::map<CloudId, SimCloud*> clouds;
    for (const CloudProfile& profile : scenario.clouds) {
        auto cloud = std::make_unique<SimCloud>(engine, mq, link, injector, trace, profile);
        clouds[profile.id] = cloud.get();
        storage[profile.id] = std::move(cloud);
    }
    for (auto& [id, cloud] : storage) {
        (void)id;
        cloud->set_peer_lookup([&storage](CloudId c) -> SimCloud* {
            auto it = storage.find(c);
            return it == storage.end() ? nullptr : it->second.get();
        });
        cloud->start();
    }

    std::vector<DataPartition> partitions = scenario.partitions;
    for (DataPartition& p : partitions)
        p.size_bytes = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(
                   std::llround(static_cast<double>(p.size_bytes) * size_multiplier)));

    ProxyConfig config;
    config.fault = scenario.fault;
    config.scheduler = scheduler;
    config.heartbeat_period_s = scenario.heartbeat_period_s;
    config.detection_window_s = scenario.detection_window_s;
    config.output_fraction = scenario.jobs.output_fraction;
    config.training_window = kDefaultTrainingWindow;
    config.trace_meta = {{"scenario", scenario.name},
                         {"seed", seed},
                         {"window_k", scenario.throughput_window_k},
                         {"size_multiplier", size_multiplier}};
    MedusaProxy proxy(engine, mq, link, tracker, injector, trace, config, clouds);
    proxy.start();

    auto reset_storage = [&]() {
        for (auto& [id, cloud] : storage) {
            (void)id;
            cloud->clear_partitions();
        }
        for (const DataPartition& p : partitions) storage.at(p.home_cloud)->store_partition(p);
    };

    auto probe_round = [&]() {
        int n = static_cast<int>(scenario.clouds.size());
        for (CloudId i = 0; i < n; ++i) {
            for (CloudId j = 0; j < n; ++j) {
                if (i == j || clouds.at(i)->down() || clouds.at(j)->down()) continue;
                const LinkParams& p = link.params(i, j);
                tracker.record_measurement(
                    i, j, p.true_throughput_bytes_per_s * engine.lognormal_factor(p.noise_sigma));
            }
        }
    };
    probe_round();
    std::function<void()> probe_tick = [&]() {
        probe_round();
        engine.schedule_in(scenario.measurement_period_s, [&probe_tick]() { probe_tick(); });
    };
    engine.schedule_in(scenario.measurement_period_s, [&probe_tick]() { probe_tick(); });

    SubmissionRequest request;
    request.partitions = partitions;
    request.map_tasks = scenario.jobs.map_tasks;
    request.reduce_tasks = scenario.jobs.reduce_tasks;

    for (int b = 0; b < scenario.training_bootstrap; ++b) {
        request.tag = "b" + std::to_string(b);
        reset_storage();
        proxy.submit(request);
        engine.run_until([&]() { return proxy.submission_done(); },
                         engine.now() + kRunBudgetSeconds);
    }

    request.tag = "m";
    reset_storage();
    trace.set_enabled(true);
    injector.arm();
    proxy.submit(request);
    double submit_time = proxy.outcome().submit_time;
    for (const FaultInjection& inj : scenario.injections) {
        if (inj.kind != FaultKind::Outage) continue;
        SimCloud* target = clouds.at(*inj.target_cloud);
        engine.schedule_at(submit_time + inj.trigger_time_s, [target]() {
            if (!target->down()) target->set_down();
        });
    }
    engine.run_until([&]() { return proxy.submission_done(); }, engine.now() + kRunBudgetSeconds);

    SingleRunResult result;
    result.trace = trace.records();
    result.trace_jsonl = trace.to_jsonl();
    result.metrics = metrics_from_trace(result.trace);
    return result;
}

RunMetrics metrics_from_trace(const std::vector<nlohmann::json>& records) {
    RunMetrics m;
    int num_clouds = 0;
    std::map<CloudId, int> usage;
    int total_runs = 0;
    for (const nlohmann::json& rec : records) {
        const std::string ev = rec.at("ev").get<std::string>();
        if (ev == "submit") {
            m.scenario = rec.value("scenario", std::string{});
            m.seed = rec.value("seed", std::uint64_t{0});
            m.scheduler = rec.at("scheduler").get<std::string>();
            m.input_bytes = rec.at("input_bytes").get<std::uint64_t>();
            num_clouds = rec.at("clouds").get<int>();
        } else if (ev == "copy_start") {
            m.bytes_copied += rec.at("bytes").get<std::uint64_t>();
        } else if (ev == "run_done") {
            ++usage[rec.at("cloud").get<CloudId>()];
            ++total_runs;
        } else if (ev == "extra_replica") {
            ++m.extra_replicas;
        } else if (ev == "inject") {
            ++m.faults_injected;
        } else if (ev == "replica") {
            ++m.replicas_per_job[rec.at("job").get<std::string>()];
        } else if (ev == "final") {
            m.makespan_s = rec.at("makespan_s").get<double>();
            m.failed = rec.at("failed").get<bool>();
            m.result_correct = rec.at("correct").get<bool>();
            if (m.failed) m.failure_reason = rec.value("reason", std::string{});
        }
    }
    m.cloud_usage.assign(static_cast<std::size_t>(num_clouds), 0.0);
    if (total_runs > 0)
        for (const auto& [cloud, count] : usage)
            if (cloud >= 0 && cloud < num_clouds)
                m.cloud_usage[static_cast<std::size_t>(cloud)] =
                    static_cast<double>(count) / static_cast<double>(total_runs);
    return m;
}

std::vector<std::uint64_t> scenario_seeds(const Scenario& scenario, int repetitions) {
    std::vector<std::uint64_t> seeds = scenario.seeds;
    if (repetitions <= 0) {
        if (seeds.empty()) seeds.push_back(1);
        std::sort(seeds.begin(), seeds.end());
        return seeds;
    }
    if (static_cast<int>(seeds.size()) > repetitions) seeds.resize(repetitions);
    std::uint64_t next = seeds.empty() ? 1 : seeds.back() + 1;
    while (static_cast<int>(seeds.size()) < repetitions) seeds.push_back(next++);
    std::sort(seeds.begin(), seeds.end());
    return seeds;
}

std::vector<RunMetrics> run_experiment(const Scenario& scenario, int repetitions) {
    std::vector<RunMetrics> out;
    double multiplier = scenario.jobs.size_multipliers.front();
    for (std::uint64_t seed : scenario_seeds(scenario, repetitions))
        out.push_back(run_single(scenario, seed, multiplier).metrics);
    return out;
}

namespace {

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    double pos = p * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[lo + 1] - values[lo]) * frac;
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

CompareSummary compare_schedulers(const Scenario& scenario, int repetitions) {
    CompareSummary summary;
    std::vector<std::uint64_t> seeds = scenario_seeds(scenario, repetitions);
    for (double multiplier : scenario.jobs.size_multipliers) {
        std::vector<double> medusa_makespans;
        std::vector<double> rr_makespans;
        for (std::uint64_t seed : seeds) {
            RunMetrics md =
                run_single(scenario, seed, multiplier, SchedulerKind::Medusa).metrics;
            RunMetrics rr =
                run_single(scenario, seed, multiplier, SchedulerKind::RoundRobin).metrics;
            medusa_makespans.push_back(md.makespan_s);
            rr_makespans.push_back(rr.makespan_s);
            summary.all.push_back(std::move(md));
            summary.all.push_back(std::move(rr));
        }
        for (const auto& [name, makespans] :
             std::vector<std::pair<std::string, const std::vector<double>*>>{
                 {"medusa", &medusa_makespans}, {"round_robin", &rr_makespans}}) {
            CompareRow row;
            row.size_multiplier = multiplier;
            row.scheduler = name;
            row.mean = mean(*makespans);
            row.q1 = quantile(*makespans, 0.25);
            row.median = quantile(*makespans, 0.5);
            row.q3 = quantile(*makespans, 0.75);
            summary.rows.push_back(row);
        }
        double medusa_mean = mean(medusa_makespans);
        summary.speedup[multiplier] = medusa_mean > 0.0 ? mean(rr_makespans) / medusa_mean : 0.0;
    }
    return summary;
}

std::string metrics_csv(const std::vector<RunMetrics>& metrics, int num_clouds) {
    std::ostringstream out;
    out << "scenario,scheduler,seed,input_bytes,makespan_s,extra_replicas,bytes_copied";
    for (int c = 0; c < num_clouds; ++c) out << ",cloud_usage_" << c;
    out << ",faults_injected,result_correct\n";
    for (const RunMetrics& m : metrics) {
        out << m.scenario << ',' << m.scheduler << ',' << m.seed << ',' << m.input_bytes << ','
            << fmt(m.makespan_s) << ',' << m.extra_replicas << ',' << m.bytes_copied;
        for (int c = 0; c < num_clouds; ++c) {
            double usage = c < static_cast<int>(m.cloud_usage.size())
                               ? m.cloud_usage[static_cast<std::size_t>(c)]
                               : 0.0;
            out << ',' << fmt(usage);
        }
        out << ',' << m.faults_injected << ',' << (m.result_correct ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string metrics_jsonl(const std::vector<RunMetrics>& metrics) {
    std::string out;
    for (const RunMetrics& m : metrics) {
        nlohmann::json rec{{"scenario", m.scenario},
                           {"scheduler", m.scheduler},
                           {"seed", m.seed},
                           {"input_bytes", m.input_bytes},
                           {"makespan_s", m.makespan_s},
                           {"extra_replicas", m.extra_replicas},
                           {"bytes_copied", m.bytes_copied},
                           {"cloud_usage", m.cloud_usage},
                           {"faults_injected", m.faults_injected},
                           {"result_correct", m.result_correct},
                           {"failed", m.failed},
                           {"failure_reason", m.failure_reason},
                           {"replicas_per_job", m.replicas_per_job}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::string compare_table(const CompareSummary& summary) {
    std::ostringstream out;
    out << "size_multiplier,scheduler,mean_makespan_s,q1,median,q3,speedup_vs_round_robin\n";
    for (const CompareRow& row : summary.rows) {
        double speedup = summary.speedup.at(row.size_multiplier);
        out << fmt(row.size_multiplier) << ',' << row.scheduler << ',' << fmt(row.mean) << ','
            << fmt(row.q1) << ',' << fmt(row.median) << ',' << fmt(row.q3) << ','
            << (row.scheduler == "medusa" ? fmt(speedup) : "") << '\n';
    }
    return out.str();
}

std::vector<nlohmann::json> parse_trace_jsonl(const std::string& text) {
    std::vector<nlohmann::json> records;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ScenarioError("trace line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace medusa
