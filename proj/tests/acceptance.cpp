// Acceptance gate for the simulator: one self-contained check per release
// criterion, each printing a single PASS/FAIL line. Exit code 0 only when
// every criterion holds. Tolerances are pinned here on purpose; loosening
// them is a behavior change, not a test fix.

#include "medusa/harness.hpp"
#include "medusa/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace medusa;

namespace {

int g_failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

Scenario load(const std::string& name) {
    return load_scenario_file(std::string(MEDUSA_SCENARIO_DIR) + "/" + name);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

nlohmann::json cloud_json(int id) {
    return {{"id", id},
            {"cpu_clock_mhz", 2000.0},
            {"cpu_cores", 2},
            {"memory_mb", 4096.0},
            {"base_seconds_per_mb", 1.0},
            {"load_penalty_per_job", 0.05},
            {"proc_noise_sigma", 0.05}};
}

// Minimal homogeneous scenario: n clouds, one 2 MB partition homed on cloud 0.
nlohmann::json inline_scenario(int n, int f, const std::string& mode) {
    nlohmann::json clouds = nlohmann::json::array();
    for (int i = 0; i < n; ++i) clouds.push_back(cloud_json(i));
    return {{"name", "inline"},
            {"f_config", {{"f", f}, {"mode", mode}}},
            {"scheduler", "medusa"},
            {"clouds", clouds},
            {"links",
             {{"default",
               {{"rtt_seconds", 0.01},
                {"true_throughput_bytes_per_s", 1e6},
                {"prior_throughput_bytes_per_s", 1e6},
                {"noise_sigma", 0.05}}}}},
            {"partitions", nlohmann::json::array({{{"id", "p0"},
                                                   {"size_bytes", 2000000},
                                                   {"home_cloud", 0},
                                                   {"content_seed", 7}}})},
            {"jobs", {{"map_tasks", 4}, {"reduce_tasks", 1}, {"output_fraction", 0.1}}},
            {"training_bootstrap", 0},
            {"heartbeat_period_s", 30.0},
            {"detection_window_s", 60.0},
            {"measurement_period_s", 30.0},
            {"throughput_window_k", 10}};
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<std::string> final_digest(const std::vector<nlohmann::json>& trace) {
    for (const nlohmann::json& rec : trace)
        if (rec.at("ev") == "final" && rec.contains("digest"))
            return rec.at("digest").get<std::string>();
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// 01: replica counts are exactly f+1 without faults and exactly 2f+1 for a
// job hit by f disagreeing faults; every case finishes in under 5 s of wall
// clock.

void criterion_01() {
    std::ostringstream detail;
    bool ok = true;
    for (int f = 0; f <= 2 && ok; ++f) {
        int n = std::max(3, 2 * f + 1);

        nlohmann::json clean = inline_scenario(n, f, "arbitrary_only");
        auto t0 = std::chrono::steady_clock::now();
        SingleRunResult base = run_single(load_scenario(clean), 11);
        double wall_clean =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (base.metrics.failed || !base.metrics.result_correct) {
            ok = false;
            detail << "f=" << f << " clean run failed";
            break;
        }
        for (const auto& [job, replicas] : base.metrics.replicas_per_job) {
            if (replicas != f + 1) {
                ok = false;
                detail << "f=" << f << " job " << job << " got " << replicas
                       << " replicas, want " << (f + 1);
            }
        }

        nlohmann::json faulted = clean;
        faulted["injections"] = nlohmann::json::array();
        for (int i = 0; i < f; ++i)
            faulted["injections"].push_back(
                {{"kind", "arbitrary_corruption"}, {"target_job", "v:p0"}, {"count", 1}});
        t0 = std::chrono::steady_clock::now();
        SingleRunResult hit = run_single(load_scenario(faulted), 11);
        double wall_hit =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (hit.metrics.failed || !hit.metrics.result_correct) {
            ok = false;
            detail << "f=" << f << " faulted run failed";
            break;
        }
        for (const auto& [job, replicas] : hit.metrics.replicas_per_job) {
            bool target = job.find(":v:p0") != std::string::npos;
            int want = target ? 2 * f + 1 : f + 1;
            if (replicas != want) {
                ok = false;
                detail << "f=" << f << " job " << job << " got " << replicas
                       << " replicas, want " << want;
            }
        }
        if (wall_clean >= 5.0 || wall_hit >= 5.0) {
            ok = false;
            detail << "f=" << f << " too slow (" << fmt(wall_clean) << "s/" << fmt(wall_hit)
                   << "s)";
        }
        if (ok && f == 2)
            detail << "f=0..2 clean=f+1, faulted job=2f+1, slowest case " << fmt(wall_hit)
                   << "s";
    }
    report("01 replication-counts", ok, detail.str());
}

// ---------------------------------------------------------------------------
// 02: with 5 clouds, f=2 and two colluding clouds returning one identical
// wrong digest, the accepted result equals the fault-free digest for 100/100
// seeds.

void criterion_02() {
    nlohmann::json doc = inline_scenario(5, 2, "malicious");
    doc["training_bootstrap"] = 2;

    SingleRunResult clean = run_single(load_scenario(doc), 1);
    std::optional<std::string> oracle = final_digest(clean.trace);
    if (!oracle || !clean.metrics.result_correct) {
        report("02 collusion-safety", false, "fault-free oracle run failed");
        return;
    }

    doc["injections"] = nlohmann::json::array(
        {{{"kind", "collusion"},
          {"collusion_clouds", nlohmann::json::array({0, 1})},
          {"target_job", "v:p0"}}});
    Scenario scenario = load_scenario(doc);

    int good = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        SingleRunResult run = run_single(scenario, seed);
        std::optional<std::string> digest = final_digest(run.trace);
        if (!run.metrics.failed && run.metrics.result_correct && digest == oracle) ++good;
    }
    report("02 collusion-safety", good == 100,
           std::to_string(good) + "/100 seeded runs accepted the fault-free digest");
}

// ---------------------------------------------------------------------------
// 03: collect_and_vote agrees with a brute-force majority checker over every
// digest multiset of size <= 5 with <= 3 distinct values, f in {0,1,2} and
// 0..2 outstanding replicas.

void criterion_03() {
    const Digest a = sha256(std::string("vote-a"));
    const Digest b = sha256(std::string("vote-b"));
    const Digest c = sha256(std::string("vote-c"));

    int checked = 0;
    for (int na = 0; na <= 5; ++na)
        for (int nb = 0; nb + na <= 5; ++nb)
            for (int nc = 0; nc + nb + na <= 5; ++nc)
                for (int f = 0; f <= 2; ++f)
                    for (int outstanding = 0; outstanding <= 2; ++outstanding) {
                        VoteState votes;
                        CloudId next_cloud = 0;
                        for (int i = 0; i < na; ++i) votes.register_report(next_cloud++, 1, a);
                        for (int i = 0; i < nb; ++i) votes.register_report(next_cloud++, 1, b);
                        for (int i = 0; i < nc; ++i) votes.register_report(next_cloud++, 1, c);

                        Digest winner;
                        VoteDecision got = collect_and_vote(votes, outstanding, f, &winner);

                        int best = std::max({na, nb, nc});
                        VoteDecision want =
                            best >= f + 1
                                ? VoteDecision::Accept
                                : (outstanding > 0 ? VoteDecision::Wait
                                                   : VoteDecision::NeedExtraReplica);
                        if (got != want) {
                            report("03 vote-oracle", false,
                                   "mismatch at counts " + std::to_string(na) + "/" +
                                       std::to_string(nb) + "/" + std::to_string(nc) +
                                       " f=" + std::to_string(f) +
                                       " outstanding=" + std::to_string(outstanding));
                            return;
                        }
                        if (got == VoteDecision::Accept) {
                            int support = winner == a ? na : winner == b ? nb : nc;
                            if (support < f + 1) {
                                report("03 vote-oracle", false, "winner lacks f+1 support");
                                return;
                            }
                        }
                        ++checked;
                    }
    report("03 vote-oracle", true, std::to_string(checked) + " multiset/f combinations");
}

// ---------------------------------------------------------------------------
// 04: greedy phase-1/phase-2 selections match exhaustive minimum-cost subset
// enumeration for 1000 random cost tables with |clouds| <= 6 and f <= 2.

struct RandomWorld {
    LinkModel link;
    ThroughputTracker tracker{10};
    std::map<CloudId, RegressionModel> models;
    SchedulerContext ctx;
    int n = 0;

    RandomWorld(int clouds, std::mt19937_64& rng) : n(clouds) {
        std::uniform_real_distribution<double> tp(5e5, 5e7);
        std::uniform_real_distribution<double> proc(0.5, 30.0);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                LinkParams p;
                p.rtt_seconds = 0.0;
                p.true_throughput_bytes_per_s = tp(rng);
                p.prior_throughput_bytes_per_s = p.true_throughput_bytes_per_s;
                link.set_link(i, j, p);
            }
        for (int i = 0; i < n; ++i) {
            RegressionModel m;
            m.intercept = proc(rng);
            models[i] = m;
        }
        ctx.tracker = &tracker;
        ctx.link = &link;
        for (int i = 0; i < n; ++i) {
            CloudState state;
            state.capacity = {2000.0, 2, 4096.0};
            state.model = &models.at(i);
            ctx.clouds[i] = state;
        }
    }
};

// Minimum-cost subset of `size` clouds from `costs`, tie broken toward the
// lexicographically smallest id set; used as the enumeration oracle.
std::optional<std::vector<CloudId>> brute_force_pick(
    const std::map<CloudId, double>& costs, std::size_t size) {
    std::vector<CloudId> ids;
    for (const auto& [id, cost] : costs) ids.push_back(id);
    if (ids.size() < size) return std::nullopt;

    std::vector<bool> mask(ids.size(), false);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(size), true);
    std::sort(mask.begin(), mask.end());  // iterate all combinations

    std::optional<double> best;
    std::vector<CloudId> best_ids;
    do {
        std::vector<CloudId> subset;
        double total = 0.0;
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (mask[ids.size() - 1 - i]) {
                subset.push_back(ids[i]);
                total += costs.at(ids[i]);
            }
        if (subset.size() != size) continue;
        if (!best || total < *best - 1e-15 ||
            (std::abs(total - *best) <= 1e-15 && subset < best_ids)) {
            best = total;
            best_ids = subset;
        }
    } while (std::next_permutation(mask.begin(), mask.end()));
    if (!best) return std::nullopt;
    return best_ids;
}

void criterion_04() {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> pick_n(3, 6);
    std::uniform_int_distribution<int> pick_f(0, 2);
    std::uniform_int_distribution<std::uint64_t> pick_size(1000000, 100000000);

    int trials = 0;
    for (int t = 0; t < 1000; ++t) {
        int n = pick_n(rng);
        int f = std::min(pick_f(rng), (n - 1) / 2);
        RandomWorld world(n, rng);

        JobSpec job{"v:p0", JobPhase::Vanilla, {"p0"}, 4, 1};
        std::uint64_t size = pick_size(rng);
        CloudId home = static_cast<CloudId>(t % n);
        ExclusionSet none;

        // Phase 1: home is fixed, the f cheapest others join it.
        std::map<CloudId, double> t1_costs;
        for (int c = 0; c < n; ++c) {
            if (c == home) continue;
            auto est = estimate_t1(world.ctx, job, size, {home}, c);
            if (est) t1_costs[c] = est->total_s;
        }
        auto got1 = select_phase1_clouds(world.ctx, job, size, home, f, none);
        auto oracle1 = brute_force_pick(t1_costs, static_cast<std::size_t>(f));
        if (!got1 || !oracle1) {
            report("04 scheduler-oracle", false, "phase1 selection unexpectedly empty");
            return;
        }
        std::vector<CloudId> got1_rest(got1->begin() + 1, got1->end());
        std::sort(got1_rest.begin(), got1_rest.end());
        if ((*got1)[0] != home || got1_rest != *oracle1) {
            report("04 scheduler-oracle", false, "phase1 mismatch at trial " + std::to_string(t));
            return;
        }
        // The tail must be ordered by (estimate, id).
        for (std::size_t i = 2; i < got1->size(); ++i) {
            double prev = t1_costs.at((*got1)[i - 1]);
            double cur = t1_costs.at((*got1)[i]);
            if (cur < prev || (cur == prev && (*got1)[i] < (*got1)[i - 1])) {
                report("04 scheduler-oracle", false, "phase1 ordering broken");
                return;
            }
        }

        // Phase 2: f+1 cheapest by the parallel-transfer bound.
        std::uniform_int_distribution<int> pick_holder(0, n - 1);
        std::vector<OutputLocation> outputs;
        int num_outputs = 1 + t % 3;
        for (int o = 0; o < num_outputs; ++o) {
            OutputLocation loc;
            loc.id = "out" + std::to_string(o);
            loc.size_bytes = pick_size(rng) / 10;
            loc.holders.insert(pick_holder(rng));
            if (t % 2 == 0) loc.holders.insert(pick_holder(rng));
            outputs.push_back(loc);
        }
        std::map<CloudId, double> t2_costs;
        for (int c = 0; c < n; ++c) {
            auto est = estimate_t2(world.ctx, outputs, c);
            if (est) t2_costs[c] = est->total_s;
        }
        auto got2 = select_phase2_clouds(world.ctx, outputs, f, none);
        auto oracle2 = brute_force_pick(t2_costs, static_cast<std::size_t>(f) + 1);
        if (!got2 || !oracle2) {
            report("04 scheduler-oracle", false, "phase2 selection unexpectedly empty");
            return;
        }
        std::vector<CloudId> got2_sorted = *got2;
        std::sort(got2_sorted.begin(), got2_sorted.end());
        if (got2_sorted != *oracle2) {
            report("04 scheduler-oracle", false, "phase2 mismatch at trial " + std::to_string(t));
            return;
        }
        ++trials;
    }
    report("04 scheduler-oracle", true,
           std::to_string(trials) + " random tables, phase1+phase2 vs enumeration");
}

// ---------------------------------------------------------------------------
// 05: transfer-time estimates equal rtt/2 + size / windowed-mean throughput
// to within 1e-12 relative error on 1000 random inputs.

void criterion_05() {
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> pick_rtt(0.0001, 0.5);
    std::uniform_real_distribution<double> pick_tp(1e5, 1e9);
    std::uniform_int_distribution<int> pick_k(1, 10);
    std::uniform_int_distribution<int> pick_m(1, 16);
    std::uniform_int_distribution<std::uint64_t> pick_size(1, 2000000000ULL);

    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        int k = pick_k(rng);
        ThroughputTracker tracker(k);
        LinkModel link;
        LinkParams p;
        p.rtt_seconds = pick_rtt(rng);
        p.true_throughput_bytes_per_s = pick_tp(rng);
        p.prior_throughput_bytes_per_s = pick_tp(rng);
        link.set_link(0, 1, p);

        int m = pick_m(rng);
        std::vector<double> window;
        for (int i = 0; i < m; ++i) {
            double sample = pick_tp(rng);
            tracker.record_measurement(0, 1, sample);
            window.push_back(sample);
            if (window.size() > static_cast<std::size_t>(k)) window.erase(window.begin());
        }
        double mean = std::accumulate(window.begin(), window.end(), 0.0) /
                      static_cast<double>(window.size());

        std::uint64_t size = pick_size(rng);
        auto got = estimate_transmission_time(tracker, link, 0, 1, size);
        if (!got) {
            report("05 transfer-estimate", false, "estimate unexpectedly empty");
            return;
        }
        double want = p.rtt_seconds / 2.0 + static_cast<double>(size) / mean;
        double rel = std::abs(*got - want) / want;
        worst = std::max(worst, rel);
        if (rel > 1e-12) {
            report("05 transfer-estimate", false,
                   "relative error " + fmt(rel) + " at trial " + std::to_string(t));
            return;
        }
    }
    report("05 transfer-estimate", true, "1000 random inputs, worst rel err " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 06: the least-squares fit recovers known coefficients within 1e-6 on a
// full-rank synthetic set (30 observations, 10 features), and no random
// perturbation of the solution lowers the residual sum of squares.

double rss(const RegressionModel& model, const std::vector<Observation>& obs) {
    double total = 0.0;
    for (const Observation& o : obs) {
        auto x = o.features.as_array();
        double pred = model.intercept;
        for (std::size_t i = 0; i < kFeatureCount; ++i) pred += model.coefficients[i] * x[i];
        double r = pred - o.processing_time_s;
        total += r * r;
    }
    return total;
}

void criterion_06() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> pick_x(0.5, 4.0);
    std::array<double, kFeatureCount> beta{};
    std::uniform_real_distribution<double> pick_beta(-2.0, 2.0);
    for (double& b : beta) b = pick_beta(rng);
    double intercept = 1.25;

    std::vector<Observation> obs;
    for (int i = 0; i < 30; ++i) {
        std::array<double, kFeatureCount> x{};
        for (double& v : x) v = pick_x(rng);
        Observation o;
        o.features.input_size_bytes = x[0];
        o.features.map_tasks = x[1];
        o.features.reduce_tasks = x[2];
        o.features.cpu_clock_mhz = x[3];
        o.features.cpu_cores = x[4];
        o.features.memory_mb = x[5];
        o.features.running_jobs_count = x[6];
        o.features.running_jobs_mean_completion_fraction = x[7];
        o.features.queued_jobs_count = x[8];
        o.features.running_jobs_total_input_bytes = x[9];
        o.processing_time_s = intercept;
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            o.processing_time_s += beta[j] * x[j];
        obs.push_back(o);
    }

    auto model = fit(obs, 30);
    if (!model) {
        report("06 least-squares", false, "fit returned no model");
        return;
    }
    double worst = std::abs(model->intercept - intercept);
    for (std::size_t j = 0; j < kFeatureCount; ++j)
        worst = std::max(worst, std::abs(model->coefficients[j] - beta[j]));
    if (worst > 1e-6) {
        report("06 least-squares", false, "coefficient error " + fmt(worst) + " > 1e-6");
        return;
    }

    double fitted_rss = rss(*model, obs);
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (int t = 0; t < 1000; ++t) {
        RegressionModel tweaked = *model;
        for (double& c : tweaked.coefficients) c += jitter(rng);
        tweaked.intercept += jitter(rng);
        if (rss(tweaked, obs) < fitted_rss - 1e-12) {
            report("06 least-squares", false,
                   "random perturbation beat the fit at trial " + std::to_string(t));
            return;
        }
    }
    report("06 least-squares", true,
           "coefficients within " + fmt(worst) + ", RSS optimal vs 1000 perturbations");
}

// ---------------------------------------------------------------------------
// 07: mean makespan over 20 seeds orders strictly by failure severity:
// no fault < arbitrary < malicious < outage.

void criterion_07() {
    const char* files[] = {"fault_none.json", "fault_arbitrary.json", "fault_malicious.json",
                           "fault_outage.json"};
    std::vector<double> means;
    for (const char* file : files) {
        Scenario scenario = load(file);
        std::vector<RunMetrics> runs = run_experiment(scenario, 20);
        std::vector<double> makespans;
        for (const RunMetrics& m : runs) {
            if (m.failed || !m.result_correct) {
                report("07 fault-mode-ordering", false,
                       std::string(file) + " seed " + std::to_string(m.seed) +
                           " did not complete correctly");
                return;
            }
            makespans.push_back(m.makespan_s);
        }
        means.push_back(mean_of(makespans));
    }
    bool ok = means[0] < means[1] && means[1] < means[2] && means[2] < means[3];
    report("07 fault-mode-ordering", ok,
           "mean makespans none=" + fmt(means[0]) + " arbitrary=" + fmt(means[1]) +
               " malicious=" + fmt(means[2]) + " outage=" + fmt(means[3]));
}

// ---------------------------------------------------------------------------
// 08: in Malicious mode no extra replica ever lands on a cloud that already
// returned an output for that job, across 100 randomized fault scenarios.

void criterion_08() {
    int total_extras = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(800 + trial);
        int n = trial % 2 == 0 ? 3 : 5;
        int f = (n - 1) / 2;

        nlohmann::json doc = inline_scenario(n, f, "malicious");
        doc["training_bootstrap"] = 1;
        std::uniform_int_distribution<std::uint64_t> pick_bytes(1000000, 4000000);
        doc["partitions"] = nlohmann::json::array();
        int parts = 1 + trial % 2;
        for (int p = 0; p < parts; ++p)
            doc["partitions"].push_back({{"id", "p" + std::to_string(p)},
                                         {"size_bytes", pick_bytes(rng)},
                                         {"home_cloud", p % n},
                                         {"content_seed", 100 + trial * 10 + p}});
        std::string job = "v:p" + std::to_string(trial % parts);

        nlohmann::json injections = nlohmann::json::array();
        if (trial % 5 == 4 && f >= 2) {
            injections.push_back({{"kind", "collusion"},
                                  {"collusion_clouds", nlohmann::json::array({0, 1})},
                                  {"target_job", job}});
        } else {
            std::uniform_int_distribution<int> pick_count(1, f);
            int shots = pick_count(rng);
            for (int i = 0; i < shots; ++i) {
                nlohmann::json inj = {{"kind", "malicious_corruption"}, {"target_job", job}};
                if (trial % 3 == 0) inj["target_cloud"] = 0;  // home always participates
                injections.push_back(inj);
            }
        }
        doc["injections"] = injections;

        SingleRunResult run = run_single(load_scenario(doc), 8000 + trial);
        if (run.metrics.failed || !run.metrics.result_correct) {
            report("08 malicious-exclusion", false,
                   "trial " + std::to_string(trial) + " did not complete correctly");
            return;
        }

        std::map<std::string, std::set<CloudId>> reported;
        for (const nlohmann::json& rec : run.trace) {
            std::string ev = rec.at("ev");
            if (ev == "run_done") {
                reported[rec.at("job")].insert(rec.at("cloud").get<CloudId>());
            } else if (ev == "replica" && rec.at("extra").get<bool>()) {
                ++total_extras;
                CloudId cloud = rec.at("cloud").get<CloudId>();
                if (reported[rec.at("job")].count(cloud) > 0) {
                    report("08 malicious-exclusion", false,
                           "trial " + std::to_string(trial) + " re-used reporting cloud " +
                               std::to_string(cloud));
                    return;
                }
            }
        }
    }
    report("08 malicious-exclusion", total_extras > 0,
           "100 randomized scenarios, " + std::to_string(total_extras) +
               " extra replicas, none on a reporting cloud");
}

// ---------------------------------------------------------------------------
// 09: on the skewed deployment the estimator-driven scheduler beats round
// robin by at least 1/0.67 at the largest input size over 20 paired seeds;
// on the homogeneous deployment the two makespans agree within 10%.

double row_mean(const CompareSummary& summary, double multiplier, const std::string& kind) {
    for (const CompareRow& row : summary.rows)
        if (row.size_multiplier == multiplier && row.scheduler == kind) return row.mean;
    return -1.0;
}

void criterion_09(const CompareSummary& hetero, const CompareSummary& homogeneous) {
    double medusa = row_mean(hetero, 1.0, "medusa");
    double rr = row_mean(hetero, 1.0, "round_robin");
    double homog_medusa = row_mean(homogeneous, 1.0, "medusa");
    double homog_rr = row_mean(homogeneous, 1.0, "round_robin");
    if (medusa <= 0 || rr <= 0 || homog_medusa <= 0 || homog_rr <= 0) {
        report("09 hetero-speedup", false, "missing comparison rows");
        return;
    }
    double hetero_ratio = medusa / rr;
    double homog_ratio = homog_medusa / homog_rr;
    bool ok = medusa <= 0.67 * rr && homog_ratio >= 0.9 && homog_ratio <= 1.1;
    report("09 hetero-speedup", ok,
           "hetero mean ratio " + fmt(hetero_ratio) + " (need <= 0.67), homogeneous ratio " +
               fmt(homog_ratio) + " (need 0.9..1.1)");
}

// ---------------------------------------------------------------------------
// 10: round robin spreads replicas evenly (per-cloud counts within one job of
// each other) while the estimator concentrates >50% of replicas on the two
// best clouds of the skewed deployment.

void criterion_10(const CompareSummary& hetero) {
    std::uint64_t largest = 0;
    for (const RunMetrics& m : hetero.all) largest = std::max(largest, m.input_bytes);

    int rr_runs = 0;
    int medusa_runs = 0;
    double min_top2 = 1.0;
    long long worst_spread = 0;
    for (const RunMetrics& m : hetero.all) {
        if (m.input_bytes != largest) continue;
        long long total = 0;
        for (const auto& [job, replicas] : m.replicas_per_job) total += replicas;
        if (m.scheduler == "round_robin") {
            ++rr_runs;
            long long lo = total, hi = 0;
            for (double fraction : m.cloud_usage) {
                long long count = std::llround(fraction * static_cast<double>(total));
                lo = std::min(lo, count);
                hi = std::max(hi, count);
            }
            worst_spread = std::max(worst_spread, hi - lo);
            if (hi - lo > 1) {
                report("10 usage-distribution", false,
                       "round robin spread " + std::to_string(hi - lo) + " at seed " +
                           std::to_string(m.seed));
                return;
            }
        } else {
            ++medusa_runs;
            double top2 = m.cloud_usage.at(0) + m.cloud_usage.at(1);
            min_top2 = std::min(min_top2, top2);
            if (top2 <= 0.5) {
                report("10 usage-distribution", false,
                       "best-two usage share " + fmt(top2) + " at seed " +
                           std::to_string(m.seed));
                return;
            }
        }
    }
    bool ok = rr_runs == 20 && medusa_runs == 20;
    report("10 usage-distribution", ok,
           "20 paired runs: rr max spread " + std::to_string(worst_spread) +
               " replica(s), estimator best-two share >= " + fmt(min_top2));
}

// ---------------------------------------------------------------------------
// 11: re-running any scenario with the same seed reproduces the trace byte
// for byte and the metrics exactly.

void criterion_11() {
    const char* files[] = {"fault_none.json",   "fault_arbitrary.json", "fault_malicious.json",
                           "fault_outage.json", "hetero.json",          "homogeneous.json",
                           "demo.json"};
    for (const char* file : files) {
        Scenario scenario = load(file);
        SingleRunResult first = run_single(scenario, 42);
        SingleRunResult second = run_single(scenario, 42);
        if (first.trace_jsonl != second.trace_jsonl) {
            report("11 determinism", false, std::string(file) + " trace differs across re-runs");
            return;
        }
        if (!(first.metrics == second.metrics)) {
            report("11 determinism", false, std::string(file) + " metrics differ across re-runs");
            return;
        }
    }
    report("11 determinism", true, "7 scenarios, identical trace bytes and metrics at seed 42");
}

}  // namespace

int main() {
    criterion_01();
    criterion_02();
    criterion_03();
    criterion_04();
    criterion_05();
    criterion_06();
    criterion_07();
    criterion_08();

    CompareSummary hetero = compare_schedulers(load("hetero.json"), 20);
    CompareSummary homogeneous = compare_schedulers(load("homogeneous.json"), 20);
    criterion_09(hetero, homogeneous);
    criterion_10(hetero);

    criterion_11();

    if (g_failures == 0) {
        std::printf("acceptance: 11/11 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return 1;
}
