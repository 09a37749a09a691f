#include "medusa/scheduler.hpp"

#include <algorithm>
#include <stdexcept>

namespace medusa {

void ExclusionSet::exclude_globally(CloudId cloud) { global_.insert(cloud); }

void ExclusionSet::exclude_for_job(const std::string& job_id, CloudId cloud) {
    per_job_[job_id].insert(cloud);
}

bool ExclusionSet::excluded_globally(CloudId cloud) const { return global_.count(cloud) > 0; }

bool ExclusionSet::excluded(const std::string& job_id, CloudId cloud) const {
    if (excluded_globally(cloud)) return true;
    auto it = per_job_.find(job_id);
    return it != per_job_.end() && it->second.count(cloud) > 0;
}

namespace {

const CloudState& cloud_state(const SchedulerContext& ctx, CloudId cloud) {
    auto it = ctx.clouds.find(cloud);
    if (it == ctx.clouds.end()) throw std::invalid_argument("unknown cloud in scheduler context");
    return it->second;
}

// Cheapest transfer of `size_bytes` into `candidate` from any holder; 0 when
// already resident, nullopt when every holder is unreachable.
std::optional<double> best_transfer(const SchedulerContext& ctx, const std::set<CloudId>& holders,
                                    CloudId candidate, std::uint64_t size_bytes) {
    if (holders.count(candidate) > 0) return 0.0;
    std::optional<double> best;
    for (CloudId h : holders) {
        auto t = estimate_transmission_time(*ctx.tracker, *ctx.link, h, candidate, size_bytes);
        if (t && (!best || *t < *best)) best = t;
    }
    return best;
}

double processing_estimate(const JobSpec& job, std::uint64_t input_size_bytes,
                           const CloudState& state) {
    if (state.model == nullptr) return 0.0;
    FeatureVector f = extract_features(job, input_size_bytes, state.capacity, state.overhead);
    return predict(*state.model, f);
}

// Candidates sorted by (estimate, cloud id), computed with `estimator`.
template <typename Estimator>
std::vector<ScheduleEstimate> ranked(const SchedulerContext& ctx, const ExclusionSet& exclusions,
                                     const std::string& job_id, const std::set<CloudId>& skip,
                                     Estimator estimator) {
    std::vector<ScheduleEstimate> out;
    for (const auto& [cloud, state] : ctx.clouds) {
        (void)state;
        if (skip.count(cloud) > 0 || exclusions.excluded(job_id, cloud)) continue;
        std::optional<ScheduleEstimate> est = estimator(cloud);
        if (est) out.push_back(*est);
    }
    std::sort(out.begin(), out.end(), [](const ScheduleEstimate& a, const ScheduleEstimate& b) {
        if (a.total_s != b.total_s) return a.total_s < b.total_s;
        return a.cloud < b.cloud;
    });
    return out;
}

}  // namespace

std::optional<ScheduleEstimate> estimate_t1(const SchedulerContext& ctx, const JobSpec& job,
                                            std::uint64_t input_size_bytes,
                                            const std::set<CloudId>& holders, CloudId candidate) {
    const CloudState& state = cloud_state(ctx, candidate);
    std::optional<double> trans = best_transfer(ctx, holders, candidate, input_size_bytes);
    if (!trans) return std::nullopt;
    double proc = processing_estimate(job, input_size_bytes, state);
    return ScheduleEstimate{candidate, *trans + proc, *trans, proc};
}

std::optional<ScheduleEstimate> estimate_t2(const SchedulerContext& ctx,
                                            const std::vector<OutputLocation>& outputs,
                                            CloudId candidate) {
    cloud_state(ctx, candidate);
    double worst = 0.0;
    for (const OutputLocation& out : outputs) {
        if (out.holders.count(candidate) > 0) continue;
        std::optional<double> t = best_transfer(ctx, out.holders, candidate, out.size_bytes);
        if (!t) return std::nullopt;
        worst = std::max(worst, *t);
    }
    return ScheduleEstimate{candidate, worst, worst, 0.0};
}

std::optional<std::vector<CloudId>> select_phase1_clouds(const SchedulerContext& ctx,
                                                         const JobSpec& job,
                                                         std::uint64_t input_size_bytes,
                                                         CloudId home, int f,
                                                         const ExclusionSet& exclusions) {
    if (f < 0) throw std::invalid_argument("f must be non-negative");
    if (exclusions.excluded(job.id, home)) return std::nullopt;
    std::set<CloudId> holders{home};
    auto others = ranked(ctx, exclusions, job.id, {home}, [&](CloudId c) {
        return estimate_t1(ctx, job, input_size_bytes, holders, c);
    });
    if (others.size() < static_cast<std::size_t>(f)) return std::nullopt;
    std::vector<CloudId> selection{home};
    for (int i = 0; i < f; ++i) selection.push_back(others[static_cast<std::size_t>(i)].cloud);
    return selection;
}

std::optional<std::vector<CloudId>> select_phase2_clouds(const SchedulerContext& ctx,
                                                         const std::vector<OutputLocation>& outputs,
                                                         int f, const ExclusionSet& exclusions) {
    if (f < 0) throw std::invalid_argument("f must be non-negative");
    auto order = ranked(ctx, exclusions, std::string{}, {},
                        [&](CloudId c) { return estimate_t2(ctx, outputs, c); });
    if (order.size() < static_cast<std::size_t>(f) + 1) return std::nullopt;
    std::vector<CloudId> selection;
    for (int i = 0; i <= f; ++i) selection.push_back(order[static_cast<std::size_t>(i)].cloud);
    return selection;
}

std::optional<ScheduleEstimate> select_extra_replica(const SchedulerContext& ctx,
                                                     const ExtraReplicaQuery& query,
                                                     const ExclusionSet& exclusions) {
    if (query.job == nullptr) throw std::invalid_argument("query without job");
    std::set<CloudId> skip = query.active;
    if (query.mode == FaultMode::Malicious)
        skip.insert(query.reported.begin(), query.reported.end());
    auto order = ranked(ctx, exclusions, query.job->id, skip, [&](CloudId c) {
        if (query.job->phase == JobPhase::Vanilla)
            return estimate_t1(ctx, *query.job, query.input_size_bytes, query.data_holders, c);
        return estimate_t2(ctx, query.outputs, c);
    });
    if (order.empty()) return std::nullopt;
    return order.front();
}

std::optional<std::vector<CloudId>> round_robin_select(std::uint64_t job_sequence_number, int f,
                                                       int num_clouds,
                                                       const std::string& job_id,
                                                       const ExclusionSet& exclusions) {
    if (f < 0) throw std::invalid_argument("f must be non-negative");
    if (num_clouds <= 0) throw std::invalid_argument("no clouds");
    auto n = static_cast<std::uint64_t>(num_clouds);
    auto start = job_sequence_number * static_cast<std::uint64_t>(f + 1) % n;
    std::vector<CloudId> selection;
    for (std::uint64_t i = 0; i < n && selection.size() < static_cast<std::size_t>(f) + 1; ++i) {
        auto cloud = static_cast<CloudId>((start + i) % n);
        if (exclusions.excluded(job_id, cloud)) continue;
        selection.push_back(cloud);
    }
    if (selection.size() < static_cast<std::size_t>(f) + 1) return std::nullopt;
    return selection;
}

RoundRobinCursor::RoundRobinCursor(int num_clouds) : num_clouds_(num_clouds) {
    if (num_clouds <= 0) throw std::invalid_argument("no clouds");
}

std::optional<std::vector<CloudId>> RoundRobinCursor::next_selection(
    int f, const std::string& job_id, const ExclusionSet& exclusions) {
    return round_robin_select(sequence_++, f, num_clouds_, job_id, exclusions);
}

}  // namespace medusa
