#include "medusa/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace medusa {

bool VoteState::register_report(CloudId cloud, int attempt, const Digest& digest) {
    if (!seen_.insert({cloud, attempt}).second) {
        ++violations_;
        return false;
    }
    support_[digest].insert(cloud);
    ++tally_[digest];
    ++reports_;
    return true;
}

std::optional<Digest> VoteState::winner(int f) const {
    std::optional<Digest> best;
    int best_count = f;  // require at least f+1
    for (const auto& [digest, count] : tally_)
        if (count > best_count) {
            best = digest;
            best_count = count;
        }
    return best;
}

VoteDecision collect_and_vote(const VoteState& votes, int outstanding, int f, Digest* winner) {
    auto w = votes.winner(f);
    if (w) {
        if (winner != nullptr) *winner = *w;
        return VoteDecision::Accept;
    }
    return outstanding > 0 ? VoteDecision::Wait : VoteDecision::NeedExtraReplica;
}

StageBarrier::StageBarrier(Stage stage, std::set<std::string> pending)
    : stage_(stage), pending_(std::move(pending)) {}

StageBarrier::Outcome StageBarrier::complete(const std::string& participant) {
    if (pending_.erase(participant) == 0) ++violations_;
    if (pending_.empty() && !opened_) {
        opened_ = true;
        return Outcome::Advance;
    }
    return Outcome::Stay;
}

StageBarrier::Outcome StageBarrier::declare_unreachable(const std::string& participant) {
    pending_.erase(participant);
    if (pending_.empty() && !opened_) {
        opened_ = true;
        return Outcome::Advance;
    }
    return Outcome::Stay;
}

void StageBarrier::add_participant(const std::string& participant) {
    pending_.insert(participant);
}

namespace {

std::uint64_t seed_from_digest(const Digest& digest) {
    std::uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed |= static_cast<std::uint64_t>(digest.bytes[i]) << (8 * i);
    return seed;
}

const char* decision_name(VoteDecision d) {
    switch (d) {
        case VoteDecision::Accept: return "accept";
        case VoteDecision::Wait: return "wait";
        default: return "extra";
    }
}

}  // namespace

MedusaProxy::MedusaProxy(SimEngine& engine, MessageQueue& mq, LinkModel& link,
                         ThroughputTracker& tracker, FaultInjector& injector, TraceLog& trace,
                         ProxyConfig config, std::map<CloudId, SimCloud*> clouds)
    : engine_(&engine),
      mq_(&mq),
      link_(&link),
      tracker_(&tracker),
      injector_(&injector),
      trace_(&trace),
      config_(std::move(config)),
      clouds_(std::move(clouds)),
      rr_cursor_(static_cast<int>(std::max<std::size_t>(clouds_.size(), 1))) {
    if (config_.fault.f < 0) throw std::invalid_argument("f must be non-negative");
    if (static_cast<int>(clouds_.size()) < 2 * config_.fault.f + 1)
        throw std::invalid_argument("need at least 2f+1 clouds");
    if (config_.detection_window_s <= config_.heartbeat_period_s)
        throw std::invalid_argument("detection window must exceed the heartbeat period");
}

void MedusaProxy::start() {
    if (started_) return;
    started_ = true;
    mq_->bind("proxy", [this](const std::string& from, const nlohmann::json& payload) {
        handle_message(from, payload);
    });
    for (const auto& [id, cloud] : clouds_) {
        (void)cloud;
        last_response_[id] = engine_->now();
    }
    engine_->schedule_in(config_.heartbeat_period_s, [this]() { heartbeat_tick(); });
}

void MedusaProxy::heartbeat_tick() {
    for (const auto& [id, cloud] : clouds_) {
        (void)cloud;
        if (exclusions_.excluded_globally(id)) continue;
        if (engine_->now() - last_response_[id] > config_.detection_window_s) {
            handle_outage(id);
            continue;
        }
        mq_->send("proxy", SimCloud::endpoint_name(id), {{"type", "ping"}});
    }
    engine_->schedule_in(config_.heartbeat_period_s, [this]() { heartbeat_tick(); });
}

void MedusaProxy::arm_response_timeout(CloudId cloud) {
    double sent = engine_->now();
    engine_->schedule_in(config_.detection_window_s, [this, cloud, sent]() {
        if (exclusions_.excluded_globally(cloud)) return;
        if (last_response_[cloud] < sent) handle_outage(cloud);
    });
}

Digest MedusaProxy::expected_digest(const SubmissionRequest& request) const {
    std::vector<DataPartition> outputs;
    for (const DataPartition& p : request.partitions) {
        JobSpec vanilla{"v:" + p.id, JobPhase::Vanilla, {p.id}, request.map_tasks,
                        request.reduce_tasks};
        Digest vd = canonical_digest({p}, vanilla);
        DataPartition out;
        out.id = "out:v:" + p.id;
        out.size_bytes = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(config_.output_fraction
                                                       * static_cast<double>(p.size_bytes))));
        out.home_cloud = p.home_cloud;
        out.content_seed = seed_from_digest(vd);
        outputs.push_back(out);
    }
    JobSpec global{"global", JobPhase::Global, {}, request.map_tasks, request.reduce_tasks};
    for (const DataPartition& out : outputs) global.input_ids.push_back(out.id);
    return canonical_digest(outputs, global);
}

void MedusaProxy::submit(const SubmissionRequest& request) {
    if (!started_) throw std::logic_error("proxy not started");
    if (!tag_.empty() && !outcome_.done) throw std::logic_error("submission already in flight");
    if (request.partitions.empty()) throw std::invalid_argument("submission without partitions");
    if (request.tag.empty()) throw std::invalid_argument("submission without tag");

    tag_ = request.tag;
    map_tasks_ = request.map_tasks;
    reduce_tasks_ = request.reduce_tasks;
    partitions_.clear();
    jobs_.clear();
    vanilla_keys_.clear();
    copies_.clear();
    accepted_vanilla_ = 0;
    global_started_ = false;
    global_key_ = tag_ + ":global";
    outcome_ = SubmissionOutcome{};
    outcome_.submit_time = engine_->now();
    outcome_.expected_digest = expected_digest(request);

    std::uint64_t total_bytes = 0;
    for (const DataPartition& p : request.partitions) {
        if (clouds_.count(p.home_cloud) == 0)
            throw std::invalid_argument("partition " + p.id + " homed on unknown cloud");
        partitions_[p.id] = p;
        total_bytes += p.size_bytes;
    }

    nlohmann::json submit_fields{{"tag", tag_},
                                 {"partitions", request.partitions.size()},
                                 {"input_bytes", total_bytes},
                                 {"f", config_.fault.f},
                                 {"mode", config_.fault.mode == FaultMode::Malicious
                                              ? "malicious"
                                              : "arbitrary_only"},
                                 {"scheduler", config_.scheduler == SchedulerKind::Medusa
                                                   ? "medusa"
                                                   : "round_robin"},
                                 {"clouds", clouds_.size()},
                                 {"expected", outcome_.expected_digest.hex()}};
    for (const auto& [key, value] : config_.trace_meta.items()) submit_fields[key] = value;
    trace_->record(engine_->now(), "submit", std::move(submit_fields));

    for (const DataPartition& p : request.partitions) {
        JobExecution job;
        job.spec.id = tag_ + ":v:" + p.id;
        job.logical = "v:" + p.id;
        job.spec.phase = JobPhase::Vanilla;
        job.spec.input_ids = {p.id};
        job.spec.map_tasks = map_tasks_;
        job.spec.reduce_tasks = reduce_tasks_;
        job.input_bytes = p.size_bytes;
        job.home = p.home_cloud;
        job.data_holders = {p.home_cloud};
        vanilla_keys_.push_back(job.spec.id);
        jobs_.emplace(job.spec.id, std::move(job));
    }
    for (const std::string& key : vanilla_keys_) {
        if (outcome_.done) return;
        schedule_vanilla(jobs_.at(key));
    }
}

SchedulerContext MedusaProxy::context() const {
    SchedulerContext ctx;
    ctx.tracker = tracker_;
    ctx.link = link_;
    for (const auto& [id, cloud] : clouds_) {
        CloudState state;
        state.capacity = cloud->profile().capacity;
        state.overhead = cloud->overhead_snapshot();
        auto it = models_.find(id);
        state.model = (it != models_.end() && it->second) ? &*it->second : nullptr;
        ctx.clouds.emplace(id, std::move(state));
    }
    return ctx;
}

JobSpec MedusaProxy::hash_spec(const JobExecution& job) const {
    JobSpec spec = job.spec;
    spec.id = job.logical;
    return spec;
}

void MedusaProxy::schedule_vanilla(JobExecution& job) {
    if (exclusions_.excluded_globally(job.home)) {
        fail_job(job, "DataLost");
        return;
    }
    std::optional<std::vector<CloudId>> selection;
    if (config_.scheduler == SchedulerKind::Medusa) {
        selection = select_phase1_clouds(context(), hash_spec(job), job.input_bytes, job.home,
                                         config_.fault.f, exclusions_);
    } else {
        selection = rr_cursor_.next_selection(config_.fault.f, job.spec.id, exclusions_);
    }
    if (!selection) {
        fail_job(job, "NoCloudAvailable");
        return;
    }
    trace_->record(engine_->now(), "schedule",
                   {{"job", job.spec.id}, {"clouds", *selection}});
    schedule_selection(job, *selection);
}

void MedusaProxy::schedule_selection(JobExecution& job, const std::vector<CloudId>& selection) {
    job.status = JobStatus::AwaitingOutputs;
    std::set<std::string> waiting;
    for (CloudId cloud : selection) {
        ReplicaRecord replica;
        replica.cloud = cloud;
        replica.attempt = job.next_attempt++;
        job.replicas.push_back(replica);
        job.active.insert(cloud);
        trace_->record(engine_->now(), "replica",
                       {{"job", job.spec.id},
                        {"cloud", cloud},
                        {"attempt", replica.attempt},
                        {"extra", false}});
        int missing = 0;
        if (job.spec.phase == JobPhase::Vanilla) {
            missing = job.data_holders.count(cloud) > 0 ? 0 : 1;
        } else {
            for (const std::string& oid : job.spec.input_ids)
                if (job.output_holders[oid].count(cloud) == 0) ++missing;
        }
        if (missing > 0) {
            job.pending_copies[cloud] = missing;
            waiting.insert(SimCloud::endpoint_name(cloud));
        }
    }
    job.replicate_barrier = StageBarrier(Stage::Replicate, waiting);
    for (CloudId cloud : selection)
        if (job.pending_copies.count(cloud) > 0) issue_copies_for(job, cloud);
    if (job.replicate_barrier.done()) open_run_gate(job);
}

void MedusaProxy::issue_copies_for(JobExecution& job, CloudId cloud) {
    int attempt = 0;
    for (const ReplicaRecord& r : job.replicas)
        if (r.cloud == cloud && r.state == ReplicaState::CopyingData) attempt = r.attempt;
    if (job.spec.phase == JobPhase::Vanilla) {
        auto src = best_source(job.data_holders, cloud, job.input_bytes, {});
        if (!src) {
            fail_job(job, "DataLost");
            return;
        }
        issue_copy(job, job.spec.input_ids.front(), *src, cloud, attempt);
        return;
    }
    for (const std::string& oid : job.spec.input_ids) {
        if (job.output_holders[oid].count(cloud) > 0) continue;
        auto src = best_source(job.output_holders[oid], cloud, job.output_sizes.at(oid), {});
        if (!src) {
            fail_job(job, "DataLost");
            return;
        }
        issue_copy(job, oid, *src, cloud, attempt);
    }
}

std::optional<CloudId> MedusaProxy::best_source(const std::set<CloudId>& holders, CloudId dst,
                                                std::uint64_t size_bytes,
                                                const std::set<CloudId>& excluded_sources) const {
    std::optional<CloudId> best;
    std::optional<double> best_cost;
    for (CloudId h : holders) {
        if (h == dst || excluded_sources.count(h) > 0 || exclusions_.excluded_globally(h))
            continue;
        auto cost = estimate_transmission_time(*tracker_, *link_, h, dst, size_bytes);
        if (!cost) continue;
        if (!best_cost || *cost < *best_cost || (*cost == *best_cost && h < *best)) {
            best = h;
            best_cost = cost;
        }
    }
    return best;
}

void MedusaProxy::issue_copy(JobExecution& job, const std::string& partition_id, CloudId src,
                             CloudId dst, int attempt) {
    CopyTask task;
    task.job_key = job.spec.id;
    task.partition_id = partition_id;
    task.src = src;
    task.dst = dst;
    task.size_bytes = partitions_.at(partition_id).size_bytes;
    task.attempt = attempt;
    task.tries_on_current_src = 1;
    task.tried_sources = {src};
    std::uint64_t id = next_copy_id_++;
    trace_->record(engine_->now(), "copy_start",
                   {{"job", job.spec.id},
                    {"partition", partition_id},
                    {"src", src},
                    {"dst", dst},
                    {"bytes", task.size_bytes},
                    {"copy", id}});
    copies_.emplace(id, std::move(task));
    mq_->send("proxy", SimCloud::endpoint_name(src),
              {{"type", "copy"},
               {"copy_id", id},
               {"partition", partition_id},
               {"dst", dst},
               {"link_seed", engine_->draw_seed()}});
    arm_response_timeout(src);
}

void MedusaProxy::open_run_gate(JobExecution& job) {
    if (job.run_gate_open) return;
    job.run_gate_open = true;
    trace_->record(engine_->now(), "stage", {{"job", job.spec.id}, {"stage", "run"}});
    for (ReplicaRecord& replica : job.replicas) {
        if (replica.state != ReplicaState::CopyingData) continue;
        auto pending = job.pending_copies.find(replica.cloud);
        if (pending == job.pending_copies.end() || pending->second == 0)
            dispatch_run(job, replica);
    }
}

void MedusaProxy::maybe_dispatch(JobExecution& job, CloudId cloud) {
    if (!job.run_gate_open) return;
    for (ReplicaRecord& replica : job.replicas)
        if (replica.cloud == cloud && replica.state == ReplicaState::CopyingData) {
            dispatch_run(job, replica);
            return;
        }
}

void MedusaProxy::dispatch_run(JobExecution& job, ReplicaRecord& replica) {
    SimCloud* cloud = clouds_.at(replica.cloud);
    replica.dispatch_features = extract_features(hash_spec(job), job.input_bytes,
                                                 cloud->profile().capacity,
                                                 cloud->overhead_snapshot());
    replica.state = ReplicaState::Running;
    mq_->send("proxy", SimCloud::endpoint_name(replica.cloud),
              {{"type", "run"},
               {"job_key", job.spec.id},
               {"logical_job", job.logical},
               {"phase", job.spec.phase == JobPhase::Global ? "global" : "vanilla"},
               {"inputs", job.spec.input_ids},
               {"map", job.spec.map_tasks},
               {"reduce", job.spec.reduce_tasks},
               {"size", job.input_bytes},
               {"attempt", replica.attempt},
               {"noise_seed", engine_->draw_seed()}});
    arm_response_timeout(replica.cloud);
}

void MedusaProxy::handle_message(const std::string& from, const nlohmann::json& payload) {
    if (from.rfind("cloud:", 0) == 0) {
        CloudId id = std::stoi(from.substr(6));
        last_response_[id] = engine_->now();
    }
    const std::string type = payload.at("type").get<std::string>();
    if (type == "pong" || type == "ack") return;
    if (type == "copy_result") {
        handle_copy_result(payload);
    } else if (type == "run_done") {
        handle_run_done(payload);
    } else {
        throw std::logic_error("proxy received unknown message type " + type);
    }
}

void MedusaProxy::handle_copy_result(const nlohmann::json& payload) {
    auto it = copies_.find(payload.at("copy_id").get<std::uint64_t>());
    if (it == copies_.end() || !it->second.open) return;
    CopyTask task = it->second;
    it->second.open = false;
    auto job_it = jobs_.find(task.job_key);
    if (job_it == jobs_.end()) return;
    JobExecution& job = job_it->second;
    const std::string outcome = payload.at("outcome").get<std::string>();
    trace_->record(engine_->now(), "copy_result",
                   {{"job", job.spec.id},
                    {"partition", task.partition_id},
                    {"src", task.src},
                    {"dst", task.dst},
                    {"outcome", outcome}});
    if (outcome_.done || job.status == JobStatus::Failed) return;

    if (outcome == "validated") {
        if (job.spec.phase == JobPhase::Vanilla)
            job.data_holders.insert(task.dst);
        else
            job.output_holders[task.partition_id].insert(task.dst);
        auto pending = job.pending_copies.find(task.dst);
        if (pending == job.pending_copies.end()) return;  // replica abandoned meanwhile
        if (--pending->second > 0) return;
        job.pending_copies.erase(pending);
        if (job.run_gate_open) {
            maybe_dispatch(job, task.dst);
        } else if (job.replicate_barrier.complete(SimCloud::endpoint_name(task.dst))
                   == StageBarrier::Outcome::Advance) {
            open_run_gate(job);
        }
        return;
    }

    // DigestMismatch: once more on the same link, then over a different path.
    CopyTask retry = task;
    retry.open = true;
    if (task.tries_on_current_src < 2) {
        retry.tries_on_current_src = task.tries_on_current_src + 1;
    } else {
        std::set<CloudId> holders = job.spec.phase == JobPhase::Vanilla
                                        ? job.data_holders
                                        : job.output_holders[task.partition_id];
        auto alt = best_source(holders, task.dst, task.size_bytes, task.tried_sources);
        if (alt) {
            retry.src = *alt;
            retry.tries_on_current_src = 1;
            retry.tried_sources.insert(*alt);
        } else {
            // No clean path into this destination: give up on it for this job
            // and place the replica elsewhere.
            exclusions_.exclude_for_job(job.spec.id, task.dst);
            for (ReplicaRecord& replica : job.replicas)
                if (replica.cloud == task.dst && replica.state == ReplicaState::CopyingData)
                    replica.state = ReplicaState::Unreachable;
            job.active.erase(task.dst);
            job.pending_copies.erase(task.dst);
            if (job.replicate_barrier.declare_unreachable(SimCloud::endpoint_name(task.dst))
                == StageBarrier::Outcome::Advance)
                open_run_gate(job);
            launch_extra(job, "copy_reroute");
            return;
        }
    }
    std::uint64_t id = next_copy_id_++;
    trace_->record(engine_->now(), "copy_start",
                   {{"job", job.spec.id},
                    {"partition", retry.partition_id},
                    {"src", retry.src},
                    {"dst", retry.dst},
                    {"bytes", retry.size_bytes},
                    {"copy", id}});
    copies_.emplace(id, std::move(retry));
    mq_->send("proxy", SimCloud::endpoint_name(copies_.at(id).src),
              {{"type", "copy"},
               {"copy_id", id},
               {"partition", copies_.at(id).partition_id},
               {"dst", copies_.at(id).dst},
               {"link_seed", engine_->draw_seed()}});
    arm_response_timeout(copies_.at(id).src);
}

ReplicaRecord* MedusaProxy::find_replica(JobExecution& job, CloudId cloud, int attempt) {
    for (ReplicaRecord& replica : job.replicas)
        if (replica.cloud == cloud && replica.attempt == attempt) return &replica;
    return nullptr;
}

void MedusaProxy::handle_run_done(const nlohmann::json& payload) {
    auto job_it = jobs_.find(payload.at("job_key").get<std::string>());
    if (job_it == jobs_.end()) return;
    JobExecution& job = job_it->second;
    CloudId cloud = payload.at("cloud").get<CloudId>();
    int attempt = payload.at("attempt").get<int>();
    double proc_s = payload.at("proc_s").get<double>();
    std::optional<Digest> parsed = Digest::from_hex(payload.at("digest").get<std::string>());
    if (!parsed) return;
    Digest digest = *parsed;

    ReplicaRecord* replica = find_replica(job, cloud, attempt);
    if (replica == nullptr || replica->state != ReplicaState::Running) {
        trace_->record(engine_->now(), "violation",
                       {{"job", job.spec.id},
                        {"cloud", cloud},
                        {"attempt", attempt},
                        {"kind", "unexpected_report"}});
        return;
    }
    replica->state = ReplicaState::Finished;
    replica->output = digest;
    job.active.erase(cloud);
    job.reported.insert(cloud);
    bool fresh = job.votes.register_report(cloud, attempt, digest);
    trace_->record(engine_->now(), "run_done",
                   {{"job", job.spec.id},
                    {"cloud", cloud},
                    {"attempt", attempt},
                    {"digest", digest.hex()},
                    {"proc_s", proc_s}});
    if (!fresh) {
        trace_->record(engine_->now(), "violation",
                       {{"job", job.spec.id},
                        {"cloud", cloud},
                        {"attempt", attempt},
                        {"kind", "duplicate_report"}});
        return;
    }

    obs_[cloud].push_back(Observation{replica->dispatch_features, proc_s});
    models_[cloud] = fit(obs_[cloud], config_.training_window);

    if (outcome_.done || job.status == JobStatus::Accepted || job.status == JobStatus::Failed)
        return;
    evaluate_votes(job);
}

void MedusaProxy::evaluate_votes(JobExecution& job) {
    Digest winner;
    VoteDecision decision = collect_and_vote(job.votes, static_cast<int>(job.active.size()),
                                             config_.fault.f, &winner);
    trace_->record(engine_->now(), "vote",
                   {{"job", job.spec.id},
                    {"decision", decision_name(decision)},
                    {"reports", job.votes.report_count()}});
    if (decision == VoteDecision::Wait) return;
    if (decision == VoteDecision::NeedExtraReplica) {
        launch_extra(job, "disagreement");
        return;
    }

    job.status = JobStatus::Accepted;
    job.accepted = winner;
    trace_->record(engine_->now(), "accept", {{"job", job.spec.id}, {"digest", winner.hex()}});

    if (job.spec.phase == JobPhase::Global) {
        finish_submission(winner);
        return;
    }

    DataPartition out;
    out.id = "out:" + job.logical;
    out.size_bytes = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(config_.output_fraction
                                                   * static_cast<double>(job.input_bytes))));
    out.home_cloud = job.home;
    out.content_seed = seed_from_digest(winner);
    partitions_[out.id] = out;
    for (const ReplicaRecord& replica : job.replicas) {
        if (replica.state != ReplicaState::Finished || !replica.output
            || !(*replica.output == winner))
            continue;
        if (exclusions_.excluded_globally(replica.cloud)) continue;
        clouds_.at(replica.cloud)->store_partition(out);
    }

    ++accepted_vanilla_;
    if (accepted_vanilla_ == static_cast<int>(vanilla_keys_.size()) && !global_started_)
        start_global_phase();
}

void MedusaProxy::start_global_phase() {
    global_started_ = true;
    trace_->record(engine_->now(), "stage", {{"phase", "global"}, {"stage", "begin"}});

    JobExecution job;
    job.spec.id = global_key_;
    job.logical = "global";
    job.spec.phase = JobPhase::Global;
    job.spec.map_tasks = map_tasks_;
    job.spec.reduce_tasks = reduce_tasks_;

    std::vector<OutputLocation> outputs;
    for (const std::string& key : vanilla_keys_) {
        const JobExecution& vanilla = jobs_.at(key);
        std::string oid = "out:" + vanilla.logical;
        OutputLocation loc;
        loc.id = oid;
        loc.size_bytes = partitions_.at(oid).size_bytes;
        for (const ReplicaRecord& replica : vanilla.replicas) {
            if (replica.state != ReplicaState::Finished || !replica.output
                || !(*replica.output == *vanilla.accepted))
                continue;
            if (exclusions_.excluded_globally(replica.cloud)) continue;
            loc.holders.insert(replica.cloud);
        }
        job.spec.input_ids.push_back(oid);
        job.input_bytes += loc.size_bytes;
        job.output_holders[oid] = loc.holders;
        job.output_sizes[oid] = loc.size_bytes;
        outputs.push_back(std::move(loc));
    }

    auto [it, inserted] = jobs_.emplace(global_key_, std::move(job));
    (void)inserted;
    JobExecution& global = it->second;

    std::optional<std::vector<CloudId>> selection;
    if (config_.scheduler == SchedulerKind::Medusa) {
        selection = select_phase2_clouds(context(), outputs, config_.fault.f, exclusions_);
    } else {
        selection = rr_cursor_.next_selection(config_.fault.f, global.spec.id, exclusions_);
    }
    if (!selection) {
        fail_job(global, "NoCloudAvailable");
        return;
    }
    trace_->record(engine_->now(), "schedule",
                   {{"job", global.spec.id}, {"clouds", *selection}});
    schedule_selection(global, *selection);
}

void MedusaProxy::launch_extra(JobExecution& job, const char* cause) {
    job.status = JobStatus::NeedExtraReplica;
    JobSpec spec = hash_spec(job);

    std::optional<CloudId> choice;
    if (config_.scheduler == SchedulerKind::Medusa) {
        ExtraReplicaQuery query;
        query.job = &spec;
        query.input_size_bytes = job.input_bytes;
        query.data_holders = alive_holders(job.data_holders);
        if (job.spec.phase == JobPhase::Global) {
            for (const std::string& oid : job.spec.input_ids) {
                OutputLocation loc;
                loc.id = oid;
                loc.size_bytes = job.output_sizes.at(oid);
                loc.holders = alive_holders(job.output_holders.at(oid));
                query.outputs.push_back(std::move(loc));
            }
        }
        query.active = job.active;
        query.reported = job.reported;
        query.mode = config_.fault.mode;
        auto est = select_extra_replica(context(), query, exclusions_);
        if (est) choice = est->cloud;
    } else {
        ExclusionSet merged = exclusions_;
        for (CloudId c : job.active) merged.exclude_for_job(job.spec.id, c);
        if (config_.fault.mode == FaultMode::Malicious)
            for (CloudId c : job.reported) merged.exclude_for_job(job.spec.id, c);
        auto sel = rr_cursor_.next_selection(0, job.spec.id, merged);
        if (sel) choice = sel->front();
    }
    if (!choice) {
        fail_job(job, "NoCloudAvailable");
        return;
    }

    CloudId cloud = *choice;
    ++job.extra_replicas;
    trace_->record(engine_->now(), "extra_replica",
                   {{"job", job.spec.id}, {"cloud", cloud}, {"cause", cause}});
    ReplicaRecord replica;
    replica.cloud = cloud;
    replica.attempt = job.next_attempt++;
    job.replicas.push_back(replica);
    job.active.insert(cloud);
    trace_->record(engine_->now(), "replica",
                   {{"job", job.spec.id},
                    {"cloud", cloud},
                    {"attempt", replica.attempt},
                    {"extra", true}});

    int missing = 0;
    if (job.spec.phase == JobPhase::Vanilla) {
        missing = job.data_holders.count(cloud) > 0 ? 0 : 1;
    } else {
        for (const std::string& oid : job.spec.input_ids)
            if (job.output_holders[oid].count(cloud) == 0) ++missing;
    }
    if (missing > 0) {
        job.pending_copies[cloud] = missing;
        if (!job.run_gate_open)
            job.replicate_barrier.add_participant(SimCloud::endpoint_name(cloud));
        issue_copies_for(job, cloud);
    } else if (job.run_gate_open) {
        maybe_dispatch(job, cloud);
    }
}

void MedusaProxy::fail_job(JobExecution& job, const std::string& reason) {
    job.status = JobStatus::Failed;
    job.failure_reason = reason;
    trace_->record(engine_->now(), "job_failed", {{"job", job.spec.id}, {"reason", reason}});
    outcome_.done = true;
    outcome_.accepted = false;
    outcome_.failure = job.spec.id + ": " + reason;
    outcome_.finish_time = engine_->now();
    trace_->record(engine_->now(), "final",
                   {{"failed", true},
                    {"correct", false},
                    {"reason", outcome_.failure},
                    {"makespan_s", outcome_.finish_time - outcome_.submit_time}});
}

void MedusaProxy::finish_submission(const Digest& digest) {
    outcome_.done = true;
    outcome_.accepted = true;
    outcome_.final_digest = digest;
    outcome_.finish_time = engine_->now();
    bool correct = digest == outcome_.expected_digest;
    trace_->record(engine_->now(), "final",
                   {{"failed", false},
                    {"digest", digest.hex()},
                    {"expected", outcome_.expected_digest.hex()},
                    {"correct", correct},
                    {"makespan_s", outcome_.finish_time - outcome_.submit_time}});
}

std::set<CloudId> MedusaProxy::alive_holders(const std::set<CloudId>& holders) const {
    std::set<CloudId> alive;
    for (CloudId c : holders)
        if (!exclusions_.excluded_globally(c)) alive.insert(c);
    return alive;
}

void MedusaProxy::handle_outage(CloudId cloud) {
    if (exclusions_.excluded_globally(cloud)) return;
    trace_->record(engine_->now(), "outage_detected", {{"cloud", cloud}});
    exclusions_.exclude_globally(cloud);
    link_->set_cloud_down(cloud);
    auto cloud_it = clouds_.find(cloud);
    if (cloud_it != clouds_.end()) cloud_it->second->set_down();
    if (outcome_.done) return;

    for (const std::string& key : [this]() {
             std::vector<std::string> keys;
             for (const auto& [k, v] : jobs_) {
                 (void)v;
                 keys.push_back(k);
             }
             return keys;
         }()) {
        if (outcome_.done) return;
        JobExecution& job = jobs_.at(key);
        job.data_holders.erase(cloud);
        for (auto& [oid, holders] : job.output_holders) {
            (void)oid;
            holders.erase(cloud);
        }
        if (job.status == JobStatus::Accepted || job.status == JobStatus::Failed) continue;

        bool lost = false;
        for (ReplicaRecord& replica : job.replicas) {
            if (replica.cloud != cloud) continue;
            if (replica.state != ReplicaState::CopyingData
                && replica.state != ReplicaState::Running)
                continue;
            replica.state = ReplicaState::Unreachable;
            lost = true;
            trace_->record(engine_->now(), "replica_lost",
                           {{"job", job.spec.id},
                            {"cloud", cloud},
                            {"attempt", replica.attempt}});
        }
        job.active.erase(cloud);
        job.pending_copies.erase(cloud);
        if (job.replicate_barrier.declare_unreachable(SimCloud::endpoint_name(cloud))
            == StageBarrier::Outcome::Advance)
            open_run_gate(job);

        // In-flight copies sourced at the dead cloud must restart elsewhere.
        for (auto& [copy_id, task] : copies_) {
            (void)copy_id;
            if (!task.open || task.job_key != key) continue;
            if (task.dst == cloud) {
                task.open = false;
                continue;
            }
            if (task.src != cloud) continue;
            task.open = false;
            std::set<CloudId> holders = job.spec.phase == JobPhase::Vanilla
                                            ? job.data_holders
                                            : job.output_holders[task.partition_id];
            auto alt = best_source(holders, task.dst, task.size_bytes, {});
            if (alt) {
                issue_copy(job, task.partition_id, *alt, task.dst, task.attempt);
            } else {
                for (ReplicaRecord& replica : job.replicas)
                    if (replica.cloud == task.dst && replica.state == ReplicaState::CopyingData)
                        replica.state = ReplicaState::Unreachable;
                job.active.erase(task.dst);
                job.pending_copies.erase(task.dst);
                if (job.replicate_barrier.declare_unreachable(SimCloud::endpoint_name(task.dst))
                    == StageBarrier::Outcome::Advance)
                    open_run_gate(job);
                lost = true;
            }
        }
        if (outcome_.done || job.status == JobStatus::Failed) continue;

        if (lost) {
            bool data_available;
            if (job.spec.phase == JobPhase::Vanilla) {
                data_available = !alive_holders(job.data_holders).empty();
            } else {
                data_available = true;
                for (const std::string& oid : job.spec.input_ids)
                    if (alive_holders(job.output_holders[oid]).empty()) data_available = false;
            }
            if (!data_available) {
                fail_job(job, "DataLost");
                continue;
            }
            launch_extra(job, "outage");
        }
    }
}

}  // namespace medusa
