#include "medusa/simcloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace medusa {

SimEngine::SimEngine(std::uint64_t seed) : rng_(seed) {}

void SimEngine::schedule_at(double time, std::function<void()> action) {
    queue_.emplace(std::make_pair(std::max(time, now_), next_seq_++), std::move(action));
}

void SimEngine::schedule_in(double delay, std::function<void()> action) {
    if (delay < 0.0) throw std::invalid_argument("negative delay");
    schedule_at(now_ + delay, std::move(action));
}

bool SimEngine::step() {
    if (queue_.empty()) return false;
    auto it = queue_.begin();
    now_ = it->first.first;
    auto action = std::move(it->second);
    queue_.erase(it);
    action();
    return true;
}

void SimEngine::run_until(const std::function<bool()>& done, double watchdog_time) {
    while (!done()) {
        if (queue_.empty()) throw std::logic_error("simulation stalled: event queue drained");
        if (queue_.begin()->first.first > watchdog_time)
            throw std::logic_error("virtual-time watchdog exceeded");
        step();
    }
}

double SimEngine::lognormal_factor(double sigma) {
    if (sigma <= 0.0) return 1.0;
    std::normal_distribution<double> normal(0.0, 1.0);
    return std::exp(sigma * normal(rng_));
}

void TraceLog::record(double time, const std::string& event, nlohmann::json fields) {
    if (!enabled_) return;
    fields["t"] = time;
    fields["ev"] = event;
    records_.push_back(std::move(fields));
}

std::string TraceLog::to_jsonl() const {
    std::string out;
    for (const auto& rec : records_) {
        out += rec.dump();
        out += '\n';
    }
    return out;
}

MessageQueue::MessageQueue(SimEngine& engine) : engine_(&engine) {}

void MessageQueue::bind(const std::string& endpoint, Handler handler) {
    handlers_[endpoint] = std::move(handler);
}

void MessageQueue::set_endpoint_down(const std::string& endpoint) { down_.insert(endpoint); }

bool MessageQueue::endpoint_down(const std::string& endpoint) const {
    return down_.count(endpoint) > 0;
}

void MessageQueue::send(const std::string& from, const std::string& to, nlohmann::json payload,
                        double delay) {
    if (endpoint_down(from)) return;
    auto key = std::make_pair(from, to);
    double at = std::max(engine_->now() + delay, channel_clock_[key]);
    channel_clock_[key] = at;
    engine_->schedule_at(at, [this, from, to, payload = std::move(payload)]() {
        if (endpoint_down(to)) return;
        auto it = handlers_.find(to);
        if (it == handlers_.end()) throw std::logic_error("message to unbound endpoint " + to);
        ++delivered_;
        it->second(from, payload);
    });
}

double simulate_processing(const JobSpec& job, std::uint64_t input_size_bytes,
                           const CloudProfile& cloud, const CloudOverhead& overhead,
                           double noise_factor) {
    if (cloud.base_seconds_per_mb <= 0.0) throw std::invalid_argument("non-positive base speed");
    int parallelism = std::max(1, std::min(job.map_tasks, cloud.capacity.cpu_cores));
    double load = 1.0 + cloud.load_penalty_per_job
                            * static_cast<double>(overhead.running_jobs_count
                                                  + overhead.queued_jobs_count);
    double megabytes = static_cast<double>(input_size_bytes) / 1e6;
    return cloud.base_seconds_per_mb * megabytes / parallelism * load * noise_factor;
}

double simulate_processing_seeded(const JobSpec& job, std::uint64_t input_size_bytes,
                                  const CloudProfile& cloud, const CloudOverhead& overhead,
                                  std::uint64_t rng_seed) {
    double noise = 1.0;
    if (cloud.proc_noise_sigma > 0.0) {
        std::mt19937_64 rng(rng_seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        noise = std::exp(cloud.proc_noise_sigma * normal(rng));
    }
    return simulate_processing(job, input_size_bytes, cloud, overhead, noise);
}

void validate_injections(const std::vector<FaultInjection>& injections, int f, int num_clouds) {
    auto check_cloud = [&](CloudId c, const char* what) {
        if (c < 0 || c >= num_clouds)
            throw std::invalid_argument(std::string(what) + ": cloud id out of range");
    };
    for (std::size_t i = 0; i < injections.size(); ++i) {
        const FaultInjection& inj = injections[i];
        std::string where = "injections[" + std::to_string(i) + "]";
        if (inj.count < 1) throw std::invalid_argument(where + ": count must be >= 1");
        if (inj.target_cloud) check_cloud(*inj.target_cloud, where.c_str());
        switch (inj.kind) {
            case FaultKind::Collusion:
                if (inj.collusion_clouds.empty())
                    throw std::invalid_argument(where + ": empty collusion set");
                if (static_cast<int>(inj.collusion_clouds.size()) > f)
                    throw std::invalid_argument(
                        where + ": collusion set exceeds f; more than f identical wrong "
                                "outputs would break the fault model");
                for (CloudId c : inj.collusion_clouds) check_cloud(c, where.c_str());
                break;
            case FaultKind::TransmissionTamper:
                if (inj.target_link) {
                    check_cloud(inj.target_link->first, where.c_str());
                    check_cloud(inj.target_link->second, where.c_str());
                    if (inj.target_link->first == inj.target_link->second)
                        throw std::invalid_argument(where + ": tamper link endpoints equal");
                }
                break;
            case FaultKind::Outage:
                if (inj.trigger_time_s < 0.0)
                    throw std::invalid_argument(where + ": negative trigger time");
                if (!inj.target_cloud)
                    throw std::invalid_argument(where + ": outage needs a target cloud");
                break;
            default:
                break;
        }
    }
}

namespace {

Digest wrong_digest(const Digest& canonical, std::size_t injection_index, int ordinal) {
    std::vector<std::uint8_t> buf(canonical.bytes.begin(), canonical.bytes.end());
    const char* tag = "medusa.inject";
    buf.insert(buf.end(), tag, tag + std::strlen(tag));
    auto push_u64 = [&buf](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    push_u64(injection_index);
    push_u64(static_cast<std::uint64_t>(ordinal));
    return sha256(std::span<const std::uint8_t>(buf));
}

}  // namespace

FaultInjector::FaultInjector(std::vector<FaultInjection> injections)
    : injections_(std::move(injections)) {
    remaining_.reserve(injections_.size());
    for (const auto& inj : injections_) remaining_.push_back(inj.count);
}

std::optional<FaultInjector::CorruptionResult> FaultInjector::corrupt_output(
    const std::string& logical_job, CloudId cloud, const Digest& canonical) {
    if (!armed_) return std::nullopt;
    for (std::size_t i = 0; i < injections_.size(); ++i) {
        const FaultInjection& inj = injections_[i];
        bool job_match = inj.target_job.empty() || inj.target_job == logical_job;
        if (!job_match) continue;
        if (inj.kind == FaultKind::Collusion) {
            if (inj.collusion_clouds.count(cloud) == 0) continue;
            int& fired = collusion_fired_[{i, cloud}];
            if (fired >= inj.count) continue;
            ++fired;
            ++fired_;
            // ordinal 0: every colluder reports the same wrong digest
            return CorruptionResult{wrong_digest(canonical, i, 0), inj.kind};
        }
        if (inj.kind == FaultKind::ArbitraryCorruption
            || inj.kind == FaultKind::MaliciousCorruption) {
            if (inj.target_cloud && *inj.target_cloud != cloud) continue;
            if (remaining_[i] <= 0) continue;
            int ordinal = inj.count - remaining_[i] + 1;
            --remaining_[i];
            ++fired_;
            return CorruptionResult{wrong_digest(canonical, i, ordinal), inj.kind};
        }
    }
    return std::nullopt;
}

bool FaultInjector::tamper_copy(const std::string& partition_id, CloudId src, CloudId dst) {
    if (!armed_) return false;
    for (std::size_t i = 0; i < injections_.size(); ++i) {
        const FaultInjection& inj = injections_[i];
        if (inj.kind != FaultKind::TransmissionTamper) continue;
        if (!inj.target_job.empty() && inj.target_job != partition_id) continue;
        if (inj.target_link && !(inj.target_link->first == src && inj.target_link->second == dst))
            continue;
        if (remaining_[i] <= 0) continue;
        --remaining_[i];
        ++fired_;
        return true;
    }
    return false;
}

SimCloud::SimCloud(SimEngine& engine, MessageQueue& mq, const LinkModel& link,
                   FaultInjector& injector, TraceLog& trace, CloudProfile profile)
    : engine_(&engine),
      mq_(&mq),
      link_(&link),
      injector_(&injector),
      trace_(&trace),
      profile_(std::move(profile)),
      endpoint_(endpoint_name(profile_.id)) {
    if (profile_.capacity.cpu_cores < 1) throw std::invalid_argument("cloud needs >= 1 core");
}

std::string SimCloud::endpoint_name(CloudId id) { return "cloud:" + std::to_string(id); }

void SimCloud::set_peer_lookup(std::function<SimCloud*(CloudId)> lookup) {
    peer_lookup_ = std::move(lookup);
}

void SimCloud::start() {
    mq_->bind(endpoint_, [this](const std::string& from, const nlohmann::json& payload) {
        handle_message(from, payload);
    });
    if (profile_.background.mean_interarrival_s > 0.0) schedule_background_arrival();
}

void SimCloud::set_down() {
    down_ = true;
    mq_->set_endpoint_down(endpoint_);
}

CloudOverhead SimCloud::overhead_snapshot() const {
    CloudOverhead o;
    o.running_jobs_count = static_cast<int>(running_.size());
    o.queued_jobs_count = static_cast<int>(queue_.size());
    double fractions = 0.0;
    for (const auto& [id, run] : running_) {
        (void)id;
        o.running_jobs_total_input_bytes += run.job.input_bytes;
        double frac = run.duration > 0.0 ? (engine_->now() - run.started_at) / run.duration : 1.0;
        fractions += std::clamp(frac, 0.0, 1.0);
    }
    if (!running_.empty())
        o.running_jobs_mean_completion_fraction = fractions / static_cast<double>(running_.size());
    return o;
}

bool SimCloud::holds(const std::string& partition_id) const {
    return partitions_.count(partition_id) > 0;
}

void SimCloud::store_partition(const DataPartition& partition) {
    partitions_[partition.id] = partition;
}

void SimCloud::handle_message(const std::string& from, const nlohmann::json& payload) {
    if (down_) return;
    const std::string type = payload.at("type").get<std::string>();
    if (type == "ping") {
        mq_->send(endpoint_, from, {{"type", "pong"}, {"cloud", profile_.id}});
    } else if (type == "copy") {
        mq_->send(endpoint_, from,
                  {{"type", "ack"}, {"cloud", profile_.id}, {"req", payload.at("copy_id")}});
        handle_copy(payload);
    } else if (type == "run") {
        mq_->send(endpoint_, from,
                  {{"type", "ack"}, {"cloud", profile_.id}, {"req", payload.at("job_key")}});
        handle_run(payload);
    } else {
        throw std::logic_error("cloud received unknown message type " + type);
    }
}

void SimCloud::handle_copy(const nlohmann::json& payload) {
    const std::string partition_id = payload.at("partition").get<std::string>();
    auto it = partitions_.find(partition_id);
    if (it == partitions_.end())
        throw std::logic_error("copy source does not hold partition " + partition_id);
    DataPartition data = it->second;
    CloudId src = profile_.id;
    CloudId dst = payload.at("dst").get<CloudId>();
    std::uint64_t copy_id = payload.at("copy_id").get<std::uint64_t>();
    std::uint64_t link_seed = payload.at("link_seed").get<std::uint64_t>();
    double duration = simulate_transfer(*link_, src, dst, data.size_bytes, link_seed);
    engine_->schedule_in(duration, [this, data, src, dst, copy_id]() {
        if (down_) return;
        SimCloud* dest = peer_lookup_(dst);
        if (dest == nullptr) throw std::logic_error("unknown destination cloud");
        if (dest->down()) return;
        bool tampered = injector_->tamper_copy(data.id, src, dst);
        if (tampered) {
            trace_->record(engine_->now(), "inject",
                           {{"kind", "transmission_tamper"},
                            {"partition", data.id},
                            {"src", src},
                            {"dst", dst}});
        } else {
            dest->store_partition(data);
        }
        mq_->send(endpoint_name(dst), "proxy",
                  {{"type", "copy_result"},
                   {"copy_id", copy_id},
                   {"cloud", dst},
                   {"outcome", tampered ? "mismatch" : "validated"}});
    });
}

void SimCloud::handle_run(const nlohmann::json& payload) {
    PendingJob job;
    job.job_key = payload.at("job_key").get<std::string>();
    job.hash_spec.id = payload.at("logical_job").get<std::string>();
    job.hash_spec.phase =
        payload.at("phase").get<std::string>() == "global" ? JobPhase::Global : JobPhase::Vanilla;
    job.hash_spec.input_ids = payload.at("inputs").get<std::vector<std::string>>();
    job.hash_spec.map_tasks = payload.at("map").get<int>();
    job.hash_spec.reduce_tasks = payload.at("reduce").get<int>();
    job.input_bytes = payload.at("size").get<std::uint64_t>();
    job.attempt = payload.at("attempt").get<int>();
    job.noise_seed = payload.at("noise_seed").get<std::uint64_t>();
    for (const std::string& input : job.hash_spec.input_ids)
        if (!holds(input))
            throw std::logic_error("run dispatched before input " + input + " was validated");
    queue_.push_back(std::move(job));
    try_start_queued();
}

void SimCloud::try_start_queued() {
    while (!queue_.empty()
           && running_.size() < static_cast<std::size_t>(profile_.capacity.cpu_cores)) {
        PendingJob job = std::move(queue_.front());
        queue_.pop_front();
        start_job(std::move(job));
    }
}

void SimCloud::start_job(PendingJob job) {
    CloudOverhead snapshot = overhead_snapshot();
    double duration =
        simulate_processing_seeded(job.hash_spec, job.input_bytes, profile_, snapshot,
                                   job.noise_seed);
    std::uint64_t run_id = next_run_id_++;
    bool background = job.background;
    std::string job_key = job.job_key;
    int attempt = job.attempt;
    running_.emplace(run_id, RunningJob{std::move(job), engine_->now(), duration});
    if (!background)
        trace_->record(engine_->now(), "run_start",
                       {{"job", job_key}, {"cloud", profile_.id}, {"attempt", attempt}});
    engine_->schedule_in(duration, [this, run_id]() { finish_job(run_id); });
}

void SimCloud::finish_job(std::uint64_t run_id) {
    if (down_) return;
    auto it = running_.find(run_id);
    if (it == running_.end()) return;
    RunningJob run = std::move(it->second);
    running_.erase(it);
    ++executed_;
    if (!run.job.background) {
        std::vector<DataPartition> inputs;
        inputs.reserve(run.job.hash_spec.input_ids.size());
        for (const std::string& id : run.job.hash_spec.input_ids) inputs.push_back(partitions_.at(id));
        Digest digest = canonical_digest(inputs, run.job.hash_spec);
        auto corrupted = injector_->corrupt_output(run.job.hash_spec.id, profile_.id, digest);
        if (corrupted) {
            digest = corrupted->digest;
            const char* kind = corrupted->kind == FaultKind::Collusion ? "collusion"
                               : corrupted->kind == FaultKind::MaliciousCorruption
                                   ? "malicious_corruption"
                                   : "arbitrary_corruption";
            trace_->record(engine_->now(), "inject",
                           {{"kind", kind},
                            {"job", run.job.hash_spec.id},
                            {"cloud", profile_.id}});
        }
        mq_->send(endpoint_, "proxy",
                  {{"type", "run_done"},
                   {"job_key", run.job.job_key},
                   {"logical_job", run.job.hash_spec.id},
                   {"attempt", run.job.attempt},
                   {"cloud", profile_.id},
                   {"digest", digest.hex()},
                   {"proc_s", run.duration},
                   {"started_at", run.started_at}});
    }
    try_start_queued();
}

void SimCloud::schedule_background_arrival() {
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    double gap = profile_.background.mean_interarrival_s * jitter(engine_->rng());
    engine_->schedule_in(gap, [this]() {
        if (down_) return;
        PendingJob job;
        job.background = true;
        job.hash_spec.id = "bg:" + std::to_string(profile_.id) + ":"
                           + std::to_string(background_counter_++);
        job.job_key = job.hash_spec.id;
        job.hash_spec.phase = JobPhase::Vanilla;
        job.hash_spec.map_tasks = profile_.background.map_tasks;
        job.hash_spec.reduce_tasks = profile_.background.reduce_tasks;
        std::uniform_int_distribution<std::uint64_t> size(profile_.background.size_bytes_min,
                                                          profile_.background.size_bytes_max);
        job.input_bytes = size(engine_->rng());
        job.noise_seed = engine_->draw_seed();
        queue_.push_back(std::move(job));
        try_start_queued();
        schedule_background_arrival();
    });
}

}  // namespace medusa
