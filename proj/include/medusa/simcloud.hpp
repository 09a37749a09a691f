#ifndef MEDUSA_SIMCLOUD_HPP
#define MEDUSA_SIMCLOUD_HPP

#include "medusa/core.hpp"
#include "medusa/netmodel.hpp"
#include "medusa/predictor.hpp"

#include "json.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace medusa {

// Discrete-event loop over a virtual clock. Events run in (time, sequence)
// order, so equal-time events keep their scheduling order; all randomness goes
// through the single engine generator, which makes a run a pure function of
// the seed.
class SimEngine {
  public:
    explicit SimEngine(std::uint64_t seed);

    double now() const { return now_; }

    void schedule_at(double time, std::function<void()> action);
    void schedule_in(double delay, std::function<void()> action);

    bool step();  // runs the next event; false when the queue is empty

    /// Steps until `done` returns true. Throws std::logic_error when the queue
    /// drains first (stall) or virtual time passes `watchdog_time`.
    void run_until(const std::function<bool()>& done, double watchdog_time);

    std::mt19937_64& rng() { return rng_; }
    std::uint64_t draw_seed() { return rng_(); }

    /// exp(sigma * Z) with Z standard normal; 1.0 when sigma <= 0.
    double lognormal_factor(double sigma);

  private:
    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::map<std::pair<double, std::uint64_t>, std::function<void()>> queue_;
    std::mt19937_64 rng_;
};

// Append-only structured event log; one JSON object per record.
class TraceLog {
  public:
    void set_enabled(bool on) { enabled_ = on; }
    bool enabled() const { return enabled_; }

    void record(double time, const std::string& event, nlohmann::json fields);

    const std::vector<nlohmann::json>& records() const { return records_; }
    std::string to_jsonl() const;
    void clear() { records_.clear(); }

  private:
    bool enabled_ = false;
    std::vector<nlohmann::json> records_;
};

// Reliable in-process channel: per (from, to) channel FIFO, exactly-once,
// except that messages to or from a down endpoint are dropped (the sender
// finds out via its own timeout).
class MessageQueue {
  public:
    explicit MessageQueue(SimEngine& engine);

    using Handler = std::function<void(const std::string& from, const nlohmann::json& payload)>;

    void bind(const std::string& endpoint, Handler handler);
    void set_endpoint_down(const std::string& endpoint);
    bool endpoint_down(const std::string& endpoint) const;

    void send(const std::string& from, const std::string& to, nlohmann::json payload,
              double delay = 0.0);

    std::uint64_t delivered_count() const { return delivered_; }

  private:
    SimEngine* engine_;
    std::map<std::string, Handler> handlers_;
    std::set<std::string> down_;
    std::map<std::pair<std::string, std::string>, double> channel_clock_;
    std::uint64_t delivered_ = 0;
};

// Seeded generator of extra local jobs; mean_interarrival_s <= 0 disables it.
struct BackgroundLoad {
    double mean_interarrival_s = 0.0;
    std::uint64_t size_bytes_min = 0;
    std::uint64_t size_bytes_max = 0;
    int map_tasks = 4;
    int reduce_tasks = 1;
};

struct CloudProfile {
    CloudId id = -1;
    CloudCapacity capacity;
    double base_seconds_per_mb = 0.0;  // ground-truth speed, hidden from the scheduler
    double load_penalty_per_job = 0.0;
    double proc_noise_sigma = 0.0;
    BackgroundLoad background;
};

/// Ground-truth processing duration:
///   base_seconds_per_mb * (S/1e6) / min(map_tasks, cores)
///     * (1 + load_penalty_per_job * (running + queued)) * noise_factor.
double simulate_processing(const JobSpec& job, std::uint64_t input_size_bytes,
                           const CloudProfile& cloud, const CloudOverhead& overhead,
                           double noise_factor);

/// Same with the noise factor drawn from the cloud's lognormal sigma under
/// `rng_seed`.
double simulate_processing_seeded(const JobSpec& job, std::uint64_t input_size_bytes,
                                  const CloudProfile& cloud, const CloudOverhead& overhead,
                                  std::uint64_t rng_seed);

enum class FaultKind {
    ArbitraryCorruption,
    MaliciousCorruption,
    Collusion,
    TransmissionTamper,
    Outage,
};

struct FaultInjection {
    FaultKind kind = FaultKind::ArbitraryCorruption;
    std::optional<CloudId> target_cloud;  // corruption/outage; nullopt = first eligible
    std::set<CloudId> collusion_clouds;   // Collusion only
    std::string target_job;               // logical job id; empty = any job
    std::optional<std::pair<CloudId, CloudId>> target_link;  // tamper; nullopt = any
    double trigger_time_s = 0.0;          // Outage: relative to arming
    int count = 1;                        // firings (per colluding cloud for Collusion)
};

/// Scenario-level guard: every collusion set must fit within f, so no job can
/// ever see more than f identical wrong digests. Throws std::invalid_argument
/// with a description on violation.
void validate_injections(const std::vector<FaultInjection>& injections, int f,
                         int num_clouds);

// Applies injections while armed; wrong digests are derived from the canonical
// digest plus the injection index (and firing ordinal for non-colluding
// corruption), so they are deterministic, never canonical, and identical only
// within one collusion set.
class FaultInjector {
  public:
    explicit FaultInjector(std::vector<FaultInjection> injections);

    void arm() { armed_ = true; }
    bool armed() const { return armed_; }

    struct CorruptionResult {
        Digest digest;
        FaultKind kind;
    };

    /// Replacement digest when a corruption or collusion injection fires for
    /// this replica completion; at most one injection fires per call.
    std::optional<CorruptionResult> corrupt_output(const std::string& logical_job, CloudId cloud,
                                                   const Digest& canonical);

    /// True when a tamper injection fires for this data copy.
    bool tamper_copy(const std::string& partition_id, CloudId src, CloudId dst);

    const std::vector<FaultInjection>& injections() const { return injections_; }
    int fired_count() const { return fired_; }

  private:
    std::vector<FaultInjection> injections_;
    std::vector<int> remaining_;                     // per injection
    std::map<std::pair<std::size_t, CloudId>, int> collusion_fired_;
    bool armed_ = false;
    int fired_ = 0;
};

// One simulated cloud: stores validated partitions, executes jobs on
// cpu_cores slots with FIFO overflow, generates background load, and answers
// the proxy over the message queue.
class SimCloud {
  public:
    SimCloud(SimEngine& engine, MessageQueue& mq, const LinkModel& link, FaultInjector& injector,
             TraceLog& trace, CloudProfile profile);

    static std::string endpoint_name(CloudId id);

    void set_peer_lookup(std::function<SimCloud*(CloudId)> lookup);
    void start();  // binds the endpoint and starts background arrivals

    void set_down();
    bool down() const { return down_; }

    const CloudProfile& profile() const { return profile_; }
    CloudOverhead overhead_snapshot() const;

    bool holds(const std::string& partition_id) const;
    void store_partition(const DataPartition& partition);
    void clear_partitions() { partitions_.clear(); }

    int executed_jobs() const { return executed_; }

  private:
    struct PendingJob {
        JobSpec hash_spec;  // id = logical job id (stable across submissions)
        std::string job_key;
        std::uint64_t input_bytes = 0;
        int attempt = 0;
        bool background = false;
        std::uint64_t noise_seed = 0;
    };
    struct RunningJob {
        PendingJob job;
        double started_at = 0.0;
        double duration = 0.0;
    };

    void handle_message(const std::string& from, const nlohmann::json& payload);
    void handle_copy(const nlohmann::json& payload);
    void handle_run(const nlohmann::json& payload);
    void try_start_queued();
    void start_job(PendingJob job);
    void finish_job(std::uint64_t run_id);
    void schedule_background_arrival();

    SimEngine* engine_;
    MessageQueue* mq_;
    const LinkModel* link_;
    FaultInjector* injector_;
    TraceLog* trace_;
    CloudProfile profile_;
    std::function<SimCloud*(CloudId)> peer_lookup_;
    std::string endpoint_;
    bool down_ = false;
    std::map<std::string, DataPartition> partitions_;
    std::deque<PendingJob> queue_;
    std::map<std::uint64_t, RunningJob> running_;
    std::uint64_t next_run_id_ = 0;
    std::uint64_t background_counter_ = 0;
    int executed_ = 0;
};

}  // namespace medusa

#endif  // MEDUSA_SIMCLOUD_HPP
