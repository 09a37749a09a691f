#ifndef MEDUSA_PROTOCOL_HPP
#define MEDUSA_PROTOCOL_HPP

#include "medusa/core.hpp"
#include "medusa/netmodel.hpp"
#include "medusa/predictor.hpp"
#include "medusa/scheduler.hpp"
#include "medusa/simcloud.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace medusa {

// Digest tally for one job: a multiset of reports keyed by digest. A digest
// wins once it reaches multiplicity f+1; each (cloud, attempt) replica may
// report at most once. Every report comes from a scheduled replica, and in
// Malicious mode reporting clouds never receive another replica of the same
// job, so a faulty cloud cannot manufacture a majority by repetition there.
class VoteState {
  public:
    /// false (and counted as a violation) when this (cloud, attempt) already
    /// reported.
    bool register_report(CloudId cloud, int attempt, const Digest& digest);

    /// Digest with the highest multiplicity >= f+1, smallest digest on ties.
    std::optional<Digest> winner(int f) const;

    const std::map<Digest, int>& tally() const { return tally_; }
    const std::map<Digest, std::set<CloudId>>& support() const { return support_; }
    int report_count() const { return reports_; }
    int violations() const { return violations_; }

  private:
    std::map<Digest, int> tally_;                      // reports per digest
    std::map<Digest, std::set<CloudId>> support_;      // distinct clouds, for audit
    std::set<std::pair<CloudId, int>> seen_;
    int reports_ = 0;
    int violations_ = 0;
};

enum class VoteDecision { Accept, Wait, NeedExtraReplica };

/// Decision after a report lands: Accept once some digest has f+1 distinct
/// supporters, Wait while `outstanding` replicas are still due, otherwise one
/// more replica is needed.
VoteDecision collect_and_vote(const VoteState& votes, int outstanding, int f,
                              Digest* winner = nullptr);

enum class Stage { Replicate, Run, Agree };

// Tracks which participants a stage still waits for; unreachable participants
// are dropped so the stage can advance without them.
class StageBarrier {
  public:
    enum class Outcome { Stay, Advance };

    StageBarrier() = default;
    StageBarrier(Stage stage, std::set<std::string> pending);

    Outcome complete(const std::string& participant);
    Outcome declare_unreachable(const std::string& participant);
    void add_participant(const std::string& participant);

    Stage stage() const { return stage_; }
    bool done() const { return pending_.empty(); }
    int violations() const { return violations_; }

  private:
    Stage stage_ = Stage::Replicate;
    std::set<std::string> pending_;
    bool opened_ = false;
    int violations_ = 0;
};

enum class JobStatus { Scheduling, AwaitingOutputs, NeedExtraReplica, Accepted, Failed };

struct ReplicaRecord {
    CloudId cloud = -1;
    int attempt = 0;
    ReplicaState state = ReplicaState::CopyingData;
    std::optional<Digest> output;
    FeatureVector dispatch_features;
};

struct JobExecution {
    JobSpec spec;         // id is the submission-scoped key
    std::string logical;  // stable id used for digests and fault targeting
    std::uint64_t input_bytes = 0;
    CloudId home = -1;  // vanilla only
    JobStatus status = JobStatus::Scheduling;
    std::vector<ReplicaRecord> replicas;
    VoteState votes;
    std::optional<Digest> accepted;
    std::string failure_reason;
    std::set<CloudId> active;    // replicas copying or running
    std::set<CloudId> reported;  // clouds that returned any output
    std::set<CloudId> data_holders;  // vanilla: validated copies of the input
    std::map<std::string, std::set<CloudId>> output_holders;  // global inputs
    std::map<std::string, std::uint64_t> output_sizes;
    StageBarrier replicate_barrier;
    bool run_gate_open = false;
    std::map<CloudId, int> pending_copies;
    int next_attempt = 1;
    int extra_replicas = 0;
};

struct ProxyConfig {
    FaultToleranceConfig fault;
    SchedulerKind scheduler = SchedulerKind::Medusa;
    double heartbeat_period_s = 30.0;
    double detection_window_s = 60.0;
    double output_fraction = 0.1;  // vanilla output bytes as a share of its input
    std::size_t training_window = 30;
    nlohmann::json trace_meta;  // copied into the submit trace record
};

struct SubmissionRequest {
    std::string tag;  // job-key prefix, unique per submission
    std::vector<DataPartition> partitions;
    int map_tasks = 1;
    int reduce_tasks = 1;
};

struct SubmissionOutcome {
    bool done = false;
    bool accepted = false;
    Digest final_digest{};
    Digest expected_digest{};
    std::string failure;
    double submit_time = 0.0;
    double finish_time = 0.0;
};

// The orchestrator: schedules replicas, validates copies, tallies votes,
// launches extra replicas on disagreement, and handles detected outages. One
// submission runs at a time; the harness drives the engine until the outcome
// is done.
class MedusaProxy {
  public:
    MedusaProxy(SimEngine& engine, MessageQueue& mq, LinkModel& link, ThroughputTracker& tracker,
                FaultInjector& injector, TraceLog& trace, ProxyConfig config,
                std::map<CloudId, SimCloud*> clouds);

    void start();  // binds the proxy endpoint and starts heartbeats

    void submit(const SubmissionRequest& request);
    bool submission_done() const { return outcome_.done; }
    const SubmissionOutcome& outcome() const { return outcome_; }

    /// Fault-free digest of the final (global) output for this request.
    Digest expected_digest(const SubmissionRequest& request) const;

    void handle_outage(CloudId cloud);

    const ExclusionSet& exclusions() const { return exclusions_; }
    const std::map<std::string, JobExecution>& jobs() const { return jobs_; }
    const std::map<CloudId, std::vector<Observation>>& observations() const { return obs_; }

  private:
    struct CopyTask {
        std::string job_key;
        std::string partition_id;
        CloudId src = -1;
        CloudId dst = -1;
        std::uint64_t size_bytes = 0;
        int attempt = 0;  // replica attempt the copy feeds
        int tries_on_current_src = 0;
        std::set<CloudId> tried_sources;
        bool open = true;
    };

    void handle_message(const std::string& from, const nlohmann::json& payload);
    void handle_copy_result(const nlohmann::json& payload);
    void handle_run_done(const nlohmann::json& payload);

    SchedulerContext context() const;
    JobSpec hash_spec(const JobExecution& job) const;
    void schedule_vanilla(JobExecution& job);
    void start_global_phase();
    void schedule_selection(JobExecution& job, const std::vector<CloudId>& selection);
    void issue_copies_for(JobExecution& job, CloudId cloud);
    void issue_copy(JobExecution& job, const std::string& partition_id, CloudId src, CloudId dst,
                    int attempt);
    std::optional<CloudId> best_source(const std::set<CloudId>& holders, CloudId dst,
                                       std::uint64_t size_bytes,
                                       const std::set<CloudId>& excluded_sources) const;
    void open_run_gate(JobExecution& job);
    void maybe_dispatch(JobExecution& job, CloudId cloud);
    void dispatch_run(JobExecution& job, ReplicaRecord& replica);
    void evaluate_votes(JobExecution& job);
    void launch_extra(JobExecution& job, const char* cause);
    void fail_job(JobExecution& job, const std::string& reason);
    void finish_submission(const Digest& digest);
    void arm_response_timeout(CloudId cloud);
    void heartbeat_tick();
    std::set<CloudId> alive_holders(const std::set<CloudId>& holders) const;
    ReplicaRecord* find_replica(JobExecution& job, CloudId cloud, int attempt);

    SimEngine* engine_;
    MessageQueue* mq_;
    LinkModel* link_;
    ThroughputTracker* tracker_;
    FaultInjector* injector_;
    TraceLog* trace_;
    ProxyConfig config_;
    std::map<CloudId, SimCloud*> clouds_;

    ExclusionSet exclusions_;
    RoundRobinCursor rr_cursor_;
    std::map<CloudId, double> last_response_;
    std::map<CloudId, std::vector<Observation>> obs_;
    std::map<CloudId, std::optional<RegressionModel>> models_;

    std::string tag_;
    int map_tasks_ = 1;
    int reduce_tasks_ = 1;
    std::map<std::string, DataPartition> partitions_;
    std::map<std::string, JobExecution> jobs_;
    std::vector<std::string> vanilla_keys_;
    std::string global_key_;
    int accepted_vanilla_ = 0;
    bool global_started_ = false;
    SubmissionOutcome outcome_;
    std::map<std::uint64_t, CopyTask> copies_;
    std::uint64_t next_copy_id_ = 0;
    bool started_ = false;
};

}  // namespace medusa

#endif  // MEDUSA_PROTOCOL_HPP
