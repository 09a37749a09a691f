#ifndef MEDUSA_SCHEDULER_HPP
#define MEDUSA_SCHEDULER_HPP

#include "medusa/core.hpp"
#include "medusa/netmodel.hpp"
#include "medusa/predictor.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace medusa {

enum class SchedulerKind { Medusa, RoundRobin };

struct ScheduleEstimate {
    CloudId cloud = -1;
    double total_s = 0.0;
    double t_trans_s = 0.0;
    double t_proc_s = 0.0;
};

// Clouds barred from hosting replicas: globally (detected down, or malicious
// in Malicious mode) or for one specific job.
class ExclusionSet {
  public:
    void exclude_globally(CloudId cloud);
    void exclude_for_job(const std::string& job_id, CloudId cloud);
    bool excluded_globally(CloudId cloud) const;
    bool excluded(const std::string& job_id, CloudId cloud) const;
    const std::set<CloudId>& global() const { return global_; }

  private:
    std::set<CloudId> global_;
    std::map<std::string, std::set<CloudId>> per_job_;
};

// Per-cloud snapshot the estimator reads at the scheduling instant. A null
// model means no trained predictor yet; processing time is then taken as 0.
struct CloudState {
    CloudCapacity capacity;
    CloudOverhead overhead;
    const RegressionModel* model = nullptr;
};

struct SchedulerContext {
    const ThroughputTracker* tracker = nullptr;
    const LinkModel* link = nullptr;
    std::map<CloudId, CloudState> clouds;
};

// One vanilla-job output: its producing job, size, and which clouds hold a
// validated copy.
struct OutputLocation {
    std::string id;
    std::uint64_t size_bytes = 0;
    std::set<CloudId> holders;
};

/// Phase-1 completion estimate for `candidate`: cheapest transfer from any
/// validated holder (0 when the candidate already holds the data) plus the
/// candidate's predicted processing time. nullopt when no holder is reachable.
std::optional<ScheduleEstimate> estimate_t1(const SchedulerContext& ctx, const JobSpec& job,
                                            std::uint64_t input_size_bytes,
                                            const std::set<CloudId>& holders, CloudId candidate);

/// Phase-2 estimate for `candidate`: transfers of missing vanilla outputs run
/// in parallel, so the bound is the largest single transfer; aggregation
/// processing is not charged. nullopt when some output has no reachable holder.
std::optional<ScheduleEstimate> estimate_t2(const SchedulerContext& ctx,
                                            const std::vector<OutputLocation>& outputs,
                                            CloudId candidate);

/// Initial phase-1 placement: the home cloud plus the f other non-excluded
/// clouds with smallest t1, home first, remainder in increasing (estimate,
/// cloud id) order. nullopt when fewer than f+1 clouds qualify.
std::optional<std::vector<CloudId>> select_phase1_clouds(const SchedulerContext& ctx,
                                                         const JobSpec& job,
                                                         std::uint64_t input_size_bytes,
                                                         CloudId home, int f,
                                                         const ExclusionSet& exclusions);

/// Initial phase-2 placement: the f+1 non-excluded clouds with smallest t2 in
/// increasing (estimate, cloud id) order.
std::optional<std::vector<CloudId>> select_phase2_clouds(const SchedulerContext& ctx,
                                                         const std::vector<OutputLocation>& outputs,
                                                         int f, const ExclusionSet& exclusions);

struct ExtraReplicaQuery {
    const JobSpec* job = nullptr;
    std::uint64_t input_size_bytes = 0;       // Vanilla phase
    std::set<CloudId> data_holders;           // Vanilla phase
    std::vector<OutputLocation> outputs;      // Global phase
    std::set<CloudId> active;                 // clouds still running this job
    std::set<CloudId> reported;               // clouds that returned any output for it
    FaultMode mode = FaultMode::ArbitraryOnly;
};

/// Cheapest cloud for one more replica after a disagreement. Never picks a
/// cloud still running the job; in Malicious mode also skips every cloud that
/// already reported an output for it, while ArbitraryOnly allows re-use of any
/// alive cloud. nullopt when no candidate remains.
std::optional<ScheduleEstimate> select_extra_replica(const SchedulerContext& ctx,
                                                     const ExtraReplicaQuery& query,
                                                     const ExclusionSet& exclusions);

/// Baseline placement: f+1 distinct clouds taken consecutively from a circular
/// cursor at slot (sequence * (f+1)) mod |clouds|, skipping excluded clouds.
std::optional<std::vector<CloudId>> round_robin_select(std::uint64_t job_sequence_number, int f,
                                                       int num_clouds,
                                                       const std::string& job_id,
                                                       const ExclusionSet& exclusions);

// Stateful wrapper advancing the sequence number once per scheduled job.
class RoundRobinCursor {
  public:
    explicit RoundRobinCursor(int num_clouds);
    std::optional<std::vector<CloudId>> next_selection(int f, const std::string& job_id,
                                                       const ExclusionSet& exclusions);

  private:
    int num_clouds_;
    std::uint64_t sequence_ = 0;
};

}  // namespace medusa

#endif  // MEDUSA_SCHEDULER_HPP
