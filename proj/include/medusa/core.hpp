#ifndef MEDUSA_CORE_HPP
#define MEDUSA_CORE_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace medusa {

// Clouds are numbered densely 0..n-1 within a scenario.
using CloudId = int;

enum class FaultMode {
    ArbitraryOnly,  // a faulty cloud may be retried
    Malicious       // a cloud that returned an output for a job is never reused for it
};

struct FaultToleranceConfig {
    int f = 0;  // max count of clouds returning one identical wrong output
    FaultMode mode = FaultMode::ArbitraryOnly;
};

struct DataPartition {
    std::string id;
    std::uint64_t size_bytes = 0;
    CloudId home_cloud = 0;
    std::uint64_t content_seed = 0;  // determines the canonical content deterministically
};

enum class JobPhase { Vanilla, Global };

struct JobSpec {
    std::string id;
    JobPhase phase = JobPhase::Vanilla;
    std::vector<std::string> input_ids;  // partition ids (Vanilla) or vanilla-output ids (Global)
    int map_tasks = 1;
    int reduce_tasks = 1;
};

// 256-bit output of the collision-resistant hash.
struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Digest&) const = default;

    std::string hex() const;
    static std::optional<Digest> from_hex(const std::string& hex);
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(const std::string& data);

/// Digest of the correct output of `job` over `partitions`.
/// Pure function of (sorted partition ids, content seeds, job id); the order
/// of the input list never changes the result.
/// Throws std::invalid_argument on an empty partition set.
Digest canonical_digest(std::vector<DataPartition> partitions, const JobSpec& job);

enum class ReplicaState { CopyingData, Running, Finished, Unreachable };

struct JobReplica {
    std::string job_id;
    CloudId cloud = 0;
    int attempt = 1;  // increases monotonically per job
    ReplicaState state = ReplicaState::CopyingData;
    std::optional<Digest> output;  // set iff state == Finished
};

}  // namespace medusa

#endif  // MEDUSA_CORE_HPP
