#ifndef MEDUSA_NETMODEL_HPP
#define MEDUSA_NETMODEL_HPP

#include "medusa/core.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <utility>

namespace medusa {

struct LinkParams {
    double rtt_seconds = 0.0;
    double true_throughput_bytes_per_s = 0.0;   // ground truth, hidden from the scheduler
    double prior_throughput_bytes_per_s = 0.0;  // cold-start fallback for the estimator
    double noise_sigma = 0.0;                   // lognormal sigma on durations and probes
};

// Pairwise link state. RTT is symmetric and constant per scenario; a link is
// down exactly when one of its endpoint clouds is down.
class LinkModel {
  public:
    // Applies to both directions (from,to) and (to,from).
    void set_link(CloudId a, CloudId b, const LinkParams& params);

    bool has_link(CloudId from, CloudId to) const;
    const LinkParams& params(CloudId from, CloudId to) const;  // throws if undefined

    void set_cloud_down(CloudId cloud);
    bool cloud_down(CloudId cloud) const;
    bool link_down(CloudId from, CloudId to) const;

  private:
    std::map<std::pair<CloudId, CloudId>, LinkParams> links_;
    std::set<CloudId> down_;
};

// Windowed throughput history per ordered cloud pair: at most window_k samples,
// most recent last.
class ThroughputTracker {
  public:
    explicit ThroughputTracker(int window_k = 10);

    int window_k() const { return window_k_; }

    // Appends a sample, evicting the oldest beyond window_k.
    // Throws std::invalid_argument on from == to or value <= 0.
    void record_measurement(CloudId from, CloudId to, double bytes_per_s);

    // Arithmetic mean of the retained samples; nullopt when none recorded.
    std::optional<double> estimated_throughput(CloudId from, CloudId to) const;

    std::size_t sample_count(CloudId from, CloudId to) const;

  private:
    int window_k_;
    std::map<std::pair<CloudId, CloudId>, std::deque<double>> samples_;
};

/// Transfer-time estimate: rtt/2 + size / estimated throughput.
/// Falls back to the link's prior throughput when no samples exist.
/// nullopt when the link is down or undefined. from == to yields 0.
std::optional<double> estimate_transmission_time(const ThroughputTracker& tracker,
                                                 const LinkModel& link, CloudId from, CloudId to,
                                                 std::uint64_t size_bytes);

/// Ground-truth transfer duration: (rtt/2 + size/true throughput) scaled by a
/// seed-deterministic lognormal noise factor. Precondition: link up.
double simulate_transfer(const LinkModel& link, CloudId from, CloudId to,
                         std::uint64_t size_bytes, std::uint64_t rng_seed);

}  // namespace medusa

#endif  // MEDUSA_NETMODEL_HPP
