#include "medusa/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace medusa {

namespace {

std::pair<CloudId, CloudId> key(CloudId from, CloudId to) { return {from, to}; }

}  // namespace

void LinkModel::set_link(CloudId a, CloudId b, const LinkParams& params) {
    if (a == b) throw std::invalid_argument("link endpoints must differ");
    if (params.rtt_seconds < 0.0) throw std::invalid_argument("negative rtt");
    if (params.true_throughput_bytes_per_s <= 0.0)
        throw std::invalid_argument("true throughput must be positive");
    if (params.prior_throughput_bytes_per_s <= 0.0)
        throw std::invalid_argument("prior throughput must be positive");
    links_[key(a, b)] = params;
    links_[key(b, a)] = params;
}

bool LinkModel::has_link(CloudId from, CloudId to) const {
    return links_.count(key(from, to)) > 0;
}

const LinkParams& LinkModel::params(CloudId from, CloudId to) const {
    auto it = links_.find(key(from, to));
    if (it == links_.end()) throw std::invalid_argument("undefined link");
    return it->second;
}

void LinkModel::set_cloud_down(CloudId cloud) { down_.insert(cloud); }

bool LinkModel::cloud_down(CloudId cloud) const { return down_.count(cloud) > 0; }

bool LinkModel::link_down(CloudId from, CloudId to) const {
    return cloud_down(from) || cloud_down(to);
}

ThroughputTracker::ThroughputTracker(int window_k) : window_k_(window_k) {
    if (window_k <= 0) throw std::invalid_argument("window must be positive");
}

void ThroughputTracker::record_measurement(CloudId from, CloudId to, double bytes_per_s) {
    if (from == to) throw std::invalid_argument("self measurement");
    if (!(bytes_per_s > 0.0)) throw std::invalid_argument("throughput must be positive");
    auto& window = samples_[key(from, to)];
    window.push_back(bytes_per_s);
    while (window.size() > static_cast<std::size_t>(window_k_)) window.pop_front();
}

std::optional<double> ThroughputTracker::estimated_throughput(CloudId from, CloudId to) const {
    auto it = samples_.find(key(from, to));
    if (it == samples_.end() || it->second.empty()) return std::nullopt;
    double sum = 0.0;
    for (double v : it->second) sum += v;
    return sum / static_cast<double>(it->second.size());
}

std::size_t ThroughputTracker::sample_count(CloudId from, CloudId to) const {
    auto it = samples_.find(key(from, to));
    return it == samples_.end() ? 0 : it->second.size();
}

std::optional<double> estimate_transmission_time(const ThroughputTracker& tracker,
                                                 const LinkModel& link, CloudId from, CloudId to,
                                                 std::uint64_t size_bytes) {
    if (from == to) return 0.0;
    if (!link.has_link(from, to) || link.link_down(from, to)) return std::nullopt;
    const LinkParams& p = link.params(from, to);
    double throughput = tracker.estimated_throughput(from, to)
                            .value_or(p.prior_throughput_bytes_per_s);
    return p.rtt_seconds / 2.0 + static_cast<double>(size_bytes) / throughput;
}

double simulate_transfer(const LinkModel& link, CloudId from, CloudId to,
                         std::uint64_t size_bytes, std::uint64_t rng_seed) {
    if (from == to) return 0.0;
    if (link.link_down(from, to)) throw std::logic_error("transfer over a down link");
    const LinkParams& p = link.params(from, to);
    double base = p.rtt_seconds / 2.0
                  + static_cast<double>(size_bytes) / p.true_throughput_bytes_per_s;
    if (p.noise_sigma <= 0.0) return base;
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    return base * std::exp(p.noise_sigma * normal(rng));
}

}  // namespace medusa
