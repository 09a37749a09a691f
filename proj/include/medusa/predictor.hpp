#ifndef MEDUSA_PREDICTOR_HPP
#define MEDUSA_PREDICTOR_HPP

#include "medusa/core.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace medusa {

struct CloudCapacity {
    double cpu_clock_mhz = 0.0;
    int cpu_cores = 0;
    double memory_mb = 0.0;
};

// Snapshot of a cloud's current load, taken when a replica is dispatched.
struct CloudOverhead {
    int running_jobs_count = 0;
    double running_jobs_mean_completion_fraction = 0.0;
    int queued_jobs_count = 0;
    std::uint64_t running_jobs_total_input_bytes = 0;
};

inline constexpr std::size_t kFeatureCount = 10;

struct FeatureVector {
    double input_size_bytes = 0.0;
    double map_tasks = 0.0;
    double reduce_tasks = 0.0;
    double cpu_clock_mhz = 0.0;
    double cpu_cores = 0.0;
    double memory_mb = 0.0;
    double running_jobs_count = 0.0;
    double running_jobs_mean_completion_fraction = 0.0;
    double queued_jobs_count = 0.0;
    double running_jobs_total_input_bytes = 0.0;

    std::array<double, kFeatureCount> as_array() const;
};

struct Observation {
    FeatureVector features;
    double processing_time_s = 0.0;
};

// Linear processing-time model: predicted = coefficients . x + intercept.
struct RegressionModel {
    std::array<double, kFeatureCount> coefficients{};
    double intercept = 0.0;
    std::size_t training_window = 0;  // observations actually used
    bool regularized = false;         // ridge fallback was taken
};

FeatureVector extract_features(const JobSpec& job, std::uint64_t input_size_bytes,
                               const CloudCapacity& capacity, const CloudOverhead& overhead);

inline constexpr std::size_t kDefaultTrainingWindow = 30;

/// Least-squares fit over the most recent `window` observations via the
/// normal equations; falls back to a small ridge penalty on the feature
/// diagonal when the system is singular. nullopt with fewer than 2
/// observations.
std::optional<RegressionModel> fit(std::span<const Observation> history,
                                   std::size_t window = kDefaultTrainingWindow);

inline constexpr double kMinPredictedSeconds = 0.001;

/// Model output clamped below at kMinPredictedSeconds.
double predict(const RegressionModel& model, const FeatureVector& features);

}  // namespace medusa

#endif  // MEDUSA_PREDICTOR_HPP
