#include "medusa/predictor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace medusa {

std::array<double, kFeatureCount> FeatureVector::as_array() const {
    return {input_size_bytes,
            map_tasks,
            reduce_tasks,
            cpu_clock_mhz,
            cpu_cores,
            memory_mb,
            running_jobs_count,
            running_jobs_mean_completion_fraction,
            queued_jobs_count,
            running_jobs_total_input_bytes};
}

FeatureVector extract_features(const JobSpec& job, std::uint64_t input_size_bytes,
                               const CloudCapacity& capacity, const CloudOverhead& overhead) {
    FeatureVector f;
    f.input_size_bytes = static_cast<double>(input_size_bytes);
    f.map_tasks = static_cast<double>(job.map_tasks);
    f.reduce_tasks = static_cast<double>(job.reduce_tasks);
    f.cpu_clock_mhz = capacity.cpu_clock_mhz;
    f.cpu_cores = static_cast<double>(capacity.cpu_cores);
    f.memory_mb = capacity.memory_mb;
    f.running_jobs_count = static_cast<double>(overhead.running_jobs_count);
    f.running_jobs_mean_completion_fraction = overhead.running_jobs_mean_completion_fraction;
    f.queued_jobs_count = static_cast<double>(overhead.queued_jobs_count);
    f.running_jobs_total_input_bytes =
        static_cast<double>(overhead.running_jobs_total_input_bytes);
    return f;
}

namespace {

constexpr double kRidgeLambda = 1e-6;
constexpr std::size_t kDim = kFeatureCount + 1;  // features plus intercept

// Solves A x = b after symmetric diagonal equilibration: with
// D = diag(1/sqrt(A_ii)), solve (D A D) z = D b and return x = D z.
// Keeps the normal equations well scaled when feature magnitudes differ
// by many orders (bytes vs. fractions).
std::optional<Eigen::VectorXd> solve_equilibrated(const Eigen::MatrixXd& a,
                                                  const Eigen::VectorXd& b) {
    Eigen::VectorXd d(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        d(i) = a(i, i) > 0.0 ? 1.0 / std::sqrt(a(i, i)) : 1.0;
    Eigen::MatrixXd scaled = d.asDiagonal() * a * d.asDiagonal();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
    if (!lu.isInvertible()) return std::nullopt;
    Eigen::VectorXd z = lu.solve(d.asDiagonal() * b);
    return Eigen::VectorXd(d.asDiagonal() * z);
}

}  // namespace

std::optional<RegressionModel> fit(std::span<const Observation> history, std::size_t window) {
    if (window == 0) return std::nullopt;
    std::size_t used = std::min(history.size(), window);
    if (used < 2) return std::nullopt;
    std::span<const Observation> recent = history.subspan(history.size() - used);

    Eigen::MatrixXd x(static_cast<Eigen::Index>(used), static_cast<Eigen::Index>(kDim));
    Eigen::VectorXd y(static_cast<Eigen::Index>(used));
    for (std::size_t r = 0; r < used; ++r) {
        auto row = recent[r].features.as_array();
        for (std::size_t c = 0; c < kFeatureCount; ++c)
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        x(static_cast<Eigen::Index>(r), kFeatureCount) = 1.0;
        y(static_cast<Eigen::Index>(r)) = recent[r].processing_time_s;
    }

    Eigen::MatrixXd a = x.transpose() * x;
    Eigen::VectorXd rhs = x.transpose() * y;

    RegressionModel model;
    model.training_window = used;
    auto beta = solve_equilibrated(a, rhs);
    if (!beta) {
        // Singular normal equations (collinear or constant features): ridge on
        // the feature diagonal only, the intercept stays unpenalized.
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            auto i = static_cast<Eigen::Index>(c);
            a(i, i) += kRidgeLambda;
        }
        beta = solve_equilibrated(a, rhs);
        if (!beta) return std::nullopt;
        model.regularized = true;
    }
    for (std::size_t c = 0; c < kFeatureCount; ++c)
        model.coefficients[c] = (*beta)(static_cast<Eigen::Index>(c));
    model.intercept = (*beta)(kFeatureCount);
    return model;
}

double predict(const RegressionModel& model, const FeatureVector& features) {
    auto row = features.as_array();
    double value = model.intercept;
    for (std::size_t c = 0; c < kFeatureCount; ++c) value += model.coefficients[c] * row[c];
    return std::max(value, kMinPredictedSeconds);
}

}  // namespace medusa
