#include "sparspec/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sparspec/errors.hpp"
#include "sparspec/rng.hpp"

namespace sparspec {

void SceneConfig::validate() const {
    if (target_occupancy < 0.0 || target_occupancy > 1.0)
        throw ConfigError("scene: target_occupancy must lie in [0, 1]");
    if (!(magnitude_low_db < magnitude_high_db))
        throw ConfigError("scene: magnitude_low_db must be below magnitude_high_db");
}

Scene generate_scene(const SceneConfig& config, const RangeGrid& ranges) {
    config.validate();
    ranges.validate();
    const int m = ranges.bin_count;

    std::vector<int> eligible = config.eligible_bins;
    if (eligible.empty()) {
        for (int bin = 1; bin < m; ++bin) eligible.push_back(bin);
    } else {
        for (int bin : eligible)
            if (bin < 0 || bin >= m) throw ConfigError("scene: eligible bin out of range");
    }

    Scene scene;
    scene.gamma = Eigen::VectorXcd::Zero(m);
    if (config.target_occupancy == 0.0) return scene;

    int count = static_cast<int>(std::floor(config.target_occupancy * (m - 1)));
    if (count < 1) {
        count = 1;
        scene.single_scatterer_fallback = true;
    }
    if (count > static_cast<int>(eligible.size()))
        throw ConfigError("scene: eligible bin set smaller than the requested scatterer count");

    Rng rng(config.rng_seed);
    const auto picks =
        rng.sample_without_replacement(static_cast<int>(eligible.size()), count);
    for (int pick : picks) {
        const int bin = eligible[static_cast<std::size_t>(pick)];
        const double db = rng.uniform(config.magnitude_low_db, config.magnitude_high_db);
        const double magnitude = std::pow(10.0, db / 20.0);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        scene.gamma(bin) = std::polar(magnitude, phase);
        scene.true_support.push_back(bin);
    }
    std::sort(scene.true_support.begin(), scene.true_support.end());
    return scene;
}

namespace {

SimulatedMeasurement add_noise(const Eigen::VectorXcd& clean, const NoiseModel& noise,
                               std::uint64_t rng_seed, bool floored) {
    Rng rng(rng_seed);
    SimulatedMeasurement out;
    out.noise = noise;
    out.noise_floor_applied = floored;
    out.values = clean;
    for (Eigen::Index k = 0; k < clean.size(); ++k)
        out.values(k) += rng.complex_normal(noise.variance);
    return out;
}

}  // namespace

SimulatedMeasurement simulate_measurement(const SensingMatrix& h, const Scene& scene,
                                          double snr_db, std::uint64_t rng_seed,
                                          double noise_floor) {
    if (scene.gamma.size() != h.cols())
        throw ConfigError("scene length does not match the sensing-matrix column count");
    const Eigen::VectorXcd clean = h.entries * scene.gamma;
    const double signal_power = clean.squaredNorm() / static_cast<double>(h.rows());
    double variance = signal_power / std::pow(10.0, snr_db / 10.0);
    bool floored = false;
    if (!(variance > 0.0)) {
        variance = noise_floor;
        floored = true;
    }
    return add_noise(clean, NoiseModel{variance}, rng_seed, floored);
}

SimulatedMeasurement simulate_measurement_with_noise(const SensingMatrix& h, const Scene& scene,
                                                     const NoiseModel& noise,
                                                     std::uint64_t rng_seed) {
    noise.validate();
    if (scene.gamma.size() != h.cols())
        throw ConfigError("scene length does not match the sensing-matrix column count");
    return add_noise(h.entries * scene.gamma, noise, rng_seed, false);
}

double mse_from_posterior(const Eigen::VectorXd& posterior_diag) {
    if ((posterior_diag.array() < 0.0).any())
        throw ConfigError("mse_from_posterior: variances must be nonnegative");
    return posterior_diag.mean();
}

double mse_ground_truth(const Eigen::VectorXcd& truth, const Eigen::VectorXcd& estimate) {
    if (truth.size() != estimate.size()) throw ConfigError("mse_ground_truth: length mismatch");
    return (truth - estimate).squaredNorm() / static_cast<double>(truth.size());
}

SupportMetrics support_metrics(const std::vector<int>& true_support,
                               const std::vector<int>& estimated_support,
                               const Eigen::VectorXcd& gamma, double detection_floor_db) {
    std::vector<int> significant;
    for (int bin : true_support) {
        const double amplitude_db = 20.0 * std::log10(std::abs(gamma(bin)));
        if (amplitude_db > detection_floor_db) significant.push_back(bin);
    }
    std::sort(significant.begin(), significant.end());

    SupportMetrics metrics;
    if (estimated_support.empty()) {
        metrics.empty_estimate = true;
        metrics.precision = 1.0;  // by convention, flagged
        metrics.recall = significant.empty() ? 1.0 : 0.0;
        return metrics;
    }
    int hits = 0;
    for (int bin : estimated_support)
        if (std::binary_search(significant.begin(), significant.end(), bin)) ++hits;
    metrics.precision = static_cast<double>(hits) / static_cast<double>(estimated_support.size());
    metrics.recall = significant.empty()
                         ? 1.0
                         : static_cast<double>(hits) / static_cast<double>(significant.size());
    return metrics;
}

}  // namespace sparspec
