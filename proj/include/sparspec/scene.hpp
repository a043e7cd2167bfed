#pragma once

#include <cstdint>
#include <vector>

#include "sparspec/bayes.hpp"
#include "sparspec/grid.hpp"

namespace sparspec {

struct SceneConfig {
    double target_occupancy = 0.2;    // rho, fraction of eligible bins
    double magnitude_low_db = -10.0;  // amplitude dB, 20*log10|gamma|
    double magnitude_high_db = 30.0;
    std::uint64_t rng_seed = 0;
    /// Bins (0-based) scatterers may occupy; empty selects the default
    /// 1..M-1, i.e. every bin except the zero-delay cell.
    std::vector<int> eligible_bins;

    void validate() const;
};

struct Scene {
    Eigen::VectorXcd gamma;         // reflection coefficients, exact zeros off support
    std::vector<int> true_support;  // occupied bins, sorted ascending
    bool single_scatterer_fallback = false;  // rho > 0 rounded down to zero scatterers

    int scatterer_count() const { return static_cast<int>(true_support.size()); }
};

/// Draws floor(rho * (M-1)) scatterers on distinct eligible bins; magnitudes
/// log-uniform over the configured amplitude-dB range, phases uniform.
Scene generate_scene(const SceneConfig& config, const RangeGrid& ranges);

inline constexpr double kDefaultNoiseFloor = 1e-9;

struct SimulatedMeasurement {
    Measurement values;
    NoiseModel noise;
    bool noise_floor_applied = false;
};

/// v = H gamma + n with circular complex Gaussian noise; sigma_n^2 is set to
/// (|H gamma|^2 / K) / 10^(snr_db/10) so the realized per-measurement SNR
/// equals the request exactly. A zero-signal scene falls back to the
/// absolute noise floor.
SimulatedMeasurement simulate_measurement(const SensingMatrix& h, const Scene& scene,
                                          double snr_db, std::uint64_t rng_seed,
                                          double noise_floor = kDefaultNoiseFloor);

/// Same signal model with the noise variance supplied directly (used by
/// sweeps that hold sigma_n^2 fixed across spectra).
SimulatedMeasurement simulate_measurement_with_noise(const SensingMatrix& h, const Scene& scene,
                                                     const NoiseModel& noise,
                                                     std::uint64_t rng_seed);

/// Mean of the posterior variance diagonal, Tr(K_eps)/M.
double mse_from_posterior(const Eigen::VectorXd& posterior_diag);

/// (1/M) |gamma - gamma_hat|^2.
double mse_ground_truth(const Eigen::VectorXcd& truth, const Eigen::VectorXcd& estimate);

struct SupportMetrics {
    double precision = 1.0;
    double recall = 1.0;
    bool empty_estimate = false;  // precision reported 1.0 by convention
};

/// Precision/recall of an estimated support against the true scatterers
/// whose amplitude exceeds detection_floor_db.
SupportMetrics support_metrics(const std::vector<int>& true_support,
                               const std::vector<int>& estimated_support,
                               const Eigen::VectorXcd& gamma, double detection_floor_db);

}  // namespace sparspec
