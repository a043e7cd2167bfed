#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparspec/io.hpp"
#include "sparspec/mfi_design.hpp"
#include "sparspec/rrmmse.hpp"
#include "sparspec/scene.hpp"

namespace sparspec {

/// Physical geometry; N and M are derived, never set directly:
/// M_nyq = round(2 B T0), M = M_nyq + 1, N = M_nyq * oversampling.
struct GeometryConfig {
    double bandwidth_hz = 20e3;
    double timewidth_s = 2.5e-3;
    int oversampling = 8;
    double carrier_hz = 0.0;  // recorded only

    int nyquist_count() const;
    int range_bins() const { return nyquist_count() + 1; }
    int line_count() const { return nyquist_count() * oversampling; }
    FrequencyGrid frequency_grid() const;
    RangeGrid range_grid() const;

    static GeometryConfig desk() { return {}; }  // N=800, M=101
    static GeometryConfig paper() { return {20e3, 10e-3, 10, 0.0}; }  // N=4000, M=401

    void validate() const;
};

enum class NoiseReference {
    kPerSpectrum,           // sigma_n^2 from each spectrum's own H gamma
    kFullSpectrumBaseline,  // sigma_n^2 from the 100%-occupancy spectrum, held fixed
};

enum class EstimatorKind { kMatchedFilter, kMmse, kRrmmse };

struct ExperimentConfig {
    GeometryConfig geometry;

    // Spectrum design
    std::vector<double> occupancies{0.5};
    double block_fraction = 0.0125;
    DesignParams design;
    std::optional<std::string> support_file;  // overrides designed spectra

    // Scenes
    std::vector<double> target_occupancies{0.2};
    double magnitude_low_db = -10.0;
    double magnitude_high_db = 30.0;
    std::vector<int> eligible_bins;  // empty = default (all but the first bin)

    // Noise
    double snr_db = 30.0;
    NoiseReference noise_reference = NoiseReference::kPerSpectrum;
    double noise_floor = kDefaultNoiseFloor;

    // Estimation
    RrmmseConfig estimator;
    SolverPath solver_path = SolverPath::kDirect;
    double detection_floor_db = -10.0;
    std::optional<bool> run_mmse_baseline;  // default: only when M <= 256

    // Monte-Carlo
    int trials = 1;
    std::uint64_t seed = 1;

    // Outputs
    std::string output_dir = "out";
    bool profile_tables = false;

    void validate() const;
    static ExperimentConfig from_json(const Json& j);
    Json to_json() const;
};

/// One Monte-Carlo trial of one (occupancy, rho) cell.
struct TrialResult {
    int trial = 0;
    double occupancy = 1.0;         // designed spectral occupancy (actual K/N)
    double rho = 0.0;               // scene target occupancy
    std::uint64_t scene_seed = 0;
    int scatterers = 0;
    double noise_variance = 0.0;
    int iterations = 0;
    std::string termination;
    bool rank_warning = false;
    double mse_ke = 0.0;       // Tr(K_eps)/M at the final iteration
    double mse_gt = 0.0;       // ground-truth MSE of the final estimate
    double mf_mse_gt = 0.0;    // matched-filter baseline
    double mmse_mse_gt = std::numeric_limits<double>::quiet_NaN();  // one-step MMSE
    double mmse_mse_ke = std::numeric_limits<double>::quiet_NaN();
    double precision = 1.0;
    double recall = 1.0;
    double seconds = 0.0;  // in-memory only; never written to reproducible outputs
};

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
};

Aggregate aggregate(const std::vector<double>& values);

struct ExperimentRecord {
    ExperimentConfig config;
    std::vector<TrialResult> trials;

    std::vector<double> collect(double occupancy, double rho,
                                double TrialResult::*field) const;
};

/// Full Monte-Carlo grid over occupancies x target occupancies. Designs (or
/// loads) each spectrum once, then per trial: scene, measurement, matched
/// filter, optional one-step MMSE, RRMMSE, metrics. Writes results.csv and
/// summary.json under config.output_dir; byte-identical given (config, seed).
ExperimentRecord run_experiment(const ExperimentConfig& config);

/// Per-bin CSV of one trial: bin, delay, truth, matched filter, estimate,
/// posterior variance, in-support flag. Power columns in dB; empty cell for
/// silent bins.
void emit_profile_table(const Scene& scene, const Eigen::VectorXcd& matched,
                        const EstimationResult& result, const RangeGrid& ranges,
                        const std::string& path);

/// Aggregated per-cell summary of an existing results.csv (the `report` verb).
std::string summarize_results_csv(const std::string& csv_text);

}  // namespace sparspec
