// Command-line harness: design sparse spectra, simulate scenes and
// measurements, run estimators, and sweep Monte-Carlo grids.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "sparspec/errors.hpp"
#include "sparspec/experiment.hpp"
#include "sparspec/io.hpp"
#include "sparspec/rng.hpp"

namespace {

using namespace sparspec;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool paper_scale = false;
};

ExperimentConfig load_config(const CommonOpts& opts) {
    ExperimentConfig config = opts.config_path.empty()
                                  ? ExperimentConfig{}
                                  : ExperimentConfig::from_json(read_json_file(opts.config_path));
    if (opts.paper_scale) config.geometry = GeometryConfig::paper();
    if (opts.seed) config.seed = *opts.seed;
    if (opts.out_dir) config.output_dir = *opts.out_dir;
    config.validate();
    return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON experiment config");
    cmd->add_option("--seed", opts.seed, "override the master RNG seed");
    cmd->add_option("--out", opts.out_dir, "override the output directory");
    cmd->add_flag("--paper-scale", opts.paper_scale, "use the N=4000, M=401 geometry");
}

int cmd_design(const CommonOpts& opts) {
    const ExperimentConfig config = load_config(opts);
    const FrequencyGrid fgrid = config.geometry.frequency_grid();
    const RangeGrid rgrid = config.geometry.range_grid();
    const int block = static_cast<int>(std::ceil(config.block_fraction * fgrid.line_count));
    const BlockPartition partition = BlockPartition::uniform(fgrid.line_count, block);
    for (double occ : config.occupancies) {
        auto [support, report] = design_spectrum(fgrid, rgrid, partition, occ, config.design);
        const Coarray coarray = compute_coarray(support);
        const std::string tag = std::to_string(static_cast<int>(std::lround(occ * 100)));
        write_text_file(config.output_dir + "/support_occ" + tag + ".json",
                        support_to_json(support).dump(2) + "\n");
        Json rj = mfi_report_to_json(report);
        rj["coarray_holes_within_span"] =
            static_cast<int>(coarray.holes_within(support_span(support)).size());
        write_text_file(config.output_dir + "/mfi_report_occ" + tag + ".json", rj.dump(2) + "\n");
        std::printf("occupancy %.3f: K=%d, removals=%zu, trace %.6g -> %.6g, holes in span: %zu\n",
                    occupancy(support), support.preserved_count(), report.removal_order.size(),
                    report.trace_history.front(), report.trace_history.back(),
                    coarray.holes_within(support_span(support)).size());
    }
    return 0;
}

int cmd_simulate(const CommonOpts& opts) {
    ExperimentConfig config = load_config(opts);
    const FrequencyGrid fgrid = config.geometry.frequency_grid();
    const RangeGrid rgrid = config.geometry.range_grid();
    SpectrumSupport support =
        config.support_file ? support_from_json(read_json_file(*config.support_file))
                            : SpectrumSupport::full(fgrid.line_count);
    const SensingMatrix h = build_sensing_matrix(support, fgrid, rgrid);

    SceneConfig scene_cfg;
    scene_cfg.target_occupancy = config.target_occupancies.front();
    scene_cfg.magnitude_low_db = config.magnitude_low_db;
    scene_cfg.magnitude_high_db = config.magnitude_high_db;
    scene_cfg.eligible_bins = config.eligible_bins;
    scene_cfg.rng_seed = config.seed;
    const Scene scene = generate_scene(scene_cfg, rgrid);
    const SimulatedMeasurement sim = simulate_measurement(
        h, scene, config.snr_db, Rng(config.seed).derive(1).next_u64(), config.noise_floor);

    write_text_file(config.output_dir + "/scene.json", scene_to_json(scene).dump(2) + "\n");
    write_text_file(config.output_dir + "/measurement.json",
                    measurement_to_json(sim.values, sim.noise).dump(2) + "\n");
    std::printf("scene: %d scatterers; sigma_n^2 = %.6g%s\n", scene.scatterer_count(),
                sim.noise.variance, sim.noise_floor_applied ? " (noise floor)" : "");
    return 0;
}

int cmd_estimate(const CommonOpts& opts, const std::string& estimator, bool timing) {
    ExperimentConfig config = load_config(opts);
    const FrequencyGrid fgrid = config.geometry.frequency_grid();
    const RangeGrid rgrid = config.geometry.range_grid();
    SpectrumSupport support =
        config.support_file ? support_from_json(read_json_file(*config.support_file))
                            : SpectrumSupport::full(fgrid.line_count);
    const SensingMatrix h = build_sensing_matrix(support, fgrid, rgrid);

    SceneConfig scene_cfg;
    scene_cfg.target_occupancy = config.target_occupancies.front();
    scene_cfg.magnitude_low_db = config.magnitude_low_db;
    scene_cfg.magnitude_high_db = config.magnitude_high_db;
    scene_cfg.eligible_bins = config.eligible_bins;
    scene_cfg.rng_seed = config.seed;
    const Scene scene = generate_scene(scene_cfg, rgrid);
    const SimulatedMeasurement sim = simulate_measurement(
        h, scene, config.snr_db, Rng(config.seed).derive(1).next_u64(), config.noise_floor);

    const Eigen::VectorXcd mf = matched_filter(h, sim.values);
    if (estimator == "mf") {
        std::printf("matched filter: MSE_GT = %.6g\n", mse_ground_truth(scene.gamma, mf));
        return 0;
    }
    if (estimator == "mmse") {
        const auto prior =
            DiagonalPrior::uniform(rgrid.bin_count, config.estimator.prior_variance);
        const PosteriorSummary summary = mmse_estimate(h.entries, prior, sim.noise, sim.values);
        std::printf("one-step MMSE: MSE_GT = %.6g, MSE_Ke = %.6g\n",
                    mse_ground_truth(scene.gamma, summary.estimate), summary.trace_over_m);
        return 0;
    }
    const EstimationResult result =
        run_rrmmse(h.entries, sim.values, sim.noise, config.estimator, config.solver_path);
    write_text_file(config.output_dir + "/estimate.json",
                    estimation_result_to_json(result, timing).dump(2) + "\n");
    emit_profile_table(scene, mf, result, rgrid, config.output_dir + "/profile.csv");
    const ComplexityEstimate cx =
        complexity_model(static_cast<int>(result.trace_history.size()), rgrid.bin_count,
                         support.preserved_count());
    double total_seconds = 0.0;
    for (const auto& rec : result.trace_history) total_seconds += rec.seconds;
    std::printf("rrmmse: %zu iterations (%s), MSE_GT = %.6g, MSE_Ke = %.6g\n",
                result.trace_history.size(), to_string(result.termination),
                mse_ground_truth(scene.gamma, result.estimate),
                result.trace_history.back().trace_over_m);
    std::printf("cost model: full %lld flops, dominant %lld; measured %.3f s\n",
                static_cast<long long>(cx.full), static_cast<long long>(cx.dominant),
                total_seconds);
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    const ExperimentConfig config = load_config(opts);
    const ExperimentRecord record = run_experiment(config);
    double total = 0.0;
    for (const auto& t : record.trials) total += t.seconds;
    std::printf("sweep: %zu trial runs -> %s/results.csv (total estimator time %.1f s)\n",
                record.trials.size(), config.output_dir.c_str(), total);
    return 0;
}

int cmd_report(const std::string& results_path) {
    const std::string summary = summarize_results_csv(read_text_file(results_path));
    std::fputs(summary.c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse-spectrum design and reduced-rank range-profile estimation"};
    app.require_subcommand(1);

    CommonOpts design_opts, simulate_opts, estimate_opts, sweep_opts;
    std::string estimator = "rrmmse";
    bool timing = false;
    std::string results_path = "out/results.csv";

    add_common(app.add_subcommand("design", "greedy block-removal spectrum design"), design_opts);
    add_common(app.add_subcommand("simulate", "emit a scene and measurement"), simulate_opts);
    auto* est = app.add_subcommand("estimate", "run one estimator on a simulated measurement");
    add_common(est, estimate_opts);
    est->add_option("--estimator", estimator, "mf | mmse | rrmmse")
        ->check(CLI::IsMember({"mf", "mmse", "rrmmse"}));
    est->add_flag("--timing", timing, "include per-iteration wall times in estimate.json");
    add_common(app.add_subcommand("sweep", "Monte-Carlo grid over occupancy x rho"), sweep_opts);
    auto* rep = app.add_subcommand("report", "aggregate a results.csv into a summary table");
    rep->add_option("results", results_path, "path to results.csv");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("design")) return cmd_design(design_opts);
        if (app.got_subcommand("simulate")) return cmd_simulate(simulate_opts);
        if (app.got_subcommand("estimate")) return cmd_estimate(estimate_opts, estimator, timing);
        if (app.got_subcommand("sweep")) return cmd_sweep(sweep_opts);
        if (app.got_subcommand("report")) return cmd_report(results_path);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const sparspec::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const sparspec::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const sparspec::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
