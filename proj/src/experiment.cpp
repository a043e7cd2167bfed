#include "sparspec/experiment.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "sparspec/errors.hpp"
#include "sparspec/rng.hpp"

namespace sparspec {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string power_db_cell(double power) {
    if (!(power > 0.0)) return "";  // -inf sentinel: empty cell
    return format_double(10.0 * std::log10(power));
}

NoiseReference noise_reference_from_string(const std::string& s) {
    if (s == "per-spectrum") return NoiseReference::kPerSpectrum;
    if (s == "full-spectrum-baseline") return NoiseReference::kFullSpectrumBaseline;
    throw ConfigError("noise.reference: expected \"per-spectrum\" or \"full-spectrum-baseline\"");
}

std::string to_string(NoiseReference r) {
    return r == NoiseReference::kPerSpectrum ? "per-spectrum" : "full-spectrum-baseline";
}

SolverPath solver_path_from_string(const std::string& s) {
    if (s == "direct") return SolverPath::kDirect;
    if (s == "cached") return SolverPath::kCached;
    throw ConfigError("estimator.solver: expected \"direct\" or \"cached\"");
}

std::string to_string(SolverPath p) { return p == SolverPath::kDirect ? "direct" : "cached"; }

}  // namespace

int GeometryConfig::nyquist_count() const {
    return static_cast<int>(std::lround(2.0 * bandwidth_hz * timewidth_s));
}

FrequencyGrid GeometryConfig::frequency_grid() const {
    FrequencyGrid g;
    g.line_count = line_count();
    g.line_spacing_hz = bandwidth_hz / g.line_count;
    g.oversampling_factor = oversampling;
    g.carrier_hz = carrier_hz;
    return g;
}

RangeGrid GeometryConfig::range_grid() const { return {range_bins(), timewidth_s}; }

void GeometryConfig::validate() const {
    if (!(bandwidth_hz > 0.0)) throw ConfigError("geometry.bandwidth_hz must be > 0");
    if (!(timewidth_s > 0.0)) throw ConfigError("geometry.timewidth_s must be > 0");
    if (oversampling < 1) throw ConfigError("geometry.oversampling must be >= 1");
    if (nyquist_count() < 1) throw ConfigError("geometry: 2*B*T0 rounds below one Nyquist sample");
}

void ExperimentConfig::validate() const {
    geometry.validate();
    if (occupancies.empty()) throw ConfigError("spectrum.occupancies must not be empty");
    for (double occ : occupancies)
        if (!(occ > 0.0) || occ > 1.0)
            throw ConfigError("spectrum.occupancies entries must lie in (0, 1]");
    if (!(block_fraction > 0.0) || block_fraction > 1.0)
        throw ConfigError("spectrum.block_fraction must lie in (0, 1]");
    design.validate();
    if (target_occupancies.empty()) throw ConfigError("scene.target_occupancies must not be empty");
    for (double rho : target_occupancies)
        if (rho < 0.0 || rho > 1.0)
            throw ConfigError("scene.target_occupancies entries must lie in [0, 1]");
    if (!(magnitude_low_db < magnitude_high_db))
        throw ConfigError("scene.magnitude_db: low bound must be below high bound");
    estimator.validate();
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
    ExperimentConfig c;
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        c.geometry.bandwidth_hz = g.value("bandwidth_hz", c.geometry.bandwidth_hz);
        c.geometry.timewidth_s = g.value("timewidth_s", c.geometry.timewidth_s);
        c.geometry.oversampling = g.value("oversampling", c.geometry.oversampling);
        c.geometry.carrier_hz = g.value("carrier_hz", c.geometry.carrier_hz);
    }
    if (j.contains("spectrum")) {
        const auto& s = j.at("spectrum");
        if (s.contains("occupancies"))
            c.occupancies = s.at("occupancies").get<std::vector<double>>();
        c.block_fraction = s.value("block_fraction", c.block_fraction);
        c.design.prior_variance = s.value("design_prior_variance", c.design.prior_variance);
        c.design.noise_variance = s.value("design_noise_variance", c.design.noise_variance);
        if (s.contains("support_file")) c.support_file = s.at("support_file").get<std::string>();
    }
    if (j.contains("scene")) {
        const auto& s = j.at("scene");
        if (s.contains("target_occupancies"))
            c.target_occupancies = s.at("target_occupancies").get<std::vector<double>>();
        if (s.contains("magnitude_db")) {
            const auto range = s.at("magnitude_db").get<std::vector<double>>();
            if (range.size() != 2) throw ConfigError("scene.magnitude_db must be [low, high]");
            c.magnitude_low_db = range[0];
            c.magnitude_high_db = range[1];
        }
        if (s.contains("eligible_bins"))
            c.eligible_bins = s.at("eligible_bins").get<std::vector<int>>();
    }
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        c.snr_db = n.value("snr_db", c.snr_db);
        if (n.contains("reference"))
            c.noise_reference = noise_reference_from_string(n.at("reference").get<std::string>());
        c.noise_floor = n.value("floor", c.noise_floor);
    }
    if (j.contains("estimator")) {
        const auto& e = j.at("estimator");
        c.estimator.prior_variance = e.value("prior_variance", c.estimator.prior_variance);
        c.estimator.tolerance = e.value("tolerance", c.estimator.tolerance);
        c.estimator.max_iterations = e.value("max_iterations", c.estimator.max_iterations);
        if (e.contains("solver"))
            c.solver_path = solver_path_from_string(e.at("solver").get<std::string>());
        c.detection_floor_db = e.value("detection_floor_db", c.detection_floor_db);
        if (e.contains("run_mmse_baseline"))
            c.run_mmse_baseline = e.at("run_mmse_baseline").get<bool>();
    }
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    if (j.contains("output")) {
        const auto& o = j.at("output");
        c.output_dir = o.value("dir", c.output_dir);
        c.profile_tables = o.value("profile_tables", c.profile_tables);
    }
    c.validate();
    return c;
}

Json ExperimentConfig::to_json() const {
    Json j;
    j["geometry"] = {{"bandwidth_hz", geometry.bandwidth_hz},
                     {"timewidth_s", geometry.timewidth_s},
                     {"oversampling", geometry.oversampling},
                     {"carrier_hz", geometry.carrier_hz},
                     {"derived_line_count", geometry.line_count()},
                     {"derived_range_bins", geometry.range_bins()}};
    j["spectrum"] = {{"occupancies", occupancies},
                     {"block_fraction", block_fraction},
                     {"design_prior_variance", design.prior_variance},
                     {"design_noise_variance", design.noise_variance}};
    if (support_file) j["spectrum"]["support_file"] = *support_file;
    j["scene"] = {{"target_occupancies", target_occupancies},
                  {"magnitude_db", std::vector<double>{magnitude_low_db, magnitude_high_db}}};
    if (!eligible_bins.empty()) j["scene"]["eligible_bins"] = eligible_bins;
    j["noise"] = {{"snr_db", snr_db},
                  {"reference", to_string(noise_reference)},
                  {"floor", noise_floor}};
    j["estimator"] = {{"prior_variance", estimator.prior_variance},
                      {"tolerance", estimator.tolerance},
                      {"max_iterations", estimator.max_iterations},
                      {"solver", to_string(solver_path)},
                      {"detection_floor_db", detection_floor_db}};
    if (run_mmse_baseline) j["estimator"]["run_mmse_baseline"] = *run_mmse_baseline;
    j["trials"] = trials;
    j["seed"] = seed;
    j["output"] = {{"dir", output_dir}, {"profile_tables", profile_tables}};
    return j;
}

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate a;
    if (values.empty()) return a;
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    return a;
}

std::vector<double> ExperimentRecord::collect(double occupancy, double rho,
                                              double TrialResult::*field) const {
    std::vector<double> out;
    for (const auto& t : trials)
        if (std::abs(t.occupancy - occupancy) < 1e-12 && std::abs(t.rho - rho) < 1e-12)
            out.push_back(t.*field);
    return out;
}

namespace {

struct SpectrumCase {
    double requested_occupancy = 1.0;
    SpectrumSupport support;
    SensingMatrix h;
};

std::vector<SpectrumCase> prepare_spectra(const ExperimentConfig& config) {
    const FrequencyGrid fgrid = config.geometry.frequency_grid();
    const RangeGrid rgrid = config.geometry.range_grid();
    std::vector<SpectrumCase> cases;
    if (config.support_file) {
        SpectrumSupport support = support_from_json(read_json_file(*config.support_file));
        if (support.grid_size() != fgrid.line_count)
            throw ConfigError("support_file grid size does not match the configured geometry");
        SensingMatrix h = build_sensing_matrix(support, fgrid, rgrid);
        cases.push_back({occupancy(support), std::move(support), std::move(h)});
        return cases;
    }
    const int block =
        static_cast<int>(std::ceil(config.block_fraction * fgrid.line_count));
    const BlockPartition partition = BlockPartition::uniform(fgrid.line_count, block);
    for (double occ : config.occupancies) {
        SpectrumSupport support = occ >= 1.0
                                      ? SpectrumSupport::full(fgrid.line_count)
                                      : design_spectrum(fgrid, rgrid, partition, occ,
                                                        config.design)
                                            .first;
        SensingMatrix h = build_sensing_matrix(support, fgrid, rgrid);
        cases.push_back({occ, std::move(support), std::move(h)});
    }
    return cases;
}

}  // namespace

ExperimentRecord run_experiment(const ExperimentConfig& config) {
    config.validate();
    const RangeGrid rgrid = config.geometry.range_grid();
    const int m = rgrid.bin_count;
    const bool mmse_baseline = config.run_mmse_baseline.value_or(m <= 256);

    const std::vector<SpectrumCase> spectra = prepare_spectra(config);
    // Baseline-noise mode calibrates sigma_n^2 on the full spectrum.
    std::optional<SensingMatrix> h_full;
    if (config.noise_reference == NoiseReference::kFullSpectrumBaseline) {
        const FrequencyGrid fgrid = config.geometry.frequency_grid();
        h_full = build_sensing_matrix(SpectrumSupport::full(fgrid.line_count), fgrid, rgrid);
    }

    ExperimentRecord record{config, {}};
    const Rng master(config.seed);

    for (double rho : config.target_occupancies) {
        for (int trial = 0; trial < config.trials; ++trial) {
            // One scene per (rho, trial), shared across spectra so occupancy
            // comparisons are paired.
            const std::uint64_t rho_key =
                static_cast<std::uint64_t>(std::llround(rho * 1e6));
            const Rng trial_rng = master.derive(rho_key).derive(static_cast<std::uint64_t>(trial));
            SceneConfig scene_cfg;
            scene_cfg.target_occupancy = rho;
            scene_cfg.magnitude_low_db = config.magnitude_low_db;
            scene_cfg.magnitude_high_db = config.magnitude_high_db;
            scene_cfg.eligible_bins = config.eligible_bins;
            scene_cfg.rng_seed = trial_rng.derive(1).next_u64();
            const Scene scene = generate_scene(scene_cfg, rgrid);

            std::optional<NoiseModel> shared_noise;
            if (h_full) {
                const double signal_power =
                    (h_full->entries * scene.gamma).squaredNorm() / h_full->rows();
                double variance = signal_power / std::pow(10.0, config.snr_db / 10.0);
                if (!(variance > 0.0)) variance = config.noise_floor;
                shared_noise = NoiseModel{variance};
            }

            for (std::size_t s = 0; s < spectra.size(); ++s) {
                const auto& spec = spectra[s];
                const std::uint64_t noise_seed = trial_rng.derive(100 + s).next_u64();
                const SimulatedMeasurement sim =
                    shared_noise ? simulate_measurement_with_noise(spec.h, scene, *shared_noise,
                                                                   noise_seed)
                                 : simulate_measurement(spec.h, scene, config.snr_db, noise_seed,
                                                        config.noise_floor);

                TrialResult tr;
                tr.trial = trial;
                tr.occupancy = spec.requested_occupancy;
                tr.rho = rho;
                tr.scene_seed = scene_cfg.rng_seed;
                tr.scatterers = scene.scatterer_count();
                tr.noise_variance = sim.noise.variance;

                const Eigen::VectorXcd mf = matched_filter(spec.h, sim.values);
                tr.mf_mse_gt = mse_ground_truth(scene.gamma, mf);

                if (mmse_baseline) {
                    const auto prior =
                        DiagonalPrior::uniform(m, config.estimator.prior_variance);
                    const PosteriorSummary one_step =
                        mmse_estimate(spec.h.entries, prior, sim.noise, sim.values);
                    tr.mmse_mse_gt = mse_ground_truth(scene.gamma, one_step.estimate);
                    tr.mmse_mse_ke = one_step.trace_over_m;
                }

                const double t0 = now_seconds();
                const EstimationResult est = run_rrmmse(spec.h.entries, sim.values, sim.noise,
                                                        config.estimator, config.solver_path);
                tr.seconds = now_seconds() - t0;
                tr.iterations = static_cast<int>(est.trace_history.size());
                tr.termination = to_string(est.termination);
                tr.rank_warning = est.rank_warning;
                tr.mse_ke = est.trace_history.back().trace_over_m;
                tr.mse_gt = mse_ground_truth(scene.gamma, est.estimate);
                const SupportMetrics sm =
                    support_metrics(scene.true_support, est.support.insertion_order(),
                                    scene.gamma, config.detection_floor_db);
                tr.precision = sm.precision;
                tr.recall = sm.recall;
                record.trials.push_back(tr);

                if (config.profile_tables) {
                    std::ostringstream name;
                    name << config.output_dir << "/profile_occ" << spec.requested_occupancy
                         << "_rho" << rho << "_t" << trial << ".csv";
                    emit_profile_table(scene, mf, est, rgrid, name.str());
                }
            }
        }
    }

    // results.csv: one row per (rho, trial, occupancy); no timing fields so
    // reruns are byte-identical.
    CsvWriter csv({"trial", "occupancy", "rho", "scene_seed", "scatterers", "noise_variance",
                   "iterations", "termination", "rank_warning", "mse_ke", "mse_gt", "mf_mse_gt",
                   "mmse_mse_gt", "mmse_mse_ke", "precision", "recall"});
    for (const auto& t : record.trials) {
        csv.add_row({CsvWriter::cell(t.trial), CsvWriter::cell(t.occupancy),
                     CsvWriter::cell(t.rho), CsvWriter::cell(t.scene_seed),
                     CsvWriter::cell(t.scatterers), CsvWriter::cell(t.noise_variance),
                     CsvWriter::cell(t.iterations), t.termination,
                     t.rank_warning ? "1" : "0", CsvWriter::cell(t.mse_ke),
                     CsvWriter::cell(t.mse_gt), CsvWriter::cell(t.mf_mse_gt),
                     std::isnan(t.mmse_mse_gt) ? "" : CsvWriter::cell(t.mmse_mse_gt),
                     std::isnan(t.mmse_mse_ke) ? "" : CsvWriter::cell(t.mmse_mse_ke),
                     CsvWriter::cell(t.precision), CsvWriter::cell(t.recall)});
    }
    csv.write(config.output_dir + "/results.csv");

    Json summary;
    summary["config"] = config.to_json();
    Json cells = Json::array();
    for (const auto& spec : spectra) {
        for (double rho : config.target_occupancies) {
            Json cell;
            cell["occupancy"] = spec.requested_occupancy;
            cell["actual_occupancy"] = occupancy(spec.support);
            cell["preserved"] = spec.support.preserved_count();
            cell["rho"] = rho;
            const std::pair<const char*, double TrialResult::*> metrics[] = {
                {"mse_ke", &TrialResult::mse_ke},       {"mse_gt", &TrialResult::mse_gt},
                {"mf_mse_gt", &TrialResult::mf_mse_gt}, {"precision", &TrialResult::precision},
                {"recall", &TrialResult::recall}};
            for (const auto& [name, field] : metrics) {
                const Aggregate a = aggregate(record.collect(spec.requested_occupancy, rho, field));
                cell[name] = {{"mean", a.mean}, {"stddev", a.stddev}};
            }
            int plateaus = 0;
            int count = 0;
            for (const auto& t : record.trials)
                if (std::abs(t.occupancy - spec.requested_occupancy) < 1e-12 &&
                    std::abs(t.rho - rho) < 1e-12) {
                    ++count;
                    if (t.termination == "plateau") ++plateaus;
                }
            cell["trials"] = count;
            cell["plateau_terminations"] = plateaus;
            cells.push_back(cell);
        }
    }
    summary["cells"] = cells;
    write_text_file(config.output_dir + "/summary.json", summary.dump(2) + "\n");
    return record;
}

void emit_profile_table(const Scene& scene, const Eigen::VectorXcd& matched,
                        const EstimationResult& result, const RangeGrid& ranges,
                        const std::string& path) {
    const auto m = scene.gamma.size();
    if (matched.size() != m || result.estimate.size() != m ||
        ranges.bin_count != static_cast<int>(m))
        throw ConfigError("profile table: inconsistent lengths");
    CsvWriter csv({"bin", "delay_s", "true_power_db", "matched_power_db", "estimate_power_db",
                   "posterior_variance", "in_support"});
    for (Eigen::Index i = 0; i < m; ++i) {
        const int bin = static_cast<int>(i);
        csv.add_row({CsvWriter::cell(bin + 1), CsvWriter::cell(ranges.delay(bin)),
                     power_db_cell(std::norm(scene.gamma(i))),
                     power_db_cell(std::norm(matched(i))),
                     power_db_cell(std::norm(result.estimate(i))),
                     CsvWriter::cell(result.posterior_variance_diag(i)),
                     result.support.contains(bin) ? "1" : "0"});
    }
    csv.write(path);
}

std::string summarize_results_csv(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("report: empty results csv");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw ConfigError("report: missing column " + name);
    };
    const int c_occ = column("occupancy");
    const int c_rho = column("rho");
    const int c_mse_ke = column("mse_ke");
    const int c_mse_gt = column("mse_gt");
    const int c_term = column("termination");

    std::map<std::pair<std::string, std::string>,
             std::tuple<std::vector<double>, std::vector<double>, int, int>>
        cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::istringstream rs(line);
        std::string cell;
        while (std::getline(rs, cell, ',')) row.push_back(cell);
        if (row.size() < header.size()) row.resize(header.size());
        auto& [ke, gt, n, plateaus] = cells[{row[static_cast<std::size_t>(c_occ)],
                                             row[static_cast<std::size_t>(c_rho)]}];
        ke.push_back(std::stod(row[static_cast<std::size_t>(c_mse_ke)]));
        gt.push_back(std::stod(row[static_cast<std::size_t>(c_mse_gt)]));
        ++n;
        if (row[static_cast<std::size_t>(c_term)] == "plateau") ++plateaus;
    }

    std::ostringstream out;
    out << "occupancy,rho,trials,plateau_terminations,mean_mse_ke,mean_mse_gt,mean_mse_gt_db\n";
    for (const auto& [key, value] : cells) {
        const auto& [ke, gt, n, plateaus] = value;
        const Aggregate ake = aggregate(ke);
        const Aggregate agt = aggregate(gt);
        out << key.first << ',' << key.second << ',' << n << ',' << plateaus << ','
            << format_double(ake.mean) << ',' << format_double(agt.mean) << ','
            << format_double(10.0 * std::log10(agt.mean)) << '\n';
    }
    return out.str();
}

}  // namespace sparspec
