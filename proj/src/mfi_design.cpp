#include "sparspec/mfi_design.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "sparspec/errors.hpp"

namespace sparspec {

namespace {

/// Incremental evaluator of Tr(K_eps)/M over supports of one geometry.
///
/// Works on the unnormalized line Gram G_raw = sum_{n in S} a_n a_n^H with
/// a_n[m] = exp(j w_n tau_m); column renormalization by 1/sqrt(K) makes
/// H^H H = G_raw / K exactly, so removing a block is a subtraction plus a
/// change of K. The trace is evaluated through the M x M information form,
/// which is algebraically identical to the K x K form (tests pin the
/// agreement against design_trace_recompute).
class DesignObjective {
public:
    DesignObjective(const FrequencyGrid& grid, const RangeGrid& ranges,
                    const BlockPartition& partition, const DesignParams& params)
        : params_(params), bins_(ranges.bin_count) {
        const int n = grid.line_count;
        block_grams_.reserve(partition.blocks.size());
        graw_ = Eigen::MatrixXcd::Zero(bins_, bins_);
        Eigen::VectorXcd a(bins_);
        for (const auto& [begin, end] : partition.blocks) {
            Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(bins_, bins_);
            for (int line = begin; line < end && line < n; ++line) {
                const double w = grid.omega(line);
                for (int m = 0; m < bins_; ++m) a(m) = std::polar(1.0, w * ranges.delay(m));
                g.noalias() += a * a.adjoint();
            }
            graw_ += g;
            block_grams_.push_back(std::move(g));
        }
    }

    /// Tr(K_eps)/M for the current support minus `block_id` (k_removed lines).
    double trace_without(int block_id, int k_current, int k_removed) const {
        return trace_of(graw_ - block_grams_[static_cast<std::size_t>(block_id)],
                        k_current - k_removed);
    }

    double trace_current(int k_current) const { return trace_of(graw_, k_current); }

    void commit_removal(int block_id) {
        graw_ -= block_grams_[static_cast<std::size_t>(block_id)];
    }

private:
    double trace_of(const Eigen::MatrixXcd& graw, int k) const {
        Eigen::MatrixXcd info = graw / (static_cast<double>(k) * params_.noise_variance);
        info.diagonal().array() += 1.0 / params_.prior_variance;
        const Eigen::MatrixXcd cov =
            info.llt().solve(Eigen::MatrixXcd::Identity(bins_, bins_));
        return cov.real().trace() / bins_;
    }

    DesignParams params_;
    int bins_;
    Eigen::MatrixXcd graw_;
    std::vector<Eigen::MatrixXcd> block_grams_;
};

int lines_in_block(const SpectrumSupport& support, std::pair<int, int> block) {
    int count = 0;
    for (int n : support.preserved_indices())
        if (n >= block.first && n < block.second) ++count;
    return count;
}

}  // namespace

BlockPartition BlockPartition::uniform(int grid_size, int block_size) {
    if (block_size < 1) throw ConfigError("partition: block_size must be positive");
    BlockPartition p;
    p.block_size = block_size;
    for (int begin = 0; begin < grid_size; begin += block_size)
        p.blocks.emplace_back(begin, std::min(begin + block_size, grid_size));
    return p;
}

int BlockPartition::default_block_size(int grid_size) {
    return static_cast<int>(std::ceil(0.0125 * grid_size));
}

void BlockPartition::validate(int grid_size) const {
    if (block_size < 1) throw ConfigError("partition: block_size must be positive");
    int expected_begin = 0;
    for (const auto& [begin, end] : blocks) {
        if (begin != expected_begin || end <= begin)
            throw ConfigError("partition: blocks must be disjoint and cover the grid");
        expected_begin = end;
    }
    if (expected_begin != grid_size) throw ConfigError("partition: blocks must cover the grid");
}

void DesignParams::validate() const {
    if (!(prior_variance > 0.0)) throw ConfigError("design: prior_variance must be > 0");
    if (!(noise_variance > 0.0)) throw ConfigError("design: noise_variance must be > 0");
}

double occupancy(const SpectrumSupport& support) {
    return static_cast<double>(support.preserved_count()) / support.grid_size();
}

double design_trace_recompute(const SpectrumSupport& support, const FrequencyGrid& grid,
                              const RangeGrid& ranges, const DesignParams& params) {
    params.validate();
    const SensingMatrix h = build_sensing_matrix(support, grid, ranges);
    const auto prior = DiagonalPrior::uniform(ranges.bin_count, params.prior_variance);
    const NoiseModel noise{params.noise_variance};
    const InnovationFactor factor(h.entries, prior.variances, noise.variance);
    const Eigen::VectorXd q = factor.quadratic_forms(h.entries);
    const Eigen::VectorXd diag =
        prior.variances.array() - prior.variances.array().square() * q.array();
    return diag.mean();
}

double mfi_of_removal(const SpectrumSupport& current, std::pair<int, int> block,
                      const FrequencyGrid& grid, const RangeGrid& ranges,
                      const DesignParams& params) {
    params.validate();
    grid.validate();
    ranges.validate();
    const int in_block = lines_in_block(current, block);
    const int block_width = std::min(block.second, grid.line_count) - block.first;
    if (block_width <= 0 || in_block != block_width)
        throw ConfigError("mfi: block is not contained in the current support");
    if (current.preserved_count() - in_block < 1)
        throw ConfigError("mfi: removal would empty the spectrum");

    const SpectrumSupport after = current.without_range(block.first, block.second);
    const double before = design_trace_recompute(current, grid, ranges, params);
    const double after_trace = design_trace_recompute(after, grid, ranges, params);
    return after_trace - before;
}

std::pair<SpectrumSupport, MfiReport> design_spectrum(const FrequencyGrid& grid,
                                                      const RangeGrid& ranges,
                                                      const BlockPartition& partition,
                                                      double target_occupancy,
                                                      const DesignParams& params) {
    params.validate();
    grid.validate();
    ranges.validate();
    partition.validate(grid.line_count);
    if (!(target_occupancy > 0.0) || target_occupancy > 1.0)
        throw ConfigError("design: target_occupancy must lie in (0, 1]");

    const int n = grid.line_count;
    const int num_blocks = static_cast<int>(partition.blocks.size());
    DesignObjective objective(grid, ranges, partition, params);

    std::vector<std::uint8_t> removed(static_cast<std::size_t>(num_blocks), 0);
    int k = n;
    MfiReport report;
    double current_trace = objective.trace_current(k);
    report.trace_history.push_back(current_trace);

    // Mirror-symmetric blocks tie in exact arithmetic; the tie-break to the
    // lowest block id therefore applies within a tight relative band of the
    // minimum rather than on raw float comparison.
    constexpr double kTieRtol = 1e-7;
    while (static_cast<double>(k) / n > target_occupancy) {
        std::vector<std::pair<int, double>> evaluated;
        int candidates = 0;
        for (int b = 0; b < num_blocks; ++b) {
            if (removed[static_cast<std::size_t>(b)]) continue;
            ++candidates;
            const auto [begin, end] = partition.blocks[static_cast<std::size_t>(b)];
            const int width = end - begin;
            if (k - width < 1) continue;
            evaluated.emplace_back(b, objective.trace_without(b, k, width));
        }
        if (evaluated.empty()) {
            if (candidates <= 1)
                throw ConfigError("design: target_occupancy below a single block");
            throw ConfigError("design: no removable block");
        }
        double min_trace = evaluated.front().second;
        for (const auto& [b, t] : evaluated) min_trace = std::min(min_trace, t);
        int best_block = -1;
        double best_trace = 0.0;
        for (const auto& [b, t] : evaluated) {
            if (t <= min_trace + kTieRtol * std::abs(min_trace)) {
                best_block = b;
                best_trace = t;
                break;
            }
        }
        const int best_width =
            partition.blocks[static_cast<std::size_t>(best_block)].second -
            partition.blocks[static_cast<std::size_t>(best_block)].first;
        report.removal_order.push_back(best_block);
        report.mfi_values.push_back(best_trace - current_trace);
        report.trace_history.push_back(best_trace);
        objective.commit_removal(best_block);
        removed[static_cast<std::size_t>(best_block)] = 1;
        k -= best_width;
        current_trace = best_trace;
    }

    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 1);
    for (int b = 0; b < num_blocks; ++b) {
        if (!removed[static_cast<std::size_t>(b)]) continue;
        const auto [begin, end] = partition.blocks[static_cast<std::size_t>(b)];
        for (int line = begin; line < end; ++line) mask[static_cast<std::size_t>(line)] = 0;
    }
    SpectrumSupport support = SpectrumSupport::from_mask(mask);
    report.final_occupancy = occupancy(support);
    return {std::move(support), std::move(report)};
}

}  // namespace sparspec
