#pragma once

#include <utility>
#include <vector>

#include "sparspec/bayes.hpp"
#include "sparspec/grid.hpp"

namespace sparspec {

/// Contiguous partition of the line grid [0, N) into blocks of `block_size`
/// lines; the final block may be short.
struct BlockPartition {
    int block_size = 0;
    std::vector<std::pair<int, int>> blocks;  // [begin, end) ranges

    static BlockPartition uniform(int grid_size, int block_size);
    /// ceil(0.0125 * N): 1.25% of the line count.
    static int default_block_size(int grid_size);

    void validate(int grid_size) const;
};

/// Outcome of a greedy block-removal design run.
struct MfiReport {
    std::vector<int> removal_order;     // block ids, in removal order
    std::vector<double> mfi_values;     // bound-trace increase per removal, >= 0
    std::vector<double> trace_history;  // [0] = full-support Tr(K_eps)/M, then after each removal
    double final_occupancy = 1.0;
};

/// Uniform prior and white noise used while evaluating the design objective.
/// The noise default keeps the objective in a balanced regime: with noise far
/// below the per-line information the objective saturates and the column
/// renormalization makes block removal look marginally beneficial.
struct DesignParams {
    double prior_variance = 5e3;
    double noise_variance = 3e4;

    void validate() const;
};

/// K / N.
double occupancy(const SpectrumSupport& support);

/// Bound-trace increase (1/M)[Tr K_eps(after) - Tr K_eps(before)] caused by
/// removing `block` from `current`. The block must lie inside the support.
double mfi_of_removal(const SpectrumSupport& current, std::pair<int, int> block,
                      const FrequencyGrid& grid, const RangeGrid& ranges,
                      const DesignParams& params = {});

/// Greedy design: starting from the full support, repeatedly removes the
/// block whose removal raises the bound trace least, until occupancy falls
/// to `target_occupancy` or below. Ties break to the lowest block id.
std::pair<SpectrumSupport, MfiReport> design_spectrum(const FrequencyGrid& grid,
                                                      const RangeGrid& ranges,
                                                      const BlockPartition& partition,
                                                      double target_occupancy,
                                                      const DesignParams& params = {});

/// Tr(K_eps)/M for a support under the design prior/noise, evaluated through
/// the K x K innovation form. Slow; serves as the agreement oracle for the
/// incremental evaluator used inside design_spectrum.
double design_trace_recompute(const SpectrumSupport& support, const FrequencyGrid& grid,
                              const RangeGrid& ranges, const DesignParams& params = {});

}  // namespace sparspec
