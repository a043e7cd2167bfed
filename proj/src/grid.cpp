#include "sparspec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sparspec/errors.hpp"

namespace sparspec {

double FrequencyGrid::omega(int n) const {
    return 2.0 * std::numbers::pi * line_spacing_hz * n;
}

void FrequencyGrid::validate() const {
    if (line_count < 1) throw ConfigError("frequency grid: line_count must be positive");
    if (!(line_spacing_hz > 0.0)) throw ConfigError("frequency grid: line_spacing_hz must be > 0");
    if (oversampling_factor < 1)
        throw ConfigError("frequency grid: oversampling_factor must be >= 1");
}

std::vector<double> RangeGrid::delays() const {
    std::vector<double> out(static_cast<std::size_t>(bin_count));
    for (int m = 0; m < bin_count; ++m) out[static_cast<std::size_t>(m)] = delay(m);
    return out;
}

void RangeGrid::validate() const {
    if (bin_count < 1) throw ConfigError("range grid: bin_count must be positive");
    if (!(timewidth_s > 0.0)) throw ConfigError("range grid: timewidth_s must be > 0");
}

SpectrumSupport::SpectrumSupport(int grid_size, std::vector<int> preserved)
    : grid_size_(grid_size), preserved_(std::move(preserved)) {
    if (grid_size_ < 1) throw ConfigError("support: grid size must be positive");
    std::sort(preserved_.begin(), preserved_.end());
    for (std::size_t i = 0; i < preserved_.size(); ++i) {
        const int n = preserved_[i];
        if (n < 0 || n >= grid_size_) throw ConfigError("support: preserved index out of range");
        if (i > 0 && preserved_[i - 1] == n) throw ConfigError("support: duplicate preserved index");
    }
}

SpectrumSupport SpectrumSupport::full(int grid_size) {
    std::vector<int> all(static_cast<std::size_t>(grid_size));
    for (int n = 0; n < grid_size; ++n) all[static_cast<std::size_t>(n)] = n;
    return SpectrumSupport(grid_size, std::move(all));
}

SpectrumSupport SpectrumSupport::from_mask(const std::vector<std::uint8_t>& mask) {
    std::vector<int> preserved;
    for (std::size_t n = 0; n < mask.size(); ++n)
        if (mask[n]) preserved.push_back(static_cast<int>(n));
    return SpectrumSupport(static_cast<int>(mask.size()), std::move(preserved));
}

std::vector<std::uint8_t> SpectrumSupport::mask() const {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(grid_size_), 0);
    for (int n : preserved_) m[static_cast<std::size_t>(n)] = 1;
    return m;
}

bool SpectrumSupport::contains(int line) const {
    return std::binary_search(preserved_.begin(), preserved_.end(), line);
}

SpectrumSupport SpectrumSupport::without_range(int begin, int end) const {
    std::vector<int> kept;
    kept.reserve(preserved_.size());
    for (int n : preserved_)
        if (n < begin || n >= end) kept.push_back(n);
    return SpectrumSupport(grid_size_, std::move(kept));
}

SensingMatrix build_sensing_matrix(const SpectrumSupport& support, const FrequencyGrid& grid,
                                   const RangeGrid& ranges, std::size_t max_entries) {
    grid.validate();
    ranges.validate();
    if (support.grid_size() != grid.line_count)
        throw ConfigError("sensing matrix: support and frequency grid sizes differ");
    const int k = support.preserved_count();
    const int m = ranges.bin_count;
    if (k < 1) throw ConfigError("empty spectrum");
    if (static_cast<std::size_t>(k) * static_cast<std::size_t>(m) > max_entries)
        throw ConfigError("sensing matrix: K*M exceeds the configured memory budget");

    SensingMatrix out;
    out.entries.resize(k, m);
    out.frequencies.reserve(static_cast<std::size_t>(k));
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (int row = 0; row < k; ++row) {
        const double w = grid.omega(support.preserved_indices()[static_cast<std::size_t>(row)]);
        out.frequencies.push_back(w);
        for (int col = 0; col < m; ++col)
            out.entries(row, col) = std::polar(scale, w * ranges.delay(col));
    }
    out.normalized = true;
    return out;
}

Coarray compute_coarray(const SpectrumSupport& support) {
    const auto mask = support.mask();
    const int n = support.grid_size();
    Coarray out;
    out.values.assign(static_cast<std::size_t>(n), 0);
    for (int lag = 0; lag < n; ++lag) {
        long c = 0;
        for (int i = 0; i + lag < n; ++i)
            c += static_cast<long>(mask[static_cast<std::size_t>(i)]) *
                 static_cast<long>(mask[static_cast<std::size_t>(i + lag)]);
        out.values[static_cast<std::size_t>(lag)] = c;
    }
    for (int lag = 1; lag < n; ++lag)
        if (out.values[static_cast<std::size_t>(lag)] == 0) out.hole_lags.push_back(lag);
    return out;
}

std::vector<int> Coarray::holes_within(int span) const {
    std::vector<int> out;
    for (int lag : hole_lags)
        if (lag <= span) out.push_back(lag);
    return out;
}

int support_span(const SpectrumSupport& support) {
    const auto& idx = support.preserved_indices();
    if (idx.empty()) return 0;
    return idx.back() - idx.front();
}

GramStats gram_offdiag_stats(const SensingMatrix& h) {
    const int m = h.cols();
    GramStats stats;
    if (m <= 1) return stats;
    const Eigen::MatrixXcd gram = h.entries.adjoint() * h.entries;
    double sum_sq = 0.0;
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            if (a == b) continue;
            const double mag = std::abs(gram(a, b));
            stats.max_offdiag = std::max(stats.max_offdiag, mag);
            sum_sq += mag * mag;
        }
    }
    stats.integrated_sidelobe = sum_sq / m;
    return stats;
}

}  // namespace sparspec
