#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace sparspec {

/// Uniformly spaced spectral-line grid. The grid spans bandwidth_hz() in
/// line_count steps of line_spacing_hz; the Nyquist line count
/// line_count / oversampling_factor is carried for reporting only.
struct FrequencyGrid {
    int line_count = 0;            // N
    double line_spacing_hz = 0.0;  // delta f
    int oversampling_factor = 1;
    double carrier_hz = 0.0;  // recorded, never enters the sensing matrix

    double bandwidth_hz() const { return line_count * line_spacing_hz; }
    int nyquist_count() const { return line_count / oversampling_factor; }
    /// Angular frequency of line n (baseband convention, omega = 2*pi*df*n).
    double omega(int n) const;

    void validate() const;
};

/// Uniform delay grid tau_m = m * timewidth_s / (bin_count - 1), m = 0..M-1.
struct RangeGrid {
    int bin_count = 0;       // M
    double timewidth_s = 0;  // T0, span of the delay axis

    double spacing() const { return bin_count > 1 ? timewidth_s / (bin_count - 1) : 0.0; }
    double delay(int m) const { return m * spacing(); }
    std::vector<double> delays() const;

    void validate() const;
};

/// Binary occupancy pattern over the line grid: which spectral lines are
/// preserved. Immutable after construction.
class SpectrumSupport {
public:
    /// `preserved` must be sorted-able, duplicate-free, all within [0, grid_size).
    SpectrumSupport(int grid_size, std::vector<int> preserved);

    static SpectrumSupport full(int grid_size);
    static SpectrumSupport from_mask(const std::vector<std::uint8_t>& mask);

    int grid_size() const { return grid_size_; }                       // N
    int preserved_count() const { return static_cast<int>(preserved_.size()); }  // K
    const std::vector<int>& preserved_indices() const { return preserved_; }
    std::vector<std::uint8_t> mask() const;
    bool contains(int line) const;

    /// Support with the index range [begin, end) removed.
    SpectrumSupport without_range(int begin, int end) const;

private:
    int grid_size_;
    std::vector<int> preserved_;  // sorted ascending
};

/// K x M steering matrix with unit-norm columns; entry (k, m) is
/// exp(j * omega_k * tau_m) / sqrt(K).
struct SensingMatrix {
    Eigen::MatrixXcd entries;          // K x M
    std::vector<double> frequencies;   // omega_k, rad/s
    bool normalized = false;

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }
};

inline constexpr std::size_t kDefaultMaxMatrixEntries = std::size_t{1} << 27;

/// Builds the sensing matrix for the preserved lines of `support`.
/// Throws ConfigError on an empty support or when K*M exceeds `max_entries`.
SensingMatrix build_sensing_matrix(const SpectrumSupport& support,
                                   const FrequencyGrid& grid,
                                   const RangeGrid& ranges,
                                   std::size_t max_entries = kDefaultMaxMatrixEntries);

/// Coarray c(l) = sum_n w_n w_{n+l} of a support mask, plus its holes.
struct Coarray {
    std::vector<long> values;     // c(0) .. c(N-1)
    std::vector<int> hole_lags;   // l >= 1 with c(l) == 0, over the whole grid

    /// Holes restricted to lags 1..span (span = largest preserved-index gap).
    std::vector<int> holes_within(int span) const;
};

Coarray compute_coarray(const SpectrumSupport& support);

/// Largest lag the support can cover: max(preserved) - min(preserved).
int support_span(const SpectrumSupport& support);

struct GramStats {
    double max_offdiag = 0.0;          // max |[H^H H]_{m,m'}|, m != m'
    double integrated_sidelobe = 0.0;  // mean per column of off-diagonal |.|^2
};

GramStats gram_offdiag_stats(const SensingMatrix& h);

}  // namespace sparspec
