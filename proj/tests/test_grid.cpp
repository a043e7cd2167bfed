#include <doctest.h>

#include <cmath>
#include <complex>

#include "sparspec/errors.hpp"
#include "sparspec/experiment.hpp"
#include "sparspec/grid.hpp"
#include "support/oracles.hpp"

using namespace sparspec;
namespace tst = sparspec::testing;

namespace {

/// Square critically sampled DFT geometry: N = K = M, df * dtau = 1 / M.
SensingMatrix dft_matrix(int m) {
    FrequencyGrid grid{m, 100.0, 1, 0.0};
    // dtau = 1 / (M * df) -> timewidth = (M-1) / (M * df)
    RangeGrid ranges{m, (m - 1) / (m * grid.line_spacing_hz)};
    return build_sensing_matrix(SpectrumSupport::full(m), grid, ranges);
}

}  // namespace

TEST_CASE("single zero-frequency line gives an all-ones matrix") {
    FrequencyGrid grid{16, 25.0, 1, 0.0};
    RangeGrid ranges{5, 1e-3};
    const SensingMatrix h = build_sensing_matrix(SpectrumSupport(16, {0}), grid, ranges);
    REQUIRE(h.rows() == 1);
    REQUIRE(h.cols() == 5);
    for (int m = 0; m < 5; ++m) {
        CHECK(h.entries(0, m).real() == 1.0);
        CHECK(h.entries(0, m).imag() == 0.0);
    }
}

TEST_CASE("critically sampled DFT geometry has an identity Gram") {
    const SensingMatrix h = dft_matrix(8);
    // brute-force Gram as the oracle
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(8, 8);
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
            for (int k = 0; k < 8; ++k) gram(a, b) += std::conj(h.entries(k, a)) * h.entries(k, b);
    CHECK((gram - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("paper geometry yields 401 range bins") {
    const GeometryConfig paper = GeometryConfig::paper();
    CHECK(paper.range_bins() == 401);
    CHECK(paper.line_count() == 4000);
    const SensingMatrix h = build_sensing_matrix(
        SpectrumSupport::full(4000), paper.frequency_grid(), paper.range_grid());
    CHECK(h.cols() == 401);
    CHECK(h.rows() == 4000);
}

TEST_CASE("columns are unit norm on random geometries") {
    Rng rng(23);
    for (int i = 0; i < 10; ++i) {
        const SensingMatrix h = tst::random_sensing_matrix(rng, 12, 9);
        for (int m = 0; m < h.cols(); ++m)
            CHECK(std::abs(h.entries.col(m).norm() - 1.0) < 1e-12);
        CHECK(h.normalized);
    }
}

TEST_CASE("empty support and memory budget are rejected") {
    FrequencyGrid grid{16, 25.0, 1, 0.0};
    RangeGrid ranges{5, 1e-3};
    CHECK_THROWS_WITH_AS(build_sensing_matrix(SpectrumSupport(16, {}), grid, ranges),
                         "empty spectrum", ConfigError);
    CHECK_THROWS_AS(build_sensing_matrix(SpectrumSupport::full(16), grid, ranges, 32),
                    ConfigError);
}

TEST_CASE("support validation") {
    CHECK_THROWS_AS(SpectrumSupport(4, {0, 0}), ConfigError);
    CHECK_THROWS_AS(SpectrumSupport(4, {4}), ConfigError);
    CHECK_THROWS_AS(SpectrumSupport(4, {-1}), ConfigError);
    const SpectrumSupport s(6, {5, 1, 3});
    CHECK(s.preserved_indices() == std::vector<int>{1, 3, 5});
    CHECK(s.contains(3));
    CHECK_FALSE(s.contains(2));
    const SpectrumSupport cut = s.without_range(2, 4);
    CHECK(cut.preserved_indices() == std::vector<int>{1, 5});
}

TEST_CASE("full mask coarray is triangular with no holes") {
    const Coarray c = compute_coarray(SpectrumSupport::full(5));
    CHECK(c.values == std::vector<long>{5, 4, 3, 2, 1});
    CHECK(c.hole_lags.empty());
}

TEST_CASE("single-element coarray is zero beyond lag zero") {
    const Coarray c = compute_coarray(SpectrumSupport(4, {2}));
    CHECK(c.values[0] == 1);
    for (std::size_t lag = 1; lag < 4; ++lag) CHECK(c.values[lag] == 0);
    CHECK(c.hole_lags == std::vector<int>{1, 2, 3});
}

TEST_CASE("coarray matches pairwise-difference counting on all masks up to N=20") {
    for (int n = 1; n <= 20; ++n) {
        for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
            std::vector<std::uint8_t> mask(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) mask[static_cast<std::size_t>(i)] = (bits >> i) & 1u;
            const SpectrumSupport support = SpectrumSupport::from_mask(mask);
            const Coarray c = compute_coarray(support);
            REQUIRE(c.values == tst::coarray_by_differences(support));
            REQUIRE(c.values[0] == support.preserved_count());
        }
    }
}

TEST_CASE("gram stats are zero for orthonormal and single-column matrices") {
    const GramStats orth = gram_offdiag_stats(dft_matrix(8));
    CHECK(orth.max_offdiag < 1e-10);
    CHECK(orth.integrated_sidelobe < 1e-20);

    FrequencyGrid grid{16, 25.0, 1, 0.0};
    RangeGrid ranges{1, 1e-3};
    const SensingMatrix single =
        build_sensing_matrix(SpectrumSupport(16, {0, 3, 7}), grid, ranges);
    const GramStats s = gram_offdiag_stats(single);
    CHECK(s.max_offdiag == 0.0);
    CHECK(s.integrated_sidelobe == 0.0);
}

TEST_CASE("sparser designed spectra leak more off-diagonal energy") {
    // The peak off-diagonal can be pinned by the bin-grid correlation (and
    // at desk scale it is), so the ordered quantity is the leaked energy.
    const auto [grid, ranges] = tst::toy_geometry(160, 20, 1.0);
    const BlockPartition partition = BlockPartition::uniform(160, 2);
    const auto s50sup = design_spectrum(grid, ranges, partition, 0.5).first;
    const auto s75sup = design_spectrum(grid, ranges, partition, 0.75).first;
    const GramStats s50 = gram_offdiag_stats(build_sensing_matrix(s50sup, grid, ranges));
    const GramStats s75 = gram_offdiag_stats(build_sensing_matrix(s75sup, grid, ranges));
    CHECK(s50.integrated_sidelobe > s75.integrated_sidelobe);

    const auto& desk = tst::DeskFixture::instance();
    const GramStats d50 =
        gram_offdiag_stats(build_sensing_matrix(desk.support50, desk.fgrid, desk.rgrid));
    const GramStats d75 =
        gram_offdiag_stats(build_sensing_matrix(desk.support75, desk.fgrid, desk.rgrid));
    CHECK(d50.integrated_sidelobe > d75.integrated_sidelobe);
    CHECK(d50.max_offdiag <= 1.0 + 1e-12);
    CHECK(d75.max_offdiag <= 1.0 + 1e-12);
}
