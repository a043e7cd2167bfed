#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sparspec/errors.hpp"
#include "sparspec/mfi_design.hpp"
#include "support/oracles.hpp"

using namespace sparspec;
namespace tst = sparspec::testing;

TEST_CASE("occupancy is the preserved fraction") {
    CHECK(occupancy(SpectrumSupport::full(10)) == 1.0);
    CHECK(occupancy(SpectrumSupport(10, {0, 2, 4, 6, 8})) == 0.5);
}

TEST_CASE("default block size is 1.25 percent, rounded up") {
    CHECK(BlockPartition::default_block_size(800) == 10);
    CHECK(BlockPartition::default_block_size(4000) == 50);
    CHECK(BlockPartition::default_block_size(16) == 1);
}

TEST_CASE("uniform partition covers the grid with a short tail block") {
    const BlockPartition p = BlockPartition::uniform(10, 4);
    REQUIRE(p.blocks.size() == 3);
    CHECK(p.blocks[2] == std::pair<int, int>{8, 10});
    p.validate(10);
}

TEST_CASE("removing one of two aliased lines carries no information") {
    // Lines 0 and 2 with df*dtau = 1/2 produce identical rows of H.
    FrequencyGrid grid{4, 50.0, 1, 0.0};
    RangeGrid ranges{5, 4.0 / (2.0 * 50.0)};  // dtau = 1/(2 df)
    const SpectrumSupport support(4, {0, 2});
    const double mfi = mfi_of_removal(support, {2, 3}, grid, ranges);
    CHECK(std::abs(mfi) < 1e-10);
}

TEST_CASE("per-block value matches the information-form trace difference") {
    const auto [grid, ranges] = tst::toy_geometry(16, 8, 0.5);
    const DesignParams params{5e3, 1.0};
    const SpectrumSupport full = SpectrumSupport::full(16);
    for (int begin = 0; begin < 16; begin += 2) {
        const double mfi = mfi_of_removal(full, {begin, begin + 2}, grid, ranges, params);
        // independent oracle: information-form traces before/after
        auto info_trace = [&](const SpectrumSupport& s) {
            const SensingMatrix h = build_sensing_matrix(s, grid, ranges);
            Eigen::MatrixXcd info = (h.entries.adjoint() * h.entries) / params.noise_variance;
            info.diagonal().array() += 1.0 / params.prior_variance;
            return info.inverse().trace().real() / ranges.bin_count;
        };
        const double oracle =
            info_trace(full.without_range(begin, begin + 2)) - info_trace(full);
        REQUIRE(mfi == doctest::Approx(oracle).epsilon(1e-8));
        REQUIRE(mfi >= 0.0);
    }
}

TEST_CASE("block outside the support is rejected") {
    FrequencyGrid grid{8, 10.0, 1, 0.0};
    RangeGrid ranges{4, 1e-2};
    const SpectrumSupport sparse(8, {0, 1, 4, 5});
    CHECK_THROWS_AS(mfi_of_removal(sparse, {2, 4}, grid, ranges), ConfigError);
    CHECK_THROWS_AS(mfi_of_removal(SpectrumSupport(8, {0, 1}), {0, 2}, grid, ranges),
                    ConfigError);
}

TEST_CASE("target occupancy of one designs nothing") {
    FrequencyGrid grid{16, 10.0, 1, 0.0};
    RangeGrid ranges{8, 1e-2};
    const auto [support, report] =
        design_spectrum(grid, ranges, BlockPartition::uniform(16, 2), 1.0);
    CHECK(support.preserved_count() == 16);
    CHECK(report.removal_order.empty());
    CHECK(report.mfi_values.empty());
    CHECK(report.trace_history.size() == 1);
    CHECK(report.final_occupancy == 1.0);
}

TEST_CASE("greedy choice matches an exhaustive per-step scan at N=16") {
    const auto [grid, ranges] = tst::toy_geometry(16, 8, 0.5);
    const BlockPartition partition = BlockPartition::uniform(16, 2);
    const DesignParams params;
    const auto [support, report] = design_spectrum(grid, ranges, partition, 0.5, params);
    CHECK(support.preserved_count() == 8);

    // replay the greedy loop against the exhaustive K-by-K oracle
    SpectrumSupport current = SpectrumSupport::full(16);
    std::vector<char> removed(partition.blocks.size(), 0);
    for (int step : report.removal_order) {
        const int oracle_pick = tst::exhaustive_best_removal(current, partition, removed, grid,
                                                             ranges, params);
        REQUIRE(step == oracle_pick);
        const auto [begin, end] = partition.blocks[static_cast<std::size_t>(step)];
        current = current.without_range(begin, end);
        removed[static_cast<std::size_t>(step)] = 1;
    }
}

TEST_CASE("per-removal values telescope to the end-to-end trace difference") {
    const auto [grid, ranges] = tst::toy_geometry(64, 9, 0.5);
    const auto [support, report] =
        design_spectrum(grid, ranges, BlockPartition::uniform(64, 4), 0.5);
    REQUIRE(report.trace_history.size() == report.mfi_values.size() + 1);
    const double sum = std::accumulate(report.mfi_values.begin(), report.mfi_values.end(), 0.0);
    const double end_to_end = report.trace_history.back() - report.trace_history.front();
    CHECK(sum == doctest::Approx(end_to_end).epsilon(1e-8));
}

TEST_CASE("desk-scale removal sequences never tighten the bound") {
    for (const MfiReport* report :
         {&tst::DeskFixture::instance().report50, &tst::DeskFixture::instance().report75}) {
        REQUIRE(!report->mfi_values.empty());
        for (std::size_t i = 1; i < report->trace_history.size(); ++i)
            REQUIRE(report->trace_history[i] >= report->trace_history[i - 1] - 1e-10);
        for (double value : report->mfi_values) REQUIRE(value >= -1e-10);
    }
}

TEST_CASE("incremental evaluator agrees with the K-by-K recompute") {
    const auto [grid, ranges] = tst::toy_geometry(64, 9, 0.5);
    const BlockPartition partition = BlockPartition::uniform(64, 4);
    const DesignParams params;
    const auto [support, report] = design_spectrum(grid, ranges, partition, 0.5, params);

    // every recorded trace value must match the direct K-by-K evaluation
    SpectrumSupport current = SpectrumSupport::full(64);
    REQUIRE(report.trace_history[0] ==
            doctest::Approx(design_trace_recompute(current, grid, ranges, params)).epsilon(1e-8));
    for (std::size_t i = 0; i < report.removal_order.size(); ++i) {
        const auto [begin, end] =
            partition.blocks[static_cast<std::size_t>(report.removal_order[i])];
        current = current.without_range(begin, end);
        REQUIRE(report.trace_history[i + 1] ==
                doctest::Approx(design_trace_recompute(current, grid, ranges, params))
                    .epsilon(1e-8));
    }
}

TEST_CASE("design is deterministic") {
    FrequencyGrid grid{32, 25.0, 1, 0.0};
    RangeGrid ranges{8, 1e-2};
    const BlockPartition partition = BlockPartition::uniform(32, 2);
    const auto a = design_spectrum(grid, ranges, partition, 0.4);
    const auto b = design_spectrum(grid, ranges, partition, 0.4);
    CHECK(a.second.removal_order == b.second.removal_order);
    CHECK(a.first.preserved_indices() == b.first.preserved_indices());
}

TEST_CASE("too-small targets are rejected") {
    FrequencyGrid grid{16, 10.0, 1, 0.0};
    RangeGrid ranges{4, 1e-2};
    const BlockPartition partition = BlockPartition::uniform(16, 8);
    CHECK_THROWS_AS(design_spectrum(grid, ranges, partition, 0.01), ConfigError);
    CHECK_THROWS_AS(design_spectrum(grid, ranges, partition, 0.0), ConfigError);
    CHECK_THROWS_AS(design_spectrum(grid, ranges, partition, 1.5), ConfigError);
}

TEST_CASE("desk-scale design hits the target within one block") {
    const auto& desk = tst::DeskFixture::instance();
    CHECK(occupancy(desk.support50) <= 0.5);
    CHECK(occupancy(desk.support50) > 0.5 - 10.0 / 800.0);
    CHECK(occupancy(desk.support75) <= 0.75);
    CHECK(occupancy(desk.support75) > 0.75 - 10.0 / 800.0);
    CHECK(desk.report50.final_occupancy == occupancy(desk.support50));
}
