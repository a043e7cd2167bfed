#include <doctest.h>

#include <cmath>
#include <set>

#include "sparspec/rng.hpp"

using namespace sparspec;

TEST_CASE("identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams are reproducible and mutually distinct") {
    Rng root(7);
    Rng s1 = root.derive(1);
    Rng s1_again = root.derive(1);
    CHECK(s1.next_u64() == s1_again.next_u64());
    Rng s1b = root.derive(1);
    Rng s2b = root.derive(2);
    int collisions = 0;
    for (int i = 0; i < 100; ++i)
        if (s1b.next_u64() == s2b.next_u64()) ++collisions;
    CHECK(collisions == 0);
}

TEST_CASE("uniform stays in [0, 1) with a sane mean") {
    Rng rng(3);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / 20000 - 0.5) < 0.01);
}

TEST_CASE("normal has near-zero mean and unit variance") {
    Rng rng(11);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum_sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.03);
}

TEST_CASE("complex normal has the requested power") {
    Rng rng(13);
    const double variance = 3.5;
    double power = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) power += std::norm(rng.complex_normal(variance));
    CHECK(power / n == doctest::Approx(variance).epsilon(0.03));
}

TEST_CASE("sampling without replacement gives distinct in-range values") {
    Rng rng(17);
    const auto picks = rng.sample_without_replacement(50, 20);
    std::set<int> unique(picks.begin(), picks.end());
    CHECK(unique.size() == 20);
    for (int p : picks) {
        CHECK(p >= 0);
        CHECK(p < 50);
    }
}
