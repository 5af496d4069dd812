#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "oplang/rng.hpp"

using oplang::Rng;

TEST_SUITE("rng") {

TEST_CASE("same seed, same stream") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.bits() == b.bits());
}

TEST_CASE("derive separates streams") {
    Rng a = Rng::derive(42, 0);
    Rng b = Rng::derive(42, 1);
    bool any_diff = false;
    for (int i = 0; i < 10; ++i) any_diff |= a.bits() != b.bits();
    CHECK(any_diff);
}

TEST_CASE("uniform01 range and coverage") {
    Rng rng(7);
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("below covers all residues") {
    Rng rng(9);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(rng.below(7));
    CHECK(seen.size() == 7);
    CHECK(*seen.rbegin() == 6);
}

TEST_CASE("uniform_int hits inclusive bounds") {
    Rng rng(11);
    bool saw_lo = false;
    bool saw_hi = false;
    for (int i = 0; i < 1000; ++i) {
        const int v = rng.uniform_int(-2, 3);
        CHECK(v >= -2);
        CHECK(v <= 3);
        saw_lo |= v == -2;
        saw_hi |= v == 3;
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
}

TEST_CASE("normal moments roughly standard") {
    Rng rng(13);
    const int n = 20000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("shuffle is a permutation and seed-stable") {
    std::vector<int> items(20);
    std::iota(items.begin(), items.end(), 0);
    auto once = items;
    Rng(5).shuffle(once);
    auto twice = items;
    Rng(5).shuffle(twice);
    CHECK(once == twice);
    CHECK(once != items); // 20 elements: identity is astronomically unlikely
    auto sorted = once;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == items);
}

TEST_CASE("sample_cumulative respects weights") {
    Rng rng(17);
    const std::vector<double> cumulative = {0.1, 0.2, 1.0};
    std::vector<int> counts(3, 0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) counts[rng.sample_cumulative(cumulative)]++;
    CHECK(counts[0] + counts[1] + counts[2] == n);
    CHECK(counts[2] > 7000);
    CHECK(counts[2] < 9000);
    CHECK(counts[0] > 500);
    CHECK(counts[0] < 1500);
}

} // TEST_SUITE
