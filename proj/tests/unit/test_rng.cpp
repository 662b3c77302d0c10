#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "corn/rng.hpp"

using corn::Rng;

TEST_SUITE_BEGIN("rng");

TEST_CASE("same seed reproduces the stream, different seeds diverge") {
    Rng a(42), b(42), c(43);
    bool diverged = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) diverged = true;
    }
    CHECK(diverged);
}

TEST_CASE("uniform01 stays in [0,1)") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("below respects the bound") {
    Rng rng(11);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 5000; ++i) {
        const auto v = rng.below(5);
        REQUIRE(v < 5);
        ++counts[static_cast<std::size_t>(v)];
    }
    for (const int c : counts) CHECK(c > 800);  // roughly uniform
}

TEST_CASE("gaussian has roughly standard moments") {
    Rng rng(123);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sum_sq += g * g;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("shuffle is a permutation and is seed-deterministic") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    Rng a(5), b(5);
    a.shuffle(v);
    b.shuffle(w);
    CHECK(v == w);
    CHECK(v != std::vector<int>(v.size(), 0));
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("mix_seed decorrelates streams") {
    CHECK(corn::mix_seed(0, 0) != corn::mix_seed(0, 1));
    CHECK(corn::mix_seed(0, 0) != corn::mix_seed(1, 0));
    CHECK(corn::mix_seed(3, 7) == corn::mix_seed(3, 7));
}

TEST_SUITE_END();
