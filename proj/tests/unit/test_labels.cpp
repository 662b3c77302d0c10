#include <doctest.h>

#include <stdexcept>

#include <numeric>
#include <vector>

#include "corn/labels.hpp"
#include "corn/rng.hpp"

using corn::build_subset_masks;
using corn::extend_label;
using corn::extend_labels;
using corn::RankLabel;

TEST_SUITE_BEGIN("labels");

TEST_CASE("extended labels by definition") {
    CHECK(extend_label({3, 5}) == std::vector<std::uint8_t>{1, 1, 0, 0});
    CHECK(extend_label({1, 5}) == std::vector<std::uint8_t>{0, 0, 0, 0});
    CHECK(extend_label({5, 5}) == std::vector<std::uint8_t>{1, 1, 1, 1});
}

TEST_CASE("out-of-range ranks are rejected") {
    CHECK_THROWS_AS(extend_label({0, 5}), std::invalid_argument);
    CHECK_THROWS_AS(extend_label({6, 5}), std::invalid_argument);
    CHECK_THROWS_AS(extend_label({1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(extend_labels({1, 2, 9}, 5), std::invalid_argument);
}

TEST_CASE("round trip: 1 + sum(bits) = rank, exhaustive through K=64") {
    for (int k = 2; k <= 64; ++k) {
        for (int rank = 1; rank <= k; ++rank) {
            const auto bits = extend_label({rank, k});
            const int total = std::accumulate(bits.begin(), bits.end(), 0);
            REQUIRE(1 + total == rank);
        }
    }
}

TEST_CASE("extended labels are monotone non-increasing") {
    for (int k = 2; k <= 16; ++k) {
        for (int rank = 1; rank <= k; ++rank) {
            const auto bits = extend_label({rank, k});
            for (std::size_t i = 1; i < bits.size(); ++i) {
                REQUIRE(bits[i] <= bits[i - 1]);
            }
        }
    }
}

TEST_CASE("subset masks count membership by definition") {
    const auto masks = build_subset_masks({1, 2, 3, 3}, 3);
    CHECK(masks.sizes == std::vector<std::size_t>{4, 3});
    CHECK(masks.total_size() == 7);

    const auto all_min = build_subset_masks({1, 1, 1}, 3);
    CHECK(all_min.sizes == std::vector<std::size_t>{3, 0});

    const auto ladder = build_subset_masks({1, 2, 3, 4}, 4);
    CHECK(ladder.sizes == std::vector<std::size_t>{4, 3, 2});
}

TEST_CASE("task 1 always covers the whole batch") {
    const auto masks = build_subset_masks({2, 4, 1, 3, 4, 4}, 4);
    CHECK(masks.sizes[0] == 6);
    for (std::size_t i = 0; i < masks.batch; ++i) CHECK(masks.is_member(i, 1));
}

TEST_CASE("empty batch is rejected") {
    const std::vector<int> none;
    CHECK_THROWS_AS(build_subset_masks(none, 3), std::invalid_argument);
}

TEST_CASE("masks are nested and sizes non-increasing on random batches") {
    corn::Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(15));
        const std::size_t batch = 1 + rng.below(40);
        std::vector<int> ranks(batch);
        for (auto& r : ranks) r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        const auto masks = build_subset_masks(ranks, k);
        for (int task = 2; task < k; ++task) {
            REQUIRE(masks.sizes[static_cast<std::size_t>(task - 1)] <=
                    masks.sizes[static_cast<std::size_t>(task - 2)]);
            for (std::size_t i = 0; i < batch; ++i) {
                if (masks.is_member(i, task)) REQUIRE(masks.is_member(i, task - 1));
            }
        }
    }
}

TEST_SUITE_END();
