#include "corn/labels.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace corn {

void validate_ranks(const std::vector<int>& ranks, int num_ranks) {
    if (num_ranks < 2) {
        throw std::invalid_argument("rank labels need at least 2 ordered ranks, got K=" +
                                    std::to_string(num_ranks));
    }
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (ranks[i] < 1 || ranks[i] > num_ranks) {
            throw std::invalid_argument("rank label " + std::to_string(ranks[i]) + " at position " +
                                        std::to_string(i) + " outside {1.." +
                                        std::to_string(num_ranks) + "}");
        }
    }
}

std::vector<std::uint8_t> extend_label(RankLabel label) {
    validate_ranks({label.rank_index}, label.num_ranks);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(label.num_ranks - 1));
    for (int k = 1; k < label.num_ranks; ++k) {
        bits[static_cast<std::size_t>(k - 1)] = label.rank_index > k ? 1 : 0;
    }
    return bits;
}

std::vector<std::uint8_t> extend_labels(const std::vector<int>& ranks, int num_ranks) {
    validate_ranks(ranks, num_ranks);
    const std::size_t tasks = static_cast<std::size_t>(num_ranks - 1);
    std::vector<std::uint8_t> bits(ranks.size() * tasks);
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        for (std::size_t k = 0; k < tasks; ++k) {
            bits[i * tasks + k] = ranks[i] > static_cast<int>(k) + 1 ? 1 : 0;
        }
    }
    return bits;
}

std::size_t SubsetMasks::total_size() const {
    return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
}

SubsetMasks build_subset_masks(const std::vector<int>& ranks, int num_ranks) {
    if (ranks.empty()) {
        throw std::invalid_argument("cannot build conditional subset masks for an empty batch");
    }
    validate_ranks(ranks, num_ranks);

    SubsetMasks masks;
    masks.batch = ranks.size();
    masks.num_ranks = num_ranks;
    const std::size_t tasks = static_cast<std::size_t>(num_ranks - 1);
    masks.member.assign(masks.batch * tasks, 0);
    masks.sizes.assign(tasks, 0);

    // Task j (1-based) selects ranks > r_{j-1}; with 1-based integer ranks
    // this is rank >= j, and task 1 selects everything.
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        for (std::size_t j = 0; j < tasks; ++j) {
            if (ranks[i] >= static_cast<int>(j) + 1) {
                masks.member[i * tasks + j] = 1;
                ++masks.sizes[j];
            }
        }
    }
    return masks;
}

}  // namespace corn
