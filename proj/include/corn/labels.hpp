#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace corn {

/// Ordinal rank label: 1-based index into the ordered rank set r_1 < ... < r_K.
/// Ranks are 1-based everywhere outside this module; the conversion to 0-based
/// array indices is confined to the functions below.
struct RankLabel {
    int rank_index = 1;  // in {1, ..., num_ranks}
    int num_ranks = 2;   // K >= 2

    bool valid() const { return num_ranks >= 2 && rank_index >= 1 && rank_index <= num_ranks; }
};

/// Throws std::invalid_argument unless every rank is in {1, ..., num_ranks} and K >= 2.
void validate_ranks(const std::vector<int>& ranks, int num_ranks);

/// Extended binary labels for one rank: bits[k] = 1 iff rank > k+1-th rank,
/// k = 0..K-2. The result is monotone non-increasing and sums to rank-1.
std::vector<std::uint8_t> extend_label(RankLabel label);

/// Row-major batch x (K-1) matrix of extended labels.
std::vector<std::uint8_t> extend_labels(const std::vector<int>& ranks, int num_ranks);

/// Conditional training-subset membership for one batch.
/// Task j (1-based, j = 1..K-1) trains on the examples with rank > r_{j-1};
/// task 1 uses the whole batch. Memberships are nested across tasks.
struct SubsetMasks {
    std::size_t batch = 0;
    int num_ranks = 0;
    std::vector<std::uint8_t> member;  // row-major batch x (K-1)
    std::vector<std::size_t> sizes;    // per task, length K-1

    bool is_member(std::size_t example, int task) const {  // task 1-based
        return member[example * static_cast<std::size_t>(num_ranks - 1) +
                      static_cast<std::size_t>(task - 1)] != 0;
    }
    std::size_t total_size() const;
};

SubsetMasks build_subset_masks(const std::vector<int>& ranks, int num_ranks);

}  // namespace corn
