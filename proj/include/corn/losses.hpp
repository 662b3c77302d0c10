#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "corn/labels.hpp"
#include "corn/tensor.hpp"

namespace corn {

/// Output-layer / loss strategy of a model.
enum class HeadKind { Corn, Coral, OrNn, CrossEntropy };

inline const char* head_name(HeadKind kind) {
    switch (kind) {
        case HeadKind::Corn: return "corn";
        case HeadKind::Coral: return "coral";
        case HeadKind::OrNn: return "ornn";
        case HeadKind::CrossEntropy: return "ce";
    }
    return "?";
}

inline HeadKind parse_head(const std::string& name) {
    if (name == "corn") return HeadKind::Corn;
    if (name == "coral") return HeadKind::Coral;
    if (name == "ornn") return HeadKind::OrNn;
    if (name == "ce") return HeadKind::CrossEntropy;
    throw std::invalid_argument("unknown method '" + name + "' (expected corn|coral|ornn|ce)");
}

/// Width of the output layer for a head.
inline std::size_t head_output_width(HeadKind kind, int num_ranks) {
    return kind == HeadKind::CrossEntropy ? static_cast<std::size_t>(num_ranks)
                                          : static_cast<std::size_t>(num_ranks - 1);
}

namespace detail {

/// Shared stable binary cross-entropy accumulator over per-task logits:
///   -(1/denom) * sum over elements of
///       member * [ logsig(z) * bit + (logsig(z) - z) * (1 - bit) ].
/// `bits` and `member` are row-major batch x (K-1) constants; gradients flow
/// only through the logits.
template <typename Real>
Tensor<Real> masked_logit_bce(Tape<Real>& tape, const Tensor<Real>& logits,
                              const std::vector<std::uint8_t>& bits,
                              const std::vector<std::uint8_t>& member, Real denom) {
    const std::size_t count = logits.size();
    std::vector<Real> bit_vals(count), inv_bit_vals(count), member_vals(count);
    for (std::size_t i = 0; i < count; ++i) {
        bit_vals[i] = static_cast<Real>(bits[i]);
        inv_bit_vals[i] = Real(1) - bit_vals[i];
        member_vals[i] = static_cast<Real>(member[i]);
    }
    const auto bit = Tensor<Real>::from(logits.rows(), logits.cols(), std::move(bit_vals));
    const auto inv_bit = Tensor<Real>::from(logits.rows(), logits.cols(), std::move(inv_bit_vals));
    const auto mask = Tensor<Real>::from(logits.rows(), logits.cols(), std::move(member_vals));

    const auto log_sig = tape.logsigmoid(logits);
    const auto exceed_term = tape.mul(log_sig, bit);
    const auto not_exceed_term = tape.mul(tape.sub(log_sig, logits), inv_bit);
    const auto masked = tape.mul(tape.add(exceed_term, not_exceed_term), mask);
    return tape.scale(tape.sum(masked), Real(-1) / denom);
}

template <typename Real>
void check_task_logits(const Tensor<Real>& logits, const std::vector<int>& ranks, int num_ranks,
                       const char* what) {
    if (num_ranks < 2) {
        throw std::invalid_argument(std::string(what) + ": need K >= 2 ranks, got K=" +
                                    std::to_string(num_ranks));
    }
    if (logits.cols() != static_cast<std::size_t>(num_ranks - 1)) {
        throw std::invalid_argument(std::string(what) + ": expected " +
                                    std::to_string(num_ranks - 1) + " logit columns, got " +
                                    std::to_string(logits.cols()));
    }
    if (logits.rows() != ranks.size()) {
        throw std::invalid_argument(std::string(what) + ": " + std::to_string(ranks.size()) +
                                    " labels for " + std::to_string(logits.rows()) + " rows");
    }
}

}  // namespace detail

/// Rank-consistent conditional-probability loss in its numerically stable
/// logit form. Task j accumulates terms only over the examples of its
/// conditional subset S_j; the sum is normalized by the total subset size
/// within the batch (tasks whose subset is empty add nothing to either side).
template <typename Real>
Tensor<Real> corn_loss(Tape<Real>& tape, const Tensor<Real>& logits, const std::vector<int>& ranks,
                       int num_ranks) {
    detail::check_task_logits(logits, ranks, num_ranks, "corn_loss");
    const auto bits = extend_labels(ranks, num_ranks);
    const auto masks = build_subset_masks(ranks, num_ranks);
    return detail::masked_logit_bce(tape, logits, bits, masks.member,
                                    static_cast<Real>(masks.total_size()));
}

/// Naive probability-form evaluation of the same loss: a per-example,
/// per-task double loop over log(f) / log(1-f) with probabilities clamped to
/// [1e-12, 1-1e-12]. Test oracle only; never used in training.
inline double corn_loss_reference(const std::vector<double>& probabilities,
                                  const std::vector<int>& ranks, int num_ranks) {
    const std::size_t tasks = static_cast<std::size_t>(num_ranks - 1);
    if (probabilities.size() != ranks.size() * tasks) {
        throw std::invalid_argument("corn_loss_reference: probability matrix size mismatch");
    }
    validate_ranks(ranks, num_ranks);
    double total = 0.0;
    std::size_t denom = 0;
    for (std::size_t j = 0; j < tasks; ++j) {
        for (std::size_t i = 0; i < ranks.size(); ++i) {
            const bool in_subset = j == 0 || ranks[i] > static_cast<int>(j);
            if (!in_subset) continue;
            ++denom;
            const double f =
                std::clamp(probabilities[i * tasks + j], 1e-12, 1.0 - 1e-12);
            const bool exceeds = ranks[i] > static_cast<int>(j) + 1;
            total += exceeds ? std::log(f) : std::log(1.0 - f);
        }
    }
    return -total / static_cast<double>(denom);
}

/// Extended-binary-classification loss without conditioning: every task sees
/// the whole batch. Sum of the K-1 per-task BCE terms, averaged over the
/// batch (not over batch x tasks).
template <typename Real>
Tensor<Real> ornn_loss(Tape<Real>& tape, const Tensor<Real>& logits, const std::vector<int>& ranks,
                       int num_ranks) {
    detail::check_task_logits(logits, ranks, num_ranks, "ornn_loss");
    const auto bits = extend_labels(ranks, num_ranks);
    const std::vector<std::uint8_t> everyone(logits.size(), 1);
    return detail::masked_logit_bce(tape, logits, bits, everyone,
                                    static_cast<Real>(ranks.size()));
}

/// Per-task logits of the weight-sharing head: shared_logit[i] + bias[k].
/// shared_logit is batch x 1, biases is 1 x (K-1); the expansion goes through
/// the tape so gradients reach both.
template <typename Real>
Tensor<Real> coral_task_logits(Tape<Real>& tape, const Tensor<Real>& shared_logit,
                               const Tensor<Real>& biases) {
    if (shared_logit.cols() != 1) {
        throw std::invalid_argument("coral_task_logits: shared logit must be a column vector");
    }
    const auto ones_row = Tensor<Real>::full(1, biases.cols(), Real(1));
    return tape.add_row(tape.matmul(shared_logit, ones_row), biases);
}

/// Loss of the weight-sharing baseline: BCE between sigmoid(shared + bias_k)
/// and extended bit k over the full batch for every task, batch-averaged.
template <typename Real>
Tensor<Real> coral_loss(Tape<Real>& tape, const Tensor<Real>& shared_logit,
                        const Tensor<Real>& biases, const std::vector<int>& ranks,
                        int num_ranks) {
    if (biases.rows() != 1 || biases.cols() != static_cast<std::size_t>(num_ranks - 1)) {
        throw std::invalid_argument("coral_loss: need a 1x(K-1) bias row");
    }
    const auto logits = coral_task_logits(tape, shared_logit, biases);
    return ornn_loss(tape, logits, ranks, num_ranks);
}

/// Plain multicategory cross-entropy baseline on K-column logits.
template <typename Real>
Tensor<Real> ce_loss(Tape<Real>& tape, const Tensor<Real>& logits, const std::vector<int>& ranks,
                     int num_ranks) {
    if (logits.cols() != static_cast<std::size_t>(num_ranks)) {
        throw std::invalid_argument("ce_loss: expected " + std::to_string(num_ranks) +
                                    " logit columns, got " + std::to_string(logits.cols()));
    }
    validate_ranks(ranks, num_ranks);
    return tape.softmax_cross_entropy(logits, ranks);
}

/// Chain rule over conditional task probabilities: row-wise cumulative
/// product. Output rows are monotone non-increasing by construction.
template <typename Real>
std::vector<Real> chain_rule_probs(const std::vector<Real>& conditional, std::size_t batch,
                                   int num_ranks) {
    const std::size_t tasks = static_cast<std::size_t>(num_ranks - 1);
    if (conditional.size() != batch * tasks) {
        throw std::invalid_argument("chain_rule_probs: matrix size mismatch");
    }
    std::vector<Real> unconditional(conditional.size());
    for (std::size_t i = 0; i < batch; ++i) {
        Real running(1);
        for (std::size_t k = 0; k < tasks; ++k) {
            running *= conditional[i * tasks + k];
            unconditional[i * tasks + k] = running;
        }
    }
    return unconditional;
}

/// Rank index from unconditional exceedance probabilities:
/// q = 1 + #(P(y > r_k) > 0.5), with a strict threshold (ties at exactly 0.5
/// do not count).
template <typename Real>
std::vector<int> decode_rank(const std::vector<Real>& unconditional, std::size_t batch,
                             int num_ranks) {
    const std::size_t tasks = static_cast<std::size_t>(num_ranks - 1);
    if (tasks == 0 || unconditional.size() != batch * tasks) {
        throw std::invalid_argument("decode_rank: matrix size mismatch");
    }
    std::vector<int> ranks(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        int q = 1;
        for (std::size_t k = 0; k < tasks; ++k) {
            if (unconditional[i * tasks + k] > Real(0.5)) ++q;
        }
        ranks[i] = q;
    }
    return ranks;
}

/// Argmax decoding for the cross-entropy baseline; ties break toward the
/// lower rank index.
template <typename Real>
std::vector<int> decode_rank_ce(const std::vector<Real>& logits, std::size_t batch,
                                int num_ranks) {
    const std::size_t classes = static_cast<std::size_t>(num_ranks);
    if (logits.size() != batch * classes) {
        throw std::invalid_argument("decode_rank_ce: matrix size mismatch");
    }
    std::vector<int> ranks(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (logits[i * classes + c] > logits[i * classes + best]) best = c;
        }
        ranks[i] = static_cast<int>(best) + 1;
    }
    return ranks;
}

/// Head-aware rank prediction from raw output-layer logits (eval path).
/// Corn applies the chain rule to sigmoid(logits) first; Coral and OrNn
/// threshold sigmoid(logits) directly; CrossEntropy takes the argmax.
template <typename Real>
std::vector<int> predict_ranks(HeadKind kind, const std::vector<Real>& logits, std::size_t batch,
                               int num_ranks) {
    if (kind == HeadKind::CrossEntropy) {
        return decode_rank_ce(logits, batch, num_ranks);
    }
    std::vector<Real> probs(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const Real x = logits[i];
        probs[i] = x >= Real(0) ? Real(1) / (Real(1) + std::exp(-x))
                                : std::exp(x) / (Real(1) + std::exp(x));
    }
    if (kind == HeadKind::Corn) {
        probs = chain_rule_probs(probs, batch, num_ranks);
    }
    return decode_rank(probs, batch, num_ranks);
}

}  // namespace corn
