"""Rank-consistent ordinal regression via conditional task probabilities.

Thin wrapper around the C++ extension. The main entry points are the loss
functions (corn_loss, ornn_loss, coral_loss, ce_loss), the probability
utilities (chain_rule_probs, decode_rank, predict_ranks) and fit() for
training the bundled MLP on in-memory data.
"""

from ._corn import (
    __version__,
    build_subset_masks,
    ce_loss,
    chain_rule_probs,
    coral_loss,
    corn_loss,
    corn_loss_reference,
    corn_loss_with_grad,
    decode_rank,
    decode_rank_ce,
    extend_labels,
    fit,
    mae,
    ornn_loss,
    predict_ranks,
    rmse,
    synth_ordinal,
)

__all__ = [
    "__version__",
    "build_subset_masks",
    "ce_loss",
    "chain_rule_probs",
    "coral_loss",
    "corn_loss",
    "corn_loss_reference",
    "corn_loss_with_grad",
    "decode_rank",
    "decode_rank_ce",
    "extend_labels",
    "fit",
    "mae",
    "ornn_loss",
    "predict_ranks",
    "rmse",
    "synth_ordinal",
]
