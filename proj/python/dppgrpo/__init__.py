"""Diversity-aware set selection, GRPO surrogate and spectral metrics over embeddings."""

import json

from . import _dppgrpo
from ._dppgrpo import (
    Embedding,
    NumericalError,
    ValidationError,
    brute_force_select,
    build_kernel,
    clipped_surrogate_term,
    composite_reward,
    compute_advantages,
    diversity_score,
    greedy_select,
    load_embeddings,
    log_det_regularized,
    marginal_gain,
    mean_alignment,
    normalize,
    relevance,
    save_embeddings,
    truncated_spectral_entropy,
    vendi_score,
)


def simulate(config=None):
    """Run the simulation harness in memory.

    ``config`` follows the ``simulate`` config file schema; missing keys take
    their defaults. Returns the parsed report as a dict.
    """
    cfg = {"version": 1} if config is None else dict(config)
    return json.loads(_dppgrpo._simulate_json(json.dumps(cfg)))


__all__ = [
    "Embedding",
    "NumericalError",
    "ValidationError",
    "brute_force_select",
    "build_kernel",
    "clipped_surrogate_term",
    "composite_reward",
    "compute_advantages",
    "diversity_score",
    "greedy_select",
    "load_embeddings",
    "log_det_regularized",
    "marginal_gain",
    "mean_alignment",
    "normalize",
    "relevance",
    "save_embeddings",
    "simulate",
    "truncated_spectral_entropy",
    "vendi_score",
]
