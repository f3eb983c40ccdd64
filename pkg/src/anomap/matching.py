"""Support-image selection: pick the normal-pool image whose global
embedding is most cosine-similar to the query embedding, or a seeded random
pool member for the baseline strategy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import SplitMix64

ZERO_NORM_EPS = 1e-12


@dataclass
class SupportSelection:
    support_id: str
    similarity: float
    # remaining pool entries as (id, score), best first, ties by ascending id
    runner_up_scores: list[tuple[str, float]]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1].

    A vector with norm below 1e-12 scores 0 against anything: degenerate
    embeddings (all-black images) stay neutral instead of poisoning the
    argmax or raising mid-pipeline.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < ZERO_NORM_EPS or nb < ZERO_NORM_EPS:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def _score_pool(query: np.ndarray, pool: list[tuple[str, np.ndarray]]) -> list[tuple[str, float]]:
    if not pool:
        raise ValidationError("support pool is empty")
    return [(entry_id, cosine_similarity(query, emb)) for entry_id, emb in pool]


def _build_selection(scores: list[tuple[str, float]], chosen: int) -> SupportSelection:
    chosen_id, chosen_score = scores[chosen]
    others = [s for i, s in enumerate(scores) if i != chosen]
    others.sort(key=lambda item: (-item[1], item[0]))
    return SupportSelection(chosen_id, chosen_score, others)


def select_support(query: np.ndarray, pool: list[tuple[str, np.ndarray]]) -> SupportSelection:
    """Embedding similarity matching: argmax of cosine score over the pool.

    Exact score ties go to the lexicographically smallest id so the result
    does not depend on pool order.
    """
    scores = _score_pool(query, pool)
    chosen = 0
    for i in range(1, len(scores)):
        best_id, best_score = scores[chosen]
        cand_id, cand_score = scores[i]
        if cand_score > best_score or (cand_score == best_score and cand_id < best_id):
            chosen = i
    return _build_selection(scores, chosen)


def select_support_random(
    query: np.ndarray, pool: list[tuple[str, np.ndarray]], seed: int
) -> SupportSelection:
    """Baseline strategy: uniform pool choice from a splitmix64 stream.

    The similarity field is the cosine between the query and the chosen
    entry, not the pool maximum.
    """
    scores = _score_pool(query, pool)
    chosen = SplitMix64(seed).next_index(len(pool))
    return _build_selection(scores, chosen)
