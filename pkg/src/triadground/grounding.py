"""Inference-time scoring cascade and IoU evaluation.

For each triad k, each proposal pair (i, j) gets a weighted sum of the
three attention scores; a proposal's triad score is the best pair score
with that proposal in the first slot; sentence scores sum the triad
scores; the grounding is the argmax proposal (lowest index on ties).
Accuracy counts predictions whose IoU with the ground-truth box exceeds
0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus_io import EmbeddingTable
from .model import ModelParams, scene_features, triad_attention, triad_vectors
from .scenes import Box, Scene
from .triads import ParsedQuery


@dataclass(frozen=True)
class ScoreWeights:
    alpha: float = 2.0  # target attention weight
    beta: float = 1.0   # reference attention weight
    gamma: float = 1.0  # discriminative attention weight

    def __post_init__(self):
        if not all(map(math.isfinite, (self.alpha, self.beta, self.gamma))):
            raise ValueError(f"score weights must be finite, got {self}")


def pair_score(a_t: float, a_r: float, a_d: float, weights: ScoreWeights) -> float:
    """Combined score of one pair for one triad."""
    return weights.alpha * a_t + weights.beta * a_r + weights.gamma * a_d


def pair_score_matrix(
    a_t: np.ndarray, a_r: np.ndarray, a_d: np.ndarray, weights: ScoreWeights
) -> np.ndarray:
    """All pair scores at once: entry (i, j) scores the pair (i, j)."""
    return weights.alpha * a_t[:, None] + weights.beta * a_r[None, :] + weights.gamma * a_d


def proposal_triad_score(pair_scores_row: np.ndarray) -> tuple[float, int]:
    """Best pair score for a fixed first proposal, with its reference index.

    Ties resolve to the lowest index.
    """
    row = np.asarray(pair_scores_row, dtype=np.float64)
    if row.size == 0:
        raise ValueError("no pair scores to maximize over")
    j = int(np.argmax(row))
    return float(row[j]), j


@dataclass
class GroundingResult:
    chosen: int                   # argmax proposal, lowest index on ties
    sentence_scores: np.ndarray   # (N,)
    triad_scores: np.ndarray      # (M, N)
    triad_refs: np.ndarray        # (M, N) best reference index per (k, i)
    chosen_refs: list[int]        # best reference per triad at the chosen proposal


def score_triad_arrays(
    params: ModelParams,
    table: EmbeddingTable,
    fv: np.ndarray,
    fp: np.ndarray,
    triad,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw unit attention values as numpy arrays: (N,), (N,), (N, N)."""
    n = fv.shape[0]
    a_t, a_r, a_d = triad_attention(params, fv, fp, triad_vectors(triad, table, params))
    return a_t.data.copy(), a_r.data.copy(), a_d.data.reshape(n, n).copy()


def ground(
    query: ParsedQuery,
    scene: Scene,
    params: ModelParams,
    table: EmbeddingTable,
    weights: ScoreWeights = ScoreWeights(),
) -> GroundingResult:
    """Ground one query in one scene with a trained model."""
    fv, fp = scene_features(scene, params.config)
    n = scene.n
    m = len(query.triads)
    triad_scores = np.zeros((m, n))
    triad_refs = np.zeros((m, n), dtype=int)
    for k, triad in enumerate(query.triads):
        a_t, a_r, a_d = score_triad_arrays(params, table, fv, fp, triad)
        pairs = pair_score_matrix(a_t, a_r, a_d, weights)
        for i in range(n):
            triad_scores[k, i], triad_refs[k, i] = proposal_triad_score(pairs[i])
    sentence_scores = triad_scores.sum(axis=0)
    chosen = int(np.argmax(sentence_scores))
    return GroundingResult(
        chosen=chosen,
        sentence_scores=sentence_scores,
        triad_scores=triad_scores,
        triad_refs=triad_refs,
        chosen_refs=[int(triad_refs[k, chosen]) for k in range(m)],
    )


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes; 0 when disjoint."""
    ix = min(a.x_br, b.x_br) - max(a.x_tl, b.x_tl)
    iy = min(a.y_br, b.y_br) - max(a.y_tl, b.y_tl)
    inter = max(0.0, ix) * max(0.0, iy)
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


@dataclass
class EvalReport:
    rows: list[dict]
    accuracy: float
    n_queries: int

    def summary(self) -> dict:
        return {"accuracy": self.accuracy, "queries": self.n_queries}


def evaluate(
    scenes: list[Scene],
    params: ModelParams,
    table: EmbeddingTable,
    weights: ScoreWeights = ScoreWeights(),
    single_triad_rng: np.random.Generator | None = None,
) -> EvalReport:
    """Grounding accuracy at IoU > 0.5 over scenes loaded with ground truth.

    ``single_triad_rng`` enables the degraded inference variant that keeps
    one randomly chosen triad per query.
    """
    rows = []
    correct_count = 0
    total = 0
    for scene in scenes:
        for sq in scene.queries:
            if sq.gt_index is None:
                raise ValueError(
                    f"{sq.query.query_id}: evaluation needs scenes loaded with ground truth"
                )
            query = sq.query
            if single_triad_rng is not None:
                k = int(single_triad_rng.integers(len(query.triads)))
                query = ParsedQuery(query.query_id, (query.triads[k],), query.source_parse)
            result = ground(query, scene, params, table, weights)
            gt_box = scene.proposals[sq.gt_index].box
            chosen_box = scene.proposals[result.chosen].box
            overlap = iou(chosen_box, gt_box)
            is_correct = overlap > 0.5
            correct_count += int(is_correct)
            total += 1
            rows.append(
                {
                    "query_id": query.query_id,
                    "chosen": result.chosen,
                    "gt": sq.gt_index,
                    "iou": overlap,
                    "correct": is_correct,
                    "scores": [float(s) for s in result.sentence_scores],
                }
            )
    if total == 0:
        raise ValueError("empty evaluation set")
    return EvalReport(rows=rows, accuracy=correct_count / total, n_queries=total)
