"""Attention matching and triad reconstruction network.

Three two-layer attention scorers rate how well a proposal matches the
target unit, a proposal matches the reference unit, and a proposal pair
matches the discriminative unit:

    score = W2 . relu(W1 . relu(feature (+) embedding) + b1) + b2

Proposal (or pair) features are aggregated by softmax attention weights
(temperature 1 in soft mode, a small temperature in hard mode, optional
seeded Gumbel noise), and per-unit two-layer decoders rebuild each unit
embedding from the aggregated feature.  The training signal is the sum of
squared L2 distances between rebuilt and original unit embeddings.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .corpus_io import EmbeddingTable
from .scenes import Scene
from .triads import SELF, UKN, DiscriminativeTriad

UNITS = ("t", "r", "d")


@dataclass(frozen=True)
class ModelConfig:
    d_v: int = 32
    d_l: int = 24
    hidden_attn: int = 128
    hidden_recon: int = 64
    tau: float = 0.1
    mode: str = "hard"              # soft | hard | raw
    gumbel_noise: bool = False      # seeded noise on hard-mode scores
    l2_normalize_visual: bool = False

    def __post_init__(self):
        if self.mode not in ("soft", "hard", "raw"):
            raise ValueError(f"mode must be soft, hard or raw, got {self.mode!r}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @property
    def pair_dim(self) -> int:
        return 2 * self.d_v + 10

    def attn_in(self, unit: str) -> int:
        return (self.pair_dim if unit == "d" else self.d_v) + self.d_l

    def recon_in(self, unit: str) -> int:
        return self.pair_dim if unit == "d" else self.d_v


class ModelParams:
    """Named trainable tensors: three attention stacks, three decoders and
    the SELF/UKN/OOV embedding rows."""

    def __init__(self, config: ModelConfig, tensors: dict[str, Tensor]):
        self.config = config
        self.tensors = tensors
        for name, t in tensors.items():
            if not np.all(np.isfinite(t.data)):
                raise ad.NonFiniteError(f"parameter {name!r} is non-finite")

    @classmethod
    def init(cls, config: ModelConfig, table: EmbeddingTable, seed: int) -> "ModelParams":
        if table.dimension != config.d_l:
            raise ValueError(
                f"embedding table dimension {table.dimension} != model d_l {config.d_l}"
            )
        rng = np.random.default_rng(seed)
        tensors: dict[str, Tensor] = {}

        def layer(prefix: str, fan_in: int, fan_out: int):
            bound = 1.0 / np.sqrt(fan_in)
            tensors[f"{prefix}/w"] = ad.parameter(
                rng.uniform(-bound, bound, (fan_in, fan_out)), name=f"{prefix}/w"
            )
            tensors[f"{prefix}/b"] = ad.parameter(
                rng.uniform(-bound, bound, fan_out), name=f"{prefix}/b"
            )

        for unit in UNITS:
            layer(f"attn_{unit}/1", config.attn_in(unit), config.hidden_attn)
            layer(f"attn_{unit}/2", config.hidden_attn, 1)
        for unit in UNITS:
            layer(f"recon_{unit}/1", config.recon_in(unit), config.hidden_recon)
            layer(f"recon_{unit}/2", config.hidden_recon, config.d_l)
        for token in ("SELF", "UKN", "OOV"):
            tensors[f"emb/{token}"] = ad.parameter(table.lookup(token).copy(), name=f"emb/{token}")
        return cls(config, tensors)

    def meta(self) -> dict:
        return asdict(self.config)

    def numpy_tensors(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.tensors.items()}

    @classmethod
    def from_checkpoint(cls, meta: dict, tensors: dict[str, np.ndarray]) -> "ModelParams":
        config = ModelConfig(**meta)
        return cls(config, {n: ad.parameter(a, name=n) for n, a in tensors.items()})

    def clone(self) -> "ModelParams":
        return ModelParams.from_checkpoint(self.meta(), self.numpy_tensors())


def unit_vector(word: str, table: EmbeddingTable, params: ModelParams) -> Tensor:
    """Embedding for one triad unit; special and unknown words resolve to
    the trainable SELF/UKN/OOV rows."""
    if word == SELF:
        return params.tensors["emb/SELF"]
    if word == UKN:
        return params.tensors["emb/UKN"]
    if word in table:
        return ad.constant(table.lookup(word), name=f"emb:{word}")
    return params.tensors["emb/OOV"]


def triad_vectors(
    triad: DiscriminativeTriad, table: EmbeddingTable, params: ModelParams
) -> tuple[Tensor, Tensor, Tensor]:
    return (
        unit_vector(triad.target, table, params),
        unit_vector(triad.reference, table, params),
        unit_vector(triad.discriminative, table, params),
    )


def _attention(features, embedding: Tensor, unit: str, params: ModelParams) -> Tensor:
    cfg = params.config
    feats = features if isinstance(features, Tensor) else ad.constant(features)
    single = feats.data.ndim == 1
    if single:
        feats = ad.reshape(feats, (1, feats.data.shape[0]))
    m, width = feats.data.shape
    if width != cfg.recon_in(unit):
        raise ad.ShapeError(f"attention {unit}: feature width {width}, expected {cfg.recon_in(unit)}")
    if embedding.data.shape != (cfg.d_l,):
        raise ad.ShapeError(f"attention {unit}: embedding shape {embedding.data.shape}")
    x = ad.concat([feats, ad.tile_row(embedding, m)], axis=1)
    h = ad.relu(x)
    h = ad.relu(ad.add(ad.matmul(h, params.tensors[f"attn_{unit}/1/w"]), params.tensors[f"attn_{unit}/1/b"]))
    s = ad.add(ad.matmul(h, params.tensors[f"attn_{unit}/2/w"]), params.tensors[f"attn_{unit}/2/b"])
    return ad.reshape(s, ()) if single else ad.reshape(s, (m,))


def target_attention(visual, target_embedding: Tensor, params: ModelParams) -> Tensor:
    """Score(s) for proposals matching the target unit; accepts one visual
    vector or a (N, d_v) matrix."""
    return _attention(visual, target_embedding, "t", params)


def reference_attention(visual, reference_embedding: Tensor, params: ModelParams) -> Tensor:
    return _attention(visual, reference_embedding, "r", params)


def discriminative_attention(pair, cue_embedding: Tensor, params: ModelParams) -> Tensor:
    """Score(s) for proposal pairs matching the discriminative unit; accepts
    one pair feature or a (N*N, 2*d_v+10) matrix."""
    return _attention(pair, cue_embedding, "d", params)


def aggregate(
    scores: Tensor,
    features,
    mode: str,
    tau: float,
    gumbel_rng: np.random.Generator | None = None,
) -> Tensor:
    """Attention-weighted feature sum.

    Soft mode uses softmax weights at temperature 1; hard mode sharpens
    with softmax(scores / tau), approaching the argmax feature as tau -> 0.
    Raw mode sums features weighted by the unnormalized scores themselves,
    which is the classic baseline the sharpened method improves on; it is
    kept for the ablation study.  ``gumbel_rng``, when given in hard mode,
    adds seeded Gumbel noise to the scores before sharpening.
    """
    if mode not in ("soft", "hard", "raw"):
        raise ad.DomainError(f"mode must be soft, hard or raw, got {mode!r}")
    feats = features if isinstance(features, Tensor) else ad.constant(features)
    if mode == "raw":
        return ad.matmul(scores, feats)
    if mode == "soft":
        weights = ad.softmax(scores, temperature=1.0)
    else:
        if tau <= 0:
            raise ad.DomainError(f"hard mode needs tau > 0, got {tau}")
        if gumbel_rng is not None:
            u = gumbel_rng.uniform(1e-12, 1.0, scores.data.shape)
            scores = ad.add(scores, ad.constant(-np.log(-np.log(u))))
        weights = ad.softmax(scores, temperature=tau)
    return ad.matmul(weights, feats)


def reconstruct(aggregated: Tensor, unit: str, params: ModelParams) -> Tensor:
    """Decode an aggregated feature back into a d_l unit embedding."""
    cfg = params.config
    if unit not in UNITS:
        raise ValueError(f"unit must be one of {UNITS}, got {unit!r}")
    if aggregated.data.shape != (cfg.recon_in(unit),):
        raise ad.ShapeError(
            f"reconstruct {unit}: input {aggregated.data.shape}, expected ({cfg.recon_in(unit)},)"
        )
    h = ad.relu(ad.add(ad.matmul(aggregated, params.tensors[f"recon_{unit}/1/w"]),
                       params.tensors[f"recon_{unit}/1/b"]))
    return ad.add(ad.matmul(h, params.tensors[f"recon_{unit}/2/w"]), params.tensors[f"recon_{unit}/2/b"])


def triad_loss(
    rebuilt: tuple[Tensor, Tensor, Tensor],
    original: tuple[Tensor, Tensor, Tensor],
    mask: tuple[bool, bool, bool] = (True, True, True),
) -> Tensor:
    """Sum of squared L2 distances over the enabled units."""
    if not any(mask):
        raise ValueError("at least one unit loss must be enabled")
    total = None
    for e_hat, e, enabled in zip(rebuilt, original, mask):
        if not enabled:
            continue
        term = ad.l2_sq(e_hat, e)
        total = term if total is None else ad.add(total, term)
    return total


def scene_features(scene: Scene, config: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    """(visual matrix, pair matrix) for a scene, honoring feature options."""
    fv = scene.visual_matrix()
    if fv.shape[1] != config.d_v:
        raise ad.ShapeError(f"scene d_v {fv.shape[1]} != model d_v {config.d_v}")
    if config.l2_normalize_visual:
        norms = np.linalg.norm(fv, axis=1, keepdims=True)
        fv = fv / np.maximum(norms, 1e-12)
    fs = scene.spatial_matrix()
    n = fv.shape[0]
    left = np.repeat(np.hstack([fv, fs]), n, axis=0)
    right = np.tile(np.hstack([fv, fs]), (n, 1))
    fp = np.hstack([left, right])
    return fv, fp


def triad_attention(
    params: ModelParams,
    fv: np.ndarray,
    fp: np.ndarray,
    vectors: tuple[Tensor, Tensor, Tensor],
) -> tuple[Tensor, Tensor, Tensor]:
    """Raw attention scores (a_t, a_r over proposals; a_d over pairs)."""
    e_t, e_r, e_d = vectors
    return (
        target_attention(fv, e_t, params),
        reference_attention(fv, e_r, params),
        discriminative_attention(fp, e_d, params),
    )


def reconstruction_loss(
    params: ModelParams,
    fv: np.ndarray,
    fp: np.ndarray,
    vectors: tuple[Tensor, Tensor, Tensor],
    mode: str | None = None,
    tau: float | None = None,
    mask: tuple[bool, bool, bool] = (True, True, True),
    reconstruction: bool = True,
    projections: dict[str, np.ndarray] | None = None,
    gumbel_rng: np.random.Generator | None = None,
) -> Tensor:
    """Full training loss for one triad on one scene.

    With ``reconstruction=False`` the decoders are bypassed and each
    aggregated feature is compared to the unit embedding after a fixed
    linear projection (``projections``), reconciling the feature and
    embedding widths.
    """
    cfg = params.config
    mode = cfg.mode if mode is None else mode
    tau = cfg.tau if tau is None else tau
    a_t, a_r, a_d = triad_attention(params, fv, fp, vectors)
    f_t = aggregate(a_t, fv, mode, tau, gumbel_rng)
    f_r = aggregate(a_r, fv, mode, tau, gumbel_rng)
    f_d = aggregate(a_d, fp, mode, tau, gumbel_rng)
    if reconstruction:
        rebuilt = (
            reconstruct(f_t, "t", params),
            reconstruct(f_r, "r", params),
            reconstruct(f_d, "d", params),
        )
    else:
        if projections is None:
            raise ValueError("reconstruction=False requires projection matrices")
        rebuilt = (
            ad.matmul(f_t, ad.constant(projections["v"])),
            ad.matmul(f_r, ad.constant(projections["v"])),
            ad.matmul(f_d, ad.constant(projections["p"])),
        )
    return triad_loss(rebuilt, vectors, mask)


def fixed_projections(config: ModelConfig, seed: int) -> dict[str, np.ndarray]:
    """Seeded, non-trainable feature-to-embedding projections used by the
    no-decoder training variant."""
    rng = np.random.default_rng(seed)
    return {
        "v": rng.normal(0.0, 1.0 / np.sqrt(config.d_v), (config.d_v, config.d_l)),
        "p": rng.normal(0.0, 1.0 / np.sqrt(config.pair_dim), (config.pair_dim, config.d_l)),
    }
