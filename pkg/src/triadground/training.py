"""Weakly-supervised training loop and ablation harness.

Training sees (scene features, triad words) pairs only; ground-truth
grounding indices never enter the item list.  Each step draws one triad,
runs the matching/reconstruction forward pass, and takes an Adam step on
the reconstruction loss.  Runs are fully determined by (seed, config,
data).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import autodiff as ad
from .autodiff import Adam, LR_PRESETS
from .corpus_io import EmbeddingTable, random_embeddings
from .grounding import ScoreWeights, evaluate
from .model import (
    ModelConfig,
    ModelParams,
    fixed_projections,
    reconstruction_loss,
    scene_features,
    triad_vectors,
)
from .scenes import GenConfig, Scene, SceneVocabulary, generate_scenes
from .triads import DiscriminativeTriad


class TrainingDivergedError(RuntimeError):
    """Loss or gradients went non-finite; carries the last good parameters."""

    def __init__(self, message: str, step: int, last_good: ModelParams):
        super().__init__(message)
        self.step = step
        self.last_good = last_good


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 3
    lr_preset: str = "desk"        # desk | fullscale, overridden by lr
    lr: float | None = None
    seed: int = 1
    mode: str = "hard"
    tau: float = 0.1
    loss_mask: tuple[bool, bool, bool] = (True, True, True)  # target, reference, cue
    batch_size: int = 1
    reconstruction: bool = True
    log_every: int = 50
    snapshot_every: int = 100      # cadence of the last-good safety copy

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not any(self.loss_mask):
            raise ValueError("at least one unit loss must be enabled")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr is None and self.lr_preset not in LR_PRESETS:
            raise ValueError(f"unknown lr preset {self.lr_preset!r}; have {sorted(LR_PRESETS)}")

    @property
    def resolved_lr(self) -> float:
        return self.lr if self.lr is not None else LR_PRESETS[self.lr_preset]


class TrainItem(NamedTuple):
    """One training sample; deliberately carries no ground-truth field."""

    scene_index: int
    triad: DiscriminativeTriad


@dataclass
class TrainResult:
    params: ModelParams
    log: list[dict]
    steps: int


def training_items(scenes: list[Scene]) -> list[TrainItem]:
    """Flatten scenes into per-triad samples, ignoring any ground truth."""
    items = []
    for si, scene in enumerate(scenes):
        for sq in scene.queries:
            for triad in sq.query.triads:
                items.append(TrainItem(si, triad))
    return items


def train(
    scenes: list[Scene],
    table: EmbeddingTable,
    config: TrainConfig,
    model_config: ModelConfig | None = None,
) -> TrainResult:
    """Optimize the matching and reconstruction modules on weak supervision."""
    if not scenes:
        raise ValueError("empty training set")
    model_config = model_config or ModelConfig(
        d_v=scenes[0].visual_matrix().shape[1], d_l=table.dimension
    )
    model_config = replace(model_config, mode=config.mode, tau=config.tau)
    items = training_items(scenes)
    if not items:
        raise ValueError("training scenes carry no queries")

    seeds = np.random.SeedSequence(config.seed).spawn(3)
    params = ModelParams.init(model_config, table, seed=seeds[0])
    shuffle_rng = np.random.default_rng(seeds[1])
    gumbel_rng = np.random.default_rng(seeds[2]) if model_config.gumbel_noise else None

    features = [scene_features(s, model_config) for s in scenes]
    projections = None if config.reconstruction else fixed_projections(model_config, config.seed)
    optimizer = Adam(lr=config.resolved_lr)
    log: list[dict] = []
    last_good = params.clone()
    step = 0

    def record(loss_value: float):
        if step % config.log_every == 0 or step == total_steps:
            log.append({"step": step, "loss": loss_value})

    n_batches, remainder = divmod(len(items), config.batch_size)
    total_steps = config.epochs * (n_batches + (1 if remainder else 0))

    for _epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(items))
        for start in range(0, len(items), config.batch_size):
            batch = [items[k] for k in order[start : start + config.batch_size]]
            step += 1
            try:
                loss = None
                for item in batch:
                    fv, fp = features[item.scene_index]
                    term = reconstruction_loss(
                        params,
                        fv,
                        fp,
                        triad_vectors(item.triad, table, params),
                        mask=config.loss_mask,
                        reconstruction=config.reconstruction,
                        projections=projections,
                        gumbel_rng=gumbel_rng,
                    )
                    loss = term if loss is None else ad.add(loss, term)
                if len(batch) > 1:
                    loss = ad.scale(loss, 1.0 / len(batch))
                loss_value = loss.item()
                if not np.isfinite(loss_value):
                    raise ad.NonFiniteError(f"loss is {loss_value}")
                grads = ad.gradients(loss, params.tensors)
                optimizer.step(params.tensors, grads)
            except ad.NonFiniteError as exc:
                raise TrainingDivergedError(
                    f"aborted at step {step}: {exc}", step=step, last_good=last_good
                ) from exc
            record(loss_value)
            if step % config.snapshot_every == 0:
                last_good = params.clone()
    return TrainResult(params=params, log=log, steps=step)


# -- ablation harness ----------------------------------------------------------

#: training-time and inference-time switches per ablation variant; the
#: soft baseline aggregates with raw (unnormalized) attention weights,
#: which is the method the sharpened aggregation is compared against
ABLATION_VARIANTS: dict[str, dict] = {
    "full": {},
    "soft": {"mode": "raw"},
    "single_triad": {"eval_single_triad": True},
    "no_decoder": {"reconstruction": False},
    "no_target_loss": {"loss_mask": (False, True, True)},
    "no_reference_loss": {"loss_mask": (True, False, True)},
    "no_cue_loss": {"loss_mask": (True, True, False)},
}


#: ablation data leans on short training and heavily decorated queries so
#: the inference variants separate cleanly at desk scale
ABLATION_GEN = GenConfig(self_rate=0.3, redundant_rate=0.9, dup_decoration_rate=0.9)


@dataclass(frozen=True)
class AblationConfig:
    seeds: tuple[int, ...] = (1, 2, 3)
    train_scenes: int = 300
    eval_scenes: int = 150
    epochs: int = 2
    d_l: int = 24
    gen: GenConfig = ABLATION_GEN
    vocabulary: SceneVocabulary = SceneVocabulary()
    weights: ScoreWeights = ScoreWeights()
    variants: tuple[str, ...] = tuple(ABLATION_VARIANTS)


@dataclass
class AblationReport:
    per_seed: dict[str, dict[int, float]]
    means: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.means:
            self.means = {
                v: float(np.mean(list(accs.values()))) for v, accs in self.per_seed.items()
            }

    def as_dict(self) -> dict:
        return {
            "variants": {
                v: {"per_seed": {str(s): a for s, a in accs.items()}, "mean": self.means[v]}
                for v, accs in self.per_seed.items()
            }
        }


def ablate(config: AblationConfig = AblationConfig(), verbose: bool = False) -> AblationReport:
    """Train and evaluate every variant on shared seeds and shared data.

    The single-triad variant trains identically to the full model (same
    config, same seed gives the same checkpoint), so it reuses the full
    model's parameters and only changes inference.
    """
    results: dict[str, dict[int, float]] = {v: {} for v in config.variants}
    for seed in config.seeds:
        table = random_embeddings(config.vocabulary.words(), config.d_l, seed=seed)
        train_set = generate_scenes(
            config.vocabulary, config.gen, config.train_scenes, base_seed=seed, prefix="train"
        )
        eval_set = generate_scenes(
            config.vocabulary, config.gen, config.eval_scenes, base_seed=seed + 9000, prefix="eval"
        )
        cached_full: ModelParams | None = None
        for variant in config.variants:
            switches = dict(ABLATION_VARIANTS[variant])
            eval_single = switches.pop("eval_single_triad", False)
            train_cfg = TrainConfig(epochs=config.epochs, seed=seed, **switches)
            if eval_single and cached_full is not None:
                params = cached_full
            else:
                params = train(
                    train_set,
                    table,
                    train_cfg,
                    ModelConfig(d_v=config.gen.d_v, d_l=config.d_l),
                ).params
                if variant == "full":
                    cached_full = params
            report = evaluate(
                eval_set,
                params,
                table,
                config.weights,
                single_triad_rng=np.random.default_rng(seed) if eval_single else None,
            )
            results[variant][seed] = report.accuracy
            if verbose:
                print(f"[ablate] seed={seed} {variant}: {report.accuracy:.3f}")
    return AblationReport(per_seed=results)
