"""Command-line entry point.

Subcommands: parse, gen-scenes, train, eval, ground, ablate, gradcheck.
Every run is seeded explicitly; outputs are written to a temp file and
renamed so failures never leave partial files.  Exit codes: 0 success,
2 missing input file, 3 invalid configuration, 4 internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from . import autodiff as ad
from .corpus_io import (
    CheckpointError,
    EmbeddingFormatError,
    ParseFormatError,
    ParseStructureError,
    load_checkpoint,
    load_embeddings,
    random_embeddings,
    read_parses,
    save_checkpoint,
    write_embeddings,
    write_report,
)
from .grounding import ScoreWeights, evaluate, ground
from .model import (
    ModelConfig,
    ModelParams,
    reconstruction_loss,
    scene_features,
    triad_vectors,
)
from .scenes import (
    DEFAULT_VOCABULARY,
    GenConfig,
    GenerationError,
    generate_scene,
    generate_scenes,
    load_scenes,
    write_scenes,
)
from .training import (
    AblationConfig,
    TrainConfig,
    TrainingDivergedError,
    ablate,
    train,
)
from .triads import extract_triads

EXIT_OK = 0
EXIT_MISSING_FILE = 2
EXIT_BAD_CONFIG = 3
EXIT_INTERNAL = 4

CHECKPOINT_FORMAT_VERSION = 1


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _require(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {path}", EXIT_MISSING_FILE)
    return p


def _atomic_write(path: str, writer):
    """Write via temp file + rename; never leaves a partial output."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        "w", dir=target.parent, prefix=target.name + ".", delete=False, encoding="utf-8"
    ) as fh:
        writer(fh)
        tmp = Path(fh.name)
    tmp.replace(target)


def _load_toml(path: str | None) -> dict:
    if path is None:
        return {}
    with open(_require(path), "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise CliError(f"bad config file {path}: {exc}", EXIT_BAD_CONFIG) from None


def _dataclass_from(cls, table: dict, overrides: dict):
    """Build a config dataclass from a TOML table plus CLI overrides."""
    known = {f.name for f in fields(cls)}
    unknown = set(table) - known
    if unknown:
        raise CliError(f"unknown config keys for {cls.__name__}: {sorted(unknown)}", EXIT_BAD_CONFIG)
    merged = dict(table)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return cls(**merged)
    except (TypeError, ValueError, GenerationError) as exc:
        raise CliError(f"invalid {cls.__name__}: {exc}", EXIT_BAD_CONFIG) from None


def cmd_parse(args) -> int:
    parses = read_parses(_require(args.infile))
    rows = []
    for parse in parses:
        query = extract_triads(parse)
        for triad in query.triads:
            rows.append(
                f"{query.query_id}\t{triad.triad_id}\t{triad.target}\t{triad.reference}\t{triad.discriminative}"
            )
    _atomic_write(args.out, lambda fh: fh.write("\n".join(rows) + "\n"))
    print(f"parsed {len(parses)} queries -> {len(rows)} triads -> {args.out}")
    return EXIT_OK


def cmd_gen_scenes(args) -> int:
    cfg_table = _load_toml(args.config).get("scenes", {})
    overrides = {
        "n_proposals": args.n_proposals,
        "noise": args.noise,
        "d_v": args.d_v,
        "queries_per_scene": args.queries,
    }
    config = _dataclass_from(GenConfig, cfg_table, overrides)
    try:
        config.validate(DEFAULT_VOCABULARY)
    except GenerationError as exc:
        raise CliError(str(exc), EXIT_BAD_CONFIG) from None
    scenes = generate_scenes(DEFAULT_VOCABULARY, config, args.n, base_seed=args.seed)
    _atomic_write(args.out, lambda fh: write_scenes(scenes, fh))
    print(f"wrote {len(scenes)} scenes to {args.out}")
    if args.emb_out:
        table = random_embeddings(DEFAULT_VOCABULARY.words(), args.d_l, seed=args.seed)
        _atomic_write(args.emb_out, lambda fh: write_embeddings(table, fh))
        print(f"wrote {len(table.words())} embeddings (d_l={args.d_l}) to {args.emb_out}")
    return EXIT_OK


def _model_config(toml_data: dict, d_v: int, d_l: int, args) -> ModelConfig:
    overrides = {
        "tau": getattr(args, "tau", None),
        "mode": getattr(args, "mode", None),
    }
    cfg = _dataclass_from(ModelConfig, toml_data.get("model", {}), overrides)
    return replace(cfg, d_v=d_v, d_l=d_l)


def cmd_train(args) -> int:
    toml_data = _load_toml(args.config)
    scenes = load_scenes(_require(args.scenes))
    if not scenes:
        raise CliError(f"{args.scenes}: no scenes", EXIT_BAD_CONFIG)
    d_v = scenes[0].visual_matrix().shape[1]
    table_path = _require(args.emb)
    mask = None
    if args.loss_mask:
        bits = args.loss_mask.split(",")
        if len(bits) != 3 or set(bits) - {"0", "1"}:
            raise CliError("--loss-mask expects three 0/1 flags, e.g. 1,1,1", EXIT_BAD_CONFIG)
        mask = tuple(b == "1" for b in bits)
    overrides = {
        "epochs": args.epochs,
        "seed": args.seed,
        "lr": args.lr,
        "lr_preset": args.preset,
        "mode": args.mode,
        "tau": args.tau,
        "batch_size": args.batch,
        "loss_mask": mask,
        "reconstruction": None if args.no_reconstruction is None else not args.no_reconstruction,
    }
    train_cfg = _dataclass_from(TrainConfig, toml_data.get("train", {}), overrides)
    model_cfg = _model_config(toml_data, d_v, args.d_l, args)
    table = load_embeddings(table_path, dimension=args.d_l)
    try:
        result = train(scenes, table, train_cfg, model_cfg)
    except TrainingDivergedError as exc:
        save_checkpoint(exc.last_good, args.out)
        print(f"error: {exc}; last good checkpoint saved to {args.out}", file=sys.stderr)
        return EXIT_INTERNAL
    save_checkpoint(result.params, args.out)
    if args.log:
        _atomic_write(args.log, lambda fh: write_report(result.log, fh))
    final = result.log[-1]["loss"] if result.log else float("nan")
    print(f"trained {result.steps} steps; final logged loss {final:.4f}; checkpoint -> {args.out}")
    return EXIT_OK


def _weights(args) -> ScoreWeights:
    try:
        return ScoreWeights(alpha=args.alpha, beta=args.beta, gamma=args.gamma)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_BAD_CONFIG) from None


def cmd_eval(args) -> int:
    scenes = load_scenes(_require(args.scenes), with_ground_truth=True)
    params = _load_ckpt(args.ckpt)
    table = load_embeddings(_require(args.emb), dimension=params.config.d_l)
    report = evaluate(scenes, params, table, _weights(args))
    rows = report.rows + [{"summary": report.summary()}]
    _atomic_write(args.report, lambda fh: write_report(rows, fh))
    print(f"accuracy {report.accuracy:.4f} over {report.n_queries} queries -> {args.report}")
    return EXIT_OK


def _load_ckpt(path: str) -> ModelParams:
    try:
        return load_checkpoint(_require(path))
    except CheckpointError as exc:
        raise CliError(str(exc), EXIT_INTERNAL) from None


def cmd_ground(args) -> int:
    scenes = load_scenes(_require(args.scene), with_ground_truth=False)
    params = _load_ckpt(args.ckpt)
    table = load_embeddings(_require(args.emb), dimension=params.config.d_l)
    for scene in scenes:
        for sq in scene.queries:
            if sq.query.query_id != args.query_id:
                continue
            result = ground(sq.query, scene, params, table, _weights(args))
            box = scene.proposals[result.chosen].box
            print(f"query {args.query_id}: proposal {result.chosen} box={box.as_list()}")
            for k, triad in enumerate(sq.query.triads):
                scores = " ".join(f"{s:+.3f}" for s in result.triad_scores[k])
                ref = result.chosen_refs[k]
                print(f"  triad {triad.units()} ref={ref} scores: {scores}")
            total = " ".join(f"{s:+.3f}" for s in result.sentence_scores)
            print(f"  sentence scores: {total}")
            return EXIT_OK
    raise CliError(f"query id {args.query_id!r} not found in {args.scene}", EXIT_BAD_CONFIG)


def cmd_ablate(args) -> int:
    seeds = tuple(int(s) for s in args.seeds.split(","))
    config = AblationConfig(seeds=seeds)
    if args.fast:
        config = replace(config, train_scenes=120, eval_scenes=60, epochs=1)
    report = ablate(config, verbose=args.verbose)
    _atomic_write(args.out, lambda fh: fh.write(json.dumps(report.as_dict(), indent=2) + "\n"))
    width = max(map(len, report.means))
    for variant, mean in report.means.items():
        print(f"{variant:<{width}}  {mean:.3f}")
    print(f"report -> {args.out}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .scenes import SceneVocabulary

    vocab = SceneVocabulary(
        categories=("cat", "dog"),
        attributes=("red", "black"),
        relations=("on", "under", "left_of", "right_of"),
    )
    gen = GenConfig(
        n_proposals=args.n, d_v=args.d_v, noise=0.05, queries_per_scene=1,
        category_pool=2, dominant_group=2, stacked_pairs=1,
    )
    scene = generate_scene(vocab, gen, args.seed, "gradcheck")
    table = random_embeddings(vocab.words(), args.d_l, seed=args.seed)
    cfg = ModelConfig(d_v=args.d_v, d_l=args.d_l, hidden_attn=8, hidden_recon=6)
    params = ModelParams.init(cfg, table, seed=args.seed)
    fv, fp = scene_features(scene, cfg)
    triad = scene.queries[0].query.triads[0]
    worst = 0.0
    for mode in ("soft", "hard"):

        def loss_fn(mode=mode):
            return reconstruction_loss(
                params, fv, fp, triad_vectors(triad, table, params), mode=mode, tau=0.1
            )

        err = ad.gradient_check(loss_fn, params.tensors, h=args.h)
        worst = max(worst, err)
        print(f"{mode} mode: max relative gradient error {err:.3e}")
    if worst >= 1e-4:
        print("gradient check FAILED (tolerance 1e-4)", file=sys.stderr)
        return EXIT_INTERNAL
    print(f"gradient check passed: {worst:.3e} < 1e-4")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triadground",
        description="Weakly-supervised referring-expression grounding on synthetic scenes.",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"triadground {__version__} (checkpoint format v{CHECKPOINT_FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="extract discriminative triads from a parse file")
    p.add_argument("--in", dest="infile", required=True, help="CoNLL-U-style parse file")
    p.add_argument("--out", required=True, help="output TSV (query_id, k, target, reference, cue)")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("gen-scenes", help="generate synthetic scenes as JSON-lines")
    p.add_argument("--n", type=int, default=500, help="number of scenes")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="TOML file with a [scenes] table")
    p.add_argument("--n-proposals", type=int, default=None)
    p.add_argument("--queries", type=int, default=None, help="queries per scene")
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--d-v", type=int, default=None, help="visual feature size")
    p.add_argument("--emb-out", help="also write a seeded embedding table here")
    p.add_argument("--d-l", type=int, default=24, help="embedding size for --emb-out")
    p.set_defaults(fn=cmd_gen_scenes)

    p = sub.add_parser("train", help="weakly-supervised training")
    p.add_argument("--scenes", required=True)
    p.add_argument("--emb", required=True, help="embedding text file")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--config", help="TOML file with [train] and [model] tables")
    p.add_argument("--log", help="JSON-lines loss log")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--preset", choices=("desk", "fullscale"), default=None)
    p.add_argument("--mode", choices=("soft", "hard"), default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--d-l", type=int, default=24, help="embedding size of --emb")
    p.add_argument("--loss-mask", help="target,reference,cue unit losses as 0/1 flags")
    p.add_argument("--no-reconstruction", action="store_const", const=True, default=None,
                   help="train on projected feature distances instead of decoders")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="grounding accuracy at IoU > 0.5")
    p.add_argument("--scenes", required=True)
    p.add_argument("--emb", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--report", required=True, help="JSON-lines report path")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ground", help="ground one query and print its score tables")
    p.add_argument("--scene", required=True, help="scene JSON-lines file")
    p.add_argument("--query-id", required=True)
    p.add_argument("--emb", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.set_defaults(fn=cmd_ground)

    p = sub.add_parser("ablate", help="train and evaluate the ablation variants")
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--seeds", default="1,2,3", help="comma-separated seeds")
    p.add_argument("--fast", action="store_true", help="reduced data for a quick look")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("gradcheck", help="finite-difference check of the full loss path")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--d-v", type=int, default=4)
    p.add_argument("--d-l", type=int, default=4)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--h", type=float, default=1e-4)
    p.set_defaults(fn=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ParseFormatError, ParseStructureError, EmbeddingFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except (ad.NonFiniteError, ad.ShapeError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
