"""Synthetic scenes with planted, decodable structure.

Each scene is a set of boxed proposals on a W x H canvas.  A proposal's
visual feature is one-hot(category) + one-hot(attribute) on the leading
slots plus gaussian noise, so a correctly-attending model can recover
what each word refers to.  Geometric relations (on / under / left_of /
right_of) are defined by explicit box predicates, which makes every
generated query brute-force checkable: a query is only emitted if exactly
one proposal satisfies all of its triads.

Ground truth lives in the scene file but is only surfaced when the reader
is explicitly asked for it; the trainer never sets that flag.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .corpus_io import DependencyParse, DependencyToken
from .triads import SELF, DiscriminativeTriad, ParsedQuery


class GenerationError(ValueError):
    """Scene configuration cannot be satisfied."""


class AmbiguityError(ValueError):
    """No triad set singles out the requested target."""


@dataclass(frozen=True)
class Box:
    x_tl: float
    y_tl: float
    x_br: float
    y_br: float

    def __post_init__(self):
        if not (self.x_tl < self.x_br and self.y_tl < self.y_br):
            raise ValueError(f"degenerate box {self}")

    @property
    def width(self) -> float:
        return self.x_br - self.x_tl

    @property
    def height(self) -> float:
        return self.y_br - self.y_tl

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, other: "Box") -> bool:
        return (
            self.x_tl <= other.x_tl
            and self.y_tl <= other.y_tl
            and self.x_br >= other.x_br
            and self.y_br >= other.y_br
        )

    def as_list(self) -> list[float]:
        return [self.x_tl, self.y_tl, self.x_br, self.y_br]


def spatial_feature(box: Box, width: float, height: float) -> np.ndarray:
    """5-vector [x_tl/W, y_tl/H, x_br/W, y_br/H, area/(W*H)]."""
    if width <= 0 or height <= 0:
        raise ValueError(f"canvas must be positive, got {width} x {height}")
    return np.array(
        [
            box.x_tl / width,
            box.y_tl / height,
            box.x_br / width,
            box.y_br / height,
            box.area / (width * height),
        ],
        dtype=np.float64,
    )


@dataclass
class Proposal:
    box: Box
    visual: np.ndarray          # length d_v
    spatial: np.ndarray         # length 5, from spatial_feature
    category: str
    attribute: str


@dataclass(frozen=True)
class SceneVocabulary:
    """Word lists plus the visual-feature layout that encodes them.

    Slots [0, n_categories) one-hot the category, the next n_attributes
    slots one-hot the attribute, remaining slots are noise padding.
    Positions are unary geometric cues (box-center halves) and relations
    binary ones; both are decodable from spatial features only.
    """

    categories: tuple[str, ...] = ("cat", "dog", "man", "table", "chair", "ball")
    attributes: tuple[str, ...] = ("red", "black", "white", "blue", "green", "yellow")
    relations: tuple[str, ...] = ("on", "under", "left_of", "right_of")
    positions: tuple[str, ...] = ("left", "right", "upper", "lower")

    def __post_init__(self):
        all_words = self.categories + self.attributes + self.relations + self.positions
        if len(set(all_words)) != len(all_words):
            raise GenerationError("vocabulary word lists must be disjoint and duplicate-free")

    @property
    def signal_slots(self) -> int:
        return len(self.categories) + len(self.attributes)

    def words(self) -> list[str]:
        return list(self.categories + self.attributes + self.relations + self.positions)


DEFAULT_VOCABULARY = SceneVocabulary()


def relation_holds(name: str, box_i: Box, box_j: Box, width: float, height: float) -> bool:
    """Whether proposal i stands in the named relation to proposal j.

    on:       i rests on top of j (horizontal overlap at least half the
              narrower box, vertical gap at most 5% of the canvas height)
    under:    mirror of on
    left_of / right_of: horizontally disjoint, in the named order
    """
    if name == "on":
        overlap = min(box_i.x_br, box_j.x_br) - max(box_i.x_tl, box_j.x_tl)
        gap = box_j.y_tl - box_i.y_br
        return overlap >= 0.5 * min(box_i.width, box_j.width) and 0.0 <= gap <= 0.05 * height
    if name == "under":
        return relation_holds("on", box_j, box_i, width, height)
    if name == "left_of":
        return box_i.x_br <= box_j.x_tl
    if name == "right_of":
        return box_j.x_br <= box_i.x_tl
    raise ValueError(f"unknown relation {name!r}")


def position_holds(name: str, box: Box, width: float, height: float) -> bool:
    """Unary position of a box by its center: left/right/upper/lower half."""
    cx = (box.x_tl + box.x_br) / 2
    cy = (box.y_tl + box.y_br) / 2
    if name == "left":
        return cx < width / 2
    if name == "right":
        return cx >= width / 2
    if name == "upper":
        return cy < height / 2
    if name == "lower":
        return cy >= height / 2
    raise ValueError(f"unknown position {name!r}")


@dataclass
class SceneQuery:
    query: ParsedQuery
    gt_index: int | None  # hidden during training


@dataclass
class Scene:
    scene_id: str
    width: float
    height: float
    proposals: list[Proposal]
    queries: list[SceneQuery] = field(default_factory=list)
    vocabulary: SceneVocabulary = DEFAULT_VOCABULARY

    def __post_init__(self):
        if len(self.proposals) < 2:
            raise GenerationError(f"{self.scene_id}: need at least 2 proposals")
        for q in self.queries:
            if q.gt_index is not None and not (0 <= q.gt_index < len(self.proposals)):
                raise GenerationError(f"{self.scene_id}: ground-truth index out of range")

    @property
    def n(self) -> int:
        return len(self.proposals)

    def visual_matrix(self) -> np.ndarray:
        return np.stack([p.visual for p in self.proposals])

    def spatial_matrix(self) -> np.ndarray:
        return np.stack([p.spatial for p in self.proposals])

    def pair_matrix(self) -> np.ndarray:
        """All pair features, row-major: row i*N + j describes (i, j)."""
        n = self.n
        rows = [pair_feature(self, i, j) for i in range(n) for j in range(n)]
        return np.stack(rows)


def pair_feature(scene: Scene, i: int, j: int) -> np.ndarray:
    """Concatenation [visual_i, spatial_i, visual_j, spatial_j]."""
    n = scene.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"pair ({i}, {j}) out of range for {n} proposals")
    pi, pj = scene.proposals[i], scene.proposals[j]
    return np.concatenate([pi.visual, pi.spatial, pj.visual, pj.spatial])


# -- brute-force oracle over planted structure --------------------------------

def triad_satisfiers(scene: Scene, units: tuple[str, str, str]) -> set[int]:
    """Proposal indices satisfying one triad, by direct predicate evaluation."""
    target_word, reference_word, cue = units
    out: set[int] = set()
    for i, p in enumerate(scene.proposals):
        if p.category != target_word:
            continue
        if cue == SELF:
            out.add(i)
        elif cue in scene.vocabulary.relations:
            for j, q in enumerate(scene.proposals):
                if j != i and q.category == reference_word and relation_holds(
                    cue, p.box, q.box, scene.width, scene.height
                ):
                    out.add(i)
                    break
        elif cue in scene.vocabulary.positions:
            if reference_word == target_word and position_holds(
                cue, p.box, scene.width, scene.height
            ):
                out.add(i)
        elif reference_word == target_word and p.attribute == cue:
            out.add(i)
    return out


def query_satisfiers(scene: Scene, triples: Iterable[tuple[str, str, str]]) -> set[int]:
    sats = [triad_satisfiers(scene, t) for t in triples]
    return set.intersection(*sats) if sats else set()


# -- generation ---------------------------------------------------------------

@dataclass(frozen=True)
class GenConfig:
    n_proposals: int = 8
    d_v: int = 32
    noise: float = 0.05
    queries_per_scene: int = 2
    width: float = 640.0
    height: float = 480.0
    category_pool: int = 5          # per-scene category subset; words must be
                                    # absent from some scenes to be learnable
    dominant_group: int = 4         # size of the one repeated-category group
    squeeze_rate: float = 0.35      # scenes confined to one canvas half, so
                                    # position words are absent sometimes too
    stacked_pairs: int = 2          # vertical stacks planted for on/under
    self_rate: float = 0.5          # bare "the <noun>" queries when unique
    unique_target_rate: float = 0.6  # bias toward category-unique targets
    shared_attr_rate: float = 0.1   # scenes with a same-category same-attribute pair
    redundant_rate: float = 0.6     # decoration rate on category-unique queries
    dup_decoration_rate: float = 0.5  # decoration rate on same-category queries
    max_attempts: int = 50

    def validate(self, vocab: SceneVocabulary):
        if self.n_proposals < 2:
            raise GenerationError("need at least 2 proposals")
        if self.d_v < vocab.signal_slots:
            raise GenerationError(
                f"d_v={self.d_v} cannot hold {vocab.signal_slots} one-hot slots"
            )
        if not (1 <= self.category_pool <= len(vocab.categories)):
            raise GenerationError(f"category_pool={self.category_pool} out of range")
        if self.category_pool > self.n_proposals:
            raise GenerationError(
                f"category_pool={self.category_pool} requires more distinct objects "
                f"than n_proposals={self.n_proposals}"
            )
        if not (2 <= self.dominant_group <= self.n_proposals - self.category_pool + 1):
            raise GenerationError(
                f"dominant_group={self.dominant_group} does not fit "
                f"{self.n_proposals} proposals over a pool of {self.category_pool}"
            )
        if self.dominant_group > len(vocab.attributes):
            raise GenerationError("dominant_group exceeds the attribute vocabulary")
        if self.noise < 0:
            raise GenerationError("noise must be non-negative")
        if self.queries_per_scene < 0:
            raise GenerationError("queries_per_scene must be non-negative")


def _place_boxes(config: GenConfig, rng: np.random.Generator) -> list[Box]:
    n = config.n_proposals
    # 4 columns x up to 4 rows: cells split cleanly into canvas quadrants,
    # so box centers land decisively in one horizontal and one vertical half
    ncols = min(4, n) if n <= 4 else 4
    nrows = math.ceil(n / ncols)
    if nrows > 4:
        raise GenerationError(f"n_proposals={n} exceeds the 4-row placement grid")

    # occasionally confine the whole layout to one canvas half, so each
    # position word has scenes where nothing satisfies it
    x_lo, x_hi, y_lo, y_hi = 0.0, config.width, 0.0, config.height
    if rng.random() < config.squeeze_rate:
        side = ("left", "right", "upper", "lower")[int(rng.integers(4))]
        if side == "left":
            x_hi = 0.45 * config.width
        elif side == "right":
            x_lo = 0.55 * config.width
        elif side == "upper":
            y_hi = 0.45 * config.height
        else:
            y_lo = 0.55 * config.height
    cw, ch = (x_hi - x_lo) / ncols, (y_hi - y_lo) / nrows

    cells = [(r, c) for r in range(nrows) for c in range(ncols)]
    order = rng.permutation(len(cells))[:n]
    assigned = [cells[k] for k in order]

    boxes: list[Box] = []
    for r, c in assigned:
        mx1, mx2 = rng.uniform(0.05, 0.25, 2) * cw
        # vertical margins >= 0.16 keep accidental vertical gaps above the
        # 5%-of-canvas "on" threshold even in squeezed layouts
        my1, my2 = rng.uniform(0.16, 0.30, 2) * ch
        boxes.append(
            Box(x_lo + c * cw + mx1, y_lo + r * ch + my1,
                x_lo + (c + 1) * cw - mx2, y_lo + (r + 1) * ch - my2)
        )

    # plant vertical stacks so on/under relations exist
    cell_of = {k: assigned[k] for k in range(n)}
    adjacent = [
        (u, l)
        for u in range(n)
        for l in range(n)
        if cell_of[u][1] == cell_of[l][1] and cell_of[l][0] == cell_of[u][0] + 1
    ]
    rng.shuffle(adjacent)
    used: set[int] = set()
    planted = 0
    for u, l in adjacent:
        if planted >= config.stacked_pairs or u in used or l in used:
            continue
        used.update((u, l))
        planted += 1
        lower = boxes[l]
        gap = rng.uniform(0.005, 0.04) * config.height
        y_br = lower.y_tl - gap
        y_tl = max(y_lo + cell_of[u][0] * ch + 0.05 * ch, y_br - rng.uniform(0.35, 0.70) * ch)
        w_u = rng.uniform(0.5, 0.9) * lower.width
        x_c = (lower.x_tl + lower.x_br) / 2
        col = cell_of[u][1]
        x_tl = max(x_lo + col * cw + 0.02 * cw, x_c - w_u / 2)
        x_br = min(x_lo + (col + 1) * cw - 0.02 * cw, x_c + w_u / 2)
        boxes[u] = Box(x_tl, y_tl, x_br, y_br)
    return boxes


def _assign_categories(
    n_categories: int, config: GenConfig, rng: np.random.Generator
) -> list[int]:
    """One repeated-category group plus distinct singletons, drawn from a
    per-scene category subset.  Every category is missing from some scenes
    (that absence is what makes category words identifiable), and the
    repeated group is where same-category discrimination happens."""
    pool = rng.permutation(n_categories)[: config.category_pool]
    cats = [int(pool[0])] * config.dominant_group
    rest = config.n_proposals - config.dominant_group
    cats += [int(pool[1 + (k % (len(pool) - 1))]) for k in range(rest)]
    order = rng.permutation(config.n_proposals)
    return [cats[k] for k in order]


def _assign_attributes(
    cat_idx: list[int], n_attributes: int, config: GenConfig, rng: np.random.Generator
) -> list[int]:
    """Attributes distinct within each category group, so an attribute word
    usually singles an object out among same-category rivals; a fraction of
    scenes keeps one deliberate same-category same-attribute pair."""
    attr_idx = [0] * len(cat_idx)
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(cat_idx):
        groups.setdefault(c, []).append(i)
    for members in groups.values():
        perm = list(rng.permutation(n_attributes))
        for k, i in enumerate(members):
            attr_idx[i] = int(perm[k % n_attributes])
    dup_groups = [m for m in groups.values() if len(m) >= 2]
    if dup_groups and rng.random() < config.shared_attr_rate:
        members = dup_groups[int(rng.integers(len(dup_groups)))]
        a, b = pick2 = rng.permutation(len(members))[:2]
        attr_idx[members[int(b)]] = attr_idx[members[int(a)]]
    return attr_idx


def _visual(category_i: int, attribute_i: int, vocab: SceneVocabulary, config: GenConfig,
            rng: np.random.Generator) -> np.ndarray:
    v = np.zeros(config.d_v)
    v[category_i] = 1.0
    v[len(vocab.categories) + attribute_i] = 1.0
    if config.noise > 0:
        v = v + rng.normal(0.0, config.noise, config.d_v)
    return v


def _true_triads(scene: Scene, target: int) -> dict[str, list[tuple[str, str, str]]]:
    p = scene.proposals[target]
    unary = [(p.category, p.category, p.attribute)]
    for name in scene.vocabulary.positions:
        if position_holds(name, p.box, scene.width, scene.height):
            unary.append((p.category, p.category, name))
    rels: list[tuple[str, str, str]] = []
    seen = set()
    for name in scene.vocabulary.relations:
        for j, q in enumerate(scene.proposals):
            if j == target:
                continue
            if relation_holds(name, p.box, q.box, scene.width, scene.height):
                units = (p.category, q.category, name)
                if units not in seen:
                    seen.add(units)
                    rels.append(units)
    return {"unary": unary, "rel": rels, "self": [(p.category, p.category, SELF)]}


def generate_query(
    scene: Scene,
    target: int,
    rng: np.random.Generator,
    query_id: str,
    config: GenConfig | None = None,
    want_parse: bool = True,
) -> SceneQuery:
    """A query whose triads exactly one proposal (the target) satisfies.

    Preference order: occasionally a bare noun when the category is unique;
    a single distinguishing unary cue (attribute or position), usually
    padded with other true triads for redundancy; a unary pair when no cue
    distinguishes alone; relations as a last resort.  Raises AmbiguityError
    when nothing up to three triads works.
    """
    config = config or GenConfig()
    if not (0 <= target < scene.n):
        raise IndexError(f"target {target} out of range")
    pools = _true_triads(scene, target)
    attr_unit = pools["unary"][0]
    position_units = pools["unary"][1:]
    rel_units = pools["rel"]
    self_units = pools["self"][0]
    sat = {u: triad_satisfiers(scene, u) for u in pools["unary"] + rel_units + [self_units]}

    def pick(pool: list, k: int) -> list:
        idx = rng.permutation(len(pool))[:k]
        return [pool[int(i)] for i in sorted(idx)]

    chosen: list[tuple[str, str, str]] | None = None
    category_unique = sat[self_units] == {target}

    if category_unique:
        # the category pins the target; describe it simply, sometimes with
        # a decorative (always true) position or relation
        if rng.random() < config.self_rate:
            chosen = [self_units]
        else:
            chosen = [attr_unit]
            if rng.random() < config.redundant_rate:
                pool = rel_units if rel_units and rng.random() < 0.4 else position_units
                chosen = chosen + pick(pool, 1)
    elif sat[attr_unit] == {target}:
        # the attribute singles the target out among same-category rivals;
        # keep these lean, with occasional decoration
        chosen = [attr_unit]
        if position_units and rng.random() < config.dup_decoration_rate:
            chosen = chosen + pick(position_units, 1)
    else:
        # attribute shared: add the position cues that close the gap
        chosen = [attr_unit]
        for u in pick(position_units, len(position_units)):
            if query_satisfiers(scene, chosen) == {target}:
                break
            chosen.append(u)
        if query_satisfiers(scene, chosen) != {target}:
            helpers = [u for u in rel_units if query_satisfiers(scene, chosen + [u]) == {target}]
            chosen = chosen + pick(helpers, 1) if helpers else None

    if chosen is None:
        raise AmbiguityError(f"{scene.scene_id}: no distinguishing description for proposal {target}")

    # canonical order: attributes first, then relations (parse layout order)
    rel_words = set(scene.vocabulary.relations)
    attrs = [u for u in chosen if u[2] not in rel_words and u[2] != SELF]
    rels = [u for u in chosen if u[2] in rel_words]
    selfs = [u for u in chosen if u[2] == SELF]
    ordered = attrs + rels + selfs

    parse = _build_parse(ordered, rel_words, query_id) if want_parse else None
    triads = tuple(
        DiscriminativeTriad(*units, triad_id=k + 1) for k, units in enumerate(ordered)
    )
    query = ParsedQuery(query_id=query_id, triads=triads, source_parse=parse)
    return SceneQuery(query=query, gt_index=target)


def _build_parse(
    ordered: list[tuple[str, str, str]], rel_words: set[str], query_id: str
) -> DependencyParse:
    """Synthetic parse whose triad extraction reproduces ``ordered`` exactly."""
    tokens: list[DependencyToken] = []

    def tok(surface: str, pos: str, head: int, relation: str) -> int:
        tokens.append(DependencyToken(len(tokens) + 1, surface, pos, head, relation))
        return tokens[-1].index

    target_word = ordered[0][0]
    attrs = [u for u in ordered if u[2] != SELF and u[2] not in rel_words]
    rels = [u for u in ordered if u[2] in rel_words]

    if len(ordered) == 1 and ordered[0][2] == SELF:
        det = tok("the", "DT", 0, "det")  # head patched after the noun exists
        noun = tok(target_word, "NN", 0, "root")
        tokens[det - 1] = DependencyToken(det, "the", "DT", noun, "det")
        return DependencyParse(tuple(tokens), query_id)

    for units in attrs:
        tok(units[2], "JJ", 0, "amod")  # heads patched once the noun exists
    noun = tok(target_word, "NN", 0, "root")
    for i in range(len(attrs)):
        t = tokens[i]
        tokens[i] = DependencyToken(t.index, t.surface, t.pos, noun, t.relation)
    for units in rels:
        case = tok(units[2], "IN", 0, "case")
        tok("a", "DT", 0, "det")
        ref = tok(units[1], "NN", noun, "nmod")
        tokens[case - 1] = DependencyToken(case, units[2], "IN", ref, "case")
        tokens[ref - 2] = DependencyToken(ref - 1, "a", "DT", ref, "det")
    return DependencyParse(tuple(tokens), query_id)


def generate_scene(
    vocab: SceneVocabulary,
    config: GenConfig,
    seed,
    scene_id: str = "scene",
) -> Scene:
    """Deterministic scene for a seed: boxes, features and unambiguous queries."""
    config.validate(vocab)
    rng = np.random.default_rng(seed)
    for attempt in range(config.max_attempts):
        boxes = _place_boxes(config, rng)
        if any(a.contains(b) for a in boxes for b in boxes if a is not b):
            continue
        cat_idx = _assign_categories(len(vocab.categories), config, rng)
        attr_idx = _assign_attributes(cat_idx, len(vocab.attributes), config, rng)
        proposals = [
            Proposal(
                box=box,
                visual=_visual(ci, ai, vocab, config, rng),
                spatial=spatial_feature(box, config.width, config.height),
                category=vocab.categories[ci],
                attribute=vocab.attributes[ai],
            )
            for box, ci, ai in zip(boxes, cat_idx, attr_idx)
        ]
        scene = Scene(scene_id, config.width, config.height, proposals, [], vocab)
        counts = {c: cat_idx.count(c) for c in set(cat_idx)}
        unique_targets = [i for i, c in enumerate(cat_idx) if counts[c] == 1]
        dup_targets = [i for i, c in enumerate(cat_idx) if counts[c] > 1]
        queries: list[SceneQuery] = []
        ok = True
        for qn in range(config.queries_per_scene):
            prefer_unique = rng.random() < config.unique_target_rate
            first = unique_targets if prefer_unique else dup_targets
            second = dup_targets if prefer_unique else unique_targets
            targets = []
            for pool in (first, second):
                targets += [pool[int(k)] for k in rng.permutation(len(pool))]
            for t in targets:
                try:
                    queries.append(
                        generate_query(scene, int(t), rng, f"{scene_id}-q{qn + 1}", config)
                    )
                    break
                except AmbiguityError:
                    continue
            else:
                ok = False
                break
        if not ok:
            continue
        scene.queries = queries
        return scene
    raise GenerationError(f"{scene_id}: no valid scene after {config.max_attempts} attempts")


def generate_scenes(
    vocab: SceneVocabulary, config: GenConfig, count: int, base_seed: int, prefix: str = "scene"
) -> list[Scene]:
    return [
        generate_scene(vocab, config, (base_seed, k), f"{prefix}-{base_seed}-{k:05d}")
        for k in range(count)
    ]


# -- JSON-lines scene files ----------------------------------------------------

def scene_to_json(scene: Scene) -> str:
    def query_obj(sq: SceneQuery) -> dict:
        obj: dict = {
            "query_id": sq.query.query_id,
            "triads": [list(t.units()) for t in sq.query.triads],
            "gt": sq.gt_index,
        }
        if sq.query.source_parse is not None:
            obj["parse"] = [
                [t.index, t.surface, t.pos, t.head, t.relation]
                for t in sq.query.source_parse.tokens
            ]
        return obj

    return json.dumps(
        {
            "scene_id": scene.scene_id,
            "width": scene.width,
            "height": scene.height,
            "proposals": [
                {
                    "box": p.box.as_list(),
                    "visual": [float(v) for v in p.visual],
                    "category": p.category,
                    "attribute": p.attribute,
                }
                for p in scene.proposals
            ],
            "queries": [query_obj(q) for q in scene.queries],
        },
        sort_keys=True,
    )


def scene_from_json(line: str, with_ground_truth: bool = False) -> Scene:
    obj = json.loads(line)
    width, height = float(obj["width"]), float(obj["height"])
    proposals = []
    for p in obj["proposals"]:
        box = Box(*p["box"])
        proposals.append(
            Proposal(
                box=box,
                visual=np.array(p["visual"], dtype=np.float64),
                spatial=spatial_feature(box, width, height),
                category=p.get("category", ""),
                attribute=p.get("attribute", ""),
            )
        )
    queries = []
    for q in obj["queries"]:
        parse = None
        if q.get("parse"):
            parse = DependencyParse(
                tuple(DependencyToken(*row) for row in q["parse"]), q["query_id"]
            )
        triads = tuple(
            DiscriminativeTriad(*units, triad_id=k + 1)
            for k, units in enumerate(q["triads"])
        )
        queries.append(
            SceneQuery(
                query=ParsedQuery(q["query_id"], triads, parse),
                gt_index=q.get("gt") if with_ground_truth else None,
            )
        )
    return Scene(obj["scene_id"], width, height, proposals, queries)


def write_scenes(scenes: Iterable[Scene], stream: IO[str]):
    for scene in scenes:
        stream.write(scene_to_json(scene) + "\n")


def load_scenes(path: str | Path, with_ground_truth: bool = False) -> list[Scene]:
    """Read a JSON-lines scene file.

    ``with_ground_truth`` controls whether query ground-truth indices are
    surfaced; training code never sets it.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(scene_from_json(line, with_ground_truth))
    return out
