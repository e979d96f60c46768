"""Interchange formats: dependency-parse files, embedding tables,
checkpoints and metric reports.

Parse files use a 10-column CoNLL-U-style layout (tab separated, blank
line between sentences): column 1 is the 1-based token index, 2 the
surface form, 4 the POS tag, 7 the head index (0 = root) and 8 the
relation label; the remaining columns are ignored on read and written as
"_".  Comment lines starting with "#" may carry ``sent_id``.  All
surfaces are lowercased at ingestion.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .model import ModelParams


class ParseFormatError(ValueError):
    """Malformed row in a parse file (carries the 1-based line number)."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseStructureError(ValueError):
    """Token table does not form a single rooted tree."""


class EmbeddingFormatError(ValueError):
    """Malformed row in an embedding text file."""


class CheckpointError(ValueError):
    """Unreadable checkpoint container."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint written with an unsupported format version."""


@dataclass(frozen=True)
class DependencyToken:
    index: int          # 1-based position in the sentence
    surface: str        # lowercase word
    pos: str            # POS tag, e.g. NN / JJ / VBG / IN / DT
    head: int           # head token index, 0 for the root
    relation: str       # dependency label, e.g. amod / nmod / case / det

    def __post_init__(self):
        if self.index < 1:
            raise ParseStructureError(f"token index must be >= 1, got {self.index}")
        if self.head < 0:
            raise ParseStructureError(f"head must be >= 0, got {self.head}")
        if self.head == self.index:
            raise ParseStructureError(f"token {self.index} ({self.surface!r}) is its own head")
        if not self.relation:
            raise ParseStructureError(f"token {self.index} has an empty relation")


@dataclass(frozen=True)
class DependencyParse:
    tokens: tuple[DependencyToken, ...]
    sentence_id: str

    def __post_init__(self):
        n = len(self.tokens)
        if n == 0:
            raise ParseStructureError(f"{self.sentence_id}: empty sentence")
        for want, tok in enumerate(self.tokens, start=1):
            if tok.index != want:
                raise ParseStructureError(
                    f"{self.sentence_id}: token indices must be 1..{n} in order"
                )
            if tok.head > n:
                raise ParseStructureError(
                    f"{self.sentence_id}: token {tok.index} points at missing head {tok.head}"
                )
        roots = [t.index for t in self.tokens if t.head == 0]
        if len(roots) != 1:
            raise ParseStructureError(
                f"{self.sentence_id}: expected exactly one root, found {len(roots)}"
            )
        # cycle check: every token must reach the root
        for tok in self.tokens:
            seen = set()
            cur = tok.index
            while cur != 0:
                if cur in seen:
                    raise ParseStructureError(
                        f"{self.sentence_id}: head cycle through token {cur}"
                    )
                seen.add(cur)
                cur = self.tokens[cur - 1].head

    @property
    def root(self) -> DependencyToken:
        return next(t for t in self.tokens if t.head == 0)

    def token(self, index: int) -> DependencyToken:
        return self.tokens[index - 1]

    def children(self, index: int) -> list[DependencyToken]:
        return [t for t in self.tokens if t.head == index]

    def words(self) -> list[str]:
        return [t.surface for t in self.tokens]


def _iter_lines(source: Iterable[str] | IO[str] | str | Path) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as handle:
            yield from handle
    else:
        yield from source


def read_parses(source: Iterable[str] | IO[str] | str | Path) -> list[DependencyParse]:
    """Read all sentence blocks from a parse file, stream or line iterable."""
    parses: list[DependencyParse] = []
    rows: list[DependencyToken] = []
    sent_id: str | None = None

    def flush():
        nonlocal rows, sent_id
        if rows:
            parses.append(
                DependencyParse(tuple(rows), sent_id if sent_id else f"s{len(parses) + 1}")
            )
        rows = []
        sent_id = None

    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("sent_id"):
                _, _, value = body.partition("=")
                sent_id = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseFormatError(f"expected 10 tab-separated columns, got {len(cols)}", lineno)
        try:
            index = int(cols[0])
            head = int(cols[6])
        except ValueError as exc:
            raise ParseFormatError(f"non-integer index or head: {exc}", lineno) from None
        rows.append(
            DependencyToken(
                index=index,
                surface=cols[1].lower(),
                pos=cols[3],
                head=head,
                relation=cols[7],
            )
        )
    flush()
    return parses


def write_parses(parses: Iterable[DependencyParse], stream: IO[str]):
    """Write parses in the 10-column layout; inverse of :func:`read_parses`."""
    for parse in parses:
        stream.write(f"# sent_id = {parse.sentence_id}\n")
        for t in parse.tokens:
            cols = [str(t.index), t.surface, "_", t.pos, "_", "_", str(t.head), t.relation, "_", "_"]
            stream.write("\t".join(cols) + "\n")
        stream.write("\n")


SPECIAL_TOKENS = ("SELF", "UKN", "OOV")


@dataclass
class EmbeddingTable:
    """Word -> float64 vector map with guaranteed SELF/UKN/OOV rows."""

    dimension: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise EmbeddingFormatError(f"dimension must be positive, got {self.dimension}")
        for word, vec in self.vectors.items():
            if vec.shape != (self.dimension,):
                raise EmbeddingFormatError(
                    f"vector for {word!r} has length {vec.shape}, expected {self.dimension}"
                )
        missing = [t for t in SPECIAL_TOKENS if t not in self.vectors]
        if missing:
            raise EmbeddingFormatError(f"missing special rows: {missing}")

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def lookup(self, word: str) -> np.ndarray:
        """Vector for a word; unknown words fall back to the OOV row."""
        vec = self.vectors.get(word)
        return vec if vec is not None else self.vectors["OOV"]

    def words(self) -> list[str]:
        return list(self.vectors)


def load_embeddings(
    source: Iterable[str] | IO[str] | str | Path,
    dimension: int,
    seed: int = 0,
) -> EmbeddingTable:
    """Load a GloVe-style text table (``word v1 .. vD`` per line).

    SELF/UKN/OOV rows absent from the file are drawn uniform(-0.1, 0.1)
    from a generator seeded with ``seed``, so loads are reproducible.
    """
    vectors: dict[str, np.ndarray] = {}
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != dimension + 1:
            raise EmbeddingFormatError(
                f"line {lineno}: expected word + {dimension} values, got {len(parts) - 1}"
            )
        word = parts[0]
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError as exc:
            raise EmbeddingFormatError(f"line {lineno}: {exc}") from None
        if word in vectors:
            warnings.warn(f"duplicate embedding for {word!r} at line {lineno}; keeping the last")
        vectors[word] = vec
    rng = np.random.default_rng(seed)
    for token in SPECIAL_TOKENS:
        draw = rng.uniform(-0.1, 0.1, size=dimension)
        if token not in vectors:
            vectors[token] = draw
    return EmbeddingTable(dimension=dimension, vectors=vectors)


def write_embeddings(table: EmbeddingTable, stream: IO[str]):
    for word, vec in table.vectors.items():
        stream.write(word + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def random_embeddings(words: Iterable[str], dimension: int, seed: int) -> EmbeddingTable:
    """Seeded table for synthetic vocabularies: well-separated rows.

    Rows are non-negative (nothing is lost to the ReLU the attention stacks
    apply to their concatenated input) and near-orthogonal: each word owns
    one strong slot (cycling through dimensions) plus a small random bed,
    so decoders can tell words apart cleanly.
    """
    words = list(words)
    rng = np.random.default_rng(seed)
    vectors: dict[str, np.ndarray] = {}
    for k, w in enumerate(words):
        vec = rng.uniform(0.0, 0.15, size=dimension)
        vec[k % dimension] += 0.8
        vectors[w] = vec
    for token in SPECIAL_TOKENS:
        if token not in vectors:
            vec = rng.uniform(0.0, 0.15, size=dimension)
            vec[len(vectors) % dimension] += 0.8
            vectors[token] = vec
    return EmbeddingTable(dimension=dimension, vectors=vectors)


# Checkpoint container: magic, u32 version, u64 header length, JSON header
# (metadata + tensor names/shapes), then raw float64 little-endian blobs in
# header order.  Round-trips are bit exact.
_CKPT_MAGIC = b"TGCK"
_CKPT_VERSION = 1


def save_checkpoint(params: "ModelParams", path: str | Path):
    tensors = params.numpy_tensors()
    for name, arr in tensors.items():
        if not np.all(np.isfinite(arr)):
            raise CheckpointError(f"refusing to save non-finite tensor {name!r}")
    header = {
        "meta": params.meta(),
        "tensors": [{"name": n, "shape": list(a.shape)} for n, a in tensors.items()],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<IQ", _CKPT_VERSION, len(blob)))
        fh.write(blob)
        for arr in tensors.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> "ModelParams":
    from .model import ModelParams

    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != _CKPT_MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    version, header_len = struct.unpack("<IQ", data[4:16])
    if version != _CKPT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {version}, this build reads {_CKPT_VERSION}"
        )
    if len(data) < 16 + header_len:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(data[16 : 16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt header: {exc}") from None
    offset = 16 + header_len
    tensors: dict[str, np.ndarray] = {}
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 8
        if offset + nbytes > len(data):
            raise CheckpointError(f"{path}: truncated tensor data at {spec['name']!r}")
        tensors[spec["name"]] = (
            np.frombuffer(data[offset : offset + nbytes], dtype="<f8").reshape(shape).copy()
        )
        offset += nbytes
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")
    return ModelParams.from_checkpoint(header["meta"], tensors)


def write_report(rows: Iterable[dict], stream: IO[str]):
    """Metric report as JSON-lines, one object per row."""
    for row in rows:
        stream.write(json.dumps(row, sort_keys=True) + "\n")


def read_report(source: Iterable[str] | IO[str] | str | Path) -> list[dict]:
    return [json.loads(line) for line in _iter_lines(source) if line.strip()]
