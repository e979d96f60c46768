"""Rule-based conversion of dependency parses into discriminative triads.

A discriminative triad (target, reference, discriminative) names the
referent, the object it is compared against, and the word that tells them
apart.  A query like "black cat" yields (cat, cat, black): the reference
collapses onto the target when the cue is a plain attribute.  "cat on a
table" yields (cat, table, on).  Complex queries yield several triads;
queries without a noun fall back to (UKN, UKN, word) per content word,
and bare nouns to (noun, noun, SELF).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus_io import DependencyParse, DependencyToken, EmbeddingTable

SELF = "SELF"
UKN = "UKN"

NOUN_TAGS = {"NN", "NNS", "NNP", "NNPS"}
VERB_TAGS = {"VB", "VBD", "VBG", "VBN", "VBP", "VBZ"}

# Relations that never produce a triad on their own.
_SKIP_RELATIONS = {"det", "case", "punct", "cc", "mark", "aux", "cop", "nsubj", "csubj", "expl"}
# Nominal modifiers: both the UD spelling (nmod/obl + case) and the older
# collapsed spelling (prep) are accepted.
_NOMINAL_RELATIONS = {"nmod", "obl", "prep"}
_VERBAL_RELATIONS = {"acl", "relcl", "partmod", "vmod"}
_OBJECT_RELATIONS = {"obj", "dobj"}
_CASE_RELATIONS = {"case", "prep"}
# Relations that make a noun subordinate to another noun, for target choice.
_SUBORDINATE_RELATIONS = _NOMINAL_RELATIONS | _OBJECT_RELATIONS | {"pobj", "appos", "poss"}


def _base(relation: str) -> str:
    """Relation label without its subtype, e.g. nmod:poss -> nmod."""
    return relation.split(":", 1)[0]

# POS tags excluded from the no-noun fallback (function words).
_FUNCTION_TAGS = {"DT", "IN", "CC", "TO", "EX", "POS", "WDT", "MD", "UH", "PUNCT", ".", ",", ":", "HYPH", "SYM"}


@dataclass(frozen=True)
class DiscriminativeTriad:
    target: str
    reference: str
    discriminative: str
    triad_id: int  # 1-based within the query

    def __post_init__(self):
        if not (self.target and self.reference and self.discriminative):
            raise ValueError("triad units must be non-empty")
        if self.discriminative == SELF and self.target != self.reference:
            raise ValueError(f"SELF triad must have target == reference, got {self}")
        if self.target == UKN and self.reference != UKN:
            raise ValueError(f"UKN target requires UKN reference, got {self}")

    def units(self) -> tuple[str, str, str]:
        return (self.target, self.reference, self.discriminative)


@dataclass(frozen=True)
class ParsedQuery:
    query_id: str
    triads: tuple[DiscriminativeTriad, ...]
    source_parse: DependencyParse | None = None

    def __post_init__(self):
        if len(self.triads) == 0:
            raise ValueError(f"{self.query_id}: a query must carry at least one triad")

    def unit_triples(self) -> list[tuple[str, str, str]]:
        return [t.units() for t in self.triads]


def _is_noun(token: DependencyToken) -> bool:
    return token.pos in NOUN_TAGS


def _is_verb(token: DependencyToken) -> bool:
    return token.pos in VERB_TAGS


def select_target_unit(parse: DependencyParse) -> int | None:
    """Index of the target noun, or None when the parse has no noun.

    Picks the leftmost noun that is not subordinate to another noun:
    compound parts of a later head noun and nominal dependents of an
    earlier noun are skipped, which matches reading off the head noun of
    the first noun phrase.
    """
    for tok in parse.tokens:
        if not _is_noun(tok):
            continue
        head = parse.token(tok.head) if tok.head else None
        if head is not None and _is_noun(head):
            if _base(tok.relation) in {"compound", "nn"}:
                continue
            if head.index < tok.index and _base(tok.relation) in _SUBORDINATE_RELATIONS:
                continue
        return tok.index
    return None


def _case_marker(parse: DependencyParse, noun: DependencyToken) -> DependencyToken | None:
    for child in parse.children(noun.index):
        if _base(child.relation) in _CASE_RELATIONS:
            return child
    return None


def _conj_verbs(parse: DependencyParse, verb: DependencyToken) -> list[DependencyToken]:
    """The verb itself plus verbs coordinated with it, transitively."""
    out, queue = [], [verb]
    seen = set()
    while queue:
        v = queue.pop(0)
        if v.index in seen:
            continue
        seen.add(v.index)
        out.append(v)
        for child in parse.children(v.index):
            if _base(child.relation) == "conj" and _is_verb(child):
                queue.append(child)
    return out


def extract_triads(parse: DependencyParse) -> ParsedQuery:
    """Convert one dependency parse into its discriminative triads.

    With target noun T the rules are, in emission order:

    * unary       - a plain modifier of T (amod, advmod, ...) becomes
                    (T, T, modifier);
    * nominal     - a noun R attached to T via nmod/obl/prep becomes
                    (T, R, case-marker); a non-noun dependent on those
                    relations is treated as an attribute, (T, T, word);
    * verbal      - a verb V modifying T (acl) or governed by T (T is its
                    nsubj), including verbs conjoined to V: each direct
                    object R gives (T, R, V); obliques with a case marker
                    give (T, R, marker); a bare V gives (T, T, V);
    * recursion   - each reference noun R found above gets the unary rule
                    applied once, emitting (R, R, modifier);
    * fallbacks   - no noun in the parse: (UKN, UKN, w) for every content
                    word w; a noun with no matched rule: (T, T, SELF).

    Exact duplicate triads are collapsed; the first occurrence wins.
    """
    target_idx = select_target_unit(parse)
    raw: list[tuple[str, str, str]] = []

    if target_idx is None:
        content = [t.surface for t in parse.tokens if t.pos not in _FUNCTION_TAGS]
        if not content:
            content = [t.surface for t in parse.tokens]
        raw = [(UKN, UKN, w) for w in content]
        return _finish(parse, raw)

    target = parse.token(target_idx)
    references: list[DependencyToken] = []

    def is_unary_edge(child: DependencyToken) -> bool:
        base = _base(child.relation)
        return base not in _SKIP_RELATIONS and base not in _NOMINAL_RELATIONS \
            and base not in _VERBAL_RELATIONS and base not in _OBJECT_RELATIONS \
            and base != "conj"

    def verbal(verb: DependencyToken):
        for v in _conj_verbs(parse, verb):
            emitted = False
            for child in parse.children(v.index):
                if _base(child.relation) in _OBJECT_RELATIONS and _is_noun(child):
                    raw.append((target.surface, child.surface, v.surface))
                    references.append(child)
                    emitted = True
            for child in parse.children(v.index):
                if _base(child.relation) in _NOMINAL_RELATIONS and _is_noun(child):
                    marker = _case_marker(parse, child)
                    if marker is not None:
                        raw.append((target.surface, child.surface, marker.surface))
                        references.append(child)
                        emitted = True
            if not emitted:
                raw.append((target.surface, target.surface, v.surface))

    # unary pass
    for child in parse.children(target_idx):
        if is_unary_edge(child):
            raw.append((target.surface, target.surface, child.surface))

    # nominal and verbal passes, in token order
    for child in parse.children(target_idx):
        base = _base(child.relation)
        if base in _VERBAL_RELATIONS:
            if _is_verb(child):
                verbal(child)
            else:
                raw.append((target.surface, target.surface, child.surface))
        elif base in _NOMINAL_RELATIONS:
            if _is_noun(child):
                marker = _case_marker(parse, child)
                if marker is not None:
                    raw.append((target.surface, child.surface, marker.surface))
                    references.append(child)
            else:
                raw.append((target.surface, target.surface, child.surface))

    # a verb governing the target as its subject
    if _base(target.relation) == "nsubj" and target.head and _is_verb(parse.token(target.head)):
        verbal(parse.token(target.head))

    # one level of recursion: unary rule on each reference noun
    for ref in references:
        for child in parse.children(ref.index):
            if is_unary_edge(child):
                raw.append((ref.surface, ref.surface, child.surface))

    if not raw:
        raw = [(target.surface, target.surface, SELF)]
    return _finish(parse, raw)


def _finish(parse: DependencyParse, raw: list[tuple[str, str, str]]) -> ParsedQuery:
    seen: set[tuple[str, str, str]] = set()
    triads = []
    for units in raw:
        if units in seen:
            continue
        seen.add(units)
        triads.append(DiscriminativeTriad(*units, triad_id=len(triads) + 1))
    return ParsedQuery(query_id=parse.sentence_id, triads=tuple(triads), source_parse=parse)


def triads_to_embeddings(
    query: ParsedQuery, table: EmbeddingTable
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Embedding triple per triad; unknown words use the OOV row."""
    return [
        (table.lookup(t.target), table.lookup(t.reference), table.lookup(t.discriminative))
        for t in query.triads
    ]
