"""Semantic statements and compact statement sets.

A statement is either a predicate over two concept arguments with an optional
tense, a bare concept, or a bare tense value.  Bare kinds arise when a
transformation operation projects a slot out of a predicate, e.g. selecting
the subject argument of ``has_color(reptile:frog, color:green)`` yields the
bare concept ``reptile:frog``.

Statement sets are represented per slot as either an explicit id set or a
wildcard with a finite exclusion list (:class:`genparse.sets.SlotSet`), so
intersection and preimages stay closed-form even over large ontologies.
Deleted slots are structural: the sentinel :data:`ABSENT` is a distinct slot
value, not a wildcard.

All values in this module are immutable and freely shareable across threads.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Sequence

from .sets import SlotSet

ABSENT = -1


class SemanticsError(ValueError):
    pass


class Tense(enum.IntEnum):
    NONE = 0
    PAST = 1
    PRESENT = 2
    FUTURE = 3


ALL_TENSES = frozenset(Tense)

TENSE_NAMES = {Tense.NONE: "none", Tense.PAST: "past",
               Tense.PRESENT: "present", Tense.FUTURE: "future"}
TENSE_BY_NAME = {name: tense for tense, name in TENSE_NAMES.items()}


@dataclass(frozen=True)
class Statement:
    """One semantic statement: relational, bare concept, or bare tense."""

    relation: int | None
    arg1: int | None
    arg2: int | None
    tense: int

    @staticmethod
    def relational(relation: int, arg1: int, arg2: int,
                   tense: int = Tense.NONE) -> "Statement":
        return Statement(relation, arg1, arg2, tense)

    @staticmethod
    def of_concept(concept: int) -> "Statement":
        return Statement(None, concept, None, Tense.NONE)

    @staticmethod
    def of_tense(tense: int) -> "Statement":
        return Statement(None, None, None, tense)

    @property
    def is_relational(self) -> bool:
        return self.relation is not None

    @property
    def is_concept(self) -> bool:
        return self.relation is None and self.arg1 is not None

    @property
    def is_tense(self) -> bool:
        return self.relation is None and self.arg1 is None


class TransformOp(enum.Enum):
    """Surjective per-symbol semantic transformation operations."""

    IDENTITY = "identity"
    SELECT_ARG1 = "select_arg1"
    SELECT_ARG2 = "select_arg2"
    DELETE_ARG1 = "delete_arg1"
    DELETE_ARG2 = "delete_arg2"
    SELECT_TENSE = "select_tense"


class Feature(enum.Enum):
    """Integer-valued feature functions over statements.

    Argument features reserve index 0 for a deleted slot; a present concept
    ``c`` maps to ``c + 1``.  On a bare concept, the argument features index
    the concept itself.
    """

    RELATION_INDEX = "relation_index"
    ARG1_INDEX = "arg1_index"
    ARG2_INDEX = "arg2_index"
    TENSE_INDEX = "tense_index"


# ---------------------------------------------------------------------------
# Statement sets


@dataclass(frozen=True)
class RelationalSet:
    """Product-form set of relational statements."""

    rel: SlotSet
    arg1: SlotSet          # over concept ids plus ABSENT
    arg2: SlotSet
    tenses: frozenset[int]


@dataclass(frozen=True)
class StatementSet:
    """Union of a relational component, bare concepts, and bare tenses."""

    relational: RelationalSet | None
    concepts: SlotSet | None
    bare_tenses: frozenset[int] | None


def _norm_relational(comp: RelationalSet | None) -> RelationalSet | None:
    if comp is None:
        return None
    for slot in (comp.rel, comp.arg1, comp.arg2):
        if not slot.wild and not slot.ids:
            return None
    if not comp.tenses:
        return None
    return comp


def make_set(relational: RelationalSet | None = None,
             concepts: SlotSet | None = None,
             bare_tenses: Iterable[int] | None = None) -> StatementSet:
    if concepts is not None and not concepts.wild and not concepts.ids:
        concepts = None
    tenses = frozenset(bare_tenses) if bare_tenses is not None else None
    if not tenses:
        tenses = None
    return StatementSet(_norm_relational(relational), concepts, tenses)


def relational_set(rel: SlotSet, arg1: SlotSet, arg2: SlotSet,
                   tenses: Iterable[int]) -> StatementSet:
    return make_set(RelationalSet(rel, arg1, arg2, frozenset(tenses)))


def singleton_set(x: Statement) -> StatementSet:
    if x.is_relational:
        return relational_set(SlotSet.singleton(x.relation),
                              SlotSet.singleton(x.arg1),
                              SlotSet.singleton(x.arg2), (x.tense,))
    if x.is_concept:
        return make_set(concepts=SlotSet.singleton(x.arg1))
    return make_set(bare_tenses=(x.tense,))


def empty_set() -> StatementSet:
    return StatementSet(None, None, None)


def top_set() -> StatementSet:
    """The set of all statements of every kind."""
    return StatementSet(
        RelationalSet(SlotSet.wildcard(), SlotSet.wildcard(),
                      SlotSet.wildcard(), ALL_TENSES),
        SlotSet.wildcard(), ALL_TENSES)


def statement_in(x: Statement, xs: StatementSet) -> bool:
    if x.is_relational:
        comp = xs.relational
        return (comp is not None and comp.rel.contains(x.relation)
                and comp.arg1.contains(x.arg1) and comp.arg2.contains(x.arg2)
                and x.tense in comp.tenses)
    if x.is_concept:
        return xs.concepts is not None and xs.concepts.contains(x.arg1)
    return xs.bare_tenses is not None and x.tense in xs.bare_tenses


def intersect(a: StatementSet, b: StatementSet) -> StatementSet:
    """Exact intersection in compact form."""
    relational = None
    if a.relational is not None and b.relational is not None:
        relational = RelationalSet(
            a.relational.rel.intersect(b.relational.rel),
            a.relational.arg1.intersect(b.relational.arg1),
            a.relational.arg2.intersect(b.relational.arg2),
            a.relational.tenses & b.relational.tenses)
    concepts = None
    if a.concepts is not None and b.concepts is not None:
        concepts = a.concepts.intersect(b.concepts)
    tenses = None
    if a.bare_tenses is not None and b.bare_tenses is not None:
        tenses = a.bare_tenses & b.bare_tenses
    return make_set(relational, concepts, tenses)


def union(a: StatementSet, b: StatementSet) -> StatementSet:
    """Per-slot over-approximation of the union; exact when one side is empty
    or the components only differ in a single slot.  Used for statement-space
    propagation where a superset is safe."""
    if a.relational is None:
        relational = b.relational
    elif b.relational is None:
        relational = a.relational
    else:
        relational = RelationalSet(
            a.relational.rel.union(b.relational.rel),
            a.relational.arg1.union(b.relational.arg1),
            a.relational.arg2.union(b.relational.arg2),
            a.relational.tenses | b.relational.tenses)
    if a.concepts is None:
        concepts = b.concepts
    elif b.concepts is None:
        concepts = a.concepts
    else:
        concepts = a.concepts.union(b.concepts)
    tenses = (a.bare_tenses or frozenset()) | (b.bare_tenses or frozenset())
    return make_set(relational, concepts, tenses or None)


def _arg_domain_size(kb) -> int:
    return kb.num_concepts + 1          # concepts plus ABSENT


def is_empty(xs: StatementSet, kb) -> bool:
    if xs.relational is not None:
        comp = xs.relational
        if (not comp.rel.is_empty_given(kb.num_relations)
                and not comp.arg1.is_empty_given(_arg_domain_size(kb))
                and not comp.arg2.is_empty_given(_arg_domain_size(kb))
                and comp.tenses):
            return False
    if xs.concepts is not None and not xs.concepts.is_empty_given(kb.num_concepts):
        return False
    if xs.bare_tenses:
        return False
    return True


def _arg_members(slot: SlotSet, kb) -> Iterator[int]:
    domain = itertools.chain((ABSENT,), range(kb.num_concepts))
    return slot.members_given(domain)


def enumerate_statements(xs: StatementSet, kb) -> Iterator[Statement]:
    """Explicitly list every member; only sensible on fixture-scale sets."""
    if xs.concepts is not None:
        for c in xs.concepts.members_given(range(kb.num_concepts)):
            yield Statement.of_concept(c)
    if xs.relational is not None:
        comp = xs.relational
        rels = list(comp.rel.members_given(range(kb.num_relations)))
        arg1s = list(_arg_members(comp.arg1, kb))
        arg2s = list(_arg_members(comp.arg2, kb))
        for r in rels:
            for a in arg1s:
                for b in arg2s:
                    for t in sorted(comp.tenses):
                        yield Statement(r, a, b, t)
    if xs.bare_tenses is not None:
        for t in sorted(xs.bare_tenses):
            yield Statement.of_tense(t)


def count_statements(xs: StatementSet, kb) -> int:
    total = 0
    if xs.concepts is not None:
        total += xs.concepts.size_given(kb.num_concepts)
    if xs.relational is not None:
        comp = xs.relational
        total += (comp.rel.size_given(kb.num_relations)
                  * comp.arg1.size_given(_arg_domain_size(kb))
                  * comp.arg2.size_given(_arg_domain_size(kb))
                  * len(comp.tenses))
    if xs.bare_tenses is not None:
        total += len(xs.bare_tenses)
    return total


def as_singleton(xs: StatementSet, kb) -> Statement | None:
    if count_statements(xs, kb) != 1:
        return None
    return next(enumerate_statements(xs, kb))


# ---------------------------------------------------------------------------
# Transformation operations


def apply_op(op: TransformOp, x: Statement) -> Statement:
    """Forward application; raises :class:`SemanticsError` outside the domain."""
    if op is TransformOp.IDENTITY:
        return x
    if not x.is_relational:
        raise SemanticsError(f"{op.value} undefined on non-relational statement")
    if op is TransformOp.SELECT_ARG1:
        if x.arg1 == ABSENT:
            raise SemanticsError("select_arg1 requires a present first argument")
        return Statement.of_concept(x.arg1)
    if op is TransformOp.SELECT_ARG2:
        if x.arg2 == ABSENT:
            raise SemanticsError("select_arg2 requires a present second argument")
        return Statement.of_concept(x.arg2)
    if op is TransformOp.DELETE_ARG1:
        if x.arg1 == ABSENT:
            raise SemanticsError("delete_arg1 requires a present first argument")
        return replace(x, arg1=ABSENT)
    if op is TransformOp.DELETE_ARG2:
        if x.arg2 == ABSENT:
            raise SemanticsError("delete_arg2 requires a present second argument")
        return replace(x, arg2=ABSENT)
    if op is TransformOp.SELECT_TENSE:
        return Statement.of_tense(x.tense)
    raise SemanticsError(f"unknown operation {op!r}")


_PRESENT_ONLY = SlotSet.wildcard(excluding=(ABSENT,))


def preimage_set(op: TransformOp, xs: StatementSet, kb) -> StatementSet:
    """All statements mapping into ``xs`` under ``op``, in compact form."""
    if op is TransformOp.IDENTITY:
        return xs
    if op is TransformOp.SELECT_ARG1:
        if xs.concepts is None:
            return empty_set()
        return relational_set(SlotSet.wildcard(), xs.concepts,
                              SlotSet.wildcard(), ALL_TENSES)
    if op is TransformOp.SELECT_ARG2:
        if xs.concepts is None:
            return empty_set()
        return relational_set(SlotSet.wildcard(), SlotSet.wildcard(),
                              xs.concepts, ALL_TENSES)
    if op is TransformOp.DELETE_ARG1:
        comp = xs.relational
        if comp is None or not comp.arg1.contains(ABSENT):
            return empty_set()
        return relational_set(comp.rel, _PRESENT_ONLY, comp.arg2, comp.tenses)
    if op is TransformOp.DELETE_ARG2:
        comp = xs.relational
        if comp is None or not comp.arg2.contains(ABSENT):
            return empty_set()
        return relational_set(comp.rel, comp.arg1, _PRESENT_ONLY, comp.tenses)
    if op is TransformOp.SELECT_TENSE:
        if xs.bare_tenses is None:
            return empty_set()
        return relational_set(SlotSet.wildcard(), SlotSet.wildcard(),
                              SlotSet.wildcard(), xs.bare_tenses)
    raise SemanticsError(f"unknown operation {op!r}")


def preimage(op: TransformOp, x: Statement, kb) -> StatementSet:
    return preimage_set(op, singleton_set(x), kb)


def forward_image(op: TransformOp, xs: StatementSet) -> StatementSet:
    """Image of a set under an operation (over-approximate per slot).

    Used only for statement-space propagation, where a superset is safe.
    """
    if op is TransformOp.IDENTITY:
        return xs
    comp = xs.relational
    if comp is None:
        return empty_set()
    if op is TransformOp.SELECT_ARG1:
        return make_set(concepts=comp.arg1.difference_explicit((ABSENT,)))
    if op is TransformOp.SELECT_ARG2:
        return make_set(concepts=comp.arg2.difference_explicit((ABSENT,)))
    if op is TransformOp.DELETE_ARG1:
        return relational_set(comp.rel, SlotSet.singleton(ABSENT),
                              comp.arg2, comp.tenses)
    if op is TransformOp.DELETE_ARG2:
        return relational_set(comp.rel, comp.arg1,
                              SlotSet.singleton(ABSENT), comp.tenses)
    if op is TransformOp.SELECT_TENSE:
        return make_set(bare_tenses=comp.tenses)
    raise SemanticsError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# Feature functions


def _arg_feature_value(slot_value: int) -> int:
    return 0 if slot_value == ABSENT else slot_value + 1


def feature_value(feature: Feature, x: Statement) -> int:
    if feature is Feature.RELATION_INDEX:
        if not x.is_relational:
            raise SemanticsError("relation_index undefined on non-relational statement")
        return x.relation
    if feature is Feature.ARG1_INDEX:
        if x.is_tense:
            raise SemanticsError("arg1_index undefined on a bare tense")
        return _arg_feature_value(x.arg1)
    if feature is Feature.ARG2_INDEX:
        if not x.is_relational:
            raise SemanticsError("arg2_index undefined on non-relational statement")
        return _arg_feature_value(x.arg2)
    if feature is Feature.TENSE_INDEX:
        if x.is_concept:
            raise SemanticsError("tense_index undefined on a bare concept")
        return int(x.tense)
    raise SemanticsError(f"unknown feature {feature!r}")


def feature_path(features: Sequence[Feature], x: Statement) -> tuple[int, ...]:
    """Path from the root of a feature tree down to the leaf for ``x``."""
    return tuple(feature_value(f, x) for f in features)


def _arg_slot_to_values(slot: SlotSet) -> SlotSet:
    return slot.map_values(_arg_feature_value)


def _values_to_arg_slot(values: SlotSet) -> SlotSet:
    return values.map_values(lambda v: ABSENT if v == 0 else v - 1)


def _values_to_concepts(values: SlotSet) -> SlotSet:
    # Value 0 (deleted slot) has no bare-concept preimage.
    return SlotSet(values.wild,
                   frozenset(v - 1 for v in values.ids if v > 0))


def level_value_sets(features: Sequence[Feature], xs: StatementSet) -> list[SlotSet]:
    """Per-feature sets of attainable values for the members of ``xs``.

    This is the path restriction handed to the HDP search: a path is allowed
    iff its value at every level lies in the returned set for that level.
    """
    out: list[SlotSet] = []
    comp = xs.relational
    for feature in features:
        if feature is Feature.RELATION_INDEX:
            values = comp.rel if comp is not None else SlotSet.empty()
        elif feature is Feature.ARG1_INDEX:
            values = SlotSet.empty()
            if comp is not None:
                values = values.union(_arg_slot_to_values(comp.arg1))
            if xs.concepts is not None:
                values = values.union(xs.concepts.map_values(lambda c: c + 1))
        elif feature is Feature.ARG2_INDEX:
            values = (_arg_slot_to_values(comp.arg2)
                      if comp is not None else SlotSet.empty())
        else:
            tenses = set(comp.tenses) if comp is not None else set()
            tenses |= set(xs.bare_tenses or ())
            values = SlotSet.explicit(tenses)
        out.append(values)
    return out


def cell_from_level_sets(features: Sequence[Feature],
                         level_sets: Sequence[SlotSet]) -> StatementSet:
    """Statement set whose members take feature values in the given per-level sets."""
    if len(features) != len(level_sets):
        raise SemanticsError("level set count must match feature count")
    result = top_set()
    for feature, values in zip(features, level_sets):
        if feature is Feature.RELATION_INDEX:
            constraint = relational_set(values, SlotSet.wildcard(),
                                        SlotSet.wildcard(), ALL_TENSES)
        elif feature is Feature.ARG1_INDEX:
            constraint = make_set(
                RelationalSet(SlotSet.wildcard(), _values_to_arg_slot(values),
                              SlotSet.wildcard(), ALL_TENSES),
                concepts=_values_to_concepts(values))
        elif feature is Feature.ARG2_INDEX:
            constraint = relational_set(SlotSet.wildcard(), SlotSet.wildcard(),
                                        _values_to_arg_slot(values), ALL_TENSES)
        else:
            tenses = frozenset(t for t in ALL_TENSES if values.contains(t))
            constraint = make_set(
                RelationalSet(SlotSet.wildcard(), SlotSet.wildcard(),
                              SlotSet.wildcard(), tenses),
                bare_tenses=tenses)
        result = intersect(result, constraint)
    return result


def partition_cell(features: Sequence[Feature], path: Sequence[int],
                   kb) -> StatementSet:
    """The set of statements whose feature path equals ``path``."""
    if len(path) != len(features):
        raise SemanticsError("path length must match feature count")
    for feature, value in zip(features, path):
        if feature is Feature.RELATION_INDEX:
            valid = 0 <= value < kb.num_relations
        elif feature in (Feature.ARG1_INDEX, Feature.ARG2_INDEX):
            valid = 0 <= value <= kb.num_concepts
        else:
            valid = value in tuple(ALL_TENSES)
        if not valid:
            raise SemanticsError(f"invalid path value {value} for {feature.value}")
    return cell_from_level_sets(features,
                                [SlotSet.singleton(v) for v in path])


# ---------------------------------------------------------------------------
# Text syntax


def format_statement(x: Statement, kb) -> str:
    if x.is_concept:
        return kb.concepts[x.arg1].name
    if x.is_tense:
        return f"time:{TENSE_NAMES[Tense(x.tense)]}"
    def arg(v: int) -> str:
        return "·" if v == ABSENT else kb.concepts[v].name
    text = f"{kb.relations[x.relation].name}({arg(x.arg1)}, {arg(x.arg2)})"
    if x.tense != Tense.NONE:
        text = f"{text[:-1]}, time:{TENSE_NAMES[Tense(x.tense)]})"
    return text


def _format_slot(slot: SlotSet, kb, domain: str) -> str:
    def name(v: int) -> str:
        if v == ABSENT:
            return "·"
        return kb.concepts[v].name if domain == "concept" else kb.relations[v].name
    if slot.wild:
        if not slot.ids:
            return "*"
        shown = ",".join(sorted(name(v) for v in slot.ids))
        return "*\\{%s}" % shown
    names = sorted(name(v) for v in slot.ids)
    if len(names) == 1:
        return names[0]
    return "{%s}" % "|".join(names)


def format_statement_set(xs: StatementSet, kb) -> str:
    parts = []
    if xs.concepts is not None:
        parts.append(_format_slot(xs.concepts, kb, "concept"))
    comp = xs.relational
    if comp is not None:
        body = (f"{_format_slot(comp.rel, kb, 'relation')}"
                f"({_format_slot(comp.arg1, kb, 'concept')}, "
                f"{_format_slot(comp.arg2, kb, 'concept')})")
        shown_tenses = comp.tenses - {Tense.NONE}
        if comp.tenses == ALL_TENSES:
            shown_tenses = frozenset()
        if shown_tenses:
            names = "|".join(TENSE_NAMES[Tense(t)] for t in sorted(shown_tenses))
            body = f"{body[:-1]}, time:{names})"
        parts.append(body)
    if xs.bare_tenses is not None:
        names = "|".join(TENSE_NAMES[Tense(t)] for t in sorted(xs.bare_tenses))
        parts.append(f"time:{names}")
    return " u ".join(parts) if parts else "(empty)"


def parse_statement(text: str, kb) -> Statement:
    """Parse single-statement text, e.g. ``plays(musician:chopin, ·, time:past)``."""
    text = text.strip()
    if "(" not in text:
        if text.startswith("time:"):
            name = text[len("time:"):]
            if name not in TENSE_BY_NAME:
                raise SemanticsError(f"unknown tense {name!r}")
            return Statement.of_tense(TENSE_BY_NAME[name])
        concept = kb.concept_by_name(text)
        if concept is None:
            raise SemanticsError(f"unknown concept {text!r}")
        return Statement.of_concept(concept.id)
    if not text.endswith(")"):
        raise SemanticsError(f"malformed statement {text!r}")
    rel_name, body = text[:-1].split("(", 1)
    relation = kb.relation_by_name(rel_name.strip())
    if relation is None:
        raise SemanticsError(f"unknown relation {rel_name.strip()!r}")
    fields = [f.strip() for f in body.split(",")]
    tense = Tense.NONE
    if fields and fields[-1].startswith("time:"):
        name = fields.pop()[len("time:"):]
        if name not in TENSE_BY_NAME:
            raise SemanticsError(f"unknown tense {name!r}")
        tense = TENSE_BY_NAME[name]
    if len(fields) != 2:
        raise SemanticsError(f"expected two argument slots in {text!r}")
    args = []
    for field in fields:
        if field in ("·", "."):
            args.append(ABSENT)
        else:
            concept = kb.concept_by_name(field)
            if concept is None:
                raise SemanticsError(f"unknown concept {field!r}")
            args.append(concept.id)
    return Statement(relation.id, args[0], args[1], tense)
