"""Ontology, knowledge base, and the semantic prior over statements.

The knowledge base is immutable after load and safe to share across any
number of concurrent parses.  Prior weights are unnormalized log scores:
only differences matter for ranking, so no normalizing constant over the
statement space is ever computed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import semantics
from .semantics import ABSENT, Statement, StatementSet
from .sets import SlotSet


class OntologyError(ValueError):
    pass


@dataclass(frozen=True)
class Concept:
    id: int
    name: str               # "category:shortname"
    category: str


@dataclass(frozen=True)
class Relation:
    id: int
    name: str
    domain: str
    range: str


@dataclass(frozen=True)
class Belief:
    relation: int
    arg1: int
    arg2: int


@dataclass(frozen=True)
class PriorConfig:
    """Semantic-prior settings; bonuses are additive log units."""

    mode: str = "uniform"                 # uniform | type_correct | kb
    type_bonus: float = 4.0
    kb_bonus: float = 8.0

    def __post_init__(self):
        if self.mode not in ("uniform", "type_correct", "kb"):
            raise OntologyError(f"unknown prior mode {self.mode!r}")
        if not (self.kb_bonus >= self.type_bonus >= 0.0):
            raise OntologyError("prior bonuses must satisfy kb >= type >= 0")


class KnowledgeBase:
    """Typed concepts, typed relations, beliefs, and a noun-phrase map."""

    def __init__(self, categories, concepts, relations, beliefs, refers):
        self.categories: tuple[str, ...] = tuple(categories)
        self.concepts: tuple[Concept, ...] = tuple(concepts)
        self.relations: tuple[Relation, ...] = tuple(relations)
        self.beliefs: frozenset[Belief] = frozenset(beliefs)
        self.refers: dict[str, frozenset[int]] = {
            phrase: frozenset(ids) for phrase, ids in refers.items()}
        self._concept_by_name = {c.name: c for c in self.concepts}
        self._relation_by_name = {r.name: r for r in self.relations}
        members: dict[str, set[int]] = {cat: set() for cat in self.categories}
        for c in self.concepts:
            members[c.category].add(c.id)
        self.category_members: dict[str, frozenset[int]] = {
            cat: frozenset(ids) for cat, ids in members.items()}

    @property
    def num_concepts(self) -> int:
        return len(self.concepts)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def concept_by_name(self, name: str) -> Concept | None:
        return self._concept_by_name.get(name)

    def relation_by_name(self, name: str) -> Relation | None:
        return self._relation_by_name.get(name)

    def has_belief(self, relation: int, arg1: int, arg2: int) -> bool:
        return Belief(relation, arg1, arg2) in self.beliefs

    def concepts_for_phrase(self, phrase: str) -> frozenset[int]:
        """Referent concepts of a noun phrase; unknown phrases map to the empty set."""
        return self.refers.get(phrase, frozenset())


# ---------------------------------------------------------------------------
# Loading and serialization


class _Builder:
    def __init__(self):
        self.categories: list[str] = []
        self.concept_rows: list[tuple[str, str]] = []      # (category, name)
        self.relation_rows: list[tuple[str, str, str]] = []
        self.belief_rows: list[tuple[str, str, str, object]] = []
        self.refer_rows: list[tuple[str, str, object]] = []

    def finish(self) -> KnowledgeBase:
        seen_cats = set()
        categories = []
        for cat in self.categories:
            if cat not in seen_cats:
                seen_cats.add(cat)
                categories.append(cat)
        concepts: list[Concept] = []
        for category, name in self.concept_rows:
            if category not in seen_cats:
                raise OntologyError(f"concept {name!r}: unknown category {category!r}")
            if any(c.name == name for c in concepts):
                continue
            concepts.append(Concept(len(concepts), name, category))
        relations: list[Relation] = []
        for name, domain, rng in self.relation_rows:
            for cat in (domain, rng):
                if cat not in seen_cats:
                    raise OntologyError(f"relation {name!r}: unknown category {cat!r}")
            if any(r.name == name for r in relations):
                continue
            relations.append(Relation(len(relations), name, domain, rng))
        cname = {c.name: c for c in concepts}
        rname = {r.name: r for r in relations}
        beliefs = set()
        for rel, a1, a2, where in self.belief_rows:
            if rel not in rname:
                raise OntologyError(f"{where}: unknown relation {rel!r}")
            for arg in (a1, a2):
                if arg not in cname:
                    raise OntologyError(f"{where}: unknown concept {arg!r}")
            beliefs.add(Belief(rname[rel].id, cname[a1].id, cname[a2].id))
        refers: dict[str, set[int]] = {}
        for phrase, concept, where in self.refer_rows:
            if concept not in cname:
                raise OntologyError(f"{where}: unknown concept {concept!r}")
            refers.setdefault(phrase, set()).add(cname[concept].id)
        return KnowledgeBase(categories, concepts, relations, beliefs, refers)


def _load_text(lines) -> KnowledgeBase:
    b = _Builder()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        tokens = line.split()
        kind = tokens[0]
        if kind == "category" and len(tokens) == 2:
            b.categories.append(tokens[1])
        elif kind == "concept" and len(tokens) == 2:
            if ":" not in tokens[1]:
                raise OntologyError(f"{where}: concept must be category:name")
            category, _ = tokens[1].split(":", 1)
            b.concept_rows.append((category, tokens[1]))
        elif kind == "relation" and len(tokens) == 4:
            b.relation_rows.append((tokens[1], tokens[2], tokens[3]))
        elif kind == "belief" and len(tokens) == 4:
            b.belief_rows.append((tokens[1], tokens[2], tokens[3], where))
        elif kind == "refer" and len(tokens) >= 3:
            phrase = " ".join(tokens[1:-1])
            b.refer_rows.append((phrase, tokens[-1], where))
        else:
            raise OntologyError(f"{where}: malformed record {line!r}")
    return b.finish()


def _load_json(text: str) -> KnowledgeBase:
    data = json.loads(text)
    b = _Builder()
    b.categories = list(data.get("categories", []))
    for name in data.get("concepts", []):
        if ":" not in name:
            raise OntologyError(f"concept must be category:name: {name!r}")
        b.concept_rows.append((name.split(":", 1)[0], name))
    for row in data.get("relations", []):
        b.relation_rows.append((row["name"], row["domain"], row["range"]))
    for row in data.get("beliefs", []):
        b.belief_rows.append((row[0], row[1], row[2], f"belief {row!r}"))
    for phrase, names in data.get("refer", {}).items():
        for name in names:
            b.refer_rows.append((phrase, name, f"refer {phrase!r}"))
    return b.finish()


def load_knowledge_base(path, format: str | None = None) -> KnowledgeBase:
    """Load a knowledge base from line-oriented text or its JSON equivalent."""
    path = Path(path)
    if format is None:
        format = "structured-text" if path.suffix == ".json" else "tsv"
    text = path.read_text(encoding="utf-8")
    if format in ("structured-text", "json"):
        return _load_json(text)
    if format in ("tsv", "text"):
        return _load_text(text.splitlines())
    raise OntologyError(f"unknown knowledge-base format {format!r}")


def dump_knowledge_base_text(kb: KnowledgeBase) -> str:
    lines = [f"category {cat}" for cat in kb.categories]
    lines += [f"concept {c.name}" for c in kb.concepts]
    lines += [f"relation {r.name} {r.domain} {r.range}" for r in kb.relations]
    lines += sorted(
        f"belief {kb.relations[b.relation].name} "
        f"{kb.concepts[b.arg1].name} {kb.concepts[b.arg2].name}"
        for b in kb.beliefs)
    for phrase in sorted(kb.refers):
        for cid in sorted(kb.refers[phrase]):
            lines.append(f"refer {phrase} {kb.concepts[cid].name}")
    return "\n".join(lines) + "\n"


def dump_knowledge_base_json(kb: KnowledgeBase) -> str:
    data = {
        "categories": list(kb.categories),
        "concepts": [c.name for c in kb.concepts],
        "relations": [{"name": r.name, "domain": r.domain, "range": r.range}
                      for r in kb.relations],
        "beliefs": sorted(
            [kb.relations[b.relation].name, kb.concepts[b.arg1].name,
             kb.concepts[b.arg2].name] for b in kb.beliefs),
        "refer": {phrase: sorted(kb.concepts[cid].name for cid in ids)
                  for phrase, ids in sorted(kb.refers.items())},
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Type correctness and prior weights


def is_type_correct(statement: Statement, kb: KnowledgeBase) -> bool:
    """True iff both argument categories match the relation's domain and range."""
    if not statement.is_relational:
        return False
    if not 0 <= statement.relation < kb.num_relations:
        raise OntologyError(f"unknown relation id {statement.relation}")
    if statement.arg1 == ABSENT or statement.arg2 == ABSENT:
        return False
    relation = kb.relations[statement.relation]
    return (kb.concepts[statement.arg1].category == relation.domain
            and kb.concepts[statement.arg2].category == relation.range)


def _slot_meets(slot: SlotSet, members: frozenset[int]) -> bool:
    """Does the slot contain at least one id from ``members``?"""
    if slot.wild:
        return len(members - slot.ids) > 0
    return len(slot.ids & members) > 0


def any_type_correct(xs: StatementSet, kb: KnowledgeBase) -> bool:
    """True iff some member of the set is type-correct, without enumeration."""
    comp = xs.relational
    if comp is None:
        return False
    for relation in kb.relations:
        if not comp.rel.contains(relation.id):
            continue
        if (_slot_meets(comp.arg1, kb.category_members[relation.domain])
                and _slot_meets(comp.arg2, kb.category_members[relation.range])):
            return True
    return False


def _any_belief(xs: StatementSet, kb: KnowledgeBase) -> bool:
    comp = xs.relational
    if comp is None:
        return False
    for belief in kb.beliefs:
        if (comp.rel.contains(belief.relation)
                and comp.arg1.contains(belief.arg1)
                and comp.arg2.contains(belief.arg2)):
            return True
    return False


def prior_log_weight(statement: Statement, kb: KnowledgeBase,
                     cfg: PriorConfig) -> float:
    """Unnormalized log prior weight of a single statement."""
    if cfg.mode == "uniform" or not statement.is_relational:
        return 0.0
    if not 0 <= statement.relation < kb.num_relations:
        return 0.0
    if (cfg.mode == "kb"
            and statement.arg1 != ABSENT and statement.arg2 != ABSENT
            and kb.has_belief(statement.relation, statement.arg1, statement.arg2)):
        return cfg.kb_bonus
    if is_type_correct(statement, kb):
        return cfg.type_bonus
    return 0.0


def set_prior_upper_bound(xs: StatementSet, kb: KnowledgeBase,
                          cfg: PriorConfig) -> float:
    """Max prior weight over the members of a set, computed without enumeration."""
    if semantics.is_empty(xs, kb):
        raise OntologyError("prior bound of an empty statement set")
    if cfg.mode == "uniform":
        return 0.0
    if cfg.mode == "kb" and _any_belief(xs, kb):
        return cfg.kb_bonus
    if any_type_correct(xs, kb):
        return cfg.type_bonus
    return 0.0
