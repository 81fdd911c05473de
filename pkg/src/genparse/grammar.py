"""The semantics-coupled context-free grammar.

Every production rule pairs each right-hand-side symbol with a semantic
transformation operation; every nonterminal owns a feature sequence that
shapes its selection tree, and rule choice conditions on the statement
through the leaf reached by those features.  Rule ids double as the HDP
observation vocabulary of their nonterminal.

Positions are character offsets.  Word boundaries are explicit single-space
terminals, written ``_`` in grammar files; morphology rules concatenate
their symbols directly, so a verb can be a root and affix glued together.

A trained grammar is immutable: generation and parsing share it read-only,
and training mutates per-nonterminal states independently.
"""

from __future__ import annotations

import json
import logging
import math
import re
import time
from dataclasses import dataclass, field

import numpy as np

from . import hdp, semantics
from .hdp import HdpTree, PosteriorSample
from .ontology import KnowledgeBase
from .semantics import (ABSENT, Feature, Statement, StatementSet, Tense,
                        TransformOp, apply_op, feature_path)
from .sets import SlotSet

log = logging.getLogger(__name__)


class GrammarError(ValueError):
    pass


@dataclass(frozen=True)
class Sym:
    text: str
    terminal: bool

    def __str__(self) -> str:
        return f'"{self.text}"' if self.terminal else self.text


SPACE = Sym(" ", True)


@dataclass(frozen=True)
class AugmentedRule:
    lhs: str
    rhs: tuple[Sym, ...]
    ops: tuple[TransformOp, ...]
    rule_id: int
    affix_tense: int | None = None
    affix_person: str | None = None

    def __post_init__(self):
        if len(self.ops) != len(self.rhs):
            raise GrammarError("need one operation per right-hand symbol")
        for sym in self.rhs:
            if sym.terminal and not sym.text:
                raise GrammarError("terminal strings must be nonempty")

    def __str__(self) -> str:
        if not self.rhs:
            return f"{self.lhs} -> <empty>"
        parts = []
        for sym, op in zip(self.rhs, self.ops):
            if sym.terminal:
                parts.append(str(sym))
            elif op is TransformOp.IDENTITY:
                parts.append(sym.text)
            else:
                parts.append(f"{sym.text}:{op.value}")
        return f"{self.lhs} -> {' '.join(parts)}"


@dataclass
class NonterminalInfo:
    name: str
    features: tuple[Feature, ...] = ()
    rules: list[AugmentedRule] = field(default_factory=list)
    is_affix: bool = False
    alphas: tuple[float, ...] | None = None
    beta: float | None = None
    space: StatementSet | None = None


@dataclass
class Grammar:
    nonterminals: dict[str, NonterminalInfo]
    root: str
    tenses: frozenset[int]
    source: str

    def info(self, name: str) -> NonterminalInfo:
        return self.nonterminals[name]

    def rules_of(self, name: str) -> list[AugmentedRule]:
        return self.nonterminals[name].rules


# ---------------------------------------------------------------------------
# Grammar DSL

_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|\S+')
_OPS = {op.value: op for op in TransformOp}
_FEATURES = {f.value: f for f in Feature}


def _unquote(token: str) -> str:
    return token[1:-1].replace('\\"', '"').replace("\\\\", "\\")


def _parse_rhs_item(token: str, where: str) -> tuple[Sym, TransformOp]:
    if token.startswith('"'):
        return Sym(_unquote(token), True), TransformOp.IDENTITY
    if token == "_":
        return SPACE, TransformOp.IDENTITY
    if ":" in token:
        name, op_name = token.split(":", 1)
        if op_name not in _OPS:
            raise GrammarError(f"{where}: unknown transform operation {op_name!r}")
        return Sym(name, False), _OPS[op_name]
    return Sym(token, False), TransformOp.IDENTITY


def parse_grammar_file(text: str) -> Grammar:
    """Parse the line-oriented grammar DSL; see the README for the syntax."""
    nonterminals: dict[str, NonterminalInfo] = {}
    tenses: frozenset[int] = frozenset((Tense.NONE,))
    pending_rules: list[tuple[str, str, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        tokens = _TOKEN.findall(line)
        kind = tokens[0]
        if kind == "tenses":
            names = tokens[1:]
            if not names:
                raise GrammarError(f"{where}: tenses directive needs values")
            values = set()
            for name in names:
                if name not in semantics.TENSE_BY_NAME:
                    raise GrammarError(f"{where}: unknown tense {name!r}")
                values.add(int(semantics.TENSE_BY_NAME[name]))
            tenses = frozenset(values)
        elif kind == "nonterminal":
            if len(tokens) < 2:
                raise GrammarError(f"{where}: nonterminal needs a name")
            name = tokens[1]
            features: list[Feature] = []
            rest = tokens[2:]
            if rest:
                if rest[0] != "features":
                    raise GrammarError(f"{where}: expected 'features'")
                for fname in rest[1:]:
                    if fname not in _FEATURES:
                        raise GrammarError(f"{where}: unknown feature {fname!r}")
                    features.append(_FEATURES[fname])
            if name in nonterminals:
                raise GrammarError(f"{where}: duplicate nonterminal {name!r}")
            nonterminals[name] = NonterminalInfo(name, tuple(features))
        elif kind == "rule":
            if len(tokens) < 3 or tokens[2] != "->":
                raise GrammarError(f"{where}: rule syntax is 'rule LHS -> ...'")
            pending_rules.append((where, tokens[1], tokens[3:]))
        elif kind == "affix":
            if len(tokens) != 5 or not tokens[4].startswith('"'):
                raise GrammarError(
                    f"{where}: affix syntax is 'affix NT tense person \"...\"'")
            _, nt, tense_name, person, quoted = tokens
            if tense_name not in semantics.TENSE_BY_NAME:
                raise GrammarError(f"{where}: unknown tense {tense_name!r}")
            pending_rules.append((where, nt, ["@affix", tense_name, person,
                                              _unquote(quoted)]))
        elif kind == "hyper":
            if len(tokens) < 4:
                raise GrammarError(f"{where}: hyper syntax is "
                                   "'hyper NT alpha A... beta B'")
            name = tokens[1]
            if name not in nonterminals:
                raise GrammarError(f"{where}: undefined nonterminal {name!r}")
            rest = tokens[2:]
            alphas: list[float] = []
            beta = None
            mode = None
            for token in rest:
                if token in ("alpha", "beta"):
                    mode = token
                elif mode == "alpha":
                    alphas.append(float(token))
                elif mode == "beta":
                    beta = float(token)
                else:
                    raise GrammarError(f"{where}: unexpected token {token!r}")
            info = nonterminals[name]
            info.alphas = tuple(alphas) if alphas else None
            info.beta = beta
        else:
            raise GrammarError(f"{where}: unknown record kind {kind!r}")
    if not nonterminals:
        raise GrammarError("grammar declares no nonterminals")
    root = next(iter(nonterminals))

    for where, lhs, items in pending_rules:
        if lhs not in nonterminals:
            raise GrammarError(f"{where}: undefined nonterminal {lhs!r}")
        info = nonterminals[lhs]
        if items and items[0] == "@affix":
            _, tense_name, person, affix = items
            info.is_affix = True
            tense = int(semantics.TENSE_BY_NAME[tense_name])
            if any(r.affix_tense == tense for r in info.rules):
                raise GrammarError(
                    f"{where}: duplicate affix for tense {tense_name!r} on {lhs}")
            rhs = (Sym(affix, True),) if affix else ()
            ops = (TransformOp.IDENTITY,) * len(rhs)
            info.rules.append(AugmentedRule(lhs, rhs, ops, len(info.rules),
                                            affix_tense=tense,
                                            affix_person=person))
            continue
        rhs = []
        ops = []
        for token in items:
            sym, op = _parse_rhs_item(token, where)
            rhs.append(sym)
            ops.append(op)
        for sym in rhs:
            if not sym.terminal and sym.text not in nonterminals:
                raise GrammarError(f"{where}: undefined nonterminal {sym.text!r}")
        candidate = (tuple(rhs), tuple(ops))
        if any((r.rhs, r.ops) == candidate for r in info.rules):
            log.warning("%s: duplicate rule for %s dropped", where, lhs)
            continue
        info.rules.append(AugmentedRule(lhs, tuple(rhs), tuple(ops),
                                        len(info.rules)))

    for info in nonterminals.values():
        if not info.rules:
            raise GrammarError(f"nonterminal {info.name!r} has no rules")
        if info.is_affix:
            if any(r.affix_tense is None for r in info.rules):
                raise GrammarError(
                    f"{info.name!r} mixes affix and ordinary rules")
            info.features = (Feature.TENSE_INDEX,)

    grammar = Grammar(nonterminals, root, tenses, text)
    _compute_spaces(grammar)
    return grammar


def _root_space(tenses: frozenset[int]) -> StatementSet:
    present = SlotSet.wildcard(excluding=(ABSENT,))
    return semantics.relational_set(SlotSet.wildcard(), present, present, tenses)


def _compute_spaces(grammar: Grammar) -> None:
    """Propagate per-nonterminal statement spaces from the root through the
    transformation operations; slot-wise unions over-approximate, which only
    widens feature trees and prior bounds, never losing statements."""
    spaces = {name: semantics.empty_set() for name in grammar.nonterminals}
    spaces[grammar.root] = _root_space(grammar.tenses)
    changed = True
    while changed:
        changed = False
        for info in grammar.nonterminals.values():
            source = spaces[info.name]
            for rule in info.rules:
                for sym, op in zip(rule.rhs, rule.ops):
                    if sym.terminal:
                        continue
                    image = semantics.forward_image(op, source)
                    merged = semantics.union(spaces[sym.text], image)
                    if merged != spaces[sym.text]:
                        spaces[sym.text] = merged
                        changed = True
    for name, info in grammar.nonterminals.items():
        space = spaces[name]
        if space == semantics.empty_set():
            space = semantics.top_set()
        info.space = space


def build_hdp_tree(info: NonterminalInfo, kb: KnowledgeBase,
                   alpha: float = hdp.DEFAULT_ALPHA,
                   beta: float = hdp.DEFAULT_BETA) -> HdpTree:
    """Feature tree of a nonterminal: one level per feature, one child per
    attainable feature value over the nonterminal's statement space."""
    value_sets = semantics.level_value_sets(info.features, info.space)
    domains = []
    for feature, values in zip(info.features, value_sets):
        if feature is Feature.RELATION_INDEX:
            full = range(kb.num_relations)
        elif feature in (Feature.ARG1_INDEX, Feature.ARG2_INDEX):
            full = range(kb.num_concepts + 1)
        else:
            full = tuple(int(t) for t in Tense)
        domain = tuple(values.members_given(full))
        if not domain:
            raise GrammarError(
                f"feature {feature.value} has no values for {info.name}")
        domains.append(domain)
    alphas = info.alphas
    if alphas is not None and len(alphas) == 1:
        alphas = alphas * (len(domains) + 1)
    return hdp.make_tree(domains, len(info.rules),
                         alpha=alphas if alphas is not None else alpha,
                         beta=info.beta if info.beta is not None else beta)


# ---------------------------------------------------------------------------
# Select models: the per-nonterminal distribution over production rules


class HdpSelectModel:
    """Rule selection backed by posterior samples of the nonterminal's HDP."""

    def __init__(self, info: NonterminalInfo, tree: HdpTree,
                 samples: list[PosteriorSample]):
        self.info = info
        self.tree = tree
        self.samples = samples
        self._bounds: dict[int, float] = {}
        self._leaf: dict[tuple[int, tuple[int, ...]], float] = {}

    def iterate(self, rule_id: int, restriction=None) -> hdp.PathIterator:
        return hdp.path_iterator(self.samples, self.tree, rule_id,
                                 restriction=restriction)

    def root_bound(self, rule_id: int) -> float:
        if rule_id not in self._bounds:
            self._bounds[rule_id] = hdp.bound_at_root(self.samples, self.tree,
                                                      rule_id)
        return self._bounds[rule_id]

    def leaf_score(self, rule_id: int, path: tuple[int, ...]) -> float:
        key = (rule_id, path)
        if key not in self._leaf:
            mean = sum(hdp.predictive_prob(s, path, rule_id)
                       for s in self.samples) / len(self.samples)
            self._leaf[key] = math.log(mean)
        return self._leaf[key]

    def rule_distribution(self, path: tuple[int, ...]) -> list[float]:
        return [math.exp(self.leaf_score(r, path))
                for r in range(len(self.info.rules))]


class AffixSelectModel:
    """Deterministic affix choice keyed by the statement's tense."""

    def __init__(self, info: NonterminalInfo):
        self.info = info
        self.by_tense = {r.affix_tense: r.rule_id for r in info.rules}

    def iterate(self, rule_id: int, restriction=None):
        tense = self.info.rules[rule_id].affix_tense
        cells = []
        if restriction is None or restriction[0].contains(tense):
            cells = [([SlotSet.singleton(tense)], 0.0)]
        return _ListIterator(cells)

    def root_bound(self, rule_id: int) -> float:
        return 0.0

    def leaf_score(self, rule_id: int, path: tuple[int, ...]) -> float:
        return 0.0 if path[0] == self.info.rules[rule_id].affix_tense else -math.inf

    def rule_distribution(self, path: tuple[int, ...]) -> list[float]:
        return [1.0 if r.affix_tense == path[0] else 0.0
                for r in self.info.rules]


class _ListIterator:
    """Iterator over a pre-scored, non-increasing list of (cell, score)."""

    def __init__(self, entries):
        self._entries = list(entries)
        self._pos = 0

    def __iter__(self):
        return self

    def __next__(self):
        if self._pos >= len(self._entries):
            raise StopIteration
        cell, score = self._entries[self._pos]
        self._pos += 1
        return list(cell), score

    def peek_key(self):
        if self._pos >= len(self._entries):
            return None
        return self._entries[self._pos][1]


class PinnedSelectModel:
    """Table-driven selection with explicitly pinned (cell, score) rows.

    Rows per rule must be non-increasing in score and partition the paths of
    the nonterminal's tree; used for fixtures with hand-set predictives.
    """

    def __init__(self, info: NonterminalInfo, rows: dict[int, list]):
        self.info = info
        self.rows = {}
        for rule_id, entries in rows.items():
            scores = [score for _, score in entries]
            if any(a < b for a, b in zip(scores, scores[1:])):
                raise GrammarError("pinned rows must be non-increasing")
            self.rows[rule_id] = [(list(cell), float(score))
                                  for cell, score in entries]

    def iterate(self, rule_id: int, restriction=None):
        entries = []
        for cell, score in self.rows.get(rule_id, []):
            if restriction is not None:
                clipped = [c.intersect(r) for c, r in zip(cell, restriction)]
                if any(not s.wild and not s.ids for s in clipped):
                    continue
                entries.append((clipped, score))
            else:
                entries.append((cell, score))
        return _ListIterator(entries)

    def root_bound(self, rule_id: int) -> float:
        rows = self.rows.get(rule_id, [])
        return rows[0][1] if rows else -math.inf

    def leaf_score(self, rule_id: int, path: tuple[int, ...]) -> float:
        for cell, score in self.rows.get(rule_id, []):
            if all(s.contains(v) for s, v in zip(cell, path)):
                return score
        return -math.inf

    def rule_distribution(self, path: tuple[int, ...]) -> list[float]:
        return [math.exp(self.leaf_score(r, path))
                if self.leaf_score(r, path) > -math.inf else 0.0
                for r in range(len(self.info.rules))]


# ---------------------------------------------------------------------------
# Syntax trees


@dataclass(frozen=True)
class SyntaxTree:
    """Span-annotated derivation node; leaves carry terminal text as symbol."""

    symbol: str
    start: int
    end: int
    children: tuple["SyntaxTree", ...] = ()
    rule_id: int | None = None
    terminal: bool = False

    def leaves(self):
        if self.terminal:
            yield self
        for child in self.children:
            yield from child.leaves()

    def leaf_text(self) -> str:
        return "".join(leaf.symbol for leaf in self.leaves())

    def text(self, spans: bool = False) -> str:
        if self.terminal:
            quoted = self.symbol.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{quoted}"'
        head = f"{self.symbol}:{self.rule_id}"
        if spans:
            head += f"[{self.start},{self.end})"
        parts = [head] + [c.text(spans) for c in self.children]
        return "(" + " ".join(parts) + ")"


def check_tree_spans(tree: SyntaxTree, sentence: str) -> None:
    """Children spans must tile the parent span; leaves must match text."""
    if tree.terminal:
        if sentence[tree.start:tree.end] != tree.symbol:
            raise GrammarError(f"leaf {tree.symbol!r} does not match sentence "
                               f"span [{tree.start},{tree.end})")
        return
    position = tree.start
    for child in tree.children:
        if child.start != position:
            raise GrammarError("child spans do not tile the parent span")
        check_tree_spans(child, sentence)
        position = child.end
    if position != tree.end:
        raise GrammarError("children do not cover the parent span")


def parse_tree_text(text: str, grammar: Grammar, sentence: str) -> SyntaxTree:
    """Parse bracketed tree text with rule references, assigning character
    spans by walking the sentence."""
    tokens = _TOKEN.findall(text.replace("(", " ( ").replace(")", " ) "))
    pos = 0

    def parse_node(offset: int) -> SyntaxTree:
        nonlocal pos
        if tokens[pos].startswith('"'):
            literal = _unquote(tokens[pos])
            pos += 1
            end = offset + len(literal)
            if sentence[offset:end] != literal:
                raise GrammarError(f"terminal {literal!r} does not match "
                                   f"sentence at offset {offset}")
            return SyntaxTree(literal, offset, end, terminal=True)
        if tokens[pos] != "(":
            raise GrammarError(f"unexpected token {tokens[pos]!r} in tree")
        pos += 1
        head = tokens[pos]
        pos += 1
        if ":" not in head:
            raise GrammarError(f"tree node {head!r} lacks a rule id")
        nt, rid_text = head.split(":", 1)
        if nt not in grammar.nonterminals:
            raise GrammarError(f"tree references unknown nonterminal {nt!r}")
        rule_id = int(rid_text)
        rules = grammar.rules_of(nt)
        if not 0 <= rule_id < len(rules):
            raise GrammarError(f"tree references unknown rule {nt}:{rule_id}")
        rule = rules[rule_id]
        children = []
        cursor = offset
        while tokens[pos] != ")":
            child = parse_node(cursor)
            children.append(child)
            cursor = child.end
        pos += 1
        if len(children) != len(rule.rhs):
            raise GrammarError(f"rule {rule} expects {len(rule.rhs)} children")
        for child, sym in zip(children, rule.rhs):
            if sym.terminal != child.terminal:
                raise GrammarError(f"child kind mismatch under {rule}")
            expected = sym.text
            got = child.symbol
            if expected != got:
                raise GrammarError(f"child {got!r} does not match {expected!r}")
        return SyntaxTree(nt, offset, cursor, tuple(children), rule_id)

    tree = parse_node(0)
    if pos != len(tokens):
        raise GrammarError("trailing tokens after tree")
    if tree.end != len(sentence):
        raise GrammarError("tree does not cover the whole sentence")
    return tree


# ---------------------------------------------------------------------------
# Corpus records


@dataclass(frozen=True)
class CorpusRecord:
    sentence: str
    statement: Statement
    tree: SyntaxTree | None


def write_corpus(records, kb: KnowledgeBase) -> str:
    lines = []
    for record in records:
        tree_text = record.tree.text() if record.tree is not None else ""
        lines.append("\t".join([record.sentence,
                                semantics.format_statement(record.statement, kb),
                                tree_text]))
    return "\n".join(lines) + ("\n" if lines else "")


def load_corpus(text: str, grammar: Grammar, kb: KnowledgeBase):
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        parts = raw.split("\t")
        if len(parts) not in (2, 3):
            raise GrammarError(f"line {lineno}: corpus rows are "
                               "sentence<TAB>statement[<TAB>tree]")
        sentence = parts[0]
        statement = semantics.parse_statement(parts[1], kb)
        tree = None
        if len(parts) == 3 and parts[2].strip():
            tree = parse_tree_text(parts[2], grammar, sentence)
        records.append(CorpusRecord(sentence, statement, tree))
    return records


# ---------------------------------------------------------------------------
# Training


@dataclass
class TrainedGrammar:
    grammar: Grammar
    kb_signature: tuple[int, int]
    models: dict[str, object]
    trees: dict[str, HdpTree]
    samples: dict[str, list[PosteriorSample]]
    summary: dict

    def model(self, nt: str):
        return self.models[nt]


def training_observations(grammar: Grammar, record: CorpusRecord,
                          kb: KnowledgeBase) -> dict[str, list]:
    """One rule-id observation per interior tree node, at the path of the
    node's transformed statement."""
    obs: dict[str, list] = {name: [] for name in grammar.nonterminals}

    def walk(tree: SyntaxTree, statement: Statement) -> None:
        info = grammar.info(tree.symbol)
        rule = info.rules[tree.rule_id]
        if info.is_affix:
            if statement.tense != rule.affix_tense:
                raise GrammarError(
                    f"affix rule {rule} does not match tense of "
                    f"{semantics.format_statement(statement, kb)}")
        else:
            path = feature_path(info.features, statement)
            obs[tree.symbol].append((path, rule.rule_id))
        interior = [c for c in tree.children if not c.terminal]
        targets = [(sym, op) for sym, op in zip(rule.rhs, rule.ops)
                   if not sym.terminal]
        for child, (sym, op) in zip(interior, targets):
            walk(child, apply_op(op, statement))

    if record.tree is None:
        raise GrammarError("training requires syntax trees")
    walk(record.tree, record.statement)
    return obs


def train(grammar: Grammar, corpus, kb: KnowledgeBase, seed: int = 0,
          n_samples: int = hdp.DEFAULT_SAMPLES,
          burn_in: int = hdp.DEFAULT_BURN_IN, thin: int = hdp.DEFAULT_THIN,
          alpha: float = hdp.DEFAULT_ALPHA,
          beta: float = hdp.DEFAULT_BETA) -> TrainedGrammar:
    """Supervised training: emit observations from every tree, then run the
    collapsed Gibbs sampler once per nonterminal."""
    observations: dict[str, list] = {name: [] for name in grammar.nonterminals}
    for record in corpus:
        for name, rows in training_observations(grammar, record, kb).items():
            observations[name].extend(rows)
    names = list(grammar.nonterminals)
    seeds = np.random.SeedSequence(seed).spawn(len(names))
    models: dict[str, object] = {}
    trees: dict[str, HdpTree] = {}
    samples: dict[str, list[PosteriorSample]] = {}
    summary: dict = {"nonterminals": {}, "sentences": len(list(corpus))}
    for name, seed_seq in zip(names, seeds):
        info = grammar.info(name)
        if info.is_affix:
            models[name] = AffixSelectModel(info)
            summary["nonterminals"][name] = {
                "rules": len(info.rules), "observations": 0, "kind": "affix"}
            continue
        tree = build_hdp_tree(info, kb, alpha=alpha, beta=beta)
        rng = np.random.default_rng(seed_seq)
        started = time.perf_counter()
        state = hdp.init_state(tree, observations[name], rng)
        nt_samples = hdp.sample_posterior(state, rng, n_samples=n_samples,
                                          burn_in=burn_in, thin=thin)
        elapsed = time.perf_counter() - started
        trees[name] = tree
        samples[name] = nt_samples
        models[name] = HdpSelectModel(info, tree, nt_samples)
        summary["nonterminals"][name] = {
            "rules": len(info.rules),
            "observations": len(observations[name]),
            "kind": "hdp",
            "sampling_seconds": round(elapsed, 6),
        }
    return TrainedGrammar(grammar, (kb.num_concepts, kb.num_relations),
                          models, trees, samples, summary)


def prior_only(grammar: Grammar, kb: KnowledgeBase,
               alpha: float = hdp.DEFAULT_ALPHA,
               beta: float = hdp.DEFAULT_BETA) -> TrainedGrammar:
    """An untrained model whose predictives equal the Dirichlet prior mean."""
    return train(grammar, [], kb, seed=0, n_samples=1, burn_in=0, thin=1,
                 alpha=alpha, beta=beta)


def pinned(grammar: Grammar, kb: KnowledgeBase,
           rows: dict[str, dict[int, list]]) -> TrainedGrammar:
    """A model with hand-pinned select tables; rows are per nonterminal."""
    models: dict[str, object] = {}
    for name, info in grammar.nonterminals.items():
        if info.is_affix:
            models[name] = AffixSelectModel(info)
        else:
            models[name] = PinnedSelectModel(info, rows.get(name, {}))
    return TrainedGrammar(grammar, (kb.num_concepts, kb.num_relations),
                          models, {}, {}, {"pinned": True})


def rule_log_prob(trained: TrainedGrammar, nt: str, rule_id: int,
                  statement_or_cell, kb: KnowledgeBase) -> float:
    """Sample-averaged log probability of drawing a rule at the leaf of a
    statement (or of a cell that maps to exactly one leaf)."""
    info = trained.grammar.info(nt)
    if isinstance(statement_or_cell, Statement):
        path = feature_path(info.features, statement_or_cell)
    else:
        value_sets = semantics.level_value_sets(info.features, statement_or_cell)
        path = []
        for feature, values in zip(info.features, value_sets):
            if feature is Feature.RELATION_INDEX:
                domain = range(kb.num_relations)
            elif feature in (Feature.ARG1_INDEX, Feature.ARG2_INDEX):
                domain = range(kb.num_concepts + 1)
            else:
                domain = tuple(int(t) for t in Tense)
            members = []
            for v in values.members_given(domain):
                members.append(v)
                if len(members) > 1:
                    raise GrammarError("cell spans multiple leaves")
            if not members:
                raise GrammarError("cell has no leaf for a feature level")
            path.append(members[0])
        path = tuple(path)
    return trained.model(nt).leaf_score(rule_id, tuple(path))


# ---------------------------------------------------------------------------
# Generation


def generate(trained: TrainedGrammar, statement: Statement,
             rng: np.random.Generator,
             punctuate: bool = False) -> tuple[str, SyntaxTree]:
    """Top-down expansion: draw a rule at the statement's leaf, apply each
    operation, recurse, and concatenate terminal strings."""
    grammar = trained.grammar

    def expand(nt: str, stmt: Statement, offset: int) -> SyntaxTree:
        info = grammar.info(nt)
        model = trained.model(nt)
        if info.is_affix:
            rule_id = model.by_tense.get(stmt.tense)
            if rule_id is None:
                raise GrammarError(f"no affix rule for tense {stmt.tense} on {nt}")
        else:
            path = feature_path(info.features, stmt)
            weights = model.rule_distribution(path)
            total = sum(weights)
            if total <= 0:
                raise GrammarError(f"no rule has positive probability at {nt}")
            pick = rng.random() * total
            rule_id = 0
            acc = weights[0]
            while acc < pick and rule_id < len(weights) - 1:
                rule_id += 1
                acc += weights[rule_id]
        rule = info.rules[rule_id]
        children = []
        cursor = offset
        for sym, op in zip(rule.rhs, rule.ops):
            if sym.terminal:
                children.append(SyntaxTree(sym.text, cursor,
                                           cursor + len(sym.text),
                                           terminal=True))
                cursor += len(sym.text)
            else:
                child = expand(sym.text, apply_op(op, stmt), cursor)
                children.append(child)
                cursor = child.end
        return SyntaxTree(nt, offset, cursor, tuple(children), rule_id)

    tree = expand(grammar.root, statement, 0)
    sentence = tree.leaf_text()
    if punctuate:
        sentence = (sentence[:1].upper() + sentence[1:] + ".") if sentence else "."
    return sentence, tree


# ---------------------------------------------------------------------------
# Model persistence


def model_to_json(trained: TrainedGrammar) -> str:
    if "pinned" in trained.summary:
        raise GrammarError("pinned models are test fixtures; not serializable")
    counts = {name: {k: v for k, v in row.items()
                     if k != "sampling_seconds"}
              for name, row in trained.summary.get("nonterminals", {}).items()}
    data = {
        "format": "genparse-model/1",
        "grammar": trained.grammar.source,
        "kb_signature": list(trained.kb_signature),
        "models": {
            name: {"tree": hdp.tree_to_dict(trained.trees[name]),
                   "samples": [hdp.sample_to_dict(s)
                               for s in trained.samples[name]]}
            for name in trained.trees},
        "summary": {"sentences": trained.summary.get("sentences", 0),
                    "nonterminals": counts},
    }
    return json.dumps(data, sort_keys=True, indent=1) + "\n"


def model_from_json(text: str) -> TrainedGrammar:
    data = json.loads(text)
    if data.get("format") != "genparse-model/1":
        raise GrammarError("unrecognized model file format")
    grammar = parse_grammar_file(data["grammar"])
    models: dict[str, object] = {}
    trees: dict[str, HdpTree] = {}
    samples: dict[str, list[PosteriorSample]] = {}
    for name, info in grammar.nonterminals.items():
        if info.is_affix:
            models[name] = AffixSelectModel(info)
            continue
        entry = data["models"][name]
        tree = hdp.tree_from_dict(entry["tree"])
        nt_samples = [hdp.sample_from_dict(s, tree) for s in entry["samples"]]
        trees[name] = tree
        samples[name] = nt_samples
        models[name] = HdpSelectModel(info, tree, nt_samples)
    return TrainedGrammar(grammar, tuple(data["kb_signature"]), models,
                          trees, samples, data.get("summary", {}))
