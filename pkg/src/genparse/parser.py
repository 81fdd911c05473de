"""Exact k-best joint semantic-syntactic parsing.

The search runs over rule states (the parser's position inside one production
rule over a span, with an exact inner log probability and a compact statement
set) and nonterminal structures (completed sub-parses).  A priority agenda
pops the item with the highest upper bound on any full parse through it; the
bound combines the exact inner score so far, a syntactic best-split bound on
the remaining right-hand symbols, a bound on the rule's own selection
probability, and the minimum of the statement-set prior bound and the outer
bound captured at first expansion of the span.

Because the inner log probability field is always exact and bounds never
undershoot, pop priorities are non-increasing and the first k root-spanning
structures popped are exactly the k best parses.

Each parse is one single-threaded search over an immutable trained model;
bound tables are per parse, so any number of sentences parse concurrently.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import semantics
from .grammar import AugmentedRule, SyntaxTree, TrainedGrammar
from .ontology import KnowledgeBase, PriorConfig, set_prior_upper_bound
from .semantics import ALL_TENSES, ABSENT, StatementSet
from .sets import SlotSet

NEG_INF = float("-inf")


def _root_compatible_sets(xs: StatementSet) -> list[StatementSet]:
    """Root statements whose transformation chain can land in ``xs``.

    Relations and tenses survive every chain; an argument slot survives
    unless some operation deleted it, and a bare value may have come from
    either argument.  The search priority must bound the prior of the root
    statement, not of the item's own projected set.
    """
    wild = SlotSet.wildcard()
    candidates = []
    comp = xs.relational
    if comp is not None:
        arg1 = wild if comp.arg1.contains(ABSENT) else comp.arg1
        arg2 = wild if comp.arg2.contains(ABSENT) else comp.arg2
        candidates.append(semantics.relational_set(comp.rel, arg1, arg2,
                                                   comp.tenses))
    if xs.concepts is not None:
        candidates.append(semantics.relational_set(wild, xs.concepts, wild,
                                                   ALL_TENSES))
        candidates.append(semantics.relational_set(wild, wild, xs.concepts,
                                                   ALL_TENSES))
    if xs.bare_tenses:
        candidates.append(semantics.relational_set(wild, wild, wild,
                                                   xs.bare_tenses))
    return candidates


class ParseError(ValueError):
    pass


@dataclass
class RuleState:
    """Progress through one production rule over a sentence span."""

    nt: str
    rule: AugmentedRule
    start: int
    end: int
    i: int
    k: int
    semantics: StatementSet
    children: tuple[SyntaxTree, ...]
    log_probability: float
    iterator: object | None = None

    @property
    def complete(self) -> bool:
        return self.k == len(self.rule.rhs) and self.i == self.end


@dataclass
class NonterminalStructure:
    """A completed nonterminal parse with its semantics cell and exact score."""

    nonterminal: str
    start: int
    end: int
    semantics: StatementSet
    syntax: SyntaxTree
    log_probability: float


@dataclass(frozen=True)
class ParseOutput:
    semantics: StatementSet
    tree: SyntaxTree
    score: float
    posterior: float
    log_rules: float


@dataclass
class ParseResult:
    outputs: list[ParseOutput]
    exhausted: bool
    pops: int
    pop_priorities: list[float] = field(default_factory=list)


def _max_plus(g: np.ndarray, m: np.ndarray) -> np.ndarray:
    out = np.full_like(g, NEG_INF)
    size = g.shape[0]
    for i in range(size):
        row = g[i]
        finite = row > NEG_INF
        if not finite.any():
            continue
        out[i] = np.max(row[finite, None] + m[finite, :], axis=0)
    return out


def compute_inner_bounds(sentence: str, trained: TrainedGrammar) -> dict[str, np.ndarray]:
    """Syntactic upper bound ``I[A][i, j]`` on the inner log probability of any
    parse of nonterminal A over span [i, j).

    Terminals bound to zero exactly on spans of their own length and minus
    infinity elsewhere; rule terms use the selection bound evaluated at the
    tree root.  Computed by max-plus dynamic programming iterated to a fixed
    point to cover unary and empty productions.
    """
    size = len(sentence) + 1
    grammar = trained.grammar
    identity = np.full((size, size), NEG_INF)
    np.fill_diagonal(identity, 0.0)
    terminal_m: dict[int, np.ndarray] = {}

    def terminal_matrix(length: int) -> np.ndarray:
        if length not in terminal_m:
            m = np.full((size, size), NEG_INF)
            for i in range(size - length):
                m[i, i + length] = 0.0
            terminal_m[length] = m
        return terminal_m[length]

    bounds = {name: np.full((size, size), NEG_INF) for name in grammar.nonterminals}
    rule_bounds = {
        name: [trained.model(name).root_bound(rule.rule_id)
               for rule in info.rules]
        for name, info in grammar.nonterminals.items()}
    for _ in range(len(grammar.nonterminals) + 2):
        changed = False
        for name, info in grammar.nonterminals.items():
            best = np.full((size, size), NEG_INF)
            for rule in info.rules:
                g = identity
                for sym in rule.rhs:
                    m = (terminal_matrix(len(sym.text)) if sym.terminal
                         else bounds[sym.text])
                    g = _max_plus(g, m)
                rb = rule_bounds[name][rule.rule_id]
                if rb > NEG_INF:
                    np.maximum(best, g + rb, out=best)
            merged = np.maximum(bounds[name], best)
            if not np.array_equal(merged, bounds[name]):
                bounds[name] = merged
                changed = True
        if not changed:
            break
    return bounds


class AgendaParser:
    """One search instance; see :func:`parse` for the plain-function entry."""

    def __init__(self, sentence: str, trained: TrainedGrammar,
                 kb: KnowledgeBase, prior: PriorConfig, k: int,
                 collect_stats: bool = False):
        if not sentence:
            raise ParseError("cannot parse an empty sentence")
        if k < 1:
            raise ParseError("k must be at least 1")
        if trained.kb_signature != (kb.num_concepts, kb.num_relations):
            raise ParseError("model was trained against a different ontology")
        self.sentence = sentence
        self.length = len(sentence)
        self.trained = trained
        self.grammar = trained.grammar
        self.kb = kb
        self.prior = prior
        self.k = k
        self.collect_stats = collect_stats
        self.inner = compute_inner_bounds(sentence, trained)
        self.outer: dict[tuple[str, int, int], float] = {}
        self.expanded: set[tuple[str, int, int]] = set()
        self.waiting: dict[tuple[str, int], list[RuleState]] = {}
        self.structures: dict[tuple[str, int], list[NonterminalStructure]] = {}
        self.first_structure: set[tuple[str, int, int]] = set()
        self.outputs: list[ParseOutput] = []
        self.seen_outputs: set[tuple[StatementSet, str]] = set()
        self.pop_priorities: list[float] = []
        self.pops = 0
        self._heap: list = []
        self._seq = itertools.count()
        self._prior_cache: dict[StatementSet, float] = {}
        # Worst-case gap between two statement-set prior bounds; a structure
        # popped later on the same span can exceed the first one's inner score
        # by at most this much, so the tightened inner bound stays admissible.
        if prior.mode == "kb":
            self._prior_spread = prior.kb_bonus
        elif prior.mode == "type_correct":
            self._prior_spread = prior.type_bonus
        else:
            self._prior_spread = 0.0
        self._seed()

    # -- bounds and priorities

    def _prior_bound(self, xs: StatementSet) -> float:
        """Upper bound on the prior of root statements compatible with ``xs``."""
        cached = self._prior_cache.get(xs)
        if cached is None:
            cached = 0.0
            for candidate in _root_compatible_sets(xs):
                if semantics.is_empty(candidate, self.kb):
                    continue
                cached = max(cached, set_prior_upper_bound(candidate, self.kb,
                                                           self.prior))
            self._prior_cache[xs] = cached
        return cached

    def _rule_bound(self, nt: str, rule_id: int) -> float:
        return self.trained.model(nt).root_bound(rule_id)

    def _remaining_bound(self, rule: AugmentedRule, k: int, i: int,
                         end: int) -> float:
        """Best split of inner bounds for symbols k.. over [i, end]."""
        positions = {i: 0.0}
        for sym in rule.rhs[k:]:
            advanced: dict[int, float] = {}
            if sym.terminal:
                width = len(sym.text)
                for pos, value in positions.items():
                    if pos + width <= end:
                        prev = advanced.get(pos + width, NEG_INF)
                        if value > prev:
                            advanced[pos + width] = value
            else:
                row = self.inner[sym.text]
                for pos, value in positions.items():
                    for j in range(pos, end + 1):
                        bound = row[pos, j]
                        if bound == NEG_INF:
                            continue
                        prev = advanced.get(j, NEG_INF)
                        if value + bound > prev:
                            advanced[j] = value + bound
            positions = advanced
            if not positions:
                return NEG_INF
        return positions.get(end, NEG_INF)

    def _outer_term(self, nt: str, start: int, end: int,
                    xs: StatementSet) -> float:
        outer = self.outer.get((nt, start, end), math.inf)
        return min(self._prior_bound(xs), outer)

    def priority(self, item) -> float:
        """Upper bound on the log score of any full parse through ``item``."""
        if isinstance(item, NonterminalStructure):
            return item.log_probability + self._outer_term(
                item.nonterminal, item.start, item.end, item.semantics)
        state = item
        outer = self._outer_term(state.nt, state.start, state.end,
                                 state.semantics)
        if state.complete:
            if state.iterator is not None:
                peek = state.iterator.peek_key()
                if peek is None:
                    return NEG_INF
            else:
                peek = self._rule_bound(state.nt, state.rule.rule_id)
            return state.log_probability + peek + outer
        return (state.log_probability
                + self._rule_bound(state.nt, state.rule.rule_id)
                + self._remaining_bound(state.rule, state.k, state.i, state.end)
                + outer)

    # -- agenda plumbing

    def _push(self, item) -> None:
        if isinstance(item, RuleState) and not item.complete:
            if item.k == len(item.rule.rhs):
                return          # rule exhausted short of its end position
        score = self.priority(item)
        if score == NEG_INF:
            return
        heapq.heappush(self._heap, (-score, next(self._seq), item))

    def _seed(self) -> None:
        root = self.grammar.root
        space = self.grammar.info(root).space
        for rule in self.grammar.rules_of(root):
            self._push(RuleState(root, rule, 0, self.length, 0, 0,
                                 space, (), 0.0))

    # -- operations

    def expansion(self, state: RuleState) -> None:
        """Predict fresh states for the next nonterminal, or scan a terminal."""
        sym = state.rule.rhs[state.k]
        if sym.terminal:
            width = len(sym.text)
            if (state.i + width <= state.end
                    and self.sentence[state.i:state.i + width] == sym.text):
                leaf = SyntaxTree(sym.text, state.i, state.i + width,
                                  terminal=True)
                self._push(replace(state, i=state.i + width, k=state.k + 1,
                                   children=state.children + (leaf,)))
            return
        name = sym.text
        space = self.grammar.info(name).space
        row = self.inner[name]
        for j in range(state.i, state.end + 1):
            if row[state.i, j] == NEG_INF:
                continue
            after = self._remaining_bound(state.rule, state.k + 1, j, state.end)
            if after == NEG_INF:
                continue
            key = (name, state.i, j)
            if key in self.expanded:
                continue
            self.expanded.add(key)
            # First expansion realizes the maximizing left outer parse, so the
            # outer bound for this span is captured here at no extra cost.
            self.outer[key] = (state.log_probability
                               + self._rule_bound(state.nt, state.rule.rule_id)
                               + after
                               + self._outer_term(state.nt, state.start,
                                                  state.end, state.semantics))
            for rule in self.grammar.rules_of(name):
                self._push(RuleState(name, rule, state.i, j, state.i, 0,
                                     space, (), 0.0))

    def completion(self, state: RuleState, structure: NonterminalStructure) -> None:
        """Advance a waiting rule state over a completed nonterminal."""
        if structure.end > state.end:
            return
        op = state.rule.ops[state.k]
        merged = semantics.intersect(
            state.semantics,
            semantics.preimage_set(op, structure.semantics, self.kb))
        if semantics.is_empty(merged, self.kb):
            return
        self._push(replace(
            state, i=structure.end, k=state.k + 1, semantics=merged,
            children=state.children + (structure.syntax,),
            log_probability=state.log_probability + structure.log_probability))

    def iteration(self, state: RuleState) -> None:
        """Emit the next-best semantics cell for a completed rule."""
        info = self.grammar.info(state.nt)
        if state.iterator is None:
            restriction = semantics.level_value_sets(info.features,
                                                     state.semantics)
            state.iterator = self.trained.model(state.nt).iterate(
                state.rule.rule_id, restriction)
        emitted = None
        for cell, score in state.iterator:
            cell_set = semantics.cell_from_level_sets(info.features, cell)
            merged = semantics.intersect(cell_set, state.semantics)
            if semantics.is_empty(merged, self.kb):
                continue
            syntax = SyntaxTree(state.nt, state.start, state.end,
                                state.children, state.rule.rule_id)
            emitted = NonterminalStructure(
                state.nt, state.start, state.end, merged, syntax,
                state.log_probability + score)
            break
        if emitted is not None:
            self._push(emitted)
        if state.iterator.peek_key() is not None:
            self._push(state)

    def _pop_structure(self, structure: NonterminalStructure) -> None:
        key = (structure.nonterminal, structure.start, structure.end)
        if key not in self.first_structure:
            self.first_structure.add(key)
            # The first structure on a span bounds every later one up to the
            # prior spread, so the syntactic bound tightens from here on.
            row = self.inner[structure.nonterminal]
            row[structure.start, structure.end] = min(
                row[structure.start, structure.end],
                structure.log_probability + self._prior_spread)
        if (structure.nonterminal == self.grammar.root
                and structure.start == 0 and structure.end == self.length):
            self._record_output(structure)
        self.structures.setdefault(
            (structure.nonterminal, structure.start), []).append(structure)
        for state in self.waiting.get(
                (structure.nonterminal, structure.start), []):
            self.completion(state, structure)

    def _record_output(self, structure: NonterminalStructure) -> None:
        signature = (structure.semantics, structure.syntax.text(spans=True))
        if signature in self.seen_outputs:
            return
        self.seen_outputs.add(signature)
        score = structure.log_probability + self._prior_bound(structure.semantics)
        self.outputs.append(ParseOutput(structure.semantics, structure.syntax,
                                        score, 0.0, structure.log_probability))

    def run(self) -> ParseResult:
        while self._heap and len(self.outputs) < self.k:
            neg_score, _, item = heapq.heappop(self._heap)
            self.pops += 1
            if self.collect_stats:
                self.pop_priorities.append(-neg_score)
            if isinstance(item, NonterminalStructure):
                self._pop_structure(item)
            elif item.complete:
                self.iteration(item)
            else:
                sym = item.rule.rhs[item.k]
                if not sym.terminal:
                    for structure in self.structures.get(
                            (sym.text, item.i), []):
                        self.completion(item, structure)
                    self.waiting.setdefault((sym.text, item.i), []).append(item)
                self.expansion(item)
        exhausted = len(self.outputs) < self.k
        scores = [o.score for o in self.outputs]
        if scores:
            top = max(scores)
            total = sum(math.exp(s - top) for s in scores)
            self.outputs = [
                replace(o, posterior=math.exp(o.score - top) / total)
                for o in self.outputs]
        return ParseResult(self.outputs, exhausted, self.pops,
                           self.pop_priorities)


def parse(sentence: str, trained: TrainedGrammar, kb: KnowledgeBase,
          prior: PriorConfig | None = None, k: int = 1,
          collect_stats: bool = False) -> ParseResult:
    """Exact k-best parses of a sentence, in non-increasing score order.

    Scores are the summed rule log probabilities plus the prior bound of the
    output's statement set; posterior estimates normalize over the returned
    outputs only.  If the agenda empties first, fewer outputs come back and
    ``exhausted`` is set.
    """
    prior = prior or PriorConfig()
    search = AgendaParser(sentence, trained, kb, prior, k, collect_stats)
    return search.run()
