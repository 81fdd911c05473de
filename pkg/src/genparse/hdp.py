"""Hierarchical Dirichlet process over a fixed tree.

The tree is the feature tree of a nonterminal: levels correspond to feature
values, leaves to partition cells of the statement space, and observations
are production-rule ids drawn at leaf paths.  Three pieces live here:

* a Chinese-restaurant-franchise state with collapsed Gibbs sweeps (the
  Dirichlet base and categorical likelihood are conjugate, so table weights
  use closed-form Dirichlet-categorical ratios computed in log space),
* frozen posterior samples with the recursive predictive probability that
  marginalizes over new tables up to the root, and
* a lazy best-first iterator over leaf paths that yields whole path cells in
  non-increasing score order, collapsing every subtree that holds no
  observations into a single wildcard cell so trees whose size is the product
  of feature cardinalities are never materialized.

A CrfState is mutated by one thread at a time; distinct states (one per
nonterminal) can train concurrently.  PosteriorSamples are immutable and may
back any number of concurrent path iterators.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .sets import SlotSet

DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 0.1
DEFAULT_SAMPLES = 5
DEFAULT_BURN_IN = 200
DEFAULT_THIN = 10


class HdpError(ValueError):
    pass


@dataclass(frozen=True)
class HdpTree:
    """Complete tree defined by per-level value domains.

    ``alphas[d]`` is the concentration of every node at depth ``d`` (the root
    is depth 0); ``beta`` is the Dirichlet parameter vector of the root base
    distribution over the outcome vocabulary.
    """

    level_domains: tuple[tuple[int, ...], ...]
    vocab_size: int
    beta: tuple[float, ...]
    alphas: tuple[float, ...]

    def __post_init__(self):
        if len(self.alphas) != self.depth + 1:
            raise HdpError("need one concentration per level, root included")
        if any(a <= 0 for a in self.alphas):
            raise HdpError("concentrations must be positive")
        if len(self.beta) != self.vocab_size or any(b <= 0 for b in self.beta):
            raise HdpError("beta must be positive with one entry per outcome")
        if any(not domain for domain in self.level_domains):
            raise HdpError("level domains must be nonempty")

    @property
    def depth(self) -> int:
        return len(self.level_domains)

    @property
    def beta_sum(self) -> float:
        return sum(self.beta)

    def validate_path(self, path: Sequence[int]) -> tuple[int, ...]:
        path = tuple(path)
        if len(path) != self.depth:
            raise HdpError(f"path {path} has wrong length for depth {self.depth}")
        for value, domain in zip(path, self.level_domains):
            if value not in domain:
                raise HdpError(f"path value {value} outside level domain")
        return path


def make_tree(level_domains: Sequence[Iterable[int]], vocab_size: int,
              alpha: float | Sequence[float] = DEFAULT_ALPHA,
              beta: float | Sequence[float] = DEFAULT_BETA) -> HdpTree:
    domains = tuple(tuple(sorted(d)) for d in level_domains)
    depth = len(domains)
    if isinstance(alpha, (int, float)):
        alphas = (float(alpha),) * (depth + 1)
    else:
        alphas = tuple(float(a) for a in alpha)
    if isinstance(beta, (int, float)):
        betas = (float(beta),) * vocab_size
    else:
        betas = tuple(float(b) for b in beta)
    return HdpTree(domains, vocab_size, betas, alphas)


# ---------------------------------------------------------------------------
# Collapsed Dirichlet-categorical likelihood


@lru_cache(maxsize=None)
def _log_rising(a: float, b: int) -> float:
    """log of a(a+1)...(a+b-1); cached since cluster/observation sizes repeat."""
    if b == 0:
        return 0.0
    return math.lgamma(a + b) - math.lgamma(a)


def collapsed_likelihood(obs: Mapping[int, int], cluster: Mapping[int, int],
                         beta: Sequence[float]) -> float:
    """Log probability of drawing the multiset ``obs`` from the root cluster
    with histogram ``cluster``, with the cluster parameter integrated out.

    Zero-count outcomes contribute a factor of exactly one, so the numerator
    only visits values present in ``obs``.
    """
    n_obs = 0
    total = 0.0
    for value, count in obs.items():
        if count < 0:
            raise HdpError("negative observation count")
        if count == 0:
            continue
        n_obs += count
        total += _log_rising(beta[value] + cluster.get(value, 0), count)
    if n_obs == 0:
        return 0.0
    n_cluster = sum(cluster.values())
    total -= _log_rising(sum(beta) + n_cluster, n_obs)
    return total


def _log_mean(probabilities: Sequence[float]) -> float:
    """Log of the average of plain probabilities."""
    total = sum(probabilities)
    if total <= 0.0:
        return float("-inf")
    return math.log(total / len(probabilities))


# ---------------------------------------------------------------------------
# Chinese restaurant franchise state


class _Table:
    __slots__ = ("count", "hist", "parent_id")

    def __init__(self, count: int, hist: dict[int, int], parent_id: int | None):
        self.count = count
        self.hist = hist
        self.parent_id = parent_id


class _Node:
    __slots__ = ("tables", "total", "next_id")

    def __init__(self):
        self.tables: dict[int, _Table] = {}
        self.total = 0
        self.next_id = 0


class CrfState:
    """Mutable franchise state for one HDP.

    Tables keep their parent-table assignment; the root cluster of a table is
    resolved by following the assignment chain (the chain always reaches the
    root).  Each table also carries the value histogram of its descendant
    observations so reseating moves whole histograms at once.
    """

    def __init__(self, tree: HdpTree, data: Sequence[tuple[Sequence[int], int]]):
        self.tree = tree
        self.data: list[tuple[tuple[int, ...], int]] = [
            (tree.validate_path(path), self._check_value(value))
            for path, value in data]
        self.nodes: dict[tuple[int, ...], _Node] = {}
        self.obs_tables: list[int | None] = [None] * len(self.data)

    def _check_value(self, value: int) -> int:
        if not 0 <= value < self.tree.vocab_size:
            raise HdpError(f"observation value {value} outside vocabulary")
        return value

    # -- structural helpers

    def _node(self, path: tuple[int, ...]) -> _Node:
        node = self.nodes.get(path)
        if node is None:
            node = _Node()
            self.nodes[path] = node
        return node

    def cluster_of(self, path: tuple[int, ...], table_id: int) -> int:
        while path:
            table_id = self.nodes[path].tables[table_id].parent_id
            path = path[:-1]
        return table_id

    def _cluster_hist(self, path: tuple[int, ...], table_id: int) -> dict[int, int]:
        root_id = self.cluster_of(path, table_id)
        return self.nodes[()].tables[root_id].hist

    def _chain_update(self, path: tuple[int, ...], table_id: int,
                      hist: Mapping[int, int], sign: int) -> None:
        while True:
            table = self.nodes[path].tables[table_id]
            for value, count in hist.items():
                updated = table.hist.get(value, 0) + sign * count
                if updated:
                    table.hist[value] = updated
                else:
                    table.hist.pop(value, None)
            if not path:
                return
            table_id = table.parent_id
            path = path[:-1]

    def _unseat(self, path: tuple[int, ...], table_id: int,
                hist: Mapping[int, int]) -> None:
        """Remove one customer carrying ``hist`` from a table; cascade empties."""
        self._chain_update(path, table_id, hist, -1)
        node = self.nodes[path]
        table = node.tables[table_id]
        table.count -= 1
        node.total -= 1
        if table.count == 0:
            parent_id = table.parent_id
            del node.tables[table_id]
            if node.total == 0 and not node.tables:
                del self.nodes[path]
            if path:
                self._unseat(path[:-1], parent_id, {})

    def _new_table_marginal(self, path: tuple[int, ...],
                            hist: Mapping[int, int]) -> float:
        """Log probability of ``hist`` for a customer opening a new table at
        ``path``, marginalizing the new table's assignment up to the root."""
        if not path:
            return collapsed_likelihood(hist, {}, self.tree.beta)
        parent = path[:-1]
        fresh = self._new_table_marginal(parent, hist)
        node = self.nodes.get(parent)
        alpha = self.tree.alphas[len(parent)]
        if node is None or node.total == 0:
            return fresh
        denom = math.log(node.total + alpha)
        terms = [math.log(alpha) - denom + fresh]
        for table_id, table in node.tables.items():
            terms.append(math.log(table.count) - denom
                         + collapsed_likelihood(
                             hist, self._cluster_hist(parent, table_id),
                             self.tree.beta))
        top = max(terms)
        return top + math.log(sum(math.exp(t - top) for t in terms))

    def _seat(self, path: tuple[int, ...], hist: Mapping[int, int],
              rng: np.random.Generator) -> int:
        """Seat one customer at ``path`` by the collapsed conditional; returns
        the chosen table id, creating parent tables recursively as needed."""
        node = self._node(path)
        alpha = self.tree.alphas[len(path)]
        ids = list(node.tables)
        log_w = [math.log(node.tables[t].count)
                 + collapsed_likelihood(hist, self._cluster_hist(path, t),
                                        self.tree.beta)
                 for t in ids]
        log_w.append(math.log(alpha) + self._new_table_marginal(path, hist))
        top = max(log_w)
        weights = [math.exp(w - top) for w in log_w]
        total = sum(weights)
        pick = rng.random() * total
        index = 0
        acc = weights[0]
        while acc < pick and index < len(weights) - 1:
            index += 1
            acc += weights[index]
        if index < len(ids):
            table_id = ids[index]
            node.tables[table_id].count += 1
            node.total += 1
            self._chain_update(path, table_id, hist, +1)
            return table_id
        table_id = node.next_id
        node.next_id += 1
        parent_id = self._seat(path[:-1], hist, rng) if path else None
        node.tables[table_id] = _Table(1, dict(hist), parent_id)
        node.total += 1
        return table_id

    # -- public operations

    def seat_initial(self, rng: np.random.Generator) -> None:
        """Sequentially seat all observations in input order."""
        for i, (path, value) in enumerate(self.data):
            self.obs_tables[i] = self._seat(path, {value: 1}, rng)

    def log_joint_seating(self) -> float:
        """Collapsed log likelihood of all observations given the current
        seating: the product of cluster marginals under the Dirichlet base."""
        root = self.nodes.get(())
        if root is None:
            return 0.0
        total = 0.0
        for table in root.tables.values():
            total += collapsed_likelihood(table.hist, {}, self.tree.beta)
        return total


def init_state(tree: HdpTree, data: Sequence[tuple[Sequence[int], int]],
               rng: np.random.Generator) -> CrfState:
    state = CrfState(tree, data)
    state.seat_initial(rng)
    return state


def validate_state(state: CrfState) -> None:
    """Full recount of customers and histograms; raises on any mismatch."""
    counts: dict[tuple[tuple[int, ...], int], int] = {}
    hists: dict[tuple[tuple[int, ...], int], dict[int, int]] = {}
    for (path, value), table_id in zip(state.data, state.obs_tables):
        if table_id is None:
            raise HdpError("observation is not seated")
        node_path, tid = path, table_id
        counts[(node_path, tid)] = counts.get((node_path, tid), 0) + 1
        while True:
            hist = hists.setdefault((node_path, tid), {})
            hist[value] = hist.get(value, 0) + 1
            if not node_path:
                break
            tid = state.nodes[node_path].tables[tid].parent_id
            node_path = node_path[:-1]
    for path, node in state.nodes.items():
        if node.total != sum(t.count for t in node.tables.values()):
            raise HdpError(f"customer total mismatch at node {path}")
        for table_id, table in node.tables.items():
            if table.hist != hists.get((path, table_id), {}):
                raise HdpError(f"histogram mismatch at node {path} table {table_id}")
            expected = counts.get((path, table_id), 0)
            expected += sum(
                1 for child_path, child in state.nodes.items()
                if len(child_path) == len(path) + 1 and child_path[:-1] == path
                for t in child.tables.values() if t.parent_id == table_id)
            if table.count != expected:
                raise HdpError(f"count mismatch at node {path} table {table_id}")


def gibbs_sweep(state: CrfState, rng: np.random.Generator,
                validate: bool = False) -> CrfState:
    """Resample every seating variable once from its collapsed conditional."""
    if validate:
        validate_state(state)
    for i, (path, value) in enumerate(state.data):
        hist = {value: 1}
        self_id = state.obs_tables[i]
        state._unseat(path, self_id, hist)
        state.obs_tables[i] = state._seat(path, hist, rng)
    for depth in range(state.tree.depth, 0, -1):
        level = [(path, table_id)
                 for path in sorted(p for p in state.nodes if len(p) == depth)
                 for table_id in state.nodes[path].tables]
        for path, table_id in level:
            node = state.nodes.get(path)
            if node is None or table_id not in node.tables:
                continue
            table = node.tables[table_id]
            hist = dict(table.hist)
            state._unseat(path[:-1], table.parent_id, hist)
            table.parent_id = state._seat(path[:-1], hist, rng)
    return state


# ---------------------------------------------------------------------------
# Posterior samples and predictive probabilities


@dataclass(frozen=True)
class PosteriorSample:
    """Frozen counts sufficient to evaluate predictive probabilities."""

    tree: HdpTree
    nodes: dict  # path -> (counts tuple, cluster-index tuple)
    cluster_hists: tuple[tuple[int, ...], ...]
    cluster_totals: tuple[int, ...]

    def outcome_prob(self, cluster_index: int, y: int) -> float:
        hist = self.cluster_hists[cluster_index]
        return ((self.tree.beta[y] + hist[y])
                / (self.tree.beta_sum + self.cluster_totals[cluster_index]))


def snapshot(state: CrfState) -> PosteriorSample:
    root = state.nodes.get(())
    cluster_ids = list(root.tables) if root is not None else []
    cluster_index = {cid: i for i, cid in enumerate(cluster_ids)}
    hists = []
    totals = []
    for cid in cluster_ids:
        hist = root.tables[cid].hist
        hists.append(tuple(hist.get(v, 0) for v in range(state.tree.vocab_size)))
        totals.append(sum(hist.values()))
    nodes = {}
    for path, node in state.nodes.items():
        counts = tuple(t.count for t in node.tables.values())
        clusters = tuple(cluster_index[state.cluster_of(path, tid)]
                         for tid in node.tables)
        nodes[path] = (counts, clusters)
    return PosteriorSample(state.tree, nodes, tuple(hists), tuple(totals))


def sample_posterior(state: CrfState, rng: np.random.Generator,
                     n_samples: int = DEFAULT_SAMPLES,
                     burn_in: int = DEFAULT_BURN_IN,
                     thin: int = DEFAULT_THIN) -> list[PosteriorSample]:
    """Collapsed Gibbs sampling: ``burn_in`` sweeps, then one frozen sample
    every ``thin`` sweeps.  Deterministic under a fixed generator state."""
    if n_samples < 1:
        raise HdpError("need at least one posterior sample")
    if thin < 1:
        raise HdpError("thinning interval must be at least 1")
    validate_state(state)
    for _ in range(burn_in):
        gibbs_sweep(state, rng)
    samples = []
    for _ in range(n_samples):
        for _ in range(thin):
            gibbs_sweep(state, rng)
        samples.append(snapshot(state))
    return samples


def predictive_prob(sample: PosteriorSample, path: Sequence[int], y: int) -> float:
    """p(y at path) under one frozen sample, mixing existing tables with the
    recursively marginalized new-table term; the root fallthrough is the
    Dirichlet prior mean."""
    tree = sample.tree
    path = tree.validate_path(path)
    value = tree.beta[y] / tree.beta_sum
    for depth in range(tree.depth + 1):
        entry = sample.nodes.get(path[:depth])
        if entry is None:
            continue
        counts, clusters = entry
        total = sum(counts)
        alpha = tree.alphas[depth]
        mix = alpha / (total + alpha) * value
        for count, cluster in zip(counts, clusters):
            mix += count / (total + alpha) * sample.outcome_prob(cluster, y)
        value = mix
    return value


# ---------------------------------------------------------------------------
# Incremental best-path search


PathPrior = Callable[[Sequence[SlotSet]], float]


@dataclass
class PathSearchState:
    """Search position: a node plus per-sample new-table probabilities."""

    prefix: tuple[int, ...]
    v: tuple[float, ...]


class PathIterator:
    """Lazily yields ``(cell, log score)`` pairs in non-increasing score order.

    A cell is one :class:`SlotSet` per tree level.  Fully specified paths
    appear as singleton cells; every subtree without observations is emitted
    as a single wildcard cell covering all of its paths at once.  ``path_prior``
    maps a cell to an upper bound on the log prior weight of its paths and
    must be monotone under cell inclusion; ``restriction`` limits the search
    to paths whose value at each level lies in the given set.
    """

    def __init__(self, samples: Sequence[PosteriorSample], tree: HdpTree, y: int,
                 path_prior: PathPrior | None = None,
                 restriction: Sequence[SlotSet] | None = None):
        if not samples:
            raise HdpError("path search needs at least one posterior sample")
        if not 0 <= y < tree.vocab_size:
            raise HdpError(f"value {y} outside vocabulary")
        self.samples = list(samples)
        self.tree = tree
        self.y = y
        self.path_prior = path_prior or (lambda cell: 0.0)
        if restriction is not None and len(restriction) != tree.depth:
            raise HdpError("restriction needs one value set per level")
        self.restriction = list(restriction) if restriction is not None else None
        self._heap: list = []
        self._seq = itertools.count()
        self._children: dict[tuple[int, ...], list[int]] = {}
        occupied = set()
        for sample in self.samples:
            occupied.update(sample.nodes)
        for path in occupied:
            if path:
                self._children.setdefault(path[:-1], []).append(path[-1])
        for values in self._children.values():
            values.sort()
        self._init_root(() in occupied)

    # -- helpers

    def _allowed(self, level: int) -> SlotSet:
        if self.restriction is None:
            return SlotSet.wildcard()
        return self.restriction[level]

    def _domain(self, level: int) -> tuple[int, ...]:
        return self.tree.level_domains[level]

    def _prior_value(self, y: int) -> float:
        return self.tree.beta[y] / self.tree.beta_sum

    def _node_mix(self, sample: PosteriorSample, prefix: tuple[int, ...],
                  fallthrough: float) -> float:
        entry = sample.nodes.get(prefix)
        if entry is None:
            return fallthrough
        counts, clusters = entry
        total = sum(counts)
        alpha = self.tree.alphas[len(prefix)]
        mix = alpha / (total + alpha) * fallthrough
        for count, cluster in zip(counts, clusters):
            mix += count / (total + alpha) * sample.outcome_prob(cluster, self.y)
        return mix

    def _node_max_table(self, sample: PosteriorSample,
                        prefix: tuple[int, ...]) -> float:
        entry = sample.nodes.get(prefix)
        if entry is None:
            return 0.0
        _, clusters = entry
        if not clusters:
            return 0.0
        return max(sample.outcome_prob(c, self.y) for c in clusters)

    def _wild_cell(self, prefix_sets: list[SlotSet], level: int,
                   first: SlotSet | None = None) -> list[SlotSet] | None:
        """Cell made of the prefix, an optional set at ``level``, and the
        restriction (or full wildcard) below; None if any level is empty."""
        cell = list(prefix_sets)
        start = level
        if first is not None:
            if first.is_empty_given(len(self._domain(level))):
                return None
            cell.append(first)
            start = level + 1
        for deeper in range(start, self.tree.depth):
            allowed = self._allowed(deeper)
            if allowed.is_empty_given(len(self._domain(deeper))):
                return None
            cell.append(allowed)
        return cell

    def _push(self, key: float, complete: bool, cell_or_prefix, v,
              prefix_sets=None):
        heapq.heappush(self._heap, (-key, next(self._seq), complete,
                                    cell_or_prefix, v, prefix_sets))

    def _init_root(self, root_occupied: bool) -> None:
        prior = self._prior_value(self.y)
        v = tuple(self._node_mix(s, (), prior) for s in self.samples)
        if self.tree.depth == 0:
            cell: list[SlotSet] = []
            self._push(self.path_prior(cell) + _log_mean(v), True, cell, v)
            return
        if not root_occupied:
            cell = self._wild_cell([], 0)
            if cell is not None:
                self._push(self.path_prior(cell) + _log_mean(v), True, cell, v)
            return
        bound = _log_mean(tuple(
            max(self._node_max_table(s, ()), vi)
            for s, vi in zip(self.samples, v)))
        cell = self._wild_cell([], 0)
        if cell is not None:
            self._push(self.path_prior(cell) + bound, False, (), v,
                       prefix_sets=[])

    def _expand(self, prefix: tuple[int, ...], v: tuple[float, ...],
                prefix_sets: list[SlotSet]) -> None:
        level = len(prefix)
        allowed = self._allowed(level)
        occupied = self._children.get(prefix, [])
        for value in occupied:
            if not allowed.contains(value):
                continue
            child = prefix + (value,)
            child_sets = prefix_sets + [SlotSet.singleton(value)]
            child_v = tuple(self._node_mix(s, child, vi)
                            for s, vi in zip(self.samples, v))
            if level + 1 == self.tree.depth:
                cell = list(child_sets)
                self._push(self.path_prior(cell) + _log_mean(child_v),
                           True, cell, child_v)
            else:
                bound = _log_mean(tuple(
                    max(self._node_max_table(s, child), vi)
                    for s, vi in zip(self.samples, child_v)))
                cell = self._wild_cell(child_sets, level + 1)
                if cell is not None:
                    self._push(self.path_prior(cell) + bound, False, child,
                               child_v, prefix_sets=child_sets)
        group = allowed.difference_explicit(occupied)
        if not group.is_empty_given(len(self._domain(level))):
            # Paths through unoccupied children share the fallthrough value,
            # so their whole subtrees complete as one cell.
            cell = self._wild_cell(prefix_sets, level, first=group)
            if cell is not None:
                self._push(self.path_prior(cell) + _log_mean(v),
                           True, cell, v)

    # -- iterator protocol

    def __iter__(self) -> "PathIterator":
        return self

    def __next__(self) -> tuple[list[SlotSet], float]:
        while self._heap:
            neg_key, _, complete, payload, v, prefix_sets = heapq.heappop(self._heap)
            if complete:
                return list(payload), -neg_key
            self._expand(payload, v, prefix_sets)
        raise StopIteration

    def peek_key(self) -> float | None:
        """Upper bound on the score of the next yield; None when exhausted."""
        if not self._heap:
            return None
        return -self._heap[0][0]


def path_iterator(samples: Sequence[PosteriorSample], tree: HdpTree, y: int,
                  path_prior: PathPrior | None = None,
                  restriction: Sequence[SlotSet] | None = None) -> PathIterator:
    return PathIterator(samples, tree, y, path_prior, restriction)


def bound_at_root(samples: Sequence[PosteriorSample], tree: HdpTree, y: int,
                  path_prior: PathPrior | None = None) -> float:
    """The search key evaluated at the root: an upper bound on every path's
    score, available without descending the tree."""
    if not samples:
        raise HdpError("need at least one posterior sample")
    prior_cb = path_prior or (lambda cell: 0.0)
    prior = tree.beta[y] / tree.beta_sum
    per_sample = []
    for sample in samples:
        entry = sample.nodes.get(())
        fallthrough = prior
        best_table = 0.0
        if entry is not None:
            counts, clusters = entry
            total = sum(counts)
            alpha = tree.alphas[0]
            mix = alpha / (total + alpha) * prior
            for count, cluster in zip(counts, clusters):
                p = sample.outcome_prob(cluster, y)
                mix += count / (total + alpha) * p
                best_table = max(best_table, p)
            fallthrough = mix
        per_sample.append(max(best_table, fallthrough))
    cell = [SlotSet.wildcard()] * tree.depth
    return prior_cb(cell) + _log_mean(per_sample)


# ---------------------------------------------------------------------------
# Serialization


def tree_to_dict(tree: HdpTree) -> dict:
    return {"levels": [list(d) for d in tree.level_domains],
            "vocab": tree.vocab_size,
            "beta": list(tree.beta),
            "alphas": list(tree.alphas)}


def tree_from_dict(data: dict) -> HdpTree:
    return HdpTree(tuple(tuple(d) for d in data["levels"]), data["vocab"],
                   tuple(data["beta"]), tuple(data["alphas"]))


def sample_to_dict(sample: PosteriorSample) -> dict:
    return {
        "nodes": {",".join(map(str, path)): [list(counts), list(clusters)]
                  for path, (counts, clusters) in sorted(sample.nodes.items())},
        "cluster_hists": [list(h) for h in sample.cluster_hists],
        "cluster_totals": list(sample.cluster_totals),
    }


def sample_from_dict(data: dict, tree: HdpTree) -> PosteriorSample:
    nodes = {}
    for key, (counts, clusters) in data["nodes"].items():
        path = tuple(int(v) for v in key.split(",")) if key else ()
        nodes[path] = (tuple(counts), tuple(clusters))
    return PosteriorSample(tree, nodes,
                           tuple(tuple(h) for h in data["cluster_hists"]),
                           tuple(data["cluster_totals"]))
