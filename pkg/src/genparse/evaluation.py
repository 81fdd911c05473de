"""Corpus synthesis, prediction scoring, and precision-recall evaluation.

Predictions are scored under two policies: ``strict`` counts an output as
correct only when it is an unambiguous singleton equal to the gold statement
(ambiguous outputs count as non-parses), while ``contains`` accepts any
output set containing the gold statement, which measures out-of-vocabulary
behavior.  Curves sweep the confidence ranking; the area under the curve
uses the trapezoidal rule over the swept points.

Everything here is a pure function over immutable inputs; per-sentence
parsing can run in parallel and feed a single-threaded aggregation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import grammar as grammar_mod
from . import ontology, parser, semantics
from .grammar import CorpusRecord, TrainedGrammar
from .ontology import KnowledgeBase, PriorConfig
from .semantics import Statement, StatementSet, Tense


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class Prediction:
    sentence_id: str
    statements: StatementSet
    confidence: float
    is_ambiguous: bool

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise EvalError("confidence must lie in [0, 1]")


@dataclass(frozen=True)
class PrPoint:
    threshold: float
    precision: float
    recall: float


@dataclass(frozen=True)
class PrCurve:
    points: tuple[PrPoint, ...]
    auc: float


def trapezoid_auc(points) -> float:
    """Area under (recall, precision) points, anchored at recall zero."""
    if not points:
        return 0.0
    area = 0.0
    prev_r, prev_p = 0.0, points[0].precision
    for point in points:
        area += (point.recall - prev_r) * (point.precision + prev_p) / 2.0
        prev_r, prev_p = point.recall, point.precision
    return area


def _is_correct(pred: Prediction, gold: Statement, kb: KnowledgeBase,
                policy: str) -> bool:
    if policy == "strict":
        single = semantics.as_singleton(pred.statements, kb)
        return single == gold
    return semantics.statement_in(gold, pred.statements)


def score_predictions(predictions, gold: dict[str, Statement],
                      kb: KnowledgeBase, policy: str = "strict") -> PrCurve:
    """Sweep the confidence ranking into a precision-recall curve.

    Recall is measured against every gold sentence; under the strict policy
    ambiguous outputs are dropped up front as non-parses.
    """
    if policy not in ("strict", "contains"):
        raise EvalError(f"unknown policy {policy!r}")
    seen_ids = set()
    for pred in predictions:
        if pred.sentence_id in seen_ids:
            raise EvalError(f"duplicate sentence id {pred.sentence_id!r}")
        seen_ids.add(pred.sentence_id)
        if pred.sentence_id not in gold:
            raise EvalError(f"no gold label for {pred.sentence_id!r}")
    usable = [p for p in predictions
              if policy == "contains" or not p.is_ambiguous]
    ranked = sorted(usable, key=lambda p: (-p.confidence, p.sentence_id))
    points = []
    correct = 0
    for n, pred in enumerate(ranked, start=1):
        if _is_correct(pred, gold[pred.sentence_id], kb, policy):
            correct += 1
        points.append(PrPoint(pred.confidence, correct / n,
                              correct / len(gold) if gold else 0.0))
    return PrCurve(tuple(points), trapezoid_auc(points))


# ---------------------------------------------------------------------------
# Corpus synthesis


def _statement_pool(trained: TrainedGrammar, kb: KnowledgeBase,
                    tense_mode: str) -> list[Statement]:
    """All type-correct statements over the ontology, at the tenses the
    grammar generates."""
    tenses = sorted(trained.grammar.tenses)
    if tense_mode == "present_only":
        tenses = [int(Tense.PRESENT)] if int(Tense.PRESENT) in tenses else tenses[:1]
    elif tense_mode != "all":
        raise EvalError(f"unknown tense mode {tense_mode!r}")
    pool = []
    for relation in kb.relations:
        for arg1 in sorted(kb.category_members[relation.domain]):
            for arg2 in sorted(kb.category_members[relation.range]):
                for tense in tenses:
                    pool.append(Statement(relation.id, arg1, arg2, tense))
    if not pool:
        raise EvalError("ontology admits no type-correct statements")
    return pool


def synthesize_corpus(trained: TrainedGrammar, kb: KnowledgeBase, n: int,
                      seed: int = 0, tense_mode: str = "all",
                      prior: PriorConfig | None = None) -> list[CorpusRecord]:
    """Sample statements from the prior and generate gold-labeled sentences."""
    prior = prior or PriorConfig()
    rng = np.random.default_rng(seed)
    pool = _statement_pool(trained, kb, tense_mode)
    weights = np.array([ontology.prior_log_weight(x, kb, prior) for x in pool])
    weights = np.exp(weights - weights.max())
    weights /= weights.sum()
    records = []
    for _ in range(n):
        statement = pool[int(rng.choice(len(pool), p=weights))]
        sentence, tree = grammar_mod.generate(trained, statement, rng)
        records.append(CorpusRecord(sentence, statement, tree))
    return records


# ---------------------------------------------------------------------------
# Parser-backed evaluation


def predictions_from_parses(records, trained: TrainedGrammar,
                            kb: KnowledgeBase, prior: PriorConfig,
                            k: int) -> tuple[list[Prediction], dict[str, Statement],
                                             list[parser.ParseResult], float]:
    """Parse each record; the top parse becomes the prediction, with its
    k-truncated posterior estimate as confidence."""
    predictions = []
    gold = {}
    results = []
    started = time.perf_counter()
    for index, record in enumerate(records):
        sid = f"s{index}"
        gold[sid] = record.statement
        result = parser.parse(record.sentence, trained, kb, prior, k=k)
        results.append(result)
        if result.outputs:
            top = result.outputs[0]
            single = semantics.as_singleton(top.semantics, kb)
            predictions.append(Prediction(sid, top.semantics, top.posterior,
                                          single is None))
    elapsed = time.perf_counter() - started
    return predictions, gold, results, elapsed


@dataclass(frozen=True)
class AucVsKRow:
    k: int
    strict_auc: float
    contains_auc: float
    mean_parse_seconds: float


def auc_vs_k(records, trained: TrainedGrammar, kb: KnowledgeBase,
             prior: PriorConfig, k_values) -> list[AucVsKRow]:
    """AUC of both policies as a function of k.

    Sentences are parsed once at the largest k; the prefix property makes the
    smaller-k outputs the leading slice of that run, so each row rescores the
    truncated outputs.  The timing column reports the shared full-k run
    averaged per sentence.
    """
    k_values = list(k_values)
    if k_values != sorted(k_values):
        raise EvalError("k values must be sorted ascending")
    k_max = k_values[-1]
    predictions_full, gold, results, elapsed = predictions_from_parses(
        records, trained, kb, prior, k_max)
    mean_seconds = elapsed / max(len(list(records)), 1)
    rows = []
    for k in k_values:
        predictions = []
        for index, result in enumerate(results):
            outputs = result.outputs[:k]
            if not outputs:
                continue
            scores = np.array([o.score for o in outputs])
            weights = np.exp(scores - scores.max())
            confidence = float(weights[0] / weights.sum())
            top = outputs[0]
            single = semantics.as_singleton(top.semantics, kb)
            predictions.append(Prediction(f"s{index}", top.semantics,
                                          confidence, single is None))
        strict = score_predictions(predictions, gold, kb, "strict")
        contains = score_predictions(predictions, gold, kb, "contains")
        rows.append(AucVsKRow(k, strict.auc, contains.auc, mean_seconds))
    return rows


# ---------------------------------------------------------------------------
# Report rendering


def pr_points_csv(curve: PrCurve) -> str:
    lines = ["threshold,precision,recall"]
    for point in curve.points:
        lines.append(f"{point.threshold:.9f},{point.precision:.9f},{point.recall:.9f}")
    return "\n".join(lines) + "\n"


def auc_vs_k_csv(rows) -> str:
    lines = ["k,strict_auc,contains_auc,mean_parse_seconds"]
    for row in rows:
        lines.append(f"{row.k},{row.strict_auc:.9f},{row.contains_auc:.9f},"
                     f"{row.mean_parse_seconds:.6f}")
    return "\n".join(lines) + "\n"


def report_text(strict: PrCurve, contains: PrCurve, rows) -> str:
    lines = ["policy      auc",
             f"strict      {strict.auc:.6f}",
             f"contains    {contains.auc:.6f}"]
    if rows:
        lines.append("")
        lines.append("k        strict_auc  contains_auc  mean_parse_s")
        for row in rows:
            lines.append(f"{row.k:<8d} {row.strict_auc:<11.6f} "
                         f"{row.contains_auc:<13.6f} {row.mean_parse_seconds:.4f}")
    return "\n".join(lines) + "\n"
