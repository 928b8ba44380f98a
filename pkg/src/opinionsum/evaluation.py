"""Scoring: multi-label F1 for aspect predictions, ROUGE-1/2 for summaries
against multiple references, and a paired approximate randomization test."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from opinionsum.corpus import tokenize


@dataclass(frozen=True)
class NGramCounts:
    order: int
    counts: Mapping[tuple[str, ...], int]

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], order: int) -> "NGramCounts":
        return cls(order, ngram_counts(tokens, order))

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    """Multiset of n-grams (as tuples) in the token sequence."""
    if n < 1:
        raise ValueError("n-gram order must be >= 1")
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def multilabel_f1(predictions: Mapping[str, str],
                  gold: Mapping[str, frozenset[str] | set[str]]) -> float:
    """Micro-averaged F1 of single-label predictions against label sets.

    A prediction is a true positive iff its label appears in the gold set;
    otherwise it counts one false positive plus one false negative per gold
    label.
    """
    if not gold:
        raise ValueError("empty gold standard")
    unknown = set(predictions) - set(gold)
    if unknown:
        raise ValueError(f"predictions for unlabeled ids: {sorted(unknown)[:5]}")
    tp = fp = fn = 0
    for seg_id, label in predictions.items():
        gold_set = gold[seg_id]
        if label in gold_set:
            tp += 1
        else:
            fp += 1
            fn += len(gold_set)
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def rouge_n(candidate: str, references: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap of a candidate against references.

    Both sides are run through the shared tokenizer so casing, punctuation,
    and digit shapes are normalized identically. With several references the
    best F1 (and its precision/recall) is reported.
    """
    if n not in (1, 2):
        raise ValueError("only unigram and bigram overlap are supported")
    if not references:
        raise ValueError("at least one reference is required")
    cand_counts = ngram_counts(tokenize(candidate), n)
    cand_total = sum(cand_counts.values())
    best = RougeScore(0.0, 0.0, 0.0)
    for reference in references:
        ref_counts = ngram_counts(tokenize(reference), n)
        ref_total = sum(ref_counts.values())
        overlap = sum(min(count, ref_counts[gram])
                      for gram, count in cand_counts.items())
        precision = overlap / cand_total if cand_total else 0.0
        recall = overlap / ref_total if ref_total else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        if f1 > best.f1:
            best = RougeScore(precision, recall, f1)
    return best


def approx_randomization_test(scores_a: Sequence[float], scores_b: Sequence[float],
                              trials: int = 9999, rng_seed: int = 0) -> float:
    """Paired sign-flip significance test on the difference of means.

    Each trial swaps every aligned pair with probability one half; the
    p-value is (trials with |mean difference| >= observed + 1) / (trials + 1).
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("score lists must be nonempty and aligned")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    diffs = a - b
    observed = abs(float(diffs.mean()))
    rng = np.random.default_rng(rng_seed)
    signs = rng.integers(0, 2, size=(trials, diffs.size)) * 2 - 1
    stats = np.abs(signs @ diffs) / diffs.size
    exceed = int((stats >= observed).sum())
    return (exceed + 1) / (trials + 1)


@dataclass(frozen=True)
class EvalReport:
    """Per-category metric tables with their macro average."""

    per_category: dict[str, dict[str, float]]
    average: dict[str, float]
    significance: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"per_category": self.per_category, "average": self.average}
        if self.significance:
            out["significance"] = self.significance
        return out


def _macro_average(per_category: dict[str, dict[str, float]]) -> dict[str, float]:
    metrics: dict[str, list[float]] = {}
    for table in per_category.values():
        for name, value in table.items():
            metrics.setdefault(name, []).append(value)
    return {name: sum(vals) / len(vals) for name, vals in metrics.items()}


def aspect_eval_report(predictions: Mapping[str, str],
                       gold: Mapping[str, frozenset[str] | set[str]],
                       categories: Mapping[str, str] | None = None) -> EvalReport:
    """Multi-label F1 per category (single bucket when categories are unknown)."""
    buckets: dict[str, dict[str, str]] = {}
    for seg_id, label in predictions.items():
        cat = categories.get(seg_id, "all") if categories else "all"
        buckets.setdefault(cat, {})[seg_id] = label
    per_category = {}
    for cat in sorted(buckets):
        preds = buckets[cat]
        per_category[cat] = {
            "multilabel_f1": multilabel_f1(preds, {i: gold[i] for i in preds})}
    return EvalReport(per_category, _macro_average(per_category))


def summary_eval_report(summaries: Mapping[str, str],
                        references: Mapping[str, Sequence[str]],
                        categories: Mapping[str, str] | None = None,
                        ) -> tuple[EvalReport, dict[str, dict[str, float]]]:
    """ROUGE-1/2 of product summaries, averaged per category.

    Returns the report plus the per-product score rows. The reported
    variant is F1 with max over references.
    """
    per_product: dict[str, dict[str, float]] = {}
    for product_id in summaries:
        if product_id not in references or not references[product_id]:
            raise ValueError(f"no references for product {product_id!r}")
        refs = list(references[product_id])
        row = {}
        for n in (1, 2):
            score = rouge_n(summaries[product_id], refs, n)
            row[f"rouge{n}_precision"] = score.precision
            row[f"rouge{n}_recall"] = score.recall
            row[f"rouge{n}_f1"] = score.f1
        per_product[product_id] = row

    buckets: dict[str, list[str]] = {}
    for product_id in per_product:
        cat = categories.get(product_id, "all") if categories else "all"
        buckets.setdefault(cat, []).append(product_id)
    per_category = {}
    for cat in sorted(buckets):
        rows = [per_product[p] for p in buckets[cat]]
        per_category[cat] = {
            name: sum(r[name] for r in rows) / len(rows) for name in rows[0]}
    report = EvalReport(per_category, _macro_average(per_category))
    return report, per_product
