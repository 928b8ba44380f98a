"""Optimal opinion subset selection under salience, redundancy, and budget.

The selection problem maximizes total salience minus pairwise similarity
penalties over 0/1 indicators, subject to a word budget and, in hard mode,
to never co-selecting a conflicting pair. A depth-first branch-and-bound
with a fractional-knapsack upper bound solves it exactly; a greedy variant
exists as the ablation baseline.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from opinionsum.corpus import Corpus, Segment
from opinionsum.embeddings import cosine
from opinionsum.memory import SegmentEncoding

MODES = ("none", "hard", "soft")
DEFAULT_BUDGET = 100
DEFAULT_REDUNDANCY_THRESHOLD = 0.5
DEFAULT_MAX_CANDIDATES = 400
DEFAULT_NODE_BUDGET = 500_000

_PRUNE_EPS = 1e-12


@dataclass(frozen=True)
class SelectionProblem:
    """One product's candidate pool with all selection inputs aligned by index."""

    ids: tuple[str, ...]
    salience: np.ndarray
    lengths: np.ndarray
    sim: np.ndarray
    conflict: np.ndarray
    budget: int
    mode: str


@dataclass(frozen=True)
class Summary:
    selected: tuple[str, ...]
    objective: float
    total_words: int
    text: str = ""


@dataclass(frozen=True)
class SolverStats:
    nodes_explored: int
    proven_optimal: bool
    wall_time: float


class _NodeBudgetExceeded(Exception):
    pass


def pairwise_similarity(encodings: Sequence) -> np.ndarray:
    """Symmetric matrix of clamped encoding cosines, zero diagonal.

    Negative cosines are floored at 0 so dissimilarity never rewards
    co-selection.
    """
    vectors = [e.vector if isinstance(e, SegmentEncoding) else np.asarray(e)
               for e in encodings]
    n = len(vectors)
    sim = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            sim[i, j] = sim[j, i] = max(0.0, cosine(vectors[i], vectors[j]))
    return sim


def build_problem(segments: Sequence[Segment], scores: Mapping[str, float],
                  sims: np.ndarray, *,
                  budget: int = DEFAULT_BUDGET,
                  mode: str = "hard",
                  redundancy_threshold: float = DEFAULT_REDUNDANCY_THRESHOLD,
                  max_candidates: int = DEFAULT_MAX_CANDIDATES) -> SelectionProblem:
    """Assemble the candidate pool for one product.

    Zero-salience segments are dropped (they can never help), the pool is
    pre-pruned to the `max_candidates` most salient segments, and the
    similarity input is rendered per mode: all-zero (none), conflict flags
    above the threshold (hard), or clamped values (soft).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if budget < 1:
        raise ValueError("budget must be >= 1")

    keep = [i for i, seg in enumerate(segments)
            if scores.get(seg.id, 0.0) > 0.0 and seg.raw_text.split()]
    if len(keep) > max_candidates:
        keep.sort(key=lambda i: (-scores[segments[i].id], i))
        keep = sorted(keep[:max_candidates])

    ids = tuple(segments[i].id for i in keep)
    salience = np.array([scores[segments[i].id] for i in keep], dtype=np.float64)
    lengths = np.array([len(segments[i].raw_text.split()) for i in keep], dtype=np.int64)
    raw = np.asarray(sims, dtype=np.float64)[np.ix_(keep, keep)] if keep else np.zeros((0, 0))
    raw = np.maximum(raw, 0.0)
    np.fill_diagonal(raw, 0.0)

    n = len(keep)
    if mode == "soft":
        sim = raw
        conflict = np.zeros((n, n), dtype=bool)
    elif mode == "hard":
        sim = np.zeros((n, n))
        conflict = raw > redundancy_threshold
        np.fill_diagonal(conflict, False)
    else:
        sim = np.zeros((n, n))
        conflict = np.zeros((n, n), dtype=bool)
    return SelectionProblem(ids, salience, lengths, sim, conflict, budget, mode)


def objective_value(problem: SelectionProblem, indices: Sequence[int]) -> float:
    """Total salience minus the similarity penalty over unordered selected pairs."""
    idx = list(indices)
    total = float(problem.salience[idx].sum()) if idx else 0.0
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            total -= problem.sim[idx[a], idx[b]]
    return total


def _ordered_ids(problem: SelectionProblem, indices: Sequence[int]) -> tuple[str, ...]:
    ranked = sorted(indices, key=lambda i: (-problem.salience[i], i))
    return tuple(problem.ids[i] for i in ranked)


def _make_summary(problem: SelectionProblem, indices: Sequence[int],
                  objective: float) -> Summary:
    words = int(problem.lengths[list(indices)].sum()) if len(indices) else 0
    return Summary(_ordered_ids(problem, indices), objective, words)


def solve_exact(problem: SelectionProblem,
                node_budget: int = DEFAULT_NODE_BUDGET) -> tuple[Summary, SolverStats]:
    """Exact maximization by depth-first branch-and-bound.

    Items are visited in salience-density order; the include branch comes
    first so good incumbents appear early. The upper bound relaxes the
    remainder to a fractional knapsack on salience alone, which dominates
    any completion because pairwise penalties only subtract. Exceeding the
    node budget returns the incumbent with `proven_optimal=False`.
    """
    start = time.perf_counter()
    n = len(problem.ids)
    sal = problem.salience
    lengths = problem.lengths
    sim = problem.sim
    conflict = problem.conflict
    budget = problem.budget
    soft = problem.mode == "soft"
    hard = problem.mode == "hard"

    order = sorted(range(n), key=lambda i: (-(sal[i] / lengths[i]), i))
    state = {"best_val": 0.0, "best_sel": (), "nodes": 0}

    def bound(pos: int, banned: np.ndarray, remaining: int) -> float:
        total = 0.0
        for idx in order[pos:]:
            if banned[idx]:
                continue
            if lengths[idx] <= remaining:
                total += sal[idx]
                remaining -= lengths[idx]
            else:
                total += sal[idx] * (remaining / lengths[idx])
                break
        return total

    def dfs(pos: int, sel: list[int], val: float, used: int, banned: np.ndarray):
        state["nodes"] += 1
        if state["nodes"] > node_budget:
            raise _NodeBudgetExceeded
        if val > state["best_val"] + _PRUNE_EPS:
            state["best_val"] = val
            state["best_sel"] = tuple(sel)
        if pos == n:
            return
        if val + bound(pos, banned, budget - used) <= state["best_val"] + _PRUNE_EPS:
            return
        i = order[pos]
        if not banned[i] and used + lengths[i] <= budget:
            gain = sal[i] - (sim[i, sel].sum() if soft and sel else 0.0)
            child_banned = banned
            if hard:
                child_banned = banned | conflict[i]
            sel.append(i)
            dfs(pos + 1, sel, val + gain, used + int(lengths[i]), child_banned)
            sel.pop()
        dfs(pos + 1, sel, val, used, banned)

    proven = True
    if n:
        try:
            dfs(0, [], 0.0, 0, np.zeros(n, dtype=bool))
        except _NodeBudgetExceeded:
            proven = False

    stats = SolverStats(state["nodes"], proven, time.perf_counter() - start)
    return _make_summary(problem, state["best_sel"], state["best_val"]), stats


def solve_greedy(problem: SelectionProblem) -> Summary:
    """Greedy baseline: descending salience, take whatever fits.

    Hard mode skips candidates conflicting with the selection so far; soft
    mode additionally requires a positive marginal gain.
    """
    order = sorted(range(len(problem.ids)),
                   key=lambda i: (-problem.salience[i], i))
    selected: list[int] = []
    used = 0
    for i in order:
        if used + problem.lengths[i] > problem.budget:
            continue
        if problem.mode == "hard" and any(problem.conflict[i, j] for j in selected):
            continue
        if problem.mode == "soft":
            gain = problem.salience[i] - sum(problem.sim[i, j] for j in selected)
            if gain <= 0.0:
                continue
        selected.append(i)
        used += int(problem.lengths[i])
    return _make_summary(problem, selected, objective_value(problem, selected))


def render_summary(summary: Summary, corpus: Corpus) -> str:
    """Selected segment texts joined by single spaces, verbatim, in the
    summary's (descending-salience) order."""
    texts = []
    for seg_id in summary.selected:
        try:
            texts.append(corpus.segment(seg_id).raw_text)
        except KeyError:
            raise ValueError(f"unknown segment id {seg_id!r}") from None
    return " ".join(texts)


def with_text(summary: Summary, corpus: Corpus) -> Summary:
    return replace(summary, text=render_summary(summary, corpus))
