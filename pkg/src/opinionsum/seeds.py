"""Category seed-word mining from product feature descriptions.

One category's feature items are concatenated into a single target document
while every feature item of every other category stays its own document;
TF-IDF over that corpus surfaces words that are frequent for the category
yet rare elsewhere.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from opinionsum.corpus import FeatureItem
from opinionsum.stopwords import STOPWORDS

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeedSet:
    """Ranked (word, weight) seeds for one category; weights are in (0, 1]
    and non-increasing, with the top seed at exactly 1."""

    category: str
    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        words = [w for w, _ in self.entries]
        if len(set(words)) != len(words):
            raise ValueError("seed words must be unique")
        weights = [w for _, w in self.entries]
        if any(not (0.0 < w <= 1.0) for w in weights):
            raise ValueError("seed weights must be in (0, 1]")
        if any(weights[i] < weights[i + 1] for i in range(len(weights) - 1)):
            raise ValueError("seed weights must be non-increasing")
        if weights and weights[0] != 1.0:
            raise ValueError("top seed weight must be 1")

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(w for w, _ in self.entries)


def build_tfidf_documents(features: Mapping[str, Sequence[FeatureItem]],
                          target: str) -> tuple[Counter, list[Counter]]:
    """(target category bag, one bag per foreign feature item)."""
    if target not in features:
        raise ValueError(f"unknown category {target!r}")
    target_doc: Counter = Counter()
    for item in features[target]:
        target_doc.update(item.tokens)
    other_docs = [Counter(item.tokens)
                  for category, items in features.items() if category != target
                  for item in items]
    if not other_docs:
        raise ValueError("need at least one other category for contrast")
    return target_doc, other_docs


def mine_seeds(features: Mapping[str, Sequence[FeatureItem]], category: str,
               k: int = 100,
               stop_words: frozenset[str] = STOPWORDS) -> SeedSet:
    """Top-k seed words of a category by smoothed TF-IDF.

    tf is the raw count in the aggregated target document; idf is
    ln((1 + N) / (1 + df)) + 1 with the target counted as one document.
    Stop-words are excluded; ties break lexicographically; weights are
    normalized so the best score maps to 1.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    target_doc, other_docs = build_tfidf_documents(features, category)
    n_docs = 1 + len(other_docs)
    df: Counter = Counter()
    for word in target_doc:
        df[word] += 1
    for doc in other_docs:
        for word in doc:
            df[word] += 1

    scored = []
    for word, tf in target_doc.items():
        if word in stop_words:
            continue
        idf = math.log((1 + n_docs) / (1 + df[word])) + 1.0
        scored.append((tf * idf, word))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))

    if len(scored) < k:
        log.warning("category %s: only %d seed candidates for k=%d",
                    category, len(scored), k)
    top = scored[:k]
    if not top:
        return SeedSet(category, ())
    max_score = top[0][0]
    entries = tuple((word, score / max_score) for score, word in top)
    return SeedSet(category, entries)


def save_seed_set(seed_set: SeedSet, path: str | Path) -> None:
    """Write ``word<TAB>weight`` rows ordered by rank."""
    with open(path, "w", encoding="utf-8") as fh:
        for word, weight in seed_set.entries:
            fh.write(f"{word}\t{weight!r}\n")


def load_seed_set(path: str | Path, category: str) -> SeedSet:
    path = Path(path)
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}, line {lineno}: expected 2 tab-separated fields")
            entries.append((parts[0], float(parts[1])))
    return SeedSet(category, tuple(entries))
