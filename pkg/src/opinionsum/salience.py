"""Segment salience: aspect relevance times sentiment strength.

Relevance treats each mined seed word as a fine-grained aspect memory: every
token is matched to its best seed by weighted cosine, generic matches below
the threshold are zeroed, and the per-token maxima are averaged. Sentiment
is a lexicon polarity-imbalance score in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from opinionsum.embeddings import EmbeddingTable
from opinionsum.seeds import SeedSet

DEFAULT_RELEVANCE_THRESHOLD = 0.3


@dataclass(frozen=True)
class SentimentLexicon:
    """token -> polarity (+1 or -1); no token carries both."""

    polarity: Mapping[str, int]

    @classmethod
    def from_word_lists(cls, positive: Iterable[str], negative: Iterable[str],
                        ) -> "SentimentLexicon":
        mapping: dict[str, int] = {}
        for word in positive:
            mapping[word] = 1
        for word in negative:
            if mapping.get(word) == 1:
                raise ValueError(f"word {word!r} appears in both polarity lists")
            mapping[word] = -1
        return cls(mapping)


@dataclass(frozen=True)
class SalienceScore:
    relevance: float
    sentiment: float
    salience: float

    @classmethod
    def of(cls, relevance: float, sentiment: float) -> "SalienceScore":
        return cls(relevance, sentiment, relevance * sentiment)


def _read_word_list(path: str | Path) -> list[str]:
    words = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                words.append(line.lower())
    return words


def load_lexicon(positive_path: str | Path, negative_path: str | Path) -> SentimentLexicon:
    """Build a lexicon from two plain-text word lists (# comments ignored)."""
    return SentimentLexicon.from_word_lists(
        _read_word_list(positive_path), _read_word_list(negative_path))


def relevance(segment_tokens: Iterable[str], seeds: SeedSet,
              embeddings: EmbeddingTable,
              delta: float = DEFAULT_RELEVANCE_THRESHOLD) -> float:
    """Mean over in-vocabulary tokens of the best thresholded seed match.

    Per token the score is max_j cos(v, a_j) * w_j over seeds j, kept only
    when it reaches `delta` (ties at the threshold count). Segments with no
    in-vocabulary token score 0.
    """
    if not (0.0 <= delta < 1.0):
        raise ValueError("delta must be in [0, 1)")
    if not seeds.entries:
        raise ValueError("seed set is empty")
    seed_vectors, weights = [], []
    for word, weight in seeds.entries:
        vec = embeddings.get(word)
        if vec is not None:
            seed_vectors.append(vec)
            weights.append(weight)
    token_vectors = [embeddings[t] for t in segment_tokens if t in embeddings]
    if not token_vectors or not seed_vectors:
        return 0.0

    V = np.stack(token_vectors)
    S = np.stack(seed_vectors)
    w = np.array(weights)
    v_norm = np.linalg.norm(V, axis=1, keepdims=True)
    s_norm = np.linalg.norm(S, axis=1, keepdims=True)
    V = V / np.where(v_norm == 0.0, 1.0, v_norm)
    S = S / np.where(s_norm == 0.0, 1.0, s_norm)
    best = (V @ S.T * w[None, :]).max(axis=1)
    kept = np.where(best >= delta, best, 0.0)
    return float(kept.mean())


def sentiment(segment_tokens: Iterable[str], lexicon: SentimentLexicon) -> float:
    """Polarity imbalance |pos - neg| / (pos + neg); 0 without lexicon hits."""
    pos = neg = 0
    for token in segment_tokens:
        polarity = lexicon.polarity.get(token)
        if polarity == 1:
            pos += 1
        elif polarity == -1:
            neg += 1
    total = pos + neg
    return abs(pos - neg) / total if total else 0.0


def salience(segment_tokens, seeds: SeedSet, embeddings: EmbeddingTable,
             lexicon: SentimentLexicon,
             delta: float = DEFAULT_RELEVANCE_THRESHOLD) -> SalienceScore:
    """Relevance and sentiment of one segment plus their product."""
    tokens = list(segment_tokens)
    return SalienceScore.of(relevance(tokens, seeds, embeddings, delta),
                            sentiment(tokens, lexicon))
