"""Word vector storage, text-format I/O, and a deterministic skip-gram trainer.

The on-disk format is plain text: a header line ``<vocab_size> <dim>``
followed by one line per word (token then `dim` space-separated reals).
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)


class EmbeddingFormatError(ValueError):
    """An embedding file violates the documented text format."""


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; defined as 0 when either vector is zero.

    The zero convention lets out-of-vocabulary-only inputs signal "no
    information" instead of raising.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


class EmbeddingTable:
    """Immutable token -> d-dimensional vector lookup."""

    def __init__(self, vectors: Mapping[str, Sequence[float]], dim: int | None = None):
        self._vectors: dict[str, np.ndarray] = {}
        for token, vec in vectors.items():
            arr = np.array(vec, dtype=np.float64)
            if arr.ndim != 1:
                raise ValueError(f"vector for {token!r} is not one-dimensional")
            if dim is None:
                dim = arr.shape[0]
            if arr.shape[0] != dim:
                raise ValueError(
                    f"vector for {token!r} has dim {arr.shape[0]}, expected {dim}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"vector for {token!r} has NaN/Inf components")
            arr.flags.writeable = False
            self._vectors[token] = arr
        if dim is None:
            raise ValueError("cannot infer dimension from an empty table")
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, token: str) -> bool:
        return token in self._vectors

    def __getitem__(self, token: str) -> np.ndarray:
        return self._vectors[token]

    def get(self, token: str) -> np.ndarray | None:
        return self._vectors.get(token)

    def tokens(self) -> tuple[str, ...]:
        return tuple(self._vectors)

    def items(self):
        return self._vectors.items()


def embed_tokens(tokens: Iterable[str], table: EmbeddingTable) -> list[tuple[str, np.ndarray]]:
    """(token, vector) pairs for in-vocabulary tokens, original order kept.

    Out-of-vocabulary tokens are skipped rather than zero-filled so that
    downstream attention normalization runs over real words only.
    """
    return [(tok, table[tok]) for tok in tokens if tok in table]


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Read the plain-text embedding format, validating every row."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingFormatError(f"{path}: header must be '<vocab_size> <dim>'")
        try:
            vocab_size, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise EmbeddingFormatError(f"{path}: non-integer header") from exc
        if vocab_size < 0 or dim <= 0:
            raise EmbeddingFormatError(f"{path}: invalid header values")
        vectors: dict[str, np.ndarray] = {}
        for row, raw in enumerate(fh, 1):
            parts = raw.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise EmbeddingFormatError(
                    f"{path}, row {row}: expected {dim} values, got {len(values)}")
            if token in vectors:
                raise EmbeddingFormatError(f"{path}, row {row}: duplicate token {token!r}")
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}, row {row}: non-numeric value") from exc
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(f"{path}, row {row}: NaN/Inf component")
            vec.flags.writeable = False
            vectors[token] = vec
    if len(vectors) != vocab_size:
        raise EmbeddingFormatError(
            f"{path}: header says {vocab_size} words, file has {len(vectors)}")
    return EmbeddingTable(vectors, dim=dim)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    """Write the plain-text embedding format with 6-decimal reals."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {table.dim}\n")
        for token, vec in table.items():
            fh.write(token + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


@dataclass(frozen=True)
class SkipgramConfig:
    """Hyperparameters for skip-gram training with negative sampling."""

    dim: int = 200
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    min_count: int = 5
    learning_rate: float = 0.025
    subsample: float = 1e-3
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("dim", "window", "negatives", "epochs", "min_count",
                     "learning_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.subsample < 0:
            raise ValueError("subsample must be nonnegative")


def _sentences(corpus) -> list[list[str]]:
    if hasattr(corpus, "iter_segments"):
        return [list(seg.tokens) for seg in corpus.iter_segments()]
    return [list(tokens) for tokens in corpus]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))


def train_skipgram(corpus, config: SkipgramConfig = SkipgramConfig()) -> EmbeddingTable:
    """Train word vectors with skip-gram negative sampling.

    `corpus` is either a loaded Corpus or any iterable of token sequences.
    Training is single-threaded and fully driven by ``config.rng_seed``, so
    identical inputs give bit-identical vectors. Returns the input-side
    (center-word) vectors.
    """
    sentences = _sentences(corpus)
    counts = Counter(tok for sent in sentences for tok in sent)
    total_raw = sum(counts.values())
    if total_raw < config.window:
        raise ValueError("corpus has fewer tokens than the context window")

    vocab = sorted((t for t, c in counts.items() if c >= config.min_count),
                   key=lambda t: (-counts[t], t))
    if not vocab:
        raise ValueError("vocabulary is empty after min_count filtering")
    index = {tok: i for i, tok in enumerate(vocab)}
    vocab_counts = np.array([counts[t] for t in vocab], dtype=np.float64)
    total_kept = vocab_counts.sum()

    # Noise distribution for negative sampling: unigram^0.75.
    noise = vocab_counts ** 0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    # Discard probability for frequent words.
    if config.subsample > 0:
        freq = vocab_counts / total_kept
        keep_prob = np.minimum(1.0, (np.sqrt(freq / config.subsample) + 1.0)
                               * (config.subsample / freq))
    else:
        keep_prob = np.ones(len(vocab))

    rng = np.random.default_rng(config.rng_seed)
    dim = config.dim
    syn0 = (rng.random((len(vocab), dim)) - 0.5) / dim
    syn1 = np.zeros((len(vocab), dim))

    planned = max(1, int(total_kept) * config.epochs)
    processed = 0
    alpha = config.learning_rate
    for _epoch in range(config.epochs):
        for sent in sentences:
            ids = [index[t] for t in sent if t in index]
            if ids:
                keep = rng.random(len(ids)) < keep_prob[ids]
                ids = [w for w, k in zip(ids, keep) if k]
            if not ids:
                continue
            processed += len(ids)
            alpha = max(config.learning_rate * (1.0 - processed / planned),
                        config.learning_rate * 1e-4)
            for pos, center in enumerate(ids):
                span = config.window - int(rng.integers(config.window))
                lo = max(0, pos - span)
                hi = min(len(ids), pos + span + 1)
                for ctx_pos in range(lo, hi):
                    if ctx_pos == pos:
                        continue
                    context = ids[ctx_pos]
                    draws = noise_cdf.searchsorted(rng.random(config.negatives))
                    negs = [int(d) for d in draws if int(d) != context]
                    targets = np.array([context] + negs)
                    labels = np.zeros(len(targets))
                    labels[0] = 1.0
                    l1 = syn0[center].copy()
                    preds = _sigmoid(syn1[targets] @ l1)
                    grad = (labels - preds) * alpha
                    syn0[center] += grad @ syn1[targets]
                    np.add.at(syn1, targets, np.outer(grad, l1))

    return EmbeddingTable({tok: syn0[i] for tok, i in index.items()}, dim=dim)
