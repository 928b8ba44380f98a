"""Aspect-aware memory bank: attention encoding, scoring, and training.

A memory bank is an ordered array of cells, each holding one aspect
embedding and a prior. Words and segments are scored against cells through
``exp(cosine) * prior`` generation scores; these scores drive the attention
weights used to encode a segment, the surrogate likelihood minimized during
training, and the posterior used for classification.

The scores are deliberately left unnormalized: attention weights are ratios
and classification is an argmax, so a per-model partition constant cancels
everywhere it could matter, while cosine boundedness keeps the surrogate
likelihood inside (0, e] and its negative log well-defined.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from opinionsum.corpus import Corpus, Segment
from opinionsum.embeddings import EmbeddingTable
from opinionsum.evaluation import multilabel_f1

log = logging.getLogger(__name__)

GENERAL_LABEL = "GENERAL"

_PRIOR_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class AspectCell:
    """One memory slot: a labeled embedding with a prior probability."""

    label: str
    embedding: np.ndarray
    prior: float
    trainable: bool = False


@dataclass(frozen=True, eq=False)
class SegmentEncoding:
    """Attention weights over in-vocabulary tokens and their weighted average."""

    weights: np.ndarray
    vector: np.ndarray


class MemoryBank:
    """Ordered, immutable collection of aspect cells sharing one dimension."""

    def __init__(self, cells: Sequence[AspectCell]):
        if not cells:
            raise ValueError("memory bank needs at least one cell")
        dim = None
        fixed = []
        for cell in cells:
            emb = np.array(cell.embedding, dtype=np.float64)
            if emb.ndim != 1:
                raise ValueError(f"cell {cell.label!r}: embedding must be a vector")
            if dim is None:
                dim = emb.shape[0]
            if emb.shape[0] != dim:
                raise ValueError(f"cell {cell.label!r}: dimension mismatch")
            if not np.any(emb):
                raise ValueError(f"cell {cell.label!r}: zero embedding")
            if not (0.0 < cell.prior <= 1.0):
                raise ValueError(f"cell {cell.label!r}: prior must be in (0, 1]")
            emb.flags.writeable = False
            fixed.append(AspectCell(cell.label, emb, float(cell.prior), cell.trainable))
        priors = np.array([c.prior for c in fixed])
        if abs(priors.sum() - 1.0) > _PRIOR_TOL:
            raise ValueError(f"cell priors sum to {priors.sum()}, expected 1")
        self.cells: tuple[AspectCell, ...] = tuple(fixed)
        self._dim = int(dim)
        self._matrix = np.stack([c.embedding for c in fixed])
        self._matrix.flags.writeable = False
        self._priors = priors
        self._priors.flags.writeable = False

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.cells)

    @property
    def matrix(self) -> np.ndarray:
        """Cell embeddings stacked as a (cells, dim) read-only array."""
        return self._matrix

    @property
    def priors(self) -> np.ndarray:
        return self._priors

    @property
    def trainable_indices(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.cells) if c.trainable)

    def with_matrix(self, matrix: np.ndarray) -> "MemoryBank":
        """New bank with replaced trainable rows; fixed cells keep their arrays."""
        cells = []
        for i, cell in enumerate(self.cells):
            if cell.trainable:
                cells.append(AspectCell(cell.label, matrix[i].copy(), cell.prior, True))
            else:
                cells.append(cell)
        return MemoryBank(cells)


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    return m / np.where(norms == 0.0, 1.0, norms)


def _as_matrix(token_vectors) -> np.ndarray:
    """Stack raw vectors or (token, vector) pairs into an (n, dim) array."""
    rows = []
    for item in token_vectors:
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], str):
            item = item[1]
        rows.append(np.asarray(item, dtype=np.float64))
    if not rows:
        return np.zeros((0, 0))
    return np.stack(rows)


def word_score(v, bank: MemoryBank) -> float:
    """Unnormalized generation score of one word: sum_j exp(cos(v, a_j)) * prior_j."""
    v = np.asarray(v, dtype=np.float64)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        cos = np.zeros(len(bank))
    else:
        cos = _unit_rows(bank.matrix) @ (v / nv)
    return float(np.exp(cos) @ bank.priors)


def attention_weights(token_vectors, bank: MemoryBank) -> np.ndarray:
    """Per-token weights proportional to each word's generation score.

    Nonnegative, summing to one. Raises when no in-vocabulary token is left.
    """
    V = _as_matrix(token_vectors)
    if V.shape[0] == 0:
        raise ValueError("no in-vocabulary tokens")
    C = _unit_rows(V) @ _unit_rows(bank.matrix).T
    scores = np.exp(C) @ bank.priors
    return scores / scores.sum()


def encode_segment(token_vectors, bank: MemoryBank) -> SegmentEncoding:
    """Attention-weighted average of the segment's token embeddings."""
    V = _as_matrix(token_vectors)
    z = attention_weights(V, bank)
    return SegmentEncoding(weights=z, vector=z @ V)


def segment_likelihood(encoding, bank: MemoryBank) -> float:
    """Surrogate generation score of an encoded segment.

    sum_i exp(cos(s, a_i)) * prior_i; a zero segment vector scores with the
    cosine-zero convention, giving exactly the prior mass 1.
    """
    s = encoding.vector if isinstance(encoding, SegmentEncoding) else np.asarray(encoding)
    s = np.asarray(s, dtype=np.float64)
    ns = np.linalg.norm(s)
    if ns == 0.0:
        cos = np.zeros(len(bank))
    else:
        cos = _unit_rows(bank.matrix) @ (s / ns)
    return float(np.exp(cos) @ bank.priors)


def orthogonality_penalty(bank: MemoryBank) -> float:
    """Frobenius norm of (A_hat A_hat^T - I) over l2-row-normalized cells.

    Zero exactly when all cell embeddings are mutually orthogonal; pushes
    trained cells toward diverse directions.
    """
    return _penalty_value(bank.matrix)


def _penalty_value(matrix: np.ndarray) -> float:
    a_hat = _unit_rows(matrix)
    gram = a_hat @ a_hat.T - np.eye(matrix.shape[0])
    return float(np.linalg.norm(gram))


def classify(segment_tokens: Iterable[str], bank: MemoryBank,
             embeddings: EmbeddingTable) -> str:
    """Label of the cell with the highest posterior for this segment.

    Segments with no in-vocabulary token fall back to the GENERAL label (the
    semantically safe default). Exact ties go to the lowest cell index.
    """
    vectors = [embeddings[t] for t in segment_tokens if t in embeddings]
    if not vectors:
        return GENERAL_LABEL
    enc = encode_segment(vectors, bank)
    s = enc.vector
    ns = np.linalg.norm(s)
    if ns == 0.0:
        cos = np.zeros(len(bank))
    else:
        cos = _unit_rows(bank.matrix) @ (s / ns)
    posterior = np.exp(cos) * bank.priors
    return bank.cells[int(np.argmax(posterior))].label


def classify_segments(segments: Iterable[Segment], bank: MemoryBank,
                      embeddings: EmbeddingTable) -> dict[str, str]:
    return {seg.id: classify(seg.tokens, bank, embeddings) for seg in segments}


def confusion_matrix(predictions: Mapping[str, str],
                     gold: Mapping[str, frozenset[str] | set[str]],
                     labels: Sequence[str] | None = None,
                     ) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    """Gold-by-predicted count matrix plus its row-normalized view.

    With multi-label gold, a prediction inside the gold set credits that
    aspect's diagonal; otherwise each gold label contributes one off-diagonal
    count toward the predicted column.
    """
    if set(predictions) != set(gold):
        raise ValueError("prediction and gold id sets differ")
    if labels is None:
        seen = set(predictions.values())
        for gset in gold.values():
            seen.update(gset)
        labels = sorted(seen)
    labels = tuple(labels)
    idx = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for seg_id, pred in predictions.items():
        gset = gold[seg_id]
        if pred in gset:
            counts[idx[pred], idx[pred]] += 1
        else:
            for g in gset:
                counts[idx[g], idx[pred]] += 1
    row_sums = counts.sum(axis=1, keepdims=True)
    normalized = counts / np.where(row_sums == 0, 1, row_sums)
    return labels, counts, normalized


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 300
    lam: float = 100.0
    max_epochs: int = 50
    patience: int = 5
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("learning_rate", "batch_size", "lam", "max_epochs", "patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    loss: float
    penalty: float
    dev_f1: float | None


def objective(bank: MemoryBank, segment_matrices: Iterable[np.ndarray],
              lam: float) -> float:
    """Training objective: summed negative log generation scores plus
    lam times the diversity penalty.

    Composed from the public encode/likelihood operations; the vectorized
    gradient path below is checked against this definition by finite
    differences in the test suite.
    """
    total = 0.0
    for V in segment_matrices:
        enc = encode_segment(V, bank)
        total -= float(np.log(segment_likelihood(enc, bank)))
    return total + lam * orthogonality_penalty(bank)


def objective_gradient(bank: MemoryBank, segment_matrices: Iterable[np.ndarray],
                       lam: float) -> tuple[float, np.ndarray]:
    """Objective value and its analytic gradient wrt trainable cell rows.

    The gradient flows through both cosine terms of each segment loss: the
    direct segment-to-cell similarity, and the attention weights (which
    depend on the cells through every word's generation score).
    """
    nll, pen, grad = _value_and_gradient(
        bank.matrix, bank.priors, list(segment_matrices), lam)
    rows = list(bank.trainable_indices)
    return nll + lam * pen, grad[rows]


def _value_and_gradient(A: np.ndarray, priors: np.ndarray,
                        segment_matrices: Sequence[np.ndarray],
                        lam: float) -> tuple[float, float, np.ndarray]:
    """(sum of segment losses, penalty value, full-bank gradient)."""
    k, _ = A.shape
    a_norm = np.linalg.norm(A, axis=1)
    A_hat = A / a_norm[:, None]
    grad = np.zeros_like(A)
    nll = 0.0

    for V in segment_matrices:
        V = np.asarray(V, dtype=np.float64)
        V_hat = _unit_rows(V)
        C = V_hat @ A_hat.T                      # (n, k) word-cell cosines
        E = np.exp(C)
        P = E @ priors                           # word generation scores
        Z = P.sum()
        z = P / Z
        s = z @ V
        s_norm = np.linalg.norm(s)
        if s_norm == 0.0:
            # cosine-zero convention: loss is -log(sum priors) = 0, flat.
            continue
        s_hat = s / s_norm
        cs = A_hat @ s_hat                       # segment-cell cosines
        u = np.exp(cs) * priors
        L = u.sum()
        nll -= np.log(L)

        # d(-log L)/ds through every cell's cosine.
        coeff = -(u / L)
        g_s = (coeff[:, None] * (A_hat - cs[:, None] * s_hat[None, :])).sum(0) / s_norm

        # Direct term: cells appear in cos(s, a_j).
        grad += coeff[:, None] * (s_hat[None, :] - cs[:, None] * A_hat) / a_norm[:, None]

        # Indirect term: cells steer the attention weights z.
        q = V @ g_s
        q_centered = q - z @ q
        W = q_centered[:, None] * E              # (n, k)
        sum_v = V_hat.T @ W                      # (dim, k) of sum_i W_ij v_hat_i
        sum_c = (W * C).sum(axis=0)              # (k,) of sum_i W_ij C_ij
        grad += (priors / (Z * a_norm))[:, None] * (sum_v.T - sum_c[:, None] * A_hat)

    gram = A_hat @ A_hat.T - np.eye(k)
    pen = float(np.linalg.norm(gram))
    if lam != 0.0 and pen > 1e-12:
        d_hat = (2.0 / pen) * (gram @ A_hat)
        proj = d_hat - (d_hat * A_hat).sum(axis=1, keepdims=True) * A_hat
        grad += lam * proj / a_norm[:, None]
    return float(nll), pen, grad


def _segment_matrices(segments: Iterable[Segment],
                      embeddings: EmbeddingTable) -> list[np.ndarray]:
    out = []
    for seg in segments:
        vectors = [embeddings[t] for t in seg.tokens if t in embeddings]
        if vectors:
            out.append(np.stack(vectors))
    return out


def train(bank: MemoryBank, corpus, embeddings: EmbeddingTable,
          dev_labels: Mapping[str, frozenset[str]] | None = None,
          config: TrainConfig | None = None,
          dev_corpus=None) -> tuple[MemoryBank, list[EpochLog]]:
    """Fit the trainable cells with Adam; fixed cells stay bit-identical.

    Mini-batches are drawn from `corpus`; when `dev_labels` is given, early
    stopping tracks dev multi-label F1 (dev segments come from `dev_corpus`
    when provided, otherwise from the labeled subset of `corpus`, which is
    then excluded from training). Without labels, the epoch training loss is
    the stopping criterion. Returns the best bank and a per-epoch log.
    """
    config = config or TrainConfig()
    if not bank.trainable_indices:
        raise ValueError("memory bank has no trainable cells")

    segments = list(corpus.iter_segments() if isinstance(corpus, Corpus) else corpus)
    dev_segments: list[Segment] = []
    if dev_labels:
        dev_pool = list(dev_corpus.iter_segments()) if dev_corpus is not None else segments
        dev_segments = [s for s in dev_pool if s.id in dev_labels]
        if dev_corpus is None:
            dev_ids = {s.id for s in dev_segments}
            segments = [s for s in segments if s.id not in dev_ids]

    matrices = _segment_matrices(segments, embeddings)
    if not matrices:
        raise ValueError("no trainable segments: corpus is empty or fully OOV")

    rng = np.random.default_rng(config.rng_seed)
    A = bank.matrix.copy()
    priors = bank.priors
    rows = np.array(bank.trainable_indices)

    m = np.zeros((len(rows), A.shape[1]))
    v = np.zeros_like(m)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    best_A = A.copy()
    best_score = -np.inf
    stale = 0
    logs: list[EpochLog] = []

    for epoch in range(config.max_epochs):
        order = rng.permutation(len(matrices))
        epoch_nll = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [matrices[i] for i in order[start:start + config.batch_size]]
            nll, _pen, grad = _value_and_gradient(A, priors, batch, config.lam)
            epoch_nll += nll
            step += 1
            g = grad[rows]
            m = beta1 * m + (1 - beta1) * g
            v = beta2 * v + (1 - beta2) * g * g
            m_hat = m / (1 - beta1 ** step)
            v_hat = v / (1 - beta2 ** step)
            A[rows] -= config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)

        mean_loss = epoch_nll / len(matrices)
        penalty = _penalty_value(A)
        dev_f1 = None
        if dev_segments:
            epoch_bank = bank.with_matrix(A)
            preds = classify_segments(dev_segments, epoch_bank, embeddings)
            dev_f1 = multilabel_f1(preds, {s.id: dev_labels[s.id] for s in dev_segments})
        score = dev_f1 if dev_f1 is not None else -mean_loss
        logs.append(EpochLog(epoch, mean_loss, penalty, dev_f1))
        if score > best_score + 1e-12:
            best_score = score
            best_A = A.copy()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    return bank.with_matrix(best_A), logs


def save_training_log(logs: Sequence[EpochLog], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "penalty", "dev_f1"])
        for entry in logs:
            writer.writerow([entry.epoch, repr(entry.loss), repr(entry.penalty),
                             "" if entry.dev_f1 is None else repr(entry.dev_f1)])


# ---------------------------------------------------------------------------
# Bank construction and I/O
# ---------------------------------------------------------------------------

def load_seed_words(path: str | Path) -> dict[str, list[tuple[str, float | None]]]:
    """Read aspect seed words: ``aspect<TAB>word[<TAB>weight]`` per line."""
    path = Path(path)
    seeds: dict[str, list[tuple[str, float | None]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}, line {lineno}: expected 2 or 3 fields")
            weight = float(parts[2]) if len(parts) == 3 else None
            seeds.setdefault(parts[0], []).append((parts[1], weight))
    return seeds


def build_seeded_bank(seed_words: Mapping[str, Sequence[tuple[str, float | None]]],
                      embeddings: EmbeddingTable,
                      extra_general: int = 0,
                      rng_seed: int = 0) -> MemoryBank:
    """Bank with one fixed cell per aspect plus randomly initialized
    trainable GENERAL cells.

    A fixed cell's embedding is the mean of its in-vocabulary seed words'
    vectors (weighted mean when the seed file carries weights); priors are
    uniform over all cells.
    """
    cells = []
    for aspect, entries in seed_words.items():
        vectors, weights = [], []
        for word, weight in entries:
            vec = embeddings.get(word)
            if vec is None:
                log.warning("seed word %r for aspect %s is out of vocabulary", word, aspect)
                continue
            vectors.append(vec)
            weights.append(1.0 if weight is None else float(weight))
        if not vectors:
            raise ValueError(f"aspect {aspect!r}: no seed word is in vocabulary")
        w = np.array(weights)
        emb = (w[:, None] * np.stack(vectors)).sum(0) / w.sum()
        cells.append(AspectCell(aspect, emb, prior=1.0, trainable=False))

    rng = np.random.default_rng(rng_seed)
    for _ in range(extra_general):
        emb = rng.uniform(-0.05, 0.05, size=embeddings.dim)
        cells.append(AspectCell(GENERAL_LABEL, emb, prior=1.0, trainable=True))

    prior = 1.0 / len(cells)
    cells = [AspectCell(c.label, c.embedding, prior, c.trainable) for c in cells]
    return MemoryBank(cells)


def save_bank(bank: MemoryBank, path: str | Path) -> None:
    """Write ``label<TAB>prior<TAB>trainable<TAB>v1 v2 ... vd`` per cell."""
    with open(path, "w", encoding="utf-8") as fh:
        for cell in bank.cells:
            values = " ".join(repr(float(x)) for x in cell.embedding)
            fh.write(f"{cell.label}\t{cell.prior!r}\t{int(cell.trainable)}\t{values}\n")


def load_bank(path: str | Path) -> MemoryBank:
    path = Path(path)
    cells = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}, line {lineno}: expected 4 tab-separated fields")
            label, prior_s, trainable_s, values = parts
            try:
                prior = float(prior_s)
                trainable = bool(int(trainable_s))
                emb = np.array([float(x) for x in values.split()])
            except ValueError as exc:
                raise ValueError(f"{path}, line {lineno}: bad numeric field") from exc
            cells.append(AspectCell(label, emb, prior, trainable))
    return MemoryBank(cells)
