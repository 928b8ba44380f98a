"""Review corpus ingestion and text normalization.

Input formats (all UTF-8):

- reviews JSONL, one object per review:
  ``{"product_id": str, "category": str, "review_id": str, "segments": [str, ...]}``.
  A review may carry ``"text"`` instead of ``"segments"``; the raw text is then
  split with :func:`fallback_segment`.
- features JSONL: ``{"product_id": str, "category": str, "features": [str, ...]}``
- aspect labels TSV: ``segment_id<TAB>label1[,label2...]``
- reference summaries JSONL: ``{"product_id": str, "annotator": int, "summary": str}``

Segment ids are derived as ``<review_id>#<k>`` where ``k`` is the 0-based
position of the segment inside its review. Gold labels and reference
summaries live in sidecar files keyed by those ids, so unlabeled corpora
need no placeholder fields.
"""

from __future__ import annotations

import json
import logging
import re
import string
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator

log = logging.getLogger(__name__)

# Tokens are maximal runs of letters or maximal runs of digits; everything
# else separates tokens and is dropped.
_WORD_RE = re.compile(r"[^\W\d_]+|\d+", re.UNICODE)
_SENTENCE_RE = re.compile(r"[^.!?]*[.!?]+|[^.!?]+$")
_SPAN_RE = re.compile(r"\S+")

#: Clause-opening words that may start a new opinion unit mid-sentence.
DISCOURSE_CUES = frozenset({"but", "although", "though", "however", "and"})

#: Digit runs longer than this collapse to a fixed shape ("dddd").
MAX_DIGIT_SHAPE = 4


class CorpusFormatError(ValueError):
    """An input file violates its documented format."""


def tokenize(text: str) -> list[str]:
    """Normalize raw text into lowercase tokens with digits masked by shape.

    Letter runs and digit runs form separate tokens; punctuation is dropped.
    A run of n digits becomes a run of n "d" characters, capped at "dddd",
    so "55in TV" tokenizes to ["dd", "in", "tv"].
    """
    tokens = []
    for match in _WORD_RE.finditer(text.lower()):
        tok = match.group()
        if tok[0].isdigit():
            tok = "d" * min(len(tok), MAX_DIGIT_SHAPE)
        tokens.append(tok)
    return tokens


def fallback_segment(text: str) -> list[str]:
    """Split raw review text into clause-like opinion units.

    Sentences are cut after runs of ``.!?``. Each sentence is further split
    immediately before a discourse cue (but/although/though/however/and)
    whenever both sides keep at least three whitespace tokens. Joining the
    returned pieces with single spaces reconstructs the normalized text.
    """
    segments: list[str] = []
    for sent_match in _SENTENCE_RE.finditer(text):
        sentence = sent_match.group().strip()
        if sentence:
            segments.extend(_split_on_cues(sentence))
    return segments


def _split_on_cues(sentence: str) -> list[str]:
    spans = [(m.start(), m.end()) for m in _SPAN_RE.finditer(sentence)]
    n = len(spans)
    pieces = []
    seg_start = 0
    for i in range(1, n):
        word = sentence[spans[i][0]:spans[i][1]].strip(string.punctuation).lower()
        if word in DISCOURSE_CUES and i - seg_start >= 3 and n - i >= 3:
            pieces.append(sentence[spans[seg_start][0]:spans[i - 1][1]])
            seg_start = i
    pieces.append(sentence[spans[seg_start][0]:spans[-1][1]])
    return pieces


@dataclass(frozen=True)
class Segment:
    """A sub-sentence opinion unit of one review."""

    id: str
    raw_text: str
    tokens: tuple[str, ...]
    gold_aspects: frozenset[str] | None = None


@dataclass(frozen=True)
class Review:
    id: str
    segments: tuple[Segment, ...]


@dataclass(frozen=True)
class FeatureItem:
    """One merchant-written feature bullet of a product."""

    product: str
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Product:
    id: str
    category: str
    reviews: tuple[Review, ...]
    features: tuple[FeatureItem, ...] = ()


@dataclass(frozen=True)
class Category:
    id: str
    products: tuple[str, ...]


@dataclass(frozen=True)
class ReferenceSummary:
    product: str
    annotator: int
    text: str


def make_segment(segment_id: str, raw_text: str,
                 gold_aspects: frozenset[str] | None = None) -> Segment:
    """Build a segment whose tokens are the canonical tokenization of its text."""
    return Segment(segment_id, raw_text, tuple(tokenize(raw_text)), gold_aspects)


@dataclass(frozen=True)
class Corpus:
    """Immutable collection of products with their reviews and segments.

    Safe to share read-only across parallel workers once constructed.
    """

    products: tuple[Product, ...]

    @cached_property
    def categories(self) -> tuple[Category, ...]:
        by_cat: dict[str, list[str]] = {}
        for product in self.products:
            by_cat.setdefault(product.category, []).append(product.id)
        return tuple(Category(cid, tuple(pids)) for cid, pids in by_cat.items())

    @cached_property
    def _product_index(self) -> dict[str, Product]:
        return {p.id: p for p in self.products}

    @cached_property
    def _segment_index(self) -> dict[str, Segment]:
        return {s.id: s for s in self.iter_segments()}

    def product(self, product_id: str) -> Product:
        return self._product_index[product_id]

    def segment(self, segment_id: str) -> Segment:
        return self._segment_index[segment_id]

    def iter_products(self, category: str | None = None) -> Iterator[Product]:
        for product in self.products:
            if category is None or product.category == category:
                yield product

    def iter_segments(self, category: str | None = None) -> Iterator[Segment]:
        for product in self.iter_products(category):
            for review in product.reviews:
                yield from review.segments

    def segment_categories(self) -> dict[str, str]:
        """Map every segment id to its product's category."""
        out = {}
        for product in self.products:
            for review in product.reviews:
                for seg in review.segments:
                    out[seg.id] = product.category
        return out

    def counts(self) -> tuple[int, int, int]:
        """(products, reviews, segments) totals."""
        n_reviews = sum(len(p.reviews) for p in self.products)
        n_segments = sum(len(r.segments) for p in self.products for r in p.reviews)
        return len(self.products), n_reviews, n_segments


def _require_str(obj: dict, key: str, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise CorpusFormatError(f"{where}: missing or invalid field {key!r}")
    return value


def load_reviews(path: str | Path) -> Corpus:
    """Read a reviews JSONL file into an immutable corpus.

    Pre-segmented reviews pass through untouched; reviews shipping a raw
    "text" field are split with :func:`fallback_segment`.
    """
    path = Path(path)
    product_category: dict[str, str] = {}
    product_reviews: dict[str, list[Review]] = {}
    seen_reviews: set[str] = set()
    seen_segments: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            where = f"{path}, line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError(f"{where}: expected a JSON object")
            product_id = _require_str(obj, "product_id", where)
            category = _require_str(obj, "category", where)
            review_id = _require_str(obj, "review_id", where)
            if review_id in seen_reviews:
                raise CorpusFormatError(f"{where}: duplicate review id {review_id!r}")
            seen_reviews.add(review_id)

            segments = obj.get("segments")
            if segments is None:
                if "text" not in obj:
                    raise CorpusFormatError(f"{where}: need 'segments' or 'text'")
                if not isinstance(obj["text"], str):
                    raise CorpusFormatError(f"{where}: 'text' must be a string")
                segments = fallback_segment(obj["text"])
            if not isinstance(segments, list) or not all(isinstance(s, str) for s in segments):
                raise CorpusFormatError(f"{where}: 'segments' must be a list of strings")

            built = []
            for k, seg_text in enumerate(segments):
                seg_id = f"{review_id}#{k}"
                if seg_id in seen_segments:
                    raise CorpusFormatError(f"{where}: duplicate segment id {seg_id!r}")
                seen_segments.add(seg_id)
                built.append(make_segment(seg_id, seg_text))

            known = product_category.get(product_id)
            if known is not None and known != category:
                raise CorpusFormatError(
                    f"{where}: product {product_id!r} switches category "
                    f"{known!r} -> {category!r}")
            product_category[product_id] = category
            product_reviews.setdefault(product_id, []).append(
                Review(review_id, tuple(built)))

    products = tuple(
        Product(pid, product_category[pid], tuple(reviews))
        for pid, reviews in product_reviews.items())
    return Corpus(products)


def save_reviews(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back to the reviews JSONL format (segments verbatim)."""
    with open(path, "w", encoding="utf-8") as fh:
        for product in corpus.products:
            for review in product.reviews:
                record = {
                    "product_id": product.id,
                    "category": product.category,
                    "review_id": review.id,
                    "segments": [seg.raw_text for seg in review.segments],
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_features(path: str | Path) -> dict[str, list[FeatureItem]]:
    """Read a features JSONL file, grouped by category.

    Items whose text tokenizes to nothing are dropped with a warning.
    """
    path = Path(path)
    by_category: dict[str, list[FeatureItem]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            where = f"{path}, line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError(f"{where}: expected a JSON object")
            product_id = _require_str(obj, "product_id", where)
            category = _require_str(obj, "category", where)
            features = obj.get("features")
            if not isinstance(features, list) or not all(isinstance(f, str) for f in features):
                raise CorpusFormatError(f"{where}: 'features' must be a list of strings")
            bucket = by_category.setdefault(category, [])
            for text in features:
                tokens = tuple(tokenize(text))
                if not tokens:
                    log.warning("%s: dropping feature with no tokens (product %s)",
                                where, product_id)
                    continue
                bucket.append(FeatureItem(product_id, text, tokens))
    for category, items in by_category.items():
        log.info("features[%s]: %d items from %d products", category, len(items),
                 len({it.product for it in items}))
    return by_category


def load_aspect_labels(path: str | Path) -> dict[str, frozenset[str]]:
    """Read gold aspect labels: ``segment_id<TAB>label1[,label2...]``."""
    path = Path(path)
    labels: dict[str, frozenset[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            where = f"{path}, line {lineno}"
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusFormatError(f"{where}: expected 2 tab-separated fields")
            seg_id, label_field = parts
            if seg_id in labels:
                raise CorpusFormatError(f"{where}: duplicate segment id {seg_id!r}")
            label_set = frozenset(l.strip() for l in label_field.split(",") if l.strip())
            if not label_set:
                raise CorpusFormatError(f"{where}: empty label set")
            labels[seg_id] = label_set
    return labels


def load_references(path: str | Path) -> dict[str, list[ReferenceSummary]]:
    """Read reference summaries JSONL, grouped by product id."""
    path = Path(path)
    refs: dict[str, list[ReferenceSummary]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            where = f"{path}, line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{where}: invalid JSON ({exc.msg})") from exc
            product_id = _require_str(obj, "product_id", where)
            summary = _require_str(obj, "summary", where)
            annotator = obj.get("annotator")
            if not isinstance(annotator, int):
                raise CorpusFormatError(f"{where}: 'annotator' must be an integer")
            refs.setdefault(product_id, []).append(
                ReferenceSummary(product_id, annotator, summary))
    return refs
