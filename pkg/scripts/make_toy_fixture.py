#!/usr/bin/env python3
"""Regenerate the bundled toy fixture under data/toy/.

Three product categories, three products each, ~20 pre-segmented review
segments per product, synthetic 16-dim embeddings whose words cluster by
concept family, merchant-style feature descriptions for seed mining, gold
aspect labels, three reference summaries per product, and a small sentiment
lexicon. Everything is drawn from one fixed RNG seed, so reruns are
byte-identical.
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from opinionsum.corpus import tokenize  # noqa: E402
from opinionsum.embeddings import EmbeddingTable, save_embeddings  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "data" / "toy"

SEED = 7
DIM = 16

FAMILIES = {
    "image": ["picture", "screen", "color", "resolution", "brightness", "display"],
    "sound": ["sound", "audio", "speaker", "volume", "bass", "clarity"],
    "price": ["price", "cost", "value", "deal", "bargain"],
    "comfort": ["comfort", "fit", "cushion", "earpad", "headband", "insole", "support"],
    "battery": ["battery", "charge", "hours", "power", "standby"],
    "durability": ["leather", "sole", "stitching", "durability", "toughness"],
    "style": ["style", "look", "design", "finish", "shade"],
    "positive": ["great", "excellent", "amazing", "love", "perfect", "crisp",
                 "clear", "sturdy", "fantastic", "wonderful", "superb", "nice",
                 "good", "impressive", "comfortable"],
    "negative": ["terrible", "bad", "poor", "awful", "disappointing", "weak",
                 "muddy", "flimsy", "horrible", "annoying", "uncomfortable"],
}

POSITIVE_LEXICON = FAMILIES["positive"]
NEGATIVE_LEXICON = FAMILIES["negative"]

CATEGORY_ASPECTS = {
    "tvs": {
        "IMAGE": ["picture", "screen", "color", "resolution"],
        "SOUND": ["sound", "audio", "speaker", "volume"],
        "PRICE": ["price", "cost", "value"],
    },
    "headsets": {
        "SOUND": ["sound", "audio", "bass", "clarity"],
        "COMFORT": ["comfort", "fit", "cushion", "earpad"],
        "BATTERY": ["battery", "charge", "power"],
    },
    "boots": {
        "COMFORT": ["comfort", "fit", "insole", "support"],
        "DURABILITY": ["leather", "sole", "stitching"],
        "STYLE": ["style", "look", "design"],
    },
}

GENERAL_SENTENCES = [
    "Bought it last week.",
    "Arrived in a big box.",
    "Simply plug it in.",
    "Ordered it from the store.",
    "My brother has the same one.",
    "Came with a thick manual.",
    "Delivery took 3 days.",
    "I registered it online.",
]

GENERAL_SEEDS = ["bought", "week", "box", "plug", "store", "manual", "delivery", "online"]

#: Cross-category marketing filler; high document frequency, low idf.
MARKETING = ["premium", "advanced", "signature", "engineered", "everyday", "modern"]

OPINION_TEMPLATES = [
    "The {w} is {adj}.",
    "The {w} is really {adj}.",
    "Its {w} turned out {adj}.",
    "This {w} seems {adj} to me.",
    "Such an {adj} {w} overall.",
]


def make_segment_pool(rng, category):
    """(text, labels) candidates for one category."""
    aspects = CATEGORY_ASPECTS[category]
    pool = []
    for aspect, words in aspects.items():
        for word in words:
            pos = str(rng.choice(FAMILIES["positive"]))
            neg = str(rng.choice(FAMILIES["negative"]))
            template = OPINION_TEMPLATES[int(rng.integers(len(OPINION_TEMPLATES)))]
            pool.append((template.format(w=word, adj=pos), {aspect}))
            template = OPINION_TEMPLATES[int(rng.integers(len(OPINION_TEMPLATES)))]
            pool.append((template.format(w=word, adj=neg), {aspect}))
            pool.append((f"The {word} has {int(rng.integers(2, 99))} settings.", {aspect}))
    aspect_names = list(aspects)
    for _ in range(6):
        a1, a2 = rng.choice(len(aspect_names), size=2, replace=False)
        w1 = str(rng.choice(aspects[aspect_names[a1]]))
        w2 = str(rng.choice(aspects[aspect_names[a2]]))
        pos = str(rng.choice(FAMILIES["positive"]))
        neg = str(rng.choice(FAMILIES["negative"]))
        pool.append((f"The {w1} is {pos} but the {w2} is {neg}.",
                     {aspect_names[a1], aspect_names[a2]}))
    for text in GENERAL_SENTENCES:
        pool.append((text, {"GENERAL"}))
    return pool


def make_features(rng, category):
    """3-5 merchant bullets mixing aspect nouns with shared marketing words."""
    words = [w for group in CATEGORY_ASPECTS[category].values() for w in group]
    bullets = []
    for _ in range(int(rng.integers(3, 6))):
        m = str(rng.choice(MARKETING))
        picks = rng.choice(len(words), size=3, replace=False)
        w1, w2, w3 = (words[i] for i in picks)
        style = int(rng.integers(3))
        if style == 0:
            bullets.append(f"{m} {w1} with refined {w2} and smooth {w3}")
        elif style == 1:
            bullets.append(f"Enjoy the {w1} thanks to {m} {w2} plus {w3}")
        else:
            bullets.append(f"{w1} and {w2} tuned for {m} {w3}")
    return bullets


def main():
    rng = np.random.default_rng(SEED)
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "lexicon").mkdir(exist_ok=True)
    (OUT / "aspect_seeds").mkdir(exist_ok=True)

    reviews_lines = []
    labels_lines = []
    references_lines = []
    all_texts = []

    for category in CATEGORY_ASPECTS:
        pool = make_segment_pool(rng, category)
        for p in range(1, 4):
            product_id = f"{category}-p{p}"
            opinion_segments = []
            for r in range(1, 5):
                review_id = f"{product_id}-r{r}"
                picks = rng.choice(len(pool), size=5, replace=False)
                segments = []
                for k in picks:
                    text, labels = pool[int(k)]
                    seg_id = f"{review_id}#{len(segments)}"
                    segments.append(text)
                    labels_lines.append(f"{seg_id}\t{','.join(sorted(labels))}")
                    if labels != {"GENERAL"} and "settings" not in text:
                        opinion_segments.append(text)
                reviews_lines.append(json.dumps({
                    "product_id": product_id, "category": category,
                    "review_id": review_id, "segments": segments}))
                all_texts.extend(segments)
            for annotator in range(1, 4):
                take = min(len(opinion_segments), 6)
                chosen = rng.choice(len(opinion_segments), size=take, replace=False)
                summary = " ".join(opinion_segments[i] for i in sorted(chosen))
                references_lines.append(json.dumps({
                    "product_id": product_id, "annotator": annotator,
                    "summary": summary}))
                all_texts.append(summary)

    features_lines = []
    for category in CATEGORY_ASPECTS:
        for p in range(1, 7):
            product_id = f"{category}-ext{p}"
            feats = make_features(rng, category)
            features_lines.append(json.dumps({
                "product_id": product_id, "category": category,
                "features": feats}))
            all_texts.extend(feats)

    # Synthetic embeddings: orthonormal family bases plus per-word noise.
    family_names = list(FAMILIES) + ["general"]
    basis, _ = np.linalg.qr(rng.normal(size=(DIM, DIM)))
    bases = {name: basis[i] for i, name in enumerate(family_names)}
    word_family = {}
    for name, words in FAMILIES.items():
        for word in words:
            word_family.setdefault(word, name)

    vocab = sorted({tok for text in all_texts for tok in tokenize(text)})
    vectors = {}
    for word in vocab:
        family = word_family.get(word, "general")
        if family in ("positive", "negative"):
            noise = 0.7
        elif family == "general":
            noise = 0.9
        else:
            noise = 0.35
        vectors[word] = bases[family] + noise * rng.normal(size=DIM)
    table = EmbeddingTable(vectors, dim=DIM)

    (OUT / "reviews.jsonl").write_text("\n".join(reviews_lines) + "\n")
    (OUT / "features.jsonl").write_text("\n".join(features_lines) + "\n")
    (OUT / "labels.tsv").write_text("\n".join(labels_lines) + "\n")
    (OUT / "references.jsonl").write_text("\n".join(references_lines) + "\n")
    save_embeddings(table, OUT / "embeddings.txt")
    (OUT / "lexicon" / "positive.txt").write_text(
        "# toy positive words\n" + "\n".join(POSITIVE_LEXICON) + "\n")
    (OUT / "lexicon" / "negative.txt").write_text(
        "# toy negative words\n" + "\n".join(NEGATIVE_LEXICON) + "\n")
    for category, aspects in CATEGORY_ASPECTS.items():
        lines = []
        for aspect, words in aspects.items():
            for word in words:
                lines.append(f"{aspect}\t{word}")
        for word in GENERAL_SEEDS:
            lines.append(f"GENERAL\t{word}")
        (OUT / "aspect_seeds" / f"{category}.tsv").write_text("\n".join(lines) + "\n")

    n_reviews = len(reviews_lines)
    n_segments = len(labels_lines)
    print(f"wrote toy fixture: {n_reviews} reviews, {n_segments} segments, "
          f"{len(vocab)} vocabulary words -> {OUT}")


if __name__ == "__main__":
    main()
