from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
TOY = ROOT / "data" / "toy"


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return TOY


@pytest.fixture(scope="session")
def toy_corpus():
    from opinionsum.corpus import load_reviews
    return load_reviews(TOY / "reviews.jsonl")


@pytest.fixture(scope="session")
def toy_table():
    from opinionsum.embeddings import load_embeddings
    return load_embeddings(TOY / "embeddings.txt")


@pytest.fixture(scope="session")
def toy_features():
    from opinionsum.corpus import load_features
    return load_features(TOY / "features.jsonl")


@pytest.fixture(scope="session")
def toy_lexicon():
    from opinionsum.salience import load_lexicon
    return load_lexicon(TOY / "lexicon" / "positive.txt",
                        TOY / "lexicon" / "negative.txt")
