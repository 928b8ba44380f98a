import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from opinionsum.embeddings import (EmbeddingFormatError, EmbeddingTable,
                                   SkipgramConfig, cosine, embed_tokens,
                                   load_embeddings, save_embeddings,
                                   train_skipgram)

finite_vec = st.lists(
    st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=2,
    max_size=6)


class TestCosine:
    def test_self_similarity(self):
        assert cosine([1.0, 2.0, -3.0], [1.0, 2.0, -3.0]) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_closed_form(self):
        assert cosine([1.0, 1.0], [1.0, 0.0]) == pytest.approx(math.sqrt(2) / 2,
                                                               abs=1e-6)

    def test_zero_vector_scores_zero(self):
        assert cosine([0.0, 0.0], [1.0, 2.0]) == 0.0
        assert cosine([0.0, 0.0], [0.0, 0.0]) == 0.0

    @given(finite_vec, finite_vec)
    def test_symmetry_and_range(self, u, v):
        n = min(len(u), len(v))
        a, b = u[:n], v[:n]
        assert cosine(a, b) == cosine(b, a)
        assert -1.0 <= cosine(a, b) <= 1.0

    @given(finite_vec, st.floats(min_value=0.01, max_value=50))
    def test_scale_invariance(self, u, alpha):
        # Norms below ~1e-150 underflow when squared, costing precision.
        assume(float(np.linalg.norm(u)) > 1e-3)
        v = [x + 1.0 for x in u]
        scaled = [alpha * x for x in u]
        assert cosine(scaled, v) == pytest.approx(cosine(u, v), abs=1e-9)


class TestTable:
    def test_dim_enforced(self):
        with pytest.raises(ValueError, match="dim"):
            EmbeddingTable({"a": [1.0, 0.0], "b": [1.0]})

    def test_nan_rejected(self):
        with pytest.raises(ValueError, match="NaN"):
            EmbeddingTable({"a": [float("nan"), 0.0]})

    def test_vectors_read_only(self):
        table = EmbeddingTable({"a": [1.0, 0.0]})
        with pytest.raises(ValueError):
            table["a"][0] = 5.0


class TestIO:
    def test_small_file(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 3\na 1 0 0\nb 0 1 0\n")
        table = load_embeddings(path)
        assert len(table) == 2 and table.dim == 3
        assert np.allclose(table["b"], [0, 1, 0])

    def test_row_dim_mismatch(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 3\na 1 0\n")
        with pytest.raises(EmbeddingFormatError, match="row 1"):
            load_embeddings(path)

    def test_duplicate_token(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 2\na 1 0\na 0 1\n")
        with pytest.raises(EmbeddingFormatError, match="duplicate"):
            load_embeddings(path)

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("3 2\na 1 0\nb 0 1\n")
        with pytest.raises(EmbeddingFormatError, match="header says 3"):
            load_embeddings(path)

    def test_round_trip(self, tmp_path):
        table = EmbeddingTable({"a": [0.123456789, -1.0], "b": [2.5, 0.0]})
        path = tmp_path / "emb.txt"
        save_embeddings(table, path)
        again = load_embeddings(path)
        assert again.tokens() == table.tokens()
        assert np.allclose(again["a"], [0.123457, -1.0], atol=1e-6)

    def test_toy_file(self, toy_table):
        assert toy_table.dim == 16
        assert "picture" in toy_table


class TestEmbedTokens:
    table = EmbeddingTable({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [1.0, 1.0]})

    def test_all_in_vocab(self):
        assert [t for t, _ in embed_tokens(["a", "b"], self.table)] == ["a", "b"]

    def test_all_oov(self):
        assert embed_tokens(["x", "y"], self.table) == []

    def test_mixed_keeps_order(self):
        out = embed_tokens(["c", "x", "a", "y", "b"], self.table)
        assert [t for t, _ in out] == ["c", "a", "b"]


BLOCK_A = ["picture", "screen", "bright", "sharp"]
BLOCK_B = ["shoe", "lace", "walk", "run"]


def _block_corpus(sentences=120, seed=11):
    rng = np.random.default_rng(seed)
    corpus = []
    for i in range(sentences):
        block = BLOCK_A if i % 2 == 0 else BLOCK_B
        corpus.append([block[j] for j in rng.integers(len(block), size=4)])
    return corpus


class TestSkipgram:
    # Subsampling off: with an 8-word vocabulary every word is "frequent"
    # and the default threshold would discard most of the corpus.
    config = SkipgramConfig(dim=16, window=2, negatives=3, epochs=4,
                            min_count=1, rng_seed=3, subsample=0.0)

    def test_bitwise_reproducible(self):
        t1 = train_skipgram(_block_corpus(), self.config)
        t2 = train_skipgram(_block_corpus(), self.config)
        assert t1.tokens() == t2.tokens()
        for tok in t1.tokens():
            assert np.array_equal(t1[tok], t2[tok])

    def test_cooccurrence_beats_separation(self):
        table = train_skipgram(_block_corpus(), self.config)
        assert cosine(table["picture"], table["screen"]) > \
            cosine(table["picture"], table["shoe"])

    def test_block_structure(self):
        table = train_skipgram(_block_corpus(), self.config)
        intra, inter = [], []
        for i, u in enumerate(BLOCK_A):
            for v in BLOCK_A[i + 1:]:
                intra.append(cosine(table[u], table[v]))
            for v in BLOCK_B:
                inter.append(cosine(table[u], table[v]))
        assert np.mean(intra) > np.mean(inter)

    def test_output_dim_default(self):
        config = SkipgramConfig(dim=200, window=2, negatives=2, epochs=1,
                                min_count=1, rng_seed=0)
        table = train_skipgram([["a", "b", "c", "a", "b", "c"]], config)
        assert table.dim == 200
        assert all(vec.shape == (200,) for _, vec in table.items())

    def test_single_sentence_vocabulary(self):
        config = SkipgramConfig(dim=4, window=2, negatives=2, epochs=1,
                                min_count=1, rng_seed=0)
        table = train_skipgram([["red", "green", "blue", "red"]], config)
        assert set(table.tokens()) == {"red", "green", "blue"}

    def test_min_count_filters_vocab(self):
        config = SkipgramConfig(dim=4, window=2, negatives=2, epochs=1,
                                min_count=2, rng_seed=0)
        table = train_skipgram([["a", "a", "b", "a", "a"]], config)
        assert set(table.tokens()) == {"a"}

    def test_empty_vocab_rejected(self):
        config = SkipgramConfig(dim=4, window=2, negatives=2, epochs=1,
                                min_count=5, rng_seed=0)
        with pytest.raises(ValueError, match="vocabulary is empty"):
            train_skipgram([["a", "b", "c"]], config)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            SkipgramConfig(dim=0)
