import math

import numpy as np
import pytest

from opinionsum.corpus import make_segment
from opinionsum.embeddings import EmbeddingTable
from opinionsum.memory import (AspectCell, EpochLog, MemoryBank, TrainConfig,
                               attention_weights, build_seeded_bank, classify,
                               confusion_matrix, encode_segment, load_bank,
                               load_seed_words, objective, objective_gradient,
                               orthogonality_penalty, save_bank,
                               save_training_log, segment_likelihood, train,
                               word_score)

E = math.e


def bank2(prior1=0.5):
    return MemoryBank([AspectCell("A", np.array([1.0, 0.0]), prior1),
                       AspectCell("B", np.array([0.0, 1.0]), 1 - prior1)])


def bank1():
    return MemoryBank([AspectCell("A", np.array([1.0, 0.0]), 1.0)])


class TestBankValidation:
    def test_needs_cells(self):
        with pytest.raises(ValueError):
            MemoryBank([])

    def test_priors_must_sum_to_one(self):
        with pytest.raises(ValueError, match="priors sum"):
            MemoryBank([AspectCell("A", np.array([1.0]), 0.4),
                        AspectCell("B", np.array([1.0]), 0.4)])

    def test_zero_embedding_rejected(self):
        with pytest.raises(ValueError, match="zero embedding"):
            MemoryBank([AspectCell("A", np.array([0.0, 0.0]), 1.0)])

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            MemoryBank([AspectCell("A", np.array([1.0, 0.0]), 0.5),
                        AspectCell("B", np.array([1.0]), 0.5)])


class TestWordScore:
    def test_aligned_single_cell(self):
        assert word_score([1.0, 0.0], bank1()) == pytest.approx(E)

    def test_two_orthogonal_cells(self):
        assert word_score([1.0, 0.0], bank2()) == pytest.approx(0.5 * E + 0.5)

    def test_scale_invariant(self):
        b = bank2()
        assert word_score([3.7, 0.0], b) == pytest.approx(word_score([1.0, 0.0], b))

    def test_zero_vector_scores_prior_mass(self):
        assert word_score([0.0, 0.0], bank2()) == pytest.approx(1.0)


class TestAttention:
    def test_single_token(self):
        z = attention_weights([np.array([0.3, 0.4])], bank1())
        assert z.tolist() == [1.0]

    def test_identical_tokens_split_evenly(self):
        v = np.array([0.3, 0.4])
        z = attention_weights([v, v], bank2())
        assert np.allclose(z, [0.5, 0.5])

    def test_closed_form_two_tokens(self):
        z = attention_weights([np.array([1.0, 0.0]), np.array([0.0, 1.0])], bank1())
        assert np.allclose(z, [E / (E + 1), 1 / (E + 1)])

    def test_empty_errors(self):
        with pytest.raises(ValueError, match="no in-vocabulary tokens"):
            attention_weights([], bank1())

    def test_single_cell_prior_cancels(self):
        rng = np.random.default_rng(0)
        vectors = rng.normal(size=(4, 3))
        bank = MemoryBank([AspectCell("A", np.array([1.0, 2.0, 3.0]), 1.0)])
        z = attention_weights(vectors, bank)
        a = np.array([1.0, 2.0, 3.0])
        cos = vectors @ a / (np.linalg.norm(vectors, axis=1) * np.linalg.norm(a))
        expected = np.exp(cos) / np.exp(cos).sum()
        assert np.allclose(z, expected)


class TestEncode:
    def test_single_token_identity(self):
        v = np.array([0.2, 0.9])
        enc = encode_segment([v], bank2())
        assert np.allclose(enc.vector, v)

    def test_identical_tokens_identity(self):
        v = np.array([0.2, 0.9])
        enc = encode_segment([v, v], bank2())
        assert np.allclose(enc.vector, v)

    def test_closed_form_componentwise(self):
        v1, v2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        enc = encode_segment([v1, v2], bank1())
        z1, z2 = E / (E + 1), 1 / (E + 1)
        assert np.allclose(enc.vector, z1 * v1 + z2 * v2)
        assert np.allclose(enc.weights, [z1, z2])


class TestLikelihood:
    def test_aligned(self):
        assert segment_likelihood(np.array([1.0, 0.0]), bank1()) == pytest.approx(E)

    def test_orthogonal_to_all(self):
        bank = MemoryBank([AspectCell("A", np.array([1.0, 0.0, 0.0]), 0.5),
                           AspectCell("B", np.array([0.0, 1.0, 0.0]), 0.5)])
        assert segment_likelihood(np.array([0.0, 0.0, 2.0]), bank) == pytest.approx(1.0)

    def test_closed_form(self):
        assert segment_likelihood(np.array([1.0, 0.0]), bank2()) == \
            pytest.approx((E + 1) / 2)


class TestPenalty:
    def test_orthogonal_cells(self):
        assert orthogonality_penalty(bank2()) == pytest.approx(0.0, abs=1e-12)

    def test_identical_cells(self):
        bank = MemoryBank([AspectCell("A", np.array([2.0, 0.0]), 0.5),
                           AspectCell("B", np.array([1.0, 0.0]), 0.5)])
        assert orthogonality_penalty(bank) == pytest.approx(math.sqrt(2))

    def test_per_cell_rescale_invariant(self):
        rng = np.random.default_rng(1)
        cells = [AspectCell(f"c{i}", rng.normal(size=4), 0.25) for i in range(4)]
        base = orthogonality_penalty(MemoryBank(cells))
        scaled = [AspectCell(c.label, c.embedding * s, c.prior)
                  for c, s in zip(cells, [0.1, 3.0, 7.5, 42.0])]
        assert orthogonality_penalty(MemoryBank(scaled)) == pytest.approx(base)


class TestClassify:
    table = EmbeddingTable({"boom": [0.0, 1.0], "crisp": [1.0, 0.0],
                            "mix": [1.0, 1.0]})

    def test_seed_word_hits_its_aspect(self):
        bank = MemoryBank([AspectCell("IMAGE", np.array([1.0, 0.0]), 0.5),
                           AspectCell("SOUND", np.array([0.0, 1.0]), 0.5)])
        assert classify(["boom"], bank, self.table) == "SOUND"

    def test_all_oov_goes_general(self):
        assert classify(["zzz", "qqq"], bank2(), self.table) == "GENERAL"

    def test_matches_argmax_cosine_with_uniform_prior(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            cells = [AspectCell(f"c{i}", rng.normal(size=4), 1 / 3) for i in range(3)]
            bank = MemoryBank(cells)
            vec = rng.normal(size=4)
            table = EmbeddingTable({"w": vec})
            want = max(range(3), key=lambda i: np.dot(cells[i].embedding, vec)
                       / (np.linalg.norm(cells[i].embedding) * np.linalg.norm(vec)))
            assert classify(["w"], bank, table) == f"c{want}"

    def test_tie_breaks_to_lowest_index(self):
        bank = MemoryBank([AspectCell("FIRST", np.array([1.0, 0.0]), 0.5),
                           AspectCell("SECOND", np.array([1.0, 0.0]), 0.5)])
        assert classify(["crisp"], bank, self.table) == "FIRST"

    def test_permuting_equal_label_cells_is_noop(self):
        a1 = AspectCell("A", np.array([1.0, 0.2]), 0.25)
        a2 = AspectCell("A", np.array([0.9, 0.1]), 0.25)
        b1 = AspectCell("B", np.array([0.1, 1.0]), 0.25)
        b2 = AspectCell("B", np.array([0.0, 0.8]), 0.25)
        for tokens in (["crisp"], ["boom"], ["mix"]):
            assert classify(tokens, MemoryBank([a1, a2, b1, b2]), self.table) == \
                classify(tokens, MemoryBank([a2, a1, b2, b1]), self.table)


class TestScaleInvariances:
    def test_global_embedding_rescale(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            dim = int(rng.integers(2, 6))
            k = int(rng.integers(1, 4))
            cells = [AspectCell(f"c{i}", rng.normal(size=dim), 1.0 / k)
                     for i in range(k)]
            bank = MemoryBank(cells)
            words = {f"w{j}": rng.normal(size=dim) for j in range(int(rng.integers(1, 5)))}
            alpha = float(rng.uniform(0.1, 20))
            t1 = EmbeddingTable(words)
            t2 = EmbeddingTable({w: alpha * v for w, v in words.items()})
            tokens = list(words)
            z1 = attention_weights([t1[w] for w in tokens], bank)
            z2 = attention_weights([t2[w] for w in tokens], bank)
            assert np.allclose(z1, z2)
            assert classify(tokens, bank, t1) == classify(tokens, bank, t2)

    def test_per_cell_rescale(self):
        rng = np.random.default_rng(10)
        for _ in range(30):
            dim = int(rng.integers(2, 6))
            k = int(rng.integers(1, 4))
            cells = [AspectCell(f"c{i}", rng.normal(size=dim), 1.0 / k)
                     for i in range(k)]
            scales = rng.uniform(0.1, 10, size=k)
            scaled = [AspectCell(c.label, c.embedding * s, c.prior)
                      for c, s in zip(cells, scales)]
            b1, b2 = MemoryBank(cells), MemoryBank(scaled)
            v = rng.normal(size=dim)
            table = EmbeddingTable({"w": v})
            assert word_score(v, b1) == pytest.approx(word_score(v, b2))
            assert segment_likelihood(v, b1) == pytest.approx(segment_likelihood(v, b2))
            assert classify(["w"], b1, table) == classify(["w"], b2, table)


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            dim, k = 8, int(rng.integers(2, 5))
            cells = [AspectCell(f"c{i}", rng.normal(size=dim), 1.0 / k,
                                trainable=(i == 0)) for i in range(k)]
            bank = MemoryBank(cells)
            segs = [rng.normal(size=(int(rng.integers(1, 5)), dim)) for _ in range(3)]
            lam = float(rng.uniform(0, 5))
            value, grad = objective_gradient(bank, segs, lam)
            assert value == pytest.approx(objective(bank, segs, lam))
            h = 1e-5
            fd = np.zeros_like(grad)
            for c in range(dim):
                up = bank.matrix.copy()
                up[0, c] += h
                down = bank.matrix.copy()
                down[0, c] -= h
                fd[0, c] = (objective(bank.with_matrix(up), segs, lam)
                            - objective(bank.with_matrix(down), segs, lam)) / (2 * h)
            rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12)
            assert rel < 1e-4


def _training_setup(dim=8, n_segments=40, extra=2, seed=4):
    rng = np.random.default_rng(seed)
    basis = np.eye(dim)
    suffixes = "abcdef"
    words = {}
    for i, family in enumerate(("img", "snd")):
        for j in range(4):
            words[f"{family}{suffixes[j]}"] = basis[i] + 0.2 * rng.normal(size=dim)
    for j in range(6):
        words[f"gen{suffixes[j]}"] = basis[4] + 0.8 * rng.normal(size=dim)
    table = EmbeddingTable(words)
    segments = []
    for i in range(n_segments):
        family = ("img", "snd", "gen")[i % 3]
        count = 4 if family == "gen" else 3
        pool = 4 if family != "gen" else 6
        toks = [f"{family}{suffixes[int(rng.integers(pool))]}" for _ in range(count)]
        segments.append(make_segment(f"s{i}", " ".join(toks)))
    seed_words = {"IMAGE": [("imga", None), ("imgb", None)],
                  "SOUND": [("snda", None), ("sndb", None)]}
    bank = build_seeded_bank(seed_words, table, extra_general=extra, rng_seed=seed)
    return bank, segments, table


class TestTrain:
    def test_loss_decreases_full_batch(self):
        bank, segments, table = _training_setup()
        config = TrainConfig(batch_size=500, max_epochs=8, patience=8, lam=1.0,
                             rng_seed=0)
        _trained, logs = train(bank, segments, table, config=config)
        losses = [entry.loss for entry in logs]
        assert losses[-1] < losses[0]
        assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))

    def test_fixed_cells_bit_exact(self):
        bank, segments, table = _training_setup()
        before = [c.embedding.copy() for c in bank.cells]
        config = TrainConfig(batch_size=16, max_epochs=4, patience=4, rng_seed=0)
        trained, _ = train(bank, segments, table, config=config)
        for cell_before, cell_after, orig in zip(bank.cells, trained.cells, before):
            assert np.array_equal(cell_before.embedding, orig)
            if not cell_after.trainable:
                assert np.array_equal(cell_after.embedding, orig)
            else:
                assert not np.array_equal(cell_after.embedding, orig)

    def test_diversity_pressure_shrinks_overlap(self):
        bank, segments, table = _training_setup()
        fixed_rows = [i for i, c in enumerate(bank.cells) if not c.trainable]
        overlaps = {}
        for lam in (1e-6, 200.0):
            config = TrainConfig(batch_size=500, max_epochs=12, patience=12,
                                 lam=lam, rng_seed=0)
            trained, _ = train(bank, segments, table, config=config)
            M = trained.matrix / np.linalg.norm(trained.matrix, axis=1, keepdims=True)
            vals = [abs(float(M[t] @ M[f]))
                    for t in trained.trainable_indices for f in fixed_rows]
            overlaps[lam] = np.mean(vals)
        assert overlaps[200.0] < overlaps[1e-6]

    def test_dev_early_stopping_logs_f1(self):
        bank, segments, table = _training_setup()
        dev_labels = {}
        for seg in segments[:12]:
            family = seg.tokens[0][:3]
            label = {"img": "IMAGE", "snd": "SOUND", "gen": "GENERAL"}[family]
            dev_labels[seg.id] = frozenset({label})
        config = TrainConfig(batch_size=16, max_epochs=6, patience=2, rng_seed=0)
        _trained, logs = train(bank, segments, table, dev_labels, config)
        assert all(entry.dev_f1 is not None for entry in logs)
        assert 0.0 <= logs[0].dev_f1 <= 1.0

    def test_no_trainable_cells_rejected(self):
        bank = bank2()
        with pytest.raises(ValueError, match="no trainable"):
            train(bank, [], EmbeddingTable({"a": [1.0, 0.0]}),
                  config=TrainConfig(max_epochs=1))

    def test_empty_corpus_rejected(self):
        bank, _segments, table = _training_setup()
        with pytest.raises(ValueError, match="empty"):
            train(bank, [], table, config=TrainConfig(max_epochs=1))

    def test_training_log_csv(self, tmp_path):
        logs = [EpochLog(0, 1.5, 0.3, None), EpochLog(1, 1.2, 0.2, 0.75)]
        path = tmp_path / "log.csv"
        save_training_log(logs, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "epoch,loss,penalty,dev_f1"
        assert lines[1].startswith("0,1.5,0.3,")
        assert lines[2].endswith("0.75")


class TestConfusion:
    def test_perfect_predictions_identity(self):
        preds = {"a": "X", "b": "Y"}
        gold = {"a": {"X"}, "b": {"Y"}}
        labels, _counts, norm = confusion_matrix(preds, gold)
        assert labels == ("X", "Y")
        assert np.allclose(norm, np.eye(2))

    def test_all_general_column(self):
        preds = {"a": "GENERAL", "b": "GENERAL"}
        gold = {"a": {"X"}, "b": {"Y"}}
        labels, counts, _ = confusion_matrix(preds, gold)
        g = labels.index("GENERAL")
        assert counts[:, g].sum() == counts.sum()

    def test_hand_built_case(self):
        preds = {"s1": "A", "s2": "B", "s3": "A", "s4": "C", "s5": "B"}
        gold = {"s1": {"A"}, "s2": {"A", "B"}, "s3": {"B"},
                "s4": {"C"}, "s5": {"A", "C"}}
        labels, counts, _ = confusion_matrix(preds, gold)
        assert labels == ("A", "B", "C")
        assert counts.tolist() == [[1, 1, 0],
                                   [1, 1, 0],
                                   [0, 1, 1]]

    def test_id_mismatch(self):
        with pytest.raises(ValueError, match="id sets differ"):
            confusion_matrix({"a": "X"}, {"b": {"X"}})


class TestBankIO:
    def test_round_trip(self, tmp_path):
        bank, _, _ = _training_setup()
        path = tmp_path / "bank.tsv"
        save_bank(bank, path)
        again = load_bank(path)
        assert again.labels == bank.labels
        assert np.array_equal(again.matrix, bank.matrix)
        assert again.trainable_indices == bank.trainable_indices

    def test_seed_file_round_trip(self, tmp_path):
        path = tmp_path / "seeds.tsv"
        path.write_text("IMAGE\tpicture\nIMAGE\tscreen\nSOUND\tbass\t0.5\n")
        seeds = load_seed_words(path)
        assert seeds["IMAGE"] == [("picture", None), ("screen", None)]
        assert seeds["SOUND"] == [("bass", 0.5)]


class TestSeededBank:
    table = EmbeddingTable({"picture": [1.0, 0.0, 0.0], "screen": [0.0, 1.0, 0.0],
                            "bass": [0.0, 0.0, 1.0]})

    def test_unweighted_mean(self):
        bank = build_seeded_bank(
            {"IMAGE": [("picture", None), ("screen", None)]}, self.table)
        assert np.allclose(bank.cells[0].embedding, [0.5, 0.5, 0.0])

    def test_weighted_mean(self):
        bank = build_seeded_bank(
            {"IMAGE": [("picture", 3.0), ("screen", 1.0)]}, self.table)
        assert np.allclose(bank.cells[0].embedding, [0.75, 0.25, 0.0])

    def test_oov_seeds_skipped(self):
        bank = build_seeded_bank(
            {"IMAGE": [("picture", None), ("nope", None)]}, self.table)
        assert np.allclose(bank.cells[0].embedding, [1.0, 0.0, 0.0])

    def test_all_oov_rejected(self):
        with pytest.raises(ValueError, match="no seed word"):
            build_seeded_bank({"IMAGE": [("nope", None)]}, self.table)

    def test_extra_cells_uniform_priors(self):
        bank = build_seeded_bank({"IMAGE": [("picture", None)],
                                  "SOUND": [("bass", None)]},
                                 self.table, extra_general=3, rng_seed=1)
        assert len(bank) == 5
        assert np.allclose(bank.priors, 0.2)
        assert bank.trainable_indices == (2, 3, 4)
        assert all(bank.cells[i].label == "GENERAL" for i in (2, 3, 4))
