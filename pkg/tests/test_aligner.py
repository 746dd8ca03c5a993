"""Aligner tests: Model 1 against a brute-force enumeration oracle, HMM
EM properties, Viterbi decoding, and symmetrization."""

import itertools
import math
import random

import numpy as np
import pytest

from embtransfer.aligner import (
    NULL_TOKEN,
    HmmModel,
    TranslationTable,
    _uniform_table,
    hmm_loglik,
    model1_expected_counts,
    model1_loglik,
    symmetrize,
    train_hmm,
    train_model1,
    viterbi_align,
)
from embtransfer.corpus_io import AlignmentLinks, SentencePair
from embtransfer.errors import ValidationError


from oracles import brute_force_model1_counts as brute_force_counts


def pairs(*sides):
    return [
        SentencePair(src.split(), tgt.split(), i)
        for i, (src, tgt) in enumerate(sides)
    ]


ORACLE_FIXTURES = [
    pairs(("a b", "x y"), ("a", "x")),
    pairs(("a b c", "x y"), ("b c", "y z"), ("a", "z")),
    pairs(("a a", "x"), ("a b", "x y"), ("b", "y")),
    pairs(("p q r", "u v w"), ("q r", "v w"), ("p", "u"), ("r", "w"), ("p q", "u v")),
]


class TestModel1Oracle:
    @pytest.mark.parametrize("corpus", ORACLE_FIXTURES)
    @pytest.mark.parametrize("null_weight", [0.0, 0.2])
    def test_expected_counts_match_enumeration(self, corpus, null_weight):
        table = _uniform_table(corpus)
        for _ in range(3):  # check every iteration, not just the first
            counts, ll = model1_expected_counts(corpus, table, null_weight)
            o_counts, o_ll = brute_force_counts(corpus, table, null_weight)
            assert ll == pytest.approx(o_ll, abs=1e-10)
            keys = {(e, f) for e, row in o_counts.items() for f in row}
            keys |= {(e, f) for e, row in counts.items() for f in row}
            for e, f in keys:
                mine = counts.get(e, {}).get(f, 0.0)
                oracle = o_counts.get(e, {}).get(f, 0.0)
                assert mine == pytest.approx(oracle, abs=1e-10), (e, f)
            # advance the table the same way the trainer does
            from embtransfer.aligner import _normalize

            table = TranslationTable(_normalize(counts))


class TestModel1:
    def test_dominant_pair_learned(self):
        corpus = pairs(("a b", "x y"), ("a", "x"))
        table = train_model1(corpus, iterations=10)
        assert table.prob("x", "a") > table.prob("x", "b")

    def test_single_pair_no_null(self):
        corpus = pairs(("a", "x"))
        table = train_model1(corpus, iterations=1, null_weight=0.0)
        assert table.prob("x", "a") == pytest.approx(1.0)

    def test_loglik_nondecreasing_10_iterations(self):
        corpus = pairs(
            ("der hund bellt", "the dog barks"),
            ("der mann geht", "the man walks"),
            ("hund und mann", "dog and man"),
            ("der hund geht", "the dog walks"),
        )
        table = train_model1(corpus, iterations=10)
        hist = table.loglik_history
        assert len(hist) == 10
        for before, after in zip(hist, hist[1:]):
            assert after >= before - 1e-9

    def test_normalization_after_each_m_step(self):
        corpus = pairs(("a b", "x y"), ("b c", "y z"))
        for iters in (1, 2, 5):
            table = train_model1(corpus, iterations=iters)
            for e, row in table.probs.items():
                assert sum(row.values()) == pytest.approx(1.0, abs=1e-9)

    def test_empty_corpus_errors(self):
        with pytest.raises(ValidationError, match="empty"):
            train_model1([], iterations=1)

    def test_deterministic(self):
        corpus = pairs(("a b", "x y"), ("b a", "y x"), ("a", "x"))
        t1 = train_model1(corpus, iterations=5)
        t2 = train_model1(corpus, iterations=5)
        assert t1.probs == t2.probs


def copy_corpus(n_pairs=50, vocab=30, seed=7):
    rng = random.Random(seed)
    words = [f"w{i}" for i in range(vocab)]
    corpus = []
    for i in range(n_pairs):
        sent = [rng.choice(words) for _ in range(rng.randint(3, 6))]
        corpus.append(SentencePair(list(sent), list(sent), i))
    return corpus


class TestHmm:
    def test_jump_concentrates_on_plus_one(self):
        # monotone alignment is the only structure; EM funnels the jump
        # distribution onto +1
        corpus = pairs(*[("a b c", "a b c")] * 50)
        table = train_model1(corpus, iterations=5)
        model = train_hmm(corpus, table, iterations=20)
        assert model.jump[1] > 0.8

    def test_scaling_factors_finite_positive(self):
        corpus = copy_corpus(20, seed=3)
        table = train_model1(corpus, iterations=3)
        model = train_hmm(corpus, table, iterations=3)
        from embtransfer.aligner import _forward_backward, _jump_matrix

        for pair in corpus:
            W = _jump_matrix(model.jump, model.max_jump, len(pair.target))
            _, _, scales, _, _ = _forward_backward(model, pair, W)
            assert np.all(np.isfinite(scales))
            assert np.all(scales > 0)

    def test_hmm_beats_model1_on_identity_corpus(self):
        corpus = copy_corpus(30, seed=9)
        table = train_model1(corpus, iterations=5)
        model = train_hmm(corpus, table, iterations=5)
        assert hmm_loglik(corpus, model) >= model1_loglik(corpus, table)

    def test_loglik_nondecreasing(self):
        corpus = copy_corpus(25, seed=11)
        table = train_model1(corpus, iterations=3)
        model = train_hmm(corpus, table, iterations=8)
        hist = model.loglik_history
        for before, after in zip(hist, hist[1:]):
            assert after >= before - 1e-9

    def test_distribution_sums(self):
        corpus = copy_corpus(15, seed=13)
        table = train_model1(corpus, iterations=3)
        model = train_hmm(corpus, table, iterations=4)
        assert sum(model.jump.values()) + model.null_mass == pytest.approx(1.0, abs=1e-9)
        for e, row in model.translation.probs.items():
            assert sum(row.values()) == pytest.approx(1.0, abs=1e-9)

    def test_max_jump_validation(self):
        corpus = pairs(("a", "x"))
        table = train_model1(corpus, iterations=1)
        with pytest.raises(ValidationError, match="max_jump"):
            train_hmm(corpus, table, max_jump=0)

    def test_save_load_roundtrip(self, tmp_path):
        corpus = copy_corpus(10, seed=17)
        table = train_model1(corpus, iterations=2)
        model = train_hmm(corpus, table, iterations=2)
        model.save(tmp_path / "hmm.json")
        loaded = HmmModel.load(tmp_path / "hmm.json")
        assert loaded.jump == model.jump
        assert loaded.null_mass == model.null_mass
        assert loaded.translation.probs == model.translation.probs


class TestViterbi:
    def test_identity_pair_diagonal(self):
        corpus = copy_corpus(50, seed=7)
        table = train_model1(corpus, iterations=5)
        model = train_hmm(corpus, table, iterations=5)
        pair = SentencePair(["w1", "w2"], ["w1", "w2"], 0)
        assert viterbi_align(model, pair).links == frozenset({(0, 0), (1, 1)})

    def test_two_to_one(self):
        table = TranslationTable({"x": {"a": 1.0}, NULL_TOKEN: {"a": 0.01}})
        pair = SentencePair(["a", "a"], ["x"], 0)
        links = viterbi_align(table, pair)
        assert links.links == frozenset({(0, 0), (1, 0)})

    def test_all_null_empty_links(self):
        table = TranslationTable({NULL_TOKEN: {"a": 1.0}, "x": {"a": 1e-13}})
        pair = SentencePair(["a"], ["x"], 0)
        assert viterbi_align(table, pair, null_weight=0.9).links == frozenset()

    def test_source_index_never_repeats(self):
        corpus = copy_corpus(30, seed=19)
        table = train_model1(corpus, iterations=4)
        model = train_hmm(corpus, table, iterations=4)
        for pair in corpus:
            links = viterbi_align(model, pair)
            sources = [i for i, _ in links.links]
            assert len(sources) == len(set(sources))

    def test_deterministic(self):
        corpus = copy_corpus(10, seed=23)
        table = train_model1(corpus, iterations=3)
        model = train_hmm(corpus, table, iterations=3)
        a = [viterbi_align(model, p) for p in corpus]
        b = [viterbi_align(model, p) for p in corpus]
        assert a == b


class TestSymmetrize:
    FWD = AlignmentLinks(frozenset({(0, 0), (1, 0)}))
    REV = AlignmentLinks(frozenset({(0, 0)}))

    def test_intersection(self):
        out = symmetrize(self.FWD, self.REV, "intersection")
        assert out.links == frozenset({(0, 0)})

    def test_union(self):
        out = symmetrize(self.FWD, self.REV, "union")
        assert out.links == frozenset({(0, 0), (1, 0)})

    def test_equal_inputs_idempotent(self):
        for mode in ("intersection", "union", "grow-diag-final-and"):
            out = symmetrize(self.FWD, self.FWD, mode)
            assert out.links == self.FWD.links

    def test_gdfa_between_intersection_and_union(self):
        rng = random.Random(31)
        for _ in range(50):
            fwd = frozenset(
                (rng.randrange(5), rng.randrange(5)) for _ in range(rng.randrange(6))
            )
            rev = frozenset(
                (rng.randrange(5), rng.randrange(5)) for _ in range(rng.randrange(6))
            )
            inter = fwd & rev
            union = fwd | rev
            out = symmetrize(AlignmentLinks(fwd), AlignmentLinks(rev)).links
            assert inter <= out <= union

    def test_range_mismatch(self):
        with pytest.raises(ValidationError):
            symmetrize(self.FWD, self.REV, "union", source_len=1, target_len=1)

    def test_unknown_mode(self):
        with pytest.raises(ValidationError, match="mode"):
            symmetrize(self.FWD, self.REV, "diagonal")
