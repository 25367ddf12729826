"""Frequency vectors, cosine similarity, the quadratic length scaler and
corpus scoring."""

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from catds import (
    EmptyClipWarning,
    LengthScaler,
    build_frequency_vector,
    catds_score,
    cosine_similarity,
    score_corpus,
)
from oracles import cosine_oracle, freq_vector_oracle, quad_fit_3pt


class TestFrequencyVector:
    def test_single_sequence(self):
        vec = build_frequency_vector([3, 3, 7], 10)
        assert vec[3] == 2 and vec[7] == 1 and vec.sum() == 3

    def test_empty_sequence_gives_zero_vector(self):
        assert build_frequency_vector([], 5).tolist() == [0] * 5

    def test_multiple_sequences_accumulate(self):
        vec = build_frequency_vector([[1], [1, 2]], 4)
        assert vec.tolist() == [0, 2, 1, 0]

    def test_ragged_sequences(self, rng):
        seqs = [rng.integers(0, 9, size=int(rng.integers(0, 20))) for _ in range(10)]
        vec = build_frequency_vector(seqs, 9)
        assert vec.tolist() == freq_vector_oracle([s.tolist() for s in seqs], 9)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="range"):
            build_frequency_vector([4], 4)
        with pytest.raises(ValueError, match="range"):
            build_frequency_vector([-1], 4)


class TestCosine:
    def test_identical_vectors(self):
        assert cosine_similarity([1, 2, 3], [1, 2, 3]) == 1.0

    def test_disjoint_supports(self):
        assert cosine_similarity([1, 0], [0, 1]) == 0.0

    def test_worked_example(self):
        assert cosine_similarity([1, 0, 1], [1, 1, 0]) == pytest.approx(0.5, abs=1e-15)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero"):
            cosine_similarity([0, 0], [1, 1])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            cosine_similarity([1, 2], [1, 2, 3])

    def test_matches_naive_oracle(self, rng):
        for _ in range(200):
            dim = int(rng.integers(1, 30))
            x = rng.normal(size=dim)
            y = rng.normal(size=dim)
            if np.linalg.norm(x) == 0 or np.linalg.norm(y) == 0:
                continue
            got = cosine_similarity(x, y)
            assert got == pytest.approx(cosine_oracle(x, y), abs=1e-12)

    def test_scale_invariance(self, rng):
        for _ in range(50):
            x = rng.normal(size=8)
            y = rng.normal(size=8)
            s = cosine_similarity(x, y)
            assert cosine_similarity(3.5 * x, y) == pytest.approx(s, abs=1e-12)
            assert cosine_similarity(x, 0.02 * y) == pytest.approx(s, abs=1e-12)

    def test_clamped_to_unit_interval(self):
        x = np.full(1000, 0.1)
        assert cosine_similarity(x, x) == 1.0
        assert cosine_similarity(x, -x) == -1.0


class TestLengthScaler:
    def test_exact_interpolation_example(self):
        model = LengthScaler().fit([0.0, 1.0, 2.0], [1.0, 2.0, 5.0])
        assert model.a_ == pytest.approx(1.0, abs=1e-9)
        assert model.b_ == pytest.approx(0.0, abs=1e-9)
        assert model.c_ == pytest.approx(1.0, abs=1e-9)

    def test_linear_points(self):
        p = np.array([1.0, 2.0, 3.0, 4.0])
        model = LengthScaler().fit(p, 2.0 * p + 3.0)
        assert model.a_ == pytest.approx(0.0, abs=1e-9)
        assert model.b_ == pytest.approx(2.0, abs=1e-9)
        assert model.c_ == pytest.approx(3.0, abs=1e-9)

    def test_matches_three_point_oracle(self, rng):
        for _ in range(100):
            p = rng.uniform(-5, 5, size=3)
            while np.min(np.abs(np.subtract.outer(p, p)[~np.eye(3, dtype=bool)])) < 0.3:
                p = rng.uniform(-5, 5, size=3)
            s = rng.uniform(-10, 10, size=3)
            model = LengthScaler().fit(p, s)
            a, b, c = quad_fit_3pt(list(zip(p, s)))
            assert model.a_ == pytest.approx(a, abs=1e-9)
            assert model.b_ == pytest.approx(b, abs=1e-9)
            assert model.c_ == pytest.approx(c, abs=1e-9)

    def test_overdetermined_matches_polyfit(self, rng):
        p = rng.uniform(10, 2000, size=60)
        s = 0.3 + 1e-4 * p - 2e-8 * p * p + rng.normal(scale=0.01, size=60)
        model = LengthScaler().fit(p, s)
        ref = np.polyfit(p, s, 2)
        assert model.a_ == pytest.approx(ref[0], rel=1e-6, abs=1e-12)
        assert model.b_ == pytest.approx(ref[1], rel=1e-6, abs=1e-10)
        assert model.c_ == pytest.approx(ref[2], rel=1e-6, abs=1e-8)

    def test_predict_uses_raw_p(self):
        model = LengthScaler().fit([0.0, 1.0, 2.0], [1.0, 2.0, 5.0])
        assert model.predict_one(3.0) == pytest.approx(10.0, abs=1e-9)
        np.testing.assert_allclose(model.predict([0.0, 1.0, 2.0]), [1.0, 2.0, 5.0], atol=1e-9)

    def test_fallback_on_constant_p(self):
        model = LengthScaler().fit([100.0, 100.0, 100.0], [0.2, 0.4, 0.6])
        assert model.is_fallback_
        assert model.fallback_q_ == pytest.approx(0.4)
        assert model.predict_one(7.0) == pytest.approx(0.4)

    def test_fallback_on_two_distinct_p(self):
        model = LengthScaler().fit([1.0, 2.0, 1.0], [0.1, 0.2, 0.3])
        assert model.is_fallback_
        assert model.predict_one(1.5) == pytest.approx(0.2)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            LengthScaler().fit([1.0, 2.0], [1.0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            LengthScaler().fit([], [])

    def test_unfitted_predict_rejected(self):
        with pytest.raises(NotFittedError):
            LengthScaler().predict([1.0])

    def test_epsilon_must_be_positive(self):
        with pytest.raises(ValueError):
            LengthScaler(epsilon=0.0).fit([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])


class TestCatdsScore:
    def fitted(self, qs):
        # baseline through the given (p, q) anchor points
        p = [0.0, 1.0, 2.0]
        return LengthScaler().fit(p, qs)

    def test_equal_s_and_q(self):
        model = LengthScaler().fit([0.0, 1.0, 2.0], [0.8, 0.8, 0.8])
        value, clamped = catds_score(0.8, model, 1.0)
        assert value == pytest.approx(1.0)
        assert not clamped

    def test_ratio(self):
        model = LengthScaler().fit([0.0, 1.0, 2.0], [0.6, 0.6, 0.6])
        value, clamped = catds_score(0.9, model, 1.0)
        assert value == pytest.approx(1.5)
        assert not clamped

    def test_negative_q_clamps(self):
        model = LengthScaler().fit([0.0, 1.0, 2.0], [-0.01, -0.01, -0.01])
        value, clamped = catds_score(0.5, model, 1.0)
        assert clamped
        assert value == pytest.approx(0.5 / 1e-6)

    def test_non_finite_s_rejected(self):
        model = LengthScaler().fit([0.0, 1.0, 2.0], [1.0, 1.0, 1.0])
        with pytest.raises(ValueError):
            catds_score(float("nan"), model, 1.0)


class TestScoreCorpus:
    def test_identical_distribution_scores_one(self):
        ref = build_frequency_vector([0, 0, 1, 2], 5)
        res = score_corpus(ref, [("a", [0, 0, 1, 2]), ("b", [3, 3, 4, 4]), ("c", [0, 1, 2, 3])])
        rec = {r.clip_id: r for r in res.records}
        assert rec["a"].raw_similarity == 1.0

    def test_constant_s_gives_constant_catds(self):
        # every clip has the same token histogram shape, so S is constant
        ref = build_frequency_vector([0, 1], 3)
        donors = [("a", [0, 1]), ("b", [0, 1, 0, 1]), ("c", [0, 1] * 5)]
        res = score_corpus(ref, donors)
        values = [r.catds for r in res.records]
        assert max(values) - min(values) < 1e-12
        assert values[0] == pytest.approx(1.0)

    def test_empty_clip_skipped_with_warning(self):
        ref = build_frequency_vector([0, 1], 3)
        with pytest.warns(EmptyClipWarning, match="'b'"):
            res = score_corpus(ref, [("a", [0, 1]), ("b", []), ("c", [1, 1, 2])])
        assert res.skipped_clip_ids == ["b"]
        assert [r.clip_id for r in res.records] == ["a", "c"]

    def test_records_in_input_order_fit_in_id_order(self):
        ref = build_frequency_vector([0, 1, 2], 4)
        donors = [("z", [0, 1, 1]), ("a", [0, 2]), ("m", [1, 2, 2, 0])]
        res = score_corpus(ref, donors)
        assert [r.clip_id for r in res.records] == ["z", "a", "m"]
        shuffled = score_corpus(ref, [donors[1], donors[2], donors[0]])
        by_id = {r.clip_id: r for r in res.records}
        for r in shuffled.records:
            assert r == by_id[r.clip_id]

    def test_record_fields_consistent(self):
        ref = build_frequency_vector([0, 0, 1], 3)
        donors = [("a", [0, 1, 1]), ("b", [0]), ("c", [1, 0, 0, 0])]
        res = score_corpus(ref, donors)
        for r in res.records:
            assert r.token_count > 0
            q = res.scaler.predict_one(r.token_count)
            assert r.fitted_q == pytest.approx(q)
            assert r.catds == pytest.approx(r.raw_similarity / max(q, 1e-6))

    def test_empty_corpus_rejected(self):
        ref = build_frequency_vector([0], 2)
        with pytest.raises(ValueError, match="empty donor"):
            score_corpus(ref, [])

    def test_all_clips_empty_rejected(self):
        ref = build_frequency_vector([0], 2)
        with pytest.raises(ValueError, match="no clips"):
            with pytest.warns(EmptyClipWarning):
                score_corpus(ref, [("a", [])])
