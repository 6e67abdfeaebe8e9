import numpy as np
import pytest

from dynak.errors import ContractError, UnknownIdError
from dynak.model import FactorModel
from dynak.recommend import (
    format_recommendations,
    recommend_dynamic_k,
    recommend_top_n,
)


def scored_model(scores, t_u=1.0, kind="MF"):
    """MF model whose item scores for user 0 equal `scores` exactly."""
    scores = np.asarray(scores, dtype=float)
    P = np.array([[1.0]])
    Q = scores.reshape(-1, 1)
    return FactorModel(kind=kind, f=1, P=P, Q=Q,
                       t_u=np.array([float(t_u)]), t=float(t_u))


class TestDynamicK:
    def test_keeps_items_above_boundary(self):
        m = scored_model([2.5, 1.9, 0.3], t_u=1.0)
        rec = recommend_dynamic_k(m, 0, [0, 1, 2], cap=20)
        assert rec.items == [0, 1]
        assert rec.mode == "dynamic-K"

    def test_high_boundary_gives_empty_list(self):
        m = scored_model([2.5, 1.9, 0.3], t_u=3.0)
        rec = recommend_dynamic_k(m, 0, [0, 1, 2], cap=20)
        assert rec.items == []

    def test_cap_truncates(self):
        m = scored_model([2.5, 1.9, 0.3], t_u=1.0)
        rec = recommend_dynamic_k(m, 0, [0, 1, 2], cap=1)
        assert rec.items == [0]

    def test_boundary_tie_excluded(self):
        m = scored_model([2.0, 1.0], t_u=1.0)
        rec = recommend_dynamic_k(m, 0, [0, 1], cap=5)
        assert rec.items == [0]

    def test_scores_non_increasing(self):
        m = scored_model([0.5, 2.0, 1.5, 1.2], t_u=0.0)
        rec = recommend_dynamic_k(m, 0, [0, 1, 2, 3], cap=10)
        scores = [s for _, s in rec.entries]
        assert scores == sorted(scores, reverse=True)

    def test_unknown_user(self):
        m = scored_model([1.0])
        with pytest.raises(UnknownIdError):
            recommend_dynamic_k(m, 3, [0])

    def test_hrm_without_context_rejected(self):
        m = scored_model([1.0, 2.0], kind="HRM")
        with pytest.raises(ContractError, match="context"):
            recommend_dynamic_k(m, 0, [0, 1])

    def test_out_of_range_candidate_rejected(self):
        m = scored_model([1.0, 2.0])
        with pytest.raises(ContractError):
            recommend_dynamic_k(m, 0, [5])


class TestTopN:
    def test_all_candidates_when_n_covers(self):
        m = scored_model([0.5, 2.0, 1.5])
        rec = recommend_top_n(m, 0, [0, 1, 2], n=3)
        assert rec.items == [1, 2, 0]
        assert rec.mode == "fixed-N"

    def test_argmax(self):
        m = scored_model([2.5, 1.9])
        rec = recommend_top_n(m, 0, [0, 1], n=1)
        assert rec.items == [0]

    def test_tie_breaks_by_ascending_id(self):
        m = scored_model([1.5, 1.5])
        rec = recommend_top_n(m, 0, [1, 0], n=2)
        assert rec.items == [0, 1]

    def test_boundary_ignored(self):
        m = scored_model([0.1, 0.2], t_u=5.0)
        rec = recommend_top_n(m, 0, [0, 1], n=2)
        assert len(rec.items) == 2

    def test_n_must_be_positive(self):
        m = scored_model([1.0])
        with pytest.raises(ContractError):
            recommend_top_n(m, 0, [0], n=0)


class TestOrderingProperties:
    def test_dynamic_is_prefix_of_fixed(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            m = scored_model(rng.normal(size=12), t_u=rng.normal())
            cand = list(range(12))
            cap = 6
            dyn = recommend_dynamic_k(m, 0, cand, cap=cap)
            fixed = recommend_top_n(m, 0, cand, n=cap)
            assert dyn.items == fixed.items[: len(dyn.items)]

    def test_raising_boundary_never_lengthens(self):
        rng = np.random.default_rng(2)
        scores = rng.normal(size=10)
        cand = list(range(10))
        before = recommend_dynamic_k(scored_model(scores, t_u=0.0), 0, cand, cap=10)
        for delta in (0.1, 0.5, 2.0):
            after = recommend_dynamic_k(scored_model(scores, t_u=delta), 0, cand, cap=10)
            assert len(after) <= len(before)
            assert set(after.items) <= set(before.items)

    def test_order_invariant_under_candidate_shuffle(self):
        rng = np.random.default_rng(5)
        scores = rng.normal(size=9)
        scores[3] = scores[7]  # plant a tie
        m = scored_model(scores, t_u=-10.0)
        cand = list(range(9))
        base = recommend_dynamic_k(m, 0, cand, cap=9).items
        for _ in range(10):
            rng.shuffle(cand)
            assert recommend_dynamic_k(m, 0, cand, cap=9).items == base


class TestTopKPruning:
    def test_matches_full_sort_with_ties(self):
        from dynak.recommend import _ranked_candidates
        rng = np.random.default_rng(13)
        for trial in range(40):
            n = int(rng.integers(5, 60))
            # quantized scores plant plenty of exact ties
            scores = np.round(rng.normal(size=n), 1)
            m = scored_model(scores, t_u=float(rng.normal()))
            cand = list(range(n))
            full_ids, full_sc = _ranked_candidates(m, 0, cand, None, top=None)
            for top in (1, 3, n // 2, n, n + 5):
                ids, sc = _ranked_candidates(m, 0, cand, None, top=top)
                k = min(top, n)
                assert list(ids[:k]) == list(full_ids[:k])
                assert list(sc[:k]) == list(full_sc[:k])

    def test_dynamic_and_fixed_agree_with_unpruned(self):
        rng = np.random.default_rng(21)
        for trial in range(20):
            n = int(rng.integers(8, 40))
            scores = np.round(rng.normal(size=n), 1)
            t_u = float(rng.normal())
            m = scored_model(scores, t_u=t_u)
            cand = list(range(n))
            cap = int(rng.integers(1, 10))
            dyn = recommend_dynamic_k(m, 0, cand, cap=cap)
            big = recommend_top_n(m, 0, cand, n=n)
            expected = [i for i, s in big.entries if s > t_u][:cap]
            assert dyn.items == expected


class TestDumpFormat:
    def test_rows_and_empty_marker(self):
        m = scored_model([2.0, 1.5], t_u=0.0)
        full = recommend_dynamic_k(m, 0, [0, 1], cap=5)
        empty = recommend_dynamic_k(scored_model([0.1], t_u=1.0), 0, [0], cap=5)
        empty.user = 9
        text = format_recommendations([full, empty])
        lines = text.strip().split("\n")
        assert lines[0] == "0\t0\t1\t2"
        assert lines[1] == "0\t1\t2\t1.5"
        assert lines[2] == "9\t-\t0\t-"
