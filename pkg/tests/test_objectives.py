import math

import pytest
from hypothesis import given, strategies as st

from dynak.errors import ContractError
from dynak.objectives import (
    LabeledExample,
    boundary_penalty,
    boundary_penalty_grad,
    bpr_pair_loss,
    hinge_loss,
    hybrid_weighting,
    logistic_loss,
    logistic_loss_grad,
    margin,
    sigmoid,
)

from oracles import rel_err


class TestMargin:
    def test_positive_label(self):
        assert margin(1, 2.0, 1.5) == pytest.approx(0.5)

    def test_negative_label_flips_sign(self):
        assert margin(-1, 2.0, 1.5) == pytest.approx(-0.5)

    def test_score_on_boundary(self):
        assert margin(1, 1.5, 1.5) == 0.0

    def test_bad_label_rejected(self):
        with pytest.raises(ContractError):
            margin(0, 1.0, 0.0)
        with pytest.raises(ContractError):
            margin(2, 1.0, 0.0)

    def test_misclassification_characterization(self):
        # margin < 0 iff (score above boundary, label -1) or (below, +1)
        for y in (1, -1):
            for s, t in [(2.0, 1.0), (1.0, 2.0), (1.5, 1.5)]:
                m = margin(y, s, t)
                misclassified = (s > t and y == -1) or (s < t and y == 1)
                assert (m < 0) == misclassified


class TestLogisticLoss:
    def test_at_zero(self):
        assert logistic_loss(0.0) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_at_minus_one(self):
        assert logistic_loss(-1.0) == pytest.approx(math.log(1.0 + math.e), abs=1e-12)

    def test_large_margin_does_not_overflow(self):
        v = logistic_loss(1000.0)
        assert 0.0 <= v < 1e-300 or v == 0.0
        assert math.isfinite(logistic_loss(-1000.0))

    def test_gradient_matches_finite_differences(self):
        h = 1e-6
        for m in (-5.0, -1.0, 0.0, 1.0, 5.0):
            fd = (logistic_loss(m + h) - logistic_loss(m - h)) / (2 * h)
            assert rel_err(fd, logistic_loss_grad(m)) <= 1e-5

    @given(st.floats(min_value=-50, max_value=50))
    def test_convexity_symmetric_sum(self, m):
        assert logistic_loss(m) + logistic_loss(-m) >= 2 * math.log(2.0) - 1e-12

    def test_equality_only_at_zero(self):
        assert logistic_loss(0.0) + logistic_loss(-0.0) == pytest.approx(2 * math.log(2.0))
        assert logistic_loss(0.3) + logistic_loss(-0.3) > 2 * math.log(2.0) + 1e-6

    @given(st.floats(min_value=-30, max_value=30), st.floats(min_value=1e-6, max_value=10))
    def test_strictly_decreasing(self, m, step):
        assert logistic_loss(m + step) < logistic_loss(m)


class TestHingeLoss:
    def test_knee(self):
        assert hinge_loss(1.0) == 0.0

    def test_boundary(self):
        assert hinge_loss(0.0) == 1.0

    def test_negative_margin(self):
        assert hinge_loss(-0.5) == pytest.approx(1.5)


class TestBoundaryPenalty:
    def test_anchor_case(self):
        assert boundary_penalty(2.0, 2.0, 1.0) == 0.0

    def test_unit_distance(self):
        assert boundary_penalty(3.0, 2.0, 1.0) == pytest.approx(1.0)

    def test_linear_in_strength(self):
        assert boundary_penalty(3.0, 2.0, 0.5) == pytest.approx(0.5)

    def test_negative_strength_rejected(self):
        with pytest.raises(ContractError):
            boundary_penalty(1.0, 0.0, -0.1)

    def test_gradient_matches_finite_differences(self):
        h = 1e-6
        for tu, t, lam in [(3.0, 2.0, 1.0), (0.5, 2.0, 0.3), (-1.0, 1.0, 10.0)]:
            fd = (boundary_penalty(tu + h, t, lam) - boundary_penalty(tu - h, t, lam)) / (2 * h)
            assert rel_err(fd, boundary_penalty_grad(tu, t, lam)) <= 1e-6


class TestBprPairLoss:
    def test_symmetric_pair(self):
        assert bpr_pair_loss(1.0, 1.0) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_badly_ordered_pair(self):
        assert bpr_pair_loss(0.0, 2.0) == pytest.approx(math.log(1.0 + math.e**2), abs=1e-12)

    def test_perfectly_ordered_pair_vanishes(self):
        assert bpr_pair_loss(1e4, 0.0) == pytest.approx(0.0, abs=1e-300)

    @given(
        st.floats(min_value=-100, max_value=100),
        st.floats(min_value=-100, max_value=100),
        st.floats(min_value=-100, max_value=100),
    )
    def test_translation_invariance(self, sp, sn, c):
        assert abs(bpr_pair_loss(sp + c, sn + c) - bpr_pair_loss(sp, sn)) <= 1e-12

    def test_decreasing_in_gap(self):
        gaps = [-3.0, -1.0, 0.0, 1.0, 3.0]
        losses = [bpr_pair_loss(g, 0.0) for g in gaps]
        assert all(a > b for a, b in zip(losses, losses[1:]))


class TestHybridWeighting:
    def test_pure_ranking_endpoint(self):
        assert hybrid_weighting(0.0) == (0.0, 1.0)

    def test_pure_classification_endpoint(self):
        assert hybrid_weighting(1.0) == (1.0, 0.0)

    def test_midpoint(self):
        assert hybrid_weighting(0.5) == (0.5, 0.5)

    def test_out_of_range_rejected(self):
        for bad in (-0.1, 1.1):
            with pytest.raises(ContractError):
                hybrid_weighting(bad)


class TestSigmoid:
    def test_tails_are_safe(self):
        assert sigmoid(1000.0) == pytest.approx(1.0)
        assert sigmoid(-1000.0) == pytest.approx(0.0, abs=1e-300)

    def test_midpoint(self):
        assert sigmoid(0.0) == 0.5


def test_labeled_example_validates_label():
    LabeledExample(user=0, item=1, label=1)
    LabeledExample(user=0, item=1, label=-1)
    with pytest.raises(ContractError):
        LabeledExample(user=0, item=1, label=0)
