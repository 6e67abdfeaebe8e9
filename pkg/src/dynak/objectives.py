"""Scalar loss functions for the joint ranking/classification objective.

Everything here is pure and stateless.  The SGD kernels inline the same
formulas; these definitions are the readable reference and the unit under
test for the gradient checks.
"""

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ContractError


@dataclass(frozen=True)
class LabeledExample:
    """A (user, item) pair labeled +1 (interacted) or -1 (sampled negative).

    `context` carries the previous-basket item ids for next-basket models.
    """

    user: int
    item: int
    label: int
    context: Optional[tuple] = None

    def __post_init__(self):
        if self.label != 1 and self.label != -1:
            raise ContractError(f"label must be +1 or -1, got {self.label!r}")


@dataclass(frozen=True)
class RankingTriple:
    """User with one interacted item and one sampled non-interacted item."""

    user: int
    pos: int
    neg: int
    context: Optional[tuple] = None


def sigmoid(x: float) -> float:
    """Logistic sigmoid, overflow-safe on both tails."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def softplus(x: float) -> float:
    """ln(1 + e^x) via the identity max(x, 0) + ln(1 + e^-|x|)."""
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def margin(y: int, score: float, t_u: float) -> float:
    """Signed confidence y * (score - t_u) of a labeled example.

    Positive iff the example sits on the correct side of the user's
    personal boundary t_u.
    """
    if y != 1 and y != -1:
        raise ContractError(f"label must be +1 or -1, got {y!r}")
    return y * (score - t_u)


def logistic_loss(m: float) -> float:
    """Classification loss ln(1 + e^-m) of a margin value."""
    return softplus(-m)


def logistic_loss_grad(m: float) -> float:
    """d/dm of logistic_loss: -sigmoid(-m)."""
    return -sigmoid(-m)


def hinge_loss(m: float) -> float:
    """max(0, 1 - m).  Alternative to the logistic loss; not wired into
    the trainer, which always uses the logistic form."""
    return max(0.0, 1.0 - m)


def boundary_penalty(t_u: float, t: float, lambda_t: float) -> float:
    """L2 pull lambda_t * (t_u - t)^2 anchoring a personal boundary."""
    if lambda_t < 0.0:
        raise ContractError(f"lambda_t must be >= 0, got {lambda_t}")
    d = t_u - t
    return lambda_t * d * d


def boundary_penalty_grad(t_u: float, t: float, lambda_t: float) -> float:
    """d/dt_u of boundary_penalty: 2 * lambda_t * (t_u - t)."""
    if lambda_t < 0.0:
        raise ContractError(f"lambda_t must be >= 0, got {lambda_t}")
    return 2.0 * lambda_t * (t_u - t)


def bpr_pair_loss(s_pos: float, s_neg: float) -> float:
    """Pairwise ranking loss -ln sigmoid(s_pos - s_neg).

    Strictly decreasing in the score gap, so gradient descent orders the
    interacted item above the sampled non-interacted one.
    """
    return softplus(-(s_pos - s_neg))


def hybrid_weighting(alpha: float) -> tuple[float, float]:
    """Mixture weights (classification, ranking) = (alpha, 1 - alpha)."""
    if not 0.0 <= alpha <= 1.0:
        raise ContractError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha, 1.0 - alpha
