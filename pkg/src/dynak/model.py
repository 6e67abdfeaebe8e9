"""Factor models and their scoring functions.

Two scorers share the parameter layout (user factors P, item factors Q,
per-user boundary vector t_u, global anchor t):

  MF   score(u, i) = <p_u, q_i>
  HRM  score(u, basket, i) = <q_i, hybrid(u, basket)> where the hybrid
       vector is a two-level average: mean the basket's item vectors,
       then mean that with the user vector.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, UnknownIdError

MODEL_KINDS = ("MF", "HRM")


@dataclass
class FactorModel:
    kind: str
    f: int
    P: np.ndarray    # (n_users, f) user factors
    Q: np.ndarray    # (n_items, f) item factors
    t_u: np.ndarray  # (n_users,) personal boundaries
    t: float         # global anchor for the boundaries

    @property
    def n_users(self) -> int:
        return self.P.shape[0]

    @property
    def n_items(self) -> int:
        return self.Q.shape[0]

    def check_finite(self) -> bool:
        return bool(
            np.isfinite(self.P).all()
            and np.isfinite(self.Q).all()
            and np.isfinite(self.t_u).all()
            and np.isfinite(self.t)
        )

    def _check_user(self, u: int):
        if not 0 <= u < self.n_users:
            raise UnknownIdError(f"user {u} outside vocabulary of {self.n_users}")

    def _check_item(self, i: int):
        if not 0 <= i < self.n_items:
            raise UnknownIdError(f"item {i} outside vocabulary of {self.n_items}")


def init_model(kind: str, f: int, n_users: int, n_items: int, t: float, seed: int) -> FactorModel:
    """Fresh model: factor entries ~ N(0, 0.01^2), every boundary at t."""
    if kind not in MODEL_KINDS:
        raise ContractError(f"kind must be one of {MODEL_KINDS}, got {kind!r}")
    if f < 1:
        raise ContractError(f"latent dimension must be >= 1, got {f}")
    if n_users < 1 or n_items < 1:
        raise ContractError(f"need at least one user and item, got {n_users}x{n_items}")
    rng = np.random.default_rng(seed)
    P = rng.normal(0.0, 0.01, size=(n_users, f))
    Q = rng.normal(0.0, 0.01, size=(n_items, f))
    t_u = np.full(n_users, float(t))
    return FactorModel(kind=kind, f=f, P=P, Q=Q, t_u=t_u, t=float(t))


def score_mf(model: FactorModel, u: int, i: int) -> float:
    """Inner-product score <p_u, q_i>."""
    if model.kind != "MF":
        raise ContractError(f"score_mf needs an MF model, got kind={model.kind}")
    model._check_user(u)
    model._check_item(i)
    return float(model.P[u] @ model.Q[i])


def basket_representation(model: FactorModel, u: int, basket) -> np.ndarray:
    """Hybrid vector (p_u + mean of the basket's item vectors) / 2."""
    if model.kind != "HRM":
        raise ContractError(f"basket_representation needs an HRM model, got kind={model.kind}")
    model._check_user(u)
    items = np.asarray(sorted(basket), dtype=np.int64)
    if items.size == 0:
        raise ContractError("basket must be non-empty")
    for i in items:
        model._check_item(int(i))
    pooled = model.Q[items].mean(axis=0)
    return (model.P[u] + pooled) / 2.0


def score_hrm(model: FactorModel, u: int, prev_basket, i: int) -> float:
    """Score of item i against the hybrid vector of the previous basket."""
    model._check_item(i)
    return float(model.Q[i] @ basket_representation(model, u, prev_basket))
