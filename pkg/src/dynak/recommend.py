"""Recommendation lists: boundary-thresholded dynamic-K and fixed top-N.

Both modes rank candidates by score descending with ties broken by
ascending item id, so output order never depends on candidate input
order.  Dynamic-K keeps the prefix scoring strictly above the user's
personal boundary; an empty list is a legal outcome.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .model import FactorModel, basket_representation

DEFAULT_CAP = 20

DYNAMIC_K = "dynamic-K"
FIXED_N = "fixed-N"


@dataclass
class RecommendationList:
    user: int
    entries: list  # (item, score), scores non-increasing
    mode: str

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def items(self) -> list:
        return [item for item, _ in self.entries]


def _ranked_candidates(model: FactorModel, u: int, candidates, context, top=None):
    model._check_user(u)
    if not isinstance(candidates, np.ndarray):
        candidates = list(candidates)
    cand = np.unique(np.asarray(candidates, dtype=np.int64))
    if cand.size and (cand[0] < 0 or cand[-1] >= model.n_items):
        raise ContractError(f"candidate ids must lie in [0, {model.n_items})")
    if model.kind == "HRM":
        if context is None:
            raise ContractError("HRM recommendation needs a context basket")
        profile = basket_representation(model, u, context)
    else:
        profile = model.P[u]
    if cand.size * 4 >= model.n_items:
        # scoring every row as one matvec beats gathering most of Q
        scores = (model.Q @ profile)[cand]
    else:
        scores = model.Q[cand] @ profile
    if top is not None and 0 < top < cand.size:
        # keep everything tied with the top-th score so the id tie rule
        # sees the same boundary group a full sort would
        kth = np.partition(scores, cand.size - top)[cand.size - top]
        mask = scores >= kth
        cand, scores = cand[mask], scores[mask]
    order = np.lexsort((cand, -scores))
    return cand[order], scores[order]


def recommend_dynamic_k(model: FactorModel, u: int, candidates, context=None,
                        cap: int = DEFAULT_CAP) -> RecommendationList:
    """Ranked candidates scoring strictly above t_u, truncated to cap."""
    if cap < 0:
        raise ContractError(f"cap must be >= 0, got {cap}")
    ids, scores = _ranked_candidates(model, u, candidates, context, top=cap)
    keep = int(np.sum(scores > model.t_u[u]))
    keep = min(keep, cap)
    entries = [(int(i), float(s)) for i, s in zip(ids[:keep], scores[:keep])]
    return RecommendationList(user=u, entries=entries, mode=DYNAMIC_K)


def recommend_top_n(model: FactorModel, u: int, candidates, context=None,
                    n: int = 10) -> RecommendationList:
    """Top n by score, boundary ignored."""
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    ids, scores = _ranked_candidates(model, u, candidates, context, top=n)
    entries = [(int(i), float(s)) for i, s in zip(ids[:n], scores[:n])]
    return RecommendationList(user=u, entries=entries, mode=FIXED_N)


def format_recommendations(lists) -> str:
    """TSV dump: user, item, 1-based rank, score; `-` rows for empty lists."""
    out = []
    for rec in lists:
        if not rec.entries:
            out.append(f"{rec.user}\t-\t0\t-")
            continue
        for rank, (item, score) in enumerate(rec.entries, start=1):
            out.append(f"{rec.user}\t{item}\t{rank}\t{score:.17g}")
    return "\n".join(out) + "\n"
