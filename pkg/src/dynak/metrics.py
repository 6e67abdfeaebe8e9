"""Evaluation: precision/recall/F1, binary-relevance NDCG@k, cover ratio.

F1 and NDCG are macro-averaged over covered users only (users whose list
is non-empty); the cover ratio over all test users reports how many got
anything at all.  Fixed-N runs mark every user covered.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .data import SplitDataset
from .errors import CompatibilityError, ContractError
from .model import FactorModel
from .recommend import recommend_dynamic_k, recommend_top_n
from .trainer import user_baskets

MODE_DYNAMIC = "dynamic"
MODE_FIXED = "fixed"


@dataclass
class UserEval:
    user: int
    n_recommended: int
    precision: float
    recall: float
    f1: float
    ndcg: float
    covered: bool


@dataclass
class EvalReport:
    f1: float
    precision: float
    recall: float
    ndcg: float
    cover_ratio: float
    users_total: int
    users_covered: int
    users_skipped: int = 0
    per_user: list = field(default_factory=list)

    def to_text(self) -> str:
        return (
            f"f1={self.f1:.17g} precision={self.precision:.17g} "
            f"recall={self.recall:.17g} ndcg={self.ndcg:.17g} "
            f"cover_ratio={self.cover_ratio:.17g} users={self.users_total} "
            f"covered={self.users_covered} skipped={self.users_skipped}"
        )

    def per_user_tsv(self) -> str:
        lines = ["user\tn_rec\tprecision\trecall\tf1\tndcg\tcovered"]
        for r in self.per_user:
            lines.append(
                f"{r.user}\t{r.n_recommended}\t{r.precision:.17g}\t{r.recall:.17g}"
                f"\t{r.f1:.17g}\t{r.ndcg:.17g}\t{int(r.covered)}"
            )
        return "\n".join(lines) + "\n"


def precision_recall_f1(recommended, test_items) -> tuple[float, float, float]:
    """Hit fractions of the list and of the held-out set, plus their
    harmonic mean; an empty list scores 0 everywhere."""
    test_items = set(test_items)
    if not test_items:
        raise ContractError("user has an empty test set")
    rec = list(recommended)
    if not rec:
        return 0.0, 0.0, 0.0
    hits = len(set(rec) & test_items)
    precision = hits / len(rec)
    recall = hits / len(test_items)
    f1 = 0.0 if hits == 0 else 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def ndcg_at_k(recommended, test_items, k: int) -> float:
    """Binary-relevance DCG over the top min(k, len) positions, normalized
    by the ideal arrangement of min(k, |test|) hits."""
    test_items = set(test_items)
    if not test_items:
        raise ContractError("user has an empty test set")
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    rec = list(recommended)
    dcg = 0.0
    for j, item in enumerate(rec[:k], start=1):
        if item in test_items:
            dcg += 1.0 / math.log2(j + 1)
    ideal = sum(1.0 / math.log2(j + 1) for j in range(1, min(k, len(test_items)) + 1))
    return dcg / ideal


def cover_ratio(rec_lists) -> float:
    """Fraction of users whose recommendation list is non-empty."""
    rec_lists = list(rec_lists)
    if not rec_lists:
        raise ContractError("cover ratio needs at least one user")
    covered = sum(1 for r in rec_lists if len(r) > 0)
    return covered / len(rec_lists)


def check_compatible(model: FactorModel, split: SplitDataset):
    """Model dimensions must cover the split's dense vocabularies."""
    n_users, n_items = len(split.train.users), len(split.train.items)
    if model.n_users != n_users or model.n_items != n_items:
        raise CompatibilityError(
            f"model is {model.n_users} users x {model.n_items} items but the "
            f"split has {n_users} x {n_items}"
        )


def user_recommendations(model: FactorModel, split: SplitDataset, mode: str,
                         n_or_cap: int, users=None):
    """Yield one RecommendationList per test user (sorted user order).

    MF candidates exclude the user's train positives (re-recommending a
    consumed item is not the task there); basket models keep them, since
    repurchases are legitimate next-basket predictions.  Users without a
    usable context basket yield None.
    """
    if mode not in (MODE_DYNAMIC, MODE_FIXED):
        raise ContractError(f"mode must be dynamic or fixed, got {mode!r}")
    check_compatible(model, split)
    if users is None:
        users = sorted(split.test)

    all_items = np.arange(model.n_items, dtype=np.int64)
    train_positives = split.train.user_items() if model.kind == "MF" else None
    contexts = user_baskets(split.train) if model.kind == "HRM" else None

    for u in users:
        if model.kind == "MF":
            pos = train_positives.get(u, ())
            candidates = all_items[~np.isin(all_items, sorted(pos))] if pos else all_items
            context = None
        else:
            baskets = contexts.get(u)
            if not baskets:
                yield u, None
                continue
            candidates = all_items
            context = baskets[-1]
        if mode == MODE_DYNAMIC:
            yield u, recommend_dynamic_k(model, u, candidates, context, cap=n_or_cap)
        else:
            yield u, recommend_top_n(model, u, candidates, context, n=n_or_cap)


def evaluate_run(model: FactorModel, split: SplitDataset, mode: str, k: int,
                 n_or_cap: int) -> EvalReport:
    """Recommend for every test user and aggregate the metrics.

    Dynamic mode thresholds at each personal boundary with `n_or_cap` as
    the length cap; fixed mode always returns `n_or_cap` items and marks
    every user covered.
    """
    if not split.test:
        raise ContractError("split has no test users")

    per_user = []
    skipped = 0
    for u, rec in user_recommendations(model, split, mode, n_or_cap):
        if rec is None:
            skipped += 1
            continue
        test_items = split.test[u]
        covered = len(rec) > 0 if mode == MODE_DYNAMIC else True
        p, r, f1 = precision_recall_f1(rec.items, test_items)
        nd = ndcg_at_k(rec.items, test_items, k)
        per_user.append(UserEval(user=int(u), n_recommended=len(rec), precision=p,
                                 recall=r, f1=f1, ndcg=nd, covered=covered))

    users_total = len(split.test)
    covered_evals = [r for r in per_user if r.covered]
    n_cov = len(covered_evals)

    def _macro(attr):
        return sum(getattr(r, attr) for r in covered_evals) / n_cov if n_cov else 0.0

    return EvalReport(
        f1=_macro("f1"),
        precision=_macro("precision"),
        recall=_macro("recall"),
        ndcg=_macro("ndcg"),
        cover_ratio=n_cov / users_total,
        users_total=users_total,
        users_covered=n_cov,
        users_skipped=skipped,
        per_user=per_user,
    )
