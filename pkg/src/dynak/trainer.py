"""Joint training loop: seeded alternation of classification and ranking steps.

The log is packed into flat int arrays once, then a backend kernel runs
the whole SGD schedule.  Packing is deterministic, so a (config, data,
seed) triple fixes the final model bit for bit on a given backend.
"""

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .backend import get_backend
from .data import InteractionLog
from .errors import ContractError, DataError, TrainingDivergedError
from .model import FactorModel, init_model
from .objectives import LabeledExample, RankingTriple

MAX_NEGATIVE_TRIES = 100


@dataclass
class TrainConfig:
    kind: str = "MF"
    f: int = 50
    alpha: float = 0.5
    lambda_t: float = 1.0
    t: float = 1.0
    eta: float = 0.05
    lambda_theta: float = 0.0025
    epochs: int = 30
    negative_ratio: float = 1.0
    seed: int = 42

    def validate(self):
        if self.kind not in ("MF", "HRM"):
            raise ContractError(f"kind must be MF or HRM, got {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ContractError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.eta <= 0.0:
            raise ContractError(f"eta must be > 0, got {self.eta}")
        if self.lambda_t < 0.0 or self.lambda_theta < 0.0:
            raise ContractError("regularization strengths must be >= 0")
        if self.f < 1:
            raise ContractError(f"f must be >= 1, got {self.f}")
        if self.epochs < 1:
            raise ContractError(f"epochs must be >= 1, got {self.epochs}")
        if self.negative_ratio < 0.0:
            raise ContractError(f"negative_ratio must be >= 0, got {self.negative_ratio}")
        if not 0 <= self.seed < 2**32:
            raise ContractError(f"seed must fit in 32 bits, got {self.seed}")

    @property
    def positive_prob(self) -> float:
        """Probability that a classification draw is a positive example."""
        return 1.0 / (1.0 + self.negative_ratio)


@dataclass
class TrainReport:
    iterations: int
    cls_steps: int
    rank_steps: int
    skipped_negative_draws: int
    wall_time_s: float
    ckpt_iter: np.ndarray
    ckpt_cf: np.ndarray
    ckpt_rk: np.ndarray
    backend: str = ""


@dataclass
class PackedInteractions:
    """MF training view: draw pool + per-user sorted positive sets (CSR)."""

    n_users: int
    n_items: int
    inter_user: np.ndarray
    inter_item: np.ndarray
    pos_ptr: np.ndarray
    pos_items: np.ndarray


@dataclass
class PackedBaskets:
    """HRM training view over per-user chronological baskets.

    Baskets of all users are laid out as consecutive global rows
    (bk_ptr/bk_items CSR, items sorted within a basket); records
    enumerate the (user, target basket, item) positives whose basket has
    a predecessor to serve as context.
    """

    n_users: int
    n_items: int
    rec_user: np.ndarray
    rec_gbasket: np.ndarray
    rec_item: np.ndarray
    bk_ptr: np.ndarray
    bk_items: np.ndarray
    user_basket_ptr: np.ndarray


def _require_dense(log: InteractionLog) -> tuple[int, int]:
    n_users, n_items = len(log.users), len(log.items)
    if log.users != frozenset(range(n_users)) or log.items != frozenset(range(n_items)):
        raise DataError("training requires a reindexed log with dense 0..n-1 ids")
    return n_users, n_items


def pack_interactions(log: InteractionLog) -> PackedInteractions:
    n_users, n_items = _require_dense(log)
    if not log.interactions:
        raise DataError("cannot train on an empty log")
    inter_user = np.fromiter((r.user for r in log.interactions), dtype=np.int64)
    inter_item = np.fromiter((r.item for r in log.interactions), dtype=np.int64)

    per_user = [set() for _ in range(n_users)]
    for r in log.interactions:
        per_user[r.user].add(r.item)
    pos_ptr = np.zeros(n_users + 1, dtype=np.int64)
    for u in range(n_users):
        pos_ptr[u + 1] = pos_ptr[u] + len(per_user[u])
    pos_items = np.empty(pos_ptr[-1], dtype=np.int64)
    for u in range(n_users):
        pos_items[pos_ptr[u]:pos_ptr[u + 1]] = sorted(per_user[u])
    return PackedInteractions(n_users, n_items, inter_user, inter_item, pos_ptr, pos_items)


def user_baskets(log: InteractionLog) -> dict:
    """Chronological list of item-id sets per user.

    Explicit basket indices order the baskets when present; otherwise
    each distinct timestamp forms one basket, so the last derived basket
    coincides with what a last-item temporal split holds out.
    """
    keyed: dict = {}
    for r in log.interactions:
        key = r.basket if r.basket is not None else r.time
        keyed.setdefault(r.user, {}).setdefault(key, set()).add(r.item)
    return {
        u: [frozenset(baskets[k]) for k in sorted(baskets)]
        for u, baskets in keyed.items()
    }


def pack_baskets(log: InteractionLog) -> PackedBaskets:
    n_users, n_items = _require_dense(log)
    if not log.interactions:
        raise DataError("cannot train on an empty log")
    baskets = user_baskets(log)

    user_basket_ptr = np.zeros(n_users + 1, dtype=np.int64)
    for u in range(n_users):
        user_basket_ptr[u + 1] = user_basket_ptr[u] + len(baskets.get(u, ()))
    n_baskets = int(user_basket_ptr[-1])

    bk_ptr = np.zeros(n_baskets + 1, dtype=np.int64)
    flat_items = []
    rec_user, rec_gbasket, rec_item = [], [], []
    row = 0
    for u in range(n_users):
        for pos, basket in enumerate(baskets.get(u, ())):
            items = sorted(basket)
            bk_ptr[row + 1] = bk_ptr[row] + len(items)
            flat_items.extend(items)
            if pos >= 1:
                for i in items:
                    rec_user.append(u)
                    rec_gbasket.append(row)
                    rec_item.append(i)
            row += 1

    return PackedBaskets(
        n_users=n_users,
        n_items=n_items,
        rec_user=np.asarray(rec_user, dtype=np.int64),
        rec_gbasket=np.asarray(rec_gbasket, dtype=np.int64),
        rec_item=np.asarray(rec_item, dtype=np.int64),
        bk_ptr=bk_ptr,
        bk_items=np.asarray(flat_items, dtype=np.int64),
        user_basket_ptr=user_basket_ptr,
    )


def _draw_negative(rand, n_items: int, members: np.ndarray, lo: int, hi: int) -> int:
    for _ in range(MAX_NEGATIVE_TRIES):
        cand = int(rand() * n_items)
        pos = int(np.searchsorted(members[lo:hi], cand))
        if not (pos < hi - lo and members[lo + pos] == cand):
            return cand
    return -1


def _record_context(packed: PackedBaskets, idx: int) -> tuple:
    g = int(packed.rec_gbasket[idx])
    c0, c1 = int(packed.bk_ptr[g - 1]), int(packed.bk_ptr[g])
    return tuple(int(v) for v in packed.bk_items[c0:c1])


def sample_ranking_triple(packed, rng) -> RankingTriple:
    """One (user, interacted item, sampled non-interacted item) draw.

    For basket data the drawn record fixes the target basket; the triple
    carries the previous basket as context and the negative is rejected
    against the target basket.  Raises DataError when 100 rejection
    tries fail.
    """
    rand = rng.random_sample
    if isinstance(packed, PackedBaskets):
        idx = int(rand() * packed.rec_user.shape[0])
        u, i = int(packed.rec_user[idx]), int(packed.rec_item[idx])
        g = int(packed.rec_gbasket[idx])
        j = _draw_negative(rand, packed.n_items, packed.bk_items,
                           int(packed.bk_ptr[g]), int(packed.bk_ptr[g + 1]))
        context = _record_context(packed, idx)
    else:
        idx = int(rand() * packed.inter_user.shape[0])
        u, i = int(packed.inter_user[idx]), int(packed.inter_item[idx])
        j = _draw_negative(rand, packed.n_items, packed.pos_items,
                           int(packed.pos_ptr[u]), int(packed.pos_ptr[u + 1]))
        context = None
    if j < 0:
        raise DataError(f"no negative item found for user {u} after {MAX_NEGATIVE_TRIES} tries")
    return RankingTriple(user=u, pos=i, neg=j, context=context)


def sample_classification_example(packed, rng, negative_ratio: float) -> LabeledExample:
    """One labeled draw: positive with probability 1/(1+negative_ratio).

    Negatives reuse a uniformly drawn record for the user (and target
    basket, for basket data), then sample an item outside the positive
    set.
    """
    if negative_ratio < 0.0:
        raise ContractError(f"negative_ratio must be >= 0, got {negative_ratio}")
    rand = rng.random_sample
    pos_prob = 1.0 / (1.0 + negative_ratio)
    c = rand()
    if isinstance(packed, PackedBaskets):
        idx = int(rand() * packed.rec_user.shape[0])
        u = int(packed.rec_user[idx])
        g = int(packed.rec_gbasket[idx])
        context = _record_context(packed, idx)
        if c < pos_prob:
            return LabeledExample(user=u, item=int(packed.rec_item[idx]), label=1, context=context)
        j = _draw_negative(rand, packed.n_items, packed.bk_items,
                           int(packed.bk_ptr[g]), int(packed.bk_ptr[g + 1]))
    else:
        idx = int(rand() * packed.inter_user.shape[0])
        u = int(packed.inter_user[idx])
        context = None
        if c < pos_prob:
            return LabeledExample(user=u, item=int(packed.inter_item[idx]), label=1)
        j = _draw_negative(rand, packed.n_items, packed.pos_items,
                           int(packed.pos_ptr[u]), int(packed.pos_ptr[u + 1]))
    if j < 0:
        raise DataError(f"no negative item found for user {u} after {MAX_NEGATIVE_TRIES} tries")
    return LabeledExample(user=u, item=j, label=-1, context=context)


def train_epoch_schedule(config: TrainConfig, n_interactions: int) -> int:
    """Iteration budget: epochs times the number of train interactions."""
    config.validate()
    if n_interactions < 1:
        raise ContractError("schedule needs a non-empty train log")
    return config.epochs * n_interactions


def joint_train(
    config: TrainConfig,
    train_log: InteractionLog,
    iterations: Optional[int] = None,
    checkpoint_every: Optional[int] = None,
) -> tuple[FactorModel, TrainReport]:
    """Run the alternating SGD schedule and return (model, report).

    `iterations` overrides the epoch schedule (used by sweeps and tests);
    checkpoints default to ~100 evenly spaced loss readings.
    """
    config.validate()
    if not train_log.interactions:
        raise DataError("cannot train on an empty log")

    n_steps = iterations if iterations is not None else train_epoch_schedule(config, len(train_log))
    if n_steps < 1:
        raise ContractError(f"iteration count must be >= 1, got {n_steps}")
    ckpt_every = checkpoint_every if checkpoint_every is not None else max(1, n_steps // 100)
    if ckpt_every < 1:
        raise ContractError(f"checkpoint interval must be >= 1, got {ckpt_every}")
    n_ckpt = math.ceil(n_steps / ckpt_every)

    if config.kind == "MF":
        packed = pack_interactions(train_log)
    else:
        packed = pack_baskets(train_log)
        if packed.rec_user.shape[0] == 0:
            raise DataError("no user has more than one basket; nothing to train on")

    model = init_model(config.kind, config.f, packed.n_users, packed.n_items,
                       config.t, config.seed)

    ckpt_iter = np.zeros(n_ckpt, dtype=np.int64)
    ckpt_cf = np.full(n_ckpt, np.nan)
    ckpt_rk = np.full(n_ckpt, np.nan)
    counters = np.zeros(3, dtype=np.int64)

    backend = get_backend()
    start = time.perf_counter()
    if config.kind == "MF":
        status = backend.train_mf(
            model.P, model.Q, model.t_u,
            packed.inter_user, packed.inter_item, packed.pos_ptr, packed.pos_items,
            n_steps, config.alpha, config.eta, config.lambda_t, config.t,
            config.lambda_theta, config.positive_prob,
            config.seed, ckpt_every, ckpt_iter, ckpt_cf, ckpt_rk, counters,
        )
    else:
        status = backend.train_hrm(
            model.P, model.Q, model.t_u,
            packed.rec_user, packed.rec_gbasket, packed.rec_item,
            packed.bk_ptr, packed.bk_items,
            n_steps, config.alpha, config.eta, config.lambda_t, config.t,
            config.lambda_theta, config.positive_prob,
            config.seed, ckpt_every, ckpt_iter, ckpt_cf, ckpt_rk, counters,
        )
    wall = time.perf_counter() - start

    if status >= 0:
        raise TrainingDivergedError(int(status))
    if not model.check_finite():
        raise TrainingDivergedError(n_steps)

    report = TrainReport(
        iterations=n_steps,
        cls_steps=int(counters[0]),
        rank_steps=int(counters[1]),
        skipped_negative_draws=int(counters[2]),
        wall_time_s=wall,
        ckpt_iter=ckpt_iter,
        ckpt_cf=ckpt_cf,
        ckpt_rk=ckpt_rk,
        backend=backend.__name__.rsplit("_", 1)[-1],
    )
    return model, report
