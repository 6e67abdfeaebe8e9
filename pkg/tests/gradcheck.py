"""Single-step gradient extraction for the training kernels.

Runs a kernel for exactly one step with eta=1 and all regularization off,
so (old - new) equals the gradient the kernel applied.  The sampled
example is recovered by replaying the draw protocol on a mirrored
RandomState, and the per-example loss is re-transcribed here so finite
differences have an independent target.
"""

import numpy as np

from dynak.objectives import softplus
from dynak.trainer import (
    PackedBaskets,
    PackedInteractions,
    sample_classification_example,
    sample_ranking_triple,
)


def mf_world() -> PackedInteractions:
    """One user, two items, single positive (0, 0): every draw is forced."""
    return PackedInteractions(
        n_users=1,
        n_items=2,
        inter_user=np.array([0], dtype=np.int64),
        inter_item=np.array([0], dtype=np.int64),
        pos_ptr=np.array([0, 1], dtype=np.int64),
        pos_items=np.array([0], dtype=np.int64),
    )


def hrm_world() -> PackedBaskets:
    """One user, baskets {0,1} then {2}, four items.

    The single record targets item 2 with context {0, 1}; negatives land
    in {0, 1, 3}, so the overlap case (negative inside the context) gets
    exercised as seeds vary.
    """
    return PackedBaskets(
        n_users=1,
        n_items=4,
        rec_user=np.array([0], dtype=np.int64),
        rec_gbasket=np.array([1], dtype=np.int64),
        rec_item=np.array([2], dtype=np.int64),
        bk_ptr=np.array([0, 2, 3], dtype=np.int64),
        bk_items=np.array([0, 1, 2], dtype=np.int64),
        user_basket_ptr=np.array([0, 2], dtype=np.int64),
    )


def _run_one_step(kernel, packed, P, Q, tu, alpha, pos_prob, seed):
    ckpt_iter = np.zeros(1, dtype=np.int64)
    ckpt_cf = np.zeros(1)
    ckpt_rk = np.zeros(1)
    counters = np.zeros(3, dtype=np.int64)
    if isinstance(packed, PackedBaskets):
        status = kernel(
            P, Q, tu, packed.rec_user, packed.rec_gbasket, packed.rec_item,
            packed.bk_ptr, packed.bk_items,
            1, alpha, 1.0, 0.0, 0.0, 0.0, pos_prob,
            seed, 1, ckpt_iter, ckpt_cf, ckpt_rk, counters,
        )
    else:
        status = kernel(
            P, Q, tu, packed.inter_user, packed.inter_item,
            packed.pos_ptr, packed.pos_items,
            1, alpha, 1.0, 0.0, 0.0, 0.0, pos_prob,
            seed, 1, ckpt_iter, ckpt_cf, ckpt_rk, counters,
        )
    assert status == -1
    return counters


def _mirror_example(packed, seed, branch, pos_prob):
    """Replay the kernel's draws to learn which example it used."""
    rs = np.random.RandomState(seed)
    rs.random_sample()  # the branch draw z
    if branch == "cls":
        ratio = 0.0 if pos_prob == 1.0 else 1e18
        return sample_classification_example(packed, rs, ratio)
    return sample_ranking_triple(packed, rs)


def step_gradients(backend, kind, branch, positive, seed, f=5, scale=0.8):
    """Run one forced step; return implied gradients, params and the example.

    Returns (grads, params, example) where grads/params are dicts with
    P, Q, tu arrays and example is a LabeledExample or RankingTriple.
    """
    packed = hrm_world() if kind == "HRM" else mf_world()
    rng = np.random.default_rng(seed + 777)
    P = rng.normal(0.0, scale, size=(packed.n_users, f))
    Q = rng.normal(0.0, scale, size=(packed.n_items, f))
    tu = rng.normal(0.0, scale, size=packed.n_users)
    params = {"P": P.copy(), "Q": Q.copy(), "tu": tu.copy()}

    alpha = 1.0 if branch == "cls" else 0.0
    pos_prob = 1.0 if positive else 0.0
    kernel = backend.train_hrm if kind == "HRM" else backend.train_mf
    _run_one_step(kernel, packed, P, Q, tu, alpha, pos_prob, seed)

    grads = {"P": params["P"] - P, "Q": params["Q"] - Q, "tu": params["tu"] - tu}
    example = _mirror_example(packed, seed, branch, pos_prob)
    return grads, params, example


def example_loss(kind, branch, example, P, Q, tu):
    """Independent transcription of the per-example loss."""
    if kind == "HRM":
        ctx = np.asarray(example.context, dtype=np.int64)
        u = example.user
        h = (P[u] + Q[ctx].mean(axis=0)) / 2.0
        if branch == "cls":
            s = float(Q[example.item] @ h)
            return softplus(-example.label * (s - tu[u]))
        gap = float((Q[example.pos] - Q[example.neg]) @ h)
        return softplus(-gap)
    u = example.user
    if branch == "cls":
        s = float(P[u] @ Q[example.item])
        return softplus(-example.label * (s - tu[u]))
    gap = float(P[u] @ (Q[example.pos] - Q[example.neg]))
    return softplus(-gap)


def fd_gradients(kind, branch, example, params, h=1e-6):
    """Central finite differences of the transcribed loss over all params."""
    grads = {}
    for name in ("P", "Q", "tu"):
        base = params[name]
        g = np.zeros_like(base)
        for idx in range(base.size):
            up = {k: v.copy() for k, v in params.items()}
            dn = {k: v.copy() for k, v in params.items()}
            up[name].flat[idx] += h
            dn[name].flat[idx] -= h
            g.flat[idx] = (
                example_loss(kind, branch, example, **up)
                - example_loss(kind, branch, example, **dn)
            ) / (2.0 * h)
        grads[name] = g
    return grads


def max_rel_err(impl, fd) -> float:
    worst = 0.0
    for name in ("P", "Q", "tu"):
        a, b = impl[name], fd[name]
        scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)
        worst = max(worst, float((np.abs(a - b) / scale).max()))
    return worst
