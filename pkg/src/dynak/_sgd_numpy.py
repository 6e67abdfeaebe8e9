"""Pure-numpy training kernels (fallback backend).

Per-step draw protocol, shared verbatim with the numba backend so both
consume the same Mersenne Twister stream given the same seed:

  1. z = rand()                    branch: z < alpha -> classification
  2. classification: c = rand()    positive iff c < pos_prob
     then r = rand() picks the record; negatives re-draw j via
     r2 = rand(), j = int(r2 * n_items), rejecting members of the
     positive set (at most 100 tries, then the step is skipped).
  3. ranking: r = rand() picks the record, j drawn like above.

Updates read a snapshot of every touched row before writing, so the
applied step is the exact simultaneous gradient of the per-example loss.
"""

import numpy as np

from .objectives import sigmoid, softplus


def _in_sorted(arr: np.ndarray, lo: int, hi: int, v: int) -> bool:
    pos = int(np.searchsorted(arr[lo:hi], v))
    return pos < hi - lo and arr[lo + pos] == v


def _draw_negative(rand, n_items, members, lo, hi) -> int:
    """Uniform item with rejection against members[lo:hi]; -1 if 100 tries fail."""
    for _ in range(100):
        cand = int(rand() * n_items)
        if not _in_sorted(members, lo, hi, cand):
            return cand
    return -1


def train_mf(P, Q, tu, inter_user, inter_item, pos_ptr, pos_items,
             n_steps, alpha, eta, lam_t, t_anchor, lam_theta, pos_prob,
             seed, ckpt_every, ckpt_iter, ckpt_cf, ckpt_rk, counters):
    """Alternating classification/ranking SGD on an MF scorer.

    Returns -1, or the 1-based iteration at which a non-finite parameter
    appeared.  counters accumulates [classification steps, ranking steps,
    skipped negative draws].
    """
    rs = np.random.RandomState(seed)
    rand = rs.random_sample
    n_records = inter_user.shape[0]
    n_items = Q.shape[0]
    reg2 = 2.0 * lam_theta

    w = 0
    cf_sum = rk_sum = 0.0
    cf_cnt = rk_cnt = 0
    for n in range(1, n_steps + 1):
        z = rand()
        if z < alpha:
            counters[0] += 1
            c = rand()
            idx = int(rand() * n_records)
            u = inter_user[idx]
            if c < pos_prob:
                i = inter_item[idx]
                y = 1.0
            else:
                i = _draw_negative(rand, n_items, pos_items, pos_ptr[u], pos_ptr[u + 1])
                y = -1.0
            if i >= 0:
                pu = P[u].copy()
                qi = Q[i].copy()
                tu_old = tu[u]
                m = y * (pu @ qi - tu_old)
                sm = sigmoid(-m)
                gs = -y * sm
                P[u] = pu - eta * (gs * qi + reg2 * pu)
                Q[i] = qi - eta * (gs * pu + reg2 * qi)
                tu[u] = tu_old - eta * (y * sm + 2.0 * lam_t * (tu_old - t_anchor))
                cf_sum += softplus(-m) + lam_t * (tu_old - t_anchor) ** 2
                cf_cnt += 1
                if not (np.isfinite(P[u]).all() and np.isfinite(Q[i]).all() and np.isfinite(tu[u])):
                    return n
            else:
                counters[2] += 1
        else:
            counters[1] += 1
            idx = int(rand() * n_records)
            u = inter_user[idx]
            i = inter_item[idx]
            j = _draw_negative(rand, n_items, pos_items, pos_ptr[u], pos_ptr[u + 1])
            if j >= 0:
                pu = P[u].copy()
                qi = Q[i].copy()
                qj = Q[j].copy()
                d = pu @ (qi - qj)
                gd = -sigmoid(-d)
                P[u] = pu - eta * (gd * (qi - qj) + reg2 * pu)
                Q[i] = qi - eta * (gd * pu + reg2 * qi)
                Q[j] = qj - eta * (-gd * pu + reg2 * qj)
                rk_sum += softplus(-d)
                rk_cnt += 1
                if not (np.isfinite(P[u]).all() and np.isfinite(Q[i]).all() and np.isfinite(Q[j]).all()):
                    return n
            else:
                counters[2] += 1

        if n % ckpt_every == 0 or n == n_steps:
            ckpt_iter[w] = n
            ckpt_cf[w] = cf_sum / cf_cnt if cf_cnt > 0 else np.nan
            ckpt_rk[w] = rk_sum / rk_cnt if rk_cnt > 0 else np.nan
            w += 1
            cf_sum = rk_sum = 0.0
            cf_cnt = rk_cnt = 0
    return -1


def train_hrm(P, Q, tu, rec_user, rec_gbasket, rec_item, bk_ptr, bk_items,
              n_steps, alpha, eta, lam_t, t_anchor, lam_theta, pos_prob,
              seed, ckpt_every, ckpt_iter, ckpt_cf, ckpt_rk, counters):
    """Alternating SGD on the hybrid-pooled next-basket scorer.

    Each record is a (user, target basket, item) positive; the context is
    the user's previous basket, and gradients spread through the
    two-level mean: 1/2 to the user vector, 1/(2m) to each of the m
    context item vectors.  Negatives are rejected against the target
    basket only, so repurchasing across baskets stays a valid signal.
    """
    rs = np.random.RandomState(seed)
    rand = rs.random_sample
    n_records = rec_user.shape[0]
    n_items = Q.shape[0]
    reg2 = 2.0 * lam_theta

    w = 0
    cf_sum = rk_sum = 0.0
    cf_cnt = rk_cnt = 0
    for n in range(1, n_steps + 1):
        z = rand()
        is_cls = z < alpha
        if is_cls:
            counters[0] += 1
            c = rand()
        else:
            counters[1] += 1
        idx = int(rand() * n_records)
        u = rec_user[idx]
        g = rec_gbasket[idx]
        c0, c1 = bk_ptr[g - 1], bk_ptr[g]
        ctx = bk_items[c0:c1]
        m_ctx = c1 - c0

        if is_cls:
            if c < pos_prob:
                i = rec_item[idx]
                y = 1.0
            else:
                i = _draw_negative(rand, n_items, bk_items, bk_ptr[g], bk_ptr[g + 1])
                y = -1.0
            if i >= 0:
                pu = P[u].copy()
                h = (pu + Q[ctx].mean(axis=0)) / 2.0
                vi = Q[i].copy()
                tu_old = tu[u]
                m = y * (vi @ h - tu_old)
                sm = sigmoid(-m)
                gs = -y * sm
                Q[i] = vi - eta * (gs * h + reg2 * vi)
                P[u] = pu - eta * (gs * 0.5 * vi + reg2 * pu)
                Q[ctx] -= eta * ((gs / (2.0 * m_ctx)) * vi + reg2 * Q[ctx])
                tu[u] = tu_old - eta * (y * sm + 2.0 * lam_t * (tu_old - t_anchor))
                cf_sum += softplus(-m) + lam_t * (tu_old - t_anchor) ** 2
                cf_cnt += 1
                ok = (
                    np.isfinite(Q[i]).all()
                    and np.isfinite(P[u]).all()
                    and np.isfinite(Q[ctx]).all()
                    and np.isfinite(tu[u])
                )
                if not ok:
                    return n
            else:
                counters[2] += 1
        else:
            i = rec_item[idx]
            j = _draw_negative(rand, n_items, bk_items, bk_ptr[g], bk_ptr[g + 1])
            if j >= 0:
                pu = P[u].copy()
                h = (pu + Q[ctx].mean(axis=0)) / 2.0
                vi = Q[i].copy()
                vj = Q[j].copy()
                diff = vi - vj
                d = diff @ h
                gd = -sigmoid(-d)
                Q[i] = vi - eta * (gd * h + reg2 * vi)
                Q[j] = vj - eta * (-gd * h + reg2 * vj)
                P[u] = pu - eta * (gd * 0.5 * diff + reg2 * pu)
                Q[ctx] -= eta * ((gd / (2.0 * m_ctx)) * diff + reg2 * Q[ctx])
                rk_sum += softplus(-d)
                rk_cnt += 1
                ok = (
                    np.isfinite(Q[i]).all()
                    and np.isfinite(Q[j]).all()
                    and np.isfinite(P[u]).all()
                    and np.isfinite(Q[ctx]).all()
                )
                if not ok:
                    return n
            else:
                counters[2] += 1

        if n % ckpt_every == 0 or n == n_steps:
            ckpt_iter[w] = n
            ckpt_cf[w] = cf_sum / cf_cnt if cf_cnt > 0 else np.nan
            ckpt_rk[w] = rk_sum / rk_cnt if rk_cnt > 0 else np.nan
            w += 1
            cf_sum = rk_sum = 0.0
            cf_cnt = rk_cnt = 0
    return -1
