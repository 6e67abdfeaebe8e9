"""Numba-compiled training kernels (fast backend).

Mirrors _sgd_numpy step for step: same draw protocol, same update order,
same snapshot-before-write rule.  Given one seed the two backends walk
identical sample sequences; parameters then agree up to floating-point
summation order.  Keep the two files in lockstep when editing either.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


@njit(cache=True)
def _softplus(x):
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


@njit(cache=True)
def _in_sorted(arr, lo, hi, v):
    pos = np.searchsorted(arr[lo:hi], v)
    return pos < hi - lo and arr[lo + pos] == v


@njit(cache=True)
def _draw_negative(n_items, members, lo, hi):
    for _ in range(100):
        cand = int(np.random.random() * n_items)
        if not _in_sorted(members, lo, hi, cand):
            return cand
    return -1


@njit(cache=True)
def train_mf(P, Q, tu, inter_user, inter_item, pos_ptr, pos_items,
             n_steps, alpha, eta, lam_t, t_anchor, lam_theta, pos_prob,
             seed, ckpt_every, ckpt_iter, ckpt_cf, ckpt_rk, counters):
    np.random.seed(seed)
    f = P.shape[1]
    n_records = inter_user.shape[0]
    n_items = Q.shape[0]
    reg2 = 2.0 * lam_theta

    w = 0
    cf_sum = 0.0
    rk_sum = 0.0
    cf_cnt = 0
    rk_cnt = 0
    for n in range(1, n_steps + 1):
        z = np.random.random()
        if z < alpha:
            counters[0] += 1
            c = np.random.random()
            idx = int(np.random.random() * n_records)
            u = inter_user[idx]
            if c < pos_prob:
                i = inter_item[idx]
                y = 1.0
            else:
                i = _draw_negative(n_items, pos_items, pos_ptr[u], pos_ptr[u + 1])
                y = -1.0
            if i >= 0:
                s = 0.0
                for k in range(f):
                    s += P[u, k] * Q[i, k]
                tu_old = tu[u]
                m = y * (s - tu_old)
                sm = _sigmoid(-m)
                gs = -y * sm
                ok = True
                for k in range(f):
                    pk = P[u, k]
                    qk = Q[i, k]
                    pnew = pk - eta * (gs * qk + reg2 * pk)
                    qnew = qk - eta * (gs * pk + reg2 * qk)
                    P[u, k] = pnew
                    Q[i, k] = qnew
                    if not (np.isfinite(pnew) and np.isfinite(qnew)):
                        ok = False
                tnew = tu_old - eta * (y * sm + 2.0 * lam_t * (tu_old - t_anchor))
                tu[u] = tnew
                if not np.isfinite(tnew):
                    ok = False
                cf_sum += _softplus(-m) + lam_t * (tu_old - t_anchor) ** 2
                cf_cnt += 1
                if not ok:
                    return n
            else:
                counters[2] += 1
        else:
            counters[1] += 1
            idx = int(np.random.random() * n_records)
            u = inter_user[idx]
            i = inter_item[idx]
            j = _draw_negative(n_items, pos_items, pos_ptr[u], pos_ptr[u + 1])
            if j >= 0:
                d = 0.0
                for k in range(f):
                    d += P[u, k] * (Q[i, k] - Q[j, k])
                gd = -_sigmoid(-d)
                ok = True
                for k in range(f):
                    pk = P[u, k]
                    qik = Q[i, k]
                    qjk = Q[j, k]
                    pnew = pk - eta * (gd * (qik - qjk) + reg2 * pk)
                    qinew = qik - eta * (gd * pk + reg2 * qik)
                    qjnew = qjk - eta * (-gd * pk + reg2 * qjk)
                    P[u, k] = pnew
                    Q[i, k] = qinew
                    Q[j, k] = qjnew
                    if not (np.isfinite(pnew) and np.isfinite(qinew) and np.isfinite(qjnew)):
                        ok = False
                rk_sum += _softplus(-d)
                rk_cnt += 1
                if not ok:
                    return n
            else:
                counters[2] += 1

        if n % ckpt_every == 0 or n == n_steps:
            ckpt_iter[w] = n
            ckpt_cf[w] = cf_sum / cf_cnt if cf_cnt > 0 else np.nan
            ckpt_rk[w] = rk_sum / rk_cnt if rk_cnt > 0 else np.nan
            w += 1
            cf_sum = 0.0
            rk_sum = 0.0
            cf_cnt = 0
            rk_cnt = 0
    return -1


@njit(cache=True)
def train_hrm(P, Q, tu, rec_user, rec_gbasket, rec_item, bk_ptr, bk_items,
              n_steps, alpha, eta, lam_t, t_anchor, lam_theta, pos_prob,
              seed, ckpt_every, ckpt_iter, ckpt_cf, ckpt_rk, counters):
    np.random.seed(seed)
    f = P.shape[1]
    n_records = rec_user.shape[0]
    n_items = Q.shape[0]
    reg2 = 2.0 * lam_theta

    h = np.empty(f)
    snap = np.empty(f)  # pre-update copy of the scored row (or row difference)

    w = 0
    cf_sum = 0.0
    rk_sum = 0.0
    cf_cnt = 0
    rk_cnt = 0
    for n in range(1, n_steps + 1):
        z = np.random.random()
        is_cls = z < alpha
        c = 0.0
        if is_cls:
            counters[0] += 1
            c = np.random.random()
        else:
            counters[1] += 1
        idx = int(np.random.random() * n_records)
        u = rec_user[idx]
        g = rec_gbasket[idx]
        c0 = bk_ptr[g - 1]
        c1 = bk_ptr[g]
        m_ctx = c1 - c0

        if is_cls:
            if c < pos_prob:
                i = rec_item[idx]
                y = 1.0
            else:
                i = _draw_negative(n_items, bk_items, bk_ptr[g], bk_ptr[g + 1])
                y = -1.0
            if i >= 0:
                for k in range(f):
                    h[k] = 0.0
                for ci in range(c0, c1):
                    row = bk_items[ci]
                    for k in range(f):
                        h[k] += Q[row, k]
                for k in range(f):
                    h[k] = (P[u, k] + h[k] / m_ctx) / 2.0

                s = 0.0
                for k in range(f):
                    snap[k] = Q[i, k]
                    s += Q[i, k] * h[k]
                tu_old = tu[u]
                m = y * (s - tu_old)
                sm = _sigmoid(-m)
                gs = -y * sm
                ok = True
                for k in range(f):
                    vnew = snap[k] - eta * (gs * h[k] + reg2 * snap[k])
                    Q[i, k] = vnew
                    if not np.isfinite(vnew):
                        ok = False
                for k in range(f):
                    pk = P[u, k]
                    pnew = pk - eta * (gs * 0.5 * snap[k] + reg2 * pk)
                    P[u, k] = pnew
                    if not np.isfinite(pnew):
                        ok = False
                coef = gs / (2.0 * m_ctx)
                for ci in range(c0, c1):
                    row = bk_items[ci]
                    for k in range(f):
                        qk = Q[row, k]
                        qnew = qk - eta * (coef * snap[k] + reg2 * qk)
                        Q[row, k] = qnew
                        if not np.isfinite(qnew):
                            ok = False
                tnew = tu_old - eta * (y * sm + 2.0 * lam_t * (tu_old - t_anchor))
                tu[u] = tnew
                if not np.isfinite(tnew):
                    ok = False
                cf_sum += _softplus(-m) + lam_t * (tu_old - t_anchor) ** 2
                cf_cnt += 1
                if not ok:
                    return n
            else:
                counters[2] += 1
        else:
            i = rec_item[idx]
            j = _draw_negative(n_items, bk_items, bk_ptr[g], bk_ptr[g + 1])
            if j >= 0:
                for k in range(f):
                    h[k] = 0.0
                for ci in range(c0, c1):
                    row = bk_items[ci]
                    for k in range(f):
                        h[k] += Q[row, k]
                for k in range(f):
                    h[k] = (P[u, k] + h[k] / m_ctx) / 2.0

                d = 0.0
                for k in range(f):
                    snap[k] = Q[i, k] - Q[j, k]
                    d += snap[k] * h[k]
                gd = -_sigmoid(-d)
                ok = True
                for k in range(f):
                    qik = Q[i, k]
                    qjk = Q[j, k]
                    qinew = qik - eta * (gd * h[k] + reg2 * qik)
                    qjnew = qjk - eta * (-gd * h[k] + reg2 * qjk)
                    Q[i, k] = qinew
                    Q[j, k] = qjnew
                    if not (np.isfinite(qinew) and np.isfinite(qjnew)):
                        ok = False
                for k in range(f):
                    pk = P[u, k]
                    pnew = pk - eta * (gd * 0.5 * snap[k] + reg2 * pk)
                    P[u, k] = pnew
                    if not np.isfinite(pnew):
                        ok = False
                coef = gd / (2.0 * m_ctx)
                for ci in range(c0, c1):
                    row = bk_items[ci]
                    for k in range(f):
                        qk = Q[row, k]
                        qnew = qk - eta * (coef * snap[k] + reg2 * qk)
                        Q[row, k] = qnew
                        if not np.isfinite(qnew):
                            ok = False
                rk_sum += _softplus(-d)
                rk_cnt += 1
                if not ok:
                    return n
            else:
                counters[2] += 1

        if n % ckpt_every == 0 or n == n_steps:
            ckpt_iter[w] = n
            ckpt_cf[w] = cf_sum / cf_cnt if cf_cnt > 0 else np.nan
            ckpt_rk[w] = rk_sum / rk_cnt if rk_cnt > 0 else np.nan
            w += 1
            cf_sum = 0.0
            rk_sum = 0.0
            cf_cnt = 0
            rk_cnt = 0
    return -1
