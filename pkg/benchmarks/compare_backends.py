#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the same seeded training workload through both backends and reports
steps/second plus the speedup.  Also cross-checks that the two backends
produce matching parameters, since they are meant to walk identical
sample sequences.

Usage: python benchmarks/compare_backends.py [--steps N] [--f DIM]
"""

import argparse
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from dynak.data import Interaction, InteractionLog
from dynak.trainer import TrainConfig, joint_train


def synthetic_mf_log(n_users=1500, n_items=2000, per_user=30, seed=0):
    rng = np.random.default_rng(seed)
    recs = []
    for u in range(n_users):
        items = rng.choice(n_items, size=per_user, replace=False)
        for k, i in enumerate(items):
            recs.append(Interaction(u, int(i), k))
    return InteractionLog(tuple(recs), frozenset(range(n_users)), frozenset(range(n_items)))


def synthetic_basket_log(n_users=600, n_items=800, baskets=8, basket_size=4, seed=1):
    rng = np.random.default_rng(seed)
    recs = []
    for u in range(n_users):
        for b in range(baskets):
            items = rng.choice(n_items, size=basket_size, replace=False)
            for i in items:
                recs.append(Interaction(u, int(i), b, b))
    return InteractionLog(tuple(recs), frozenset(range(n_users)), frozenset(range(n_items)))


def run(kind, log, steps, f, backend):
    os.environ["DYNAK_BACKEND"] = backend
    cfg = TrainConfig(kind=kind, f=f, alpha=0.5, t=1.0, seed=7)
    if backend == "numba":
        joint_train(cfg, log, iterations=200)  # compile outside the timed run
    start = time.perf_counter()
    model, report = joint_train(cfg, log, iterations=steps)
    wall = time.perf_counter() - start
    return model, report, wall


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=300_000)
    ap.add_argument("--f", type=int, default=50)
    args = ap.parse_args()

    print(f"workload: {args.steps} SGD steps, f={args.f}")
    print(f"{'kind':<6} {'backend':<8} {'wall[s]':>8} {'steps/s':>12}")
    for kind, log in (("MF", synthetic_mf_log()), ("HRM", synthetic_basket_log())):
        results = {}
        for backend in ("numpy", "numba"):
            try:
                model, _report, wall = run(kind, log, args.steps, args.f, backend)
            except Exception as exc:  # missing numba etc.
                print(f"{kind:<6} {backend:<8} unavailable: {exc}")
                continue
            results[backend] = (model, wall)
            print(f"{kind:<6} {backend:<8} {wall:>8.2f} {args.steps / wall:>12.0f}")
        if len(results) == 2:
            m_np, w_np = results["numpy"]
            m_nb, w_nb = results["numba"]
            agree = np.allclose(m_np.P, m_nb.P, rtol=1e-6, atol=1e-9) and np.allclose(
                m_np.Q, m_nb.Q, rtol=1e-6, atol=1e-9)
            print(f"{kind:<6} speedup x{w_np / w_nb:.1f}, backends agree: {agree}")


if __name__ == "__main__":
    main()
