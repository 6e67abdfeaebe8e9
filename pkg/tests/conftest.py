import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dynak.data import Interaction, InteractionLog, temporal_split


def make_dense_log(edges, n_users=None, n_items=None):
    """Log from (user, item, time[, basket]) tuples with dense ids."""
    recs = tuple(
        Interaction(e[0], e[1], e[2], e[3] if len(e) > 3 else None) for e in edges
    )
    n_users = n_users if n_users is not None else max(r.user for r in recs) + 1
    n_items = n_items if n_items is not None else max(r.item for r in recs) + 1
    return InteractionLog(recs, frozenset(range(n_users)), frozenset(range(n_items)))


def block_edges():
    """5 users x 6 items, two preference blocks, one held-out item each.

    Users 0-2 consume items 0-2, users 3-4 consume items 3-5; every user
    touches their whole block at times 1..3 so a last-item split holds
    out exactly one in-block item per user.
    """
    orders = {
        0: [0, 1, 2],
        1: [1, 2, 0],
        2: [2, 0, 1],
        3: [3, 4, 5],
        4: [4, 5, 3],
    }
    return [(u, i, t + 1) for u, items in orders.items() for t, i in enumerate(items)]


@pytest.fixture
def block_split():
    log = make_dense_log(block_edges(), n_users=5, n_items=6)
    return temporal_split(log, "last-item")


@pytest.fixture
def small_mf_log():
    """Deterministic 8-user x 12-item log for trainer tests."""
    rng = np.random.default_rng(0)
    edges = []
    seen = set()
    for u in range(8):
        for _ in range(6):
            i = int(rng.integers(0, 12))
            t = int(rng.integers(0, 50))
            if (u, i, t) in seen:
                continue
            seen.add((u, i, t))
            edges.append((u, i, t))
    return make_dense_log(edges, n_users=8, n_items=12)


@pytest.fixture
def small_basket_log():
    """6 users x 10 items, four 2-3 item baskets per user."""
    rng = np.random.default_rng(3)
    recs = []
    seen = set()
    for u in range(6):
        for b in range(4):
            for i in rng.choice(10, size=int(rng.integers(2, 4)), replace=False):
                key = (u, int(i), b)
                if key in seen:
                    continue
                seen.add(key)
                recs.append((u, int(i), b * 10, b))
    return make_dense_log(recs, n_users=6, n_items=10)


@pytest.fixture
def backend_env(monkeypatch):
    """Force a backend for the duration of one test."""
    def set_backend(name):
        monkeypatch.setenv("DYNAK_BACKEND", name)
    return set_backend


def synthetic_movielens_text(n_users=25, n_items=30, seed=5) -> str:
    """u.data-shaped content with distinct per-user timestamps."""
    rng = np.random.default_rng(seed)
    lines = []
    for u in range(1, n_users + 1):
        n = int(rng.integers(8, 16))
        items = rng.choice(np.arange(1, n_items + 1), size=min(n, n_items), replace=False)
        times = rng.choice(np.arange(100000, 999999), size=items.size, replace=False)
        for i, ts in zip(items, times):
            rating = int(rng.integers(1, 6))
            lines.append(f"{u}\t{int(i)}\t{rating}\t{int(ts)}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def ml_fixture_file(tmp_path):
    p = tmp_path / "u.data"
    p.write_text(synthetic_movielens_text())
    return p


def data_dir() -> Path:
    return Path(os.environ.get("DYNAK_DATA", Path(__file__).resolve().parent.parent / "data"))


def movielens_path():
    p = data_dir() / "ml-100k" / "u.data"
    return p if p.exists() else None


def tafeng_path():
    base = data_dir()
    for name in ("ta_feng_all_months_merged.csv", "tafeng.csv", "ta-feng.csv"):
        p = base / name
        if p.exists():
            return p
        p = base / "tafeng" / name
        if p.exists():
            return p
    return None
