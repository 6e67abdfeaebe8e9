"""Versioned text serialization for every artifact, plus the config format.

All artifacts are diffable text starting with a `#dynak-<kind> v<N>`
header; loaders reject unknown kinds and versions.  Writes go through a
temp file and an atomic rename, so failed commands leave nothing behind.
Reals use 17 significant digits, which round-trips float64 exactly.
"""

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import IdMap, Interaction, InteractionLog, SplitDataset
from .errors import (
    ConfigError,
    CorruptFileError,
    PersistenceError,
    UnsupportedVersionError,
)
from .model import MODEL_KINDS, FactorModel
from .trainer import TrainConfig, TrainReport

_G = "%.17g"


def atomic_write(path, text: str):
    """Write text to path via temp-file + rename; fsync before the swap."""
    path = Path(path)
    fd = None
    tmp_name = None
    try:
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fd = None
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, path)
        tmp_name = None
    except OSError as exc:
        raise PersistenceError(f"cannot write {path}: {exc}") from exc
    finally:
        if fd is not None:
            os.close(fd)
        if tmp_name is not None:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass


def _read_text(path) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise PersistenceError(f"cannot read {path}: {exc}") from exc


def _parse_header(line: str, kind: str, version: int) -> dict:
    tag = f"#dynak-{kind}"
    parts = line.split()
    if not parts or not parts[0].startswith("#dynak-"):
        raise CorruptFileError(f"missing #dynak header, got {line!r}")
    if parts[0] != tag or len(parts) < 2 or parts[1] != f"v{version}":
        raise UnsupportedVersionError(
            f"expected `{tag} v{version}`, got {parts[:2]!r}"
        )
    fields = {}
    for tok in parts[2:]:
        if "=" not in tok:
            raise CorruptFileError(f"bad header field {tok!r}")
        key, val = tok.split("=", 1)
        fields[key] = val
    return fields


# --- models -----------------------------------------------------------------

def save_model(model: FactorModel, path):
    header = (
        f"#dynak-model v1 kind={model.kind} f={model.f} "
        f"users={model.n_users} items={model.n_items} t={_G % model.t}"
    )
    rows = [header]
    for row in model.P:
        rows.append(" ".join(_G % v for v in row))
    for row in model.Q:
        rows.append(" ".join(_G % v for v in row))
    rows.append(" ".join(_G % v for v in model.t_u))
    atomic_write(path, "\n".join(rows) + "\n")


def _parse_row(line: str, f: int, what: str, lineno: int) -> np.ndarray:
    vals = line.split()
    if len(vals) != f:
        raise CorruptFileError(f"line {lineno}: {what} has {len(vals)} values, expected {f}")
    try:
        return np.array([float(v) for v in vals])
    except ValueError as exc:
        raise CorruptFileError(f"line {lineno}: {exc}") from None


def load_model(path) -> FactorModel:
    lines = _read_text(path)
    if not lines:
        raise CorruptFileError(f"{path}: empty file")
    hdr = _parse_header(lines[0], "model", 1)
    try:
        kind = hdr["kind"]
        f = int(hdr["f"])
        n_users = int(hdr["users"])
        n_items = int(hdr["items"])
        t = float(hdr["t"])
    except (KeyError, ValueError) as exc:
        raise CorruptFileError(f"{path}: bad model header: {exc}") from None
    if kind not in MODEL_KINDS:
        raise CorruptFileError(f"{path}: unknown model kind {kind!r}")
    body = lines[1:]
    expected = n_users + n_items + 1
    if len(body) != expected:
        raise CorruptFileError(
            f"{path}: header declares {n_users} user and {n_items} item rows "
            f"(+1 boundary line) but body has {len(body)} lines"
        )
    P = np.vstack([_parse_row(body[u], f, "user row", u + 2) for u in range(n_users)])
    Q = np.vstack([
        _parse_row(body[n_users + i], f, "item row", n_users + i + 2)
        for i in range(n_items)
    ])
    t_u = _parse_row(body[-1], n_users, "boundary line", len(lines))
    return FactorModel(kind=kind, f=f, P=P, Q=Q, t_u=t_u, t=t)


# --- interaction logs ---------------------------------------------------------

def format_log(log: InteractionLog) -> str:
    n_users, n_items = len(log.users), len(log.items)
    if log.users != frozenset(range(n_users)) or log.items != frozenset(range(n_items)):
        raise PersistenceError("canonical log format requires dense 0..n-1 ids; reindex first")
    lines = [f"#dynak-log v1 users={n_users} items={n_items}"]
    for r in log.interactions:
        basket = "-" if r.basket is None else str(r.basket)
        lines.append(f"{r.user}\t{r.item}\t{r.time}\t{basket}")
    return "\n".join(lines) + "\n"


def save_log(log: InteractionLog, path):
    atomic_write(path, format_log(log))


def load_log(path) -> InteractionLog:
    lines = _read_text(path)
    if not lines:
        raise CorruptFileError(f"{path}: empty file")
    hdr = _parse_header(lines[0], "log", 1)
    try:
        n_users, n_items = int(hdr["users"]), int(hdr["items"])
    except (KeyError, ValueError) as exc:
        raise CorruptFileError(f"{path}: bad log header: {exc}") from None
    recs = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise CorruptFileError(f"{path}: line {lineno}: expected 4 fields")
        try:
            user, item, ts = int(parts[0]), int(parts[1]), int(parts[2])
            basket = None if parts[3] == "-" else int(parts[3])
        except ValueError as exc:
            raise CorruptFileError(f"{path}: line {lineno}: {exc}") from None
        if not (0 <= user < n_users and 0 <= item < n_items):
            raise CorruptFileError(f"{path}: line {lineno}: id outside declared vocabulary")
        recs.append(Interaction(user=user, item=item, time=ts, basket=basket))
    return InteractionLog(tuple(recs), frozenset(range(n_users)), frozenset(range(n_items)))


# --- splits -------------------------------------------------------------------

def save_split(split: SplitDataset, train_path, test_path):
    save_log(split.train, train_path)
    lines = [f"#dynak-testmap v1 users={len(split.test)} dropped={split.dropped_users}"]
    for u in sorted(split.test):
        for i in sorted(split.test[u]):
            lines.append(f"{u}\t{i}")
    atomic_write(test_path, "\n".join(lines) + "\n")


def load_split(train_path, test_path) -> SplitDataset:
    train = load_log(train_path)
    lines = _read_text(test_path)
    if not lines:
        raise CorruptFileError(f"{test_path}: empty file")
    hdr = _parse_header(lines[0], "testmap", 1)
    try:
        n_declared = int(hdr["users"])
        dropped = int(hdr.get("dropped", "0"))
    except (KeyError, ValueError) as exc:
        raise CorruptFileError(f"{test_path}: bad testmap header: {exc}") from None
    test: dict = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CorruptFileError(f"{test_path}: line {lineno}: expected 2 fields")
        try:
            u, i = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise CorruptFileError(f"{test_path}: line {lineno}: {exc}") from None
        test.setdefault(u, set()).add(i)
    if len(test) != n_declared:
        raise CorruptFileError(
            f"{test_path}: header declares {n_declared} users, body has {len(test)}"
        )
    return SplitDataset(train=train, test={u: frozenset(s) for u, s in test.items()},
                        dropped_users=dropped)


# --- id maps ------------------------------------------------------------------

def save_idmap(idmap: IdMap, kind: str, path):
    lines = [f"#dynak-idmap v1 kind={kind} count={len(idmap)}"]
    for internal, original in enumerate(idmap.originals):
        lines.append(f"{internal}\t{original}")
    atomic_write(path, "\n".join(lines) + "\n")


def load_idmap(path) -> IdMap:
    lines = _read_text(path)
    if not lines:
        raise CorruptFileError(f"{path}: empty file")
    hdr = _parse_header(lines[0], "idmap", 1)
    originals = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CorruptFileError(f"{path}: line {lineno}: expected 2 fields")
        originals.append(parts[1])
    if "count" in hdr and int(hdr["count"]) != len(originals):
        raise CorruptFileError(f"{path}: count mismatch")
    return IdMap(tuple(originals))


# --- training traces ------------------------------------------------------------

def format_trace(report: TrainReport) -> str:
    lines = ["#dynak-trace v1"]
    for it, cf, rk in zip(report.ckpt_iter, report.ckpt_cf, report.ckpt_rk):
        cf_s = "-" if np.isnan(cf) else _G % cf
        rk_s = "-" if np.isnan(rk) else _G % rk
        lines.append(f"{it}\t{cf_s}\t{rk_s}")
    return "\n".join(lines) + "\n"


def save_trace(report: TrainReport, path):
    atomic_write(path, format_trace(report))


# --- config -------------------------------------------------------------------

_CONFIG_SCHEMA: dict = {
    "dataset.kind": str,
    "dataset.path": str,
    "dataset.min_item_users": int,
    "dataset.min_user_items": int,
    "dataset.col_user": str,
    "dataset.col_item": str,
    "dataset.col_date": str,
    "dataset.date_format": str,
    "model.kind": str,
    "model.f": int,
    "train.alpha": float,
    "train.lambda_t": float,
    "train.t": float,
    "train.eta": float,
    "train.lambda_theta": float,
    "train.epochs": int,
    "train.negative_ratio": float,
    "train.seed": int,
    "rec.cap": int,
    "eval.k": int,
    "out.dir": str,
}

_CONFIG_DEFAULTS = {
    "dataset.min_item_users": "0",
    "dataset.min_user_items": "0",
    "model.kind": "MF",
    "model.f": "50",
    "train.alpha": "0.5",
    "train.lambda_t": "1.0",
    "train.t": "1.0",
    "train.eta": "0.05",
    "train.lambda_theta": "0.0025",
    "train.epochs": "30",
    "train.negative_ratio": "1.0",
    "train.seed": "42",
    "rec.cap": "20",
    "eval.k": "20",
    "out.dir": "out",
}


@dataclass
class ConfigFile:
    """Flat key=value configuration with a closed key set.

    Unknown keys are a hard error (catches typos early); values are
    checked against their declared type as soon as they are set.
    """

    values: dict = field(default_factory=dict)

    @staticmethod
    def _check(key: str, value: str):
        if key not in _CONFIG_SCHEMA:
            raise ConfigError(f"unrecognized config key {key!r}")
        typ = _CONFIG_SCHEMA[key]
        if typ is not str:
            try:
                typ(value)
            except ValueError:
                raise ConfigError(
                    f"config key {key} expects {typ.__name__}, got {value!r}"
                ) from None

    @classmethod
    def parse(cls, text: str) -> "ConfigFile":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            cls._check(key, value)
            values[key] = value
        return cls(values)

    @classmethod
    def load(cls, path) -> "ConfigFile":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.parse(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def apply_overrides(self, pairs):
        for pair in pairs:
            if "=" not in pair:
                raise ConfigError(f"override must look like key=value, got {pair!r}")
            key, value = (s.strip() for s in pair.split("=", 1))
            self._check(key, value)
            self.values[key] = value

    def _raw(self, key: str, required: bool):
        if key not in _CONFIG_SCHEMA:
            raise ConfigError(f"unrecognized config key {key!r}")
        if key in self.values:
            return self.values[key]
        if key in _CONFIG_DEFAULTS:
            return _CONFIG_DEFAULTS[key]
        if required:
            raise ConfigError(f"required config key {key} is missing")
        return None

    def str(self, key: str, required: bool = True):
        return self._raw(key, required)

    def int(self, key: str) -> int:
        return int(self._raw(key, True))

    def float(self, key: str) -> float:
        return float(self._raw(key, True))

    def train_config(self) -> TrainConfig:
        cfg = TrainConfig(
            kind=self.str("model.kind"),
            f=self.int("model.f"),
            alpha=self.float("train.alpha"),
            lambda_t=self.float("train.lambda_t"),
            t=self.float("train.t"),
            eta=self.float("train.eta"),
            lambda_theta=self.float("train.lambda_theta"),
            epochs=self.int("train.epochs"),
            negative_ratio=self.float("train.negative_ratio"),
            seed=self.int("train.seed"),
        )
        cfg.validate()
        return cfg
