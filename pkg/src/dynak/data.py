"""Interaction logs: parsing raw datasets, count filtering, temporal splits.

All transforms are pure: they take a log and return a new one.  Ids stay
opaque (ints for MovieLens-style files, strings for transaction CSVs)
until `reindex` maps them to dense 0..n-1 ints, which is the canonical
form every downstream module works with.
"""

import csv
import io
import itertools
from dataclasses import dataclass
from datetime import date, datetime
from typing import Iterable, Optional

from .errors import ContractError, DataError, ParseError, SchemaError

TAFENG_USER_COL = "CUSTOMER_ID"
TAFENG_ITEM_COL = "PRODUCT_ID"
TAFENG_DATE_COL = "TRANSACTION_DT"

_DATE_FORMATS = ("%Y-%m-%d", "%m/%d/%Y", "%Y/%m/%d")


@dataclass(frozen=True)
class Interaction:
    """One user-item event; basket is set only for transactional data."""

    user: object
    item: object
    time: int
    basket: Optional[int] = None


@dataclass(frozen=True)
class InteractionLog:
    """A set of interactions plus the user/item vocabularies.

    The vocabularies may be wider than what the interactions mention
    (e.g. a train split keeps the full vocabulary) but never narrower.
    """

    interactions: tuple
    users: frozenset
    items: frozenset

    def __post_init__(self):
        object.__setattr__(self, "interactions", tuple(self.interactions))
        object.__setattr__(self, "users", frozenset(self.users))
        object.__setattr__(self, "items", frozenset(self.items))
        seen = set()
        with_basket = 0
        for rec in self.interactions:
            if rec.user not in self.users:
                raise DataError(f"user {rec.user!r} missing from vocabulary")
            if rec.item not in self.items:
                raise DataError(f"item {rec.item!r} missing from vocabulary")
            if rec.time < 0:
                raise DataError(f"negative timestamp {rec.time} for user {rec.user!r}")
            key = (rec.user, rec.item, rec.time, rec.basket)
            if key in seen:
                raise DataError(f"duplicate interaction {key!r}")
            seen.add(key)
            with_basket += rec.basket is not None
        if with_basket not in (0, len(self.interactions)):
            raise DataError("basket indices must be present on all interactions or none")

    @classmethod
    def build(cls, interactions: Iterable[Interaction]) -> "InteractionLog":
        """Log whose vocabularies are exactly the ids observed."""
        interactions = tuple(interactions)
        users = frozenset(r.user for r in interactions)
        items = frozenset(r.item for r in interactions)
        return cls(interactions, users, items)

    def __len__(self) -> int:
        return len(self.interactions)

    @property
    def has_baskets(self) -> bool:
        return bool(self.interactions) and self.interactions[0].basket is not None

    def user_items(self) -> dict:
        """Per-user set of interacted items (the positive sets)."""
        out: dict = {}
        for rec in self.interactions:
            out.setdefault(rec.user, set()).add(rec.item)
        return out


@dataclass(frozen=True)
class IdMap:
    """Dense internal id -> original id, preserved after reindexing."""

    originals: tuple

    def __len__(self) -> int:
        return len(self.originals)

    def to_internal(self) -> dict:
        return {orig: idx for idx, orig in enumerate(self.originals)}


@dataclass(frozen=True)
class SplitDataset:
    """Temporal train/test split.

    `test` maps each evaluated user to the held-out item set; users that
    could not be split (a single timestamp or basket) stay in train and
    are counted in `dropped_users`.
    """

    train: InteractionLog
    test: dict
    dropped_users: int = 0


def _text_lines(stream) -> Iterable[str]:
    if isinstance(stream, bytes):
        stream = io.BytesIO(stream)
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    first = stream.read(0)
    if isinstance(first, bytes):
        stream = io.TextIOWrapper(stream, encoding="utf-8", errors="replace")
    return stream


def parse_movielens(stream) -> InteractionLog:
    """Parse tab-separated `user item rating timestamp` lines.

    The rating column is discarded: with implicit feedback only the fact
    of the interaction matters.
    """
    interactions = []
    for lineno, line in enumerate(_text_lines(stream), start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ParseError(f"line {lineno}: expected 4 tab-separated fields, got {len(parts)}")
        try:
            user, item, ts = int(parts[0]), int(parts[1]), int(parts[3])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if ts < 0:
            raise ParseError(f"line {lineno}: negative timestamp {ts}")
        interactions.append(Interaction(user=user, item=item, time=ts))
    if not interactions:
        raise ParseError("empty input: no interaction lines found")
    return InteractionLog.build(interactions)


def _parse_date(raw: str, fmt: Optional[str], lineno: int) -> date:
    raw = raw.strip()
    formats = (fmt,) if fmt else _DATE_FORMATS
    for f in formats:
        try:
            return datetime.strptime(raw.split(" ")[0], f).date()
        except ValueError:
            continue
    raise ParseError(f"line {lineno}: unparseable date {raw!r}")


def parse_tafeng(
    stream,
    col_user: str = TAFENG_USER_COL,
    col_item: str = TAFENG_ITEM_COL,
    col_date: str = TAFENG_DATE_COL,
    date_format: Optional[str] = None,
) -> InteractionLog:
    """Parse a transaction CSV into a basket-annotated log.

    Rows duplicated on (user, item, date) collapse to one interaction.
    The basket index of an interaction is the chronological rank of its
    user's distinct transaction dates, starting at 0.
    """
    text = _text_lines(stream)
    header_line = text.readline() if hasattr(text, "readline") else None
    if not header_line or not header_line.strip():
        raise ParseError("empty input: no header line found")
    delimiter = ","
    for cand in (";", "\t", ","):
        if cand in header_line:
            delimiter = cand
            break
    reader = csv.DictReader(itertools.chain([header_line], text), delimiter=delimiter)
    fields = reader.fieldnames or []
    for col in (col_user, col_item, col_date):
        if col not in fields:
            raise SchemaError(f"required column {col!r} not in header {fields}")

    rows = {}
    for lineno, row in enumerate(reader, start=2):
        user = (row[col_user] or "").strip()
        item = (row[col_item] or "").strip()
        if not user or not item:
            raise ParseError(f"line {lineno}: empty user or item id")
        day = _parse_date(row[col_date] or "", date_format, lineno)
        rows.setdefault((user, item, day.toordinal()), None)
    if not rows:
        raise ParseError("empty input: no transaction rows found")

    user_days: dict = {}
    for user, _item, day in rows:
        user_days.setdefault(user, set()).add(day)
    basket_of = {
        (u, d): rank
        for u, days in user_days.items()
        for rank, d in enumerate(sorted(days))
    }
    interactions = [
        Interaction(user=u, item=i, time=d, basket=basket_of[(u, d)])
        for u, i, d in rows
    ]
    return InteractionLog.build(interactions)


def filter_min_counts(log: InteractionLog, min_item_users: int, min_user_items: int) -> InteractionLog:
    """Drop rare items, then sparse users; a single pass of each.

    Item survival counts distinct users per item; user survival counts
    distinct remaining items per user.  Vocabularies are recomputed, so
    thresholds of (0, 0) leave the log unchanged.
    """
    if min_item_users < 0 or min_user_items < 0:
        raise ContractError("count thresholds must be >= 0")

    item_users: dict = {}
    for rec in log.interactions:
        item_users.setdefault(rec.item, set()).add(rec.user)
    keep_items = frozenset(i for i in log.items if len(item_users.get(i, ())) >= min_item_users)

    user_items: dict = {}
    for rec in log.interactions:
        if rec.item in keep_items:
            user_items.setdefault(rec.user, set()).add(rec.item)
    keep_users = frozenset(u for u in log.users if len(user_items.get(u, ())) >= min_user_items)

    kept = tuple(
        rec for rec in log.interactions if rec.item in keep_items and rec.user in keep_users
    )
    return InteractionLog(kept, keep_users, keep_items)


def temporal_split(log: InteractionLog, mode: str) -> SplitDataset:
    """Hold out each user's chronologically last activity as test.

    mode "last-item": test = all items at the user's maximum timestamp.
    mode "basket":    test = items of the user's last basket.
    Users with nothing earlier to train on are not split; they keep all
    interactions in train and are counted in dropped_users.
    """
    if mode not in ("last-item", "basket"):
        raise ContractError(f"unknown split mode {mode!r}")
    if mode == "basket" and not all(r.basket is not None for r in log.interactions):
        raise DataError("basket split requires basket indices on every interaction")

    per_user: dict = {}
    for rec in log.interactions:
        per_user.setdefault(rec.user, []).append(rec)

    test = {}
    dropped = 0
    held_out = set()
    for user, recs in per_user.items():
        if mode == "last-item":
            keys = {r.time for r in recs}
            last = max(keys)
            last_recs = [r for r in recs if r.time == last]
        else:
            keys = {r.basket for r in recs}
            last = max(keys)
            last_recs = [r for r in recs if r.basket == last]
        if len(keys) < 2:
            dropped += 1
            continue
        test[user] = frozenset(r.item for r in last_recs)
        held_out.update((r.user, r.item, r.time, r.basket) for r in last_recs)

    train_recs = tuple(
        r for r in log.interactions if (r.user, r.item, r.time, r.basket) not in held_out
    )
    train = InteractionLog(train_recs, log.users, log.items)
    return SplitDataset(train=train, test=test, dropped_users=dropped)


def reindex(log: InteractionLog) -> tuple[InteractionLog, IdMap, IdMap]:
    """Map ids to dense 0..n-1 ints (sorted by original id).

    Returns the re-indexed log plus the user and item sidecar maps.
    """
    users = sorted(log.users)
    items = sorted(log.items)
    umap = {orig: idx for idx, orig in enumerate(users)}
    imap = {orig: idx for idx, orig in enumerate(items)}
    recs = tuple(
        Interaction(user=umap[r.user], item=imap[r.item], time=r.time, basket=r.basket)
        for r in log.interactions
    )
    out = InteractionLog(recs, frozenset(range(len(users))), frozenset(range(len(items))))
    return out, IdMap(tuple(users)), IdMap(tuple(items))
