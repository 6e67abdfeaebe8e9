"""Command-line entry point: prep, train, eval, recommend, sweep.

Every command reads one config file plus optional key=value overrides;
outputs land under the config's out.dir.  All writes are atomic, so a
failing command leaves no partial files.
"""

import argparse
import sys
from pathlib import Path

from . import data as ds
from . import metrics, persistence, recommend
from .errors import ConfigError, DynakError
from .trainer import joint_train

TRAIN_LOG = "train.tsv"
TEST_MAP = "test.tsv"
FULL_LOG = "log.tsv"
MODEL_FILE = "model.txt"
TRACE_FILE = "trace.tsv"

SWEEPABLE = ("train.t", "train.lambda_t", "train.alpha")


def _load_config(args) -> persistence.ConfigFile:
    cfg = persistence.ConfigFile.load(args.config)
    cfg.apply_overrides(args.overrides)
    return cfg


def _out_dir(cfg) -> Path:
    out = Path(cfg.str("out.dir"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_split(cfg) -> ds.SplitDataset:
    out = Path(cfg.str("out.dir"))
    return persistence.load_split(out / TRAIN_LOG, out / TEST_MAP)


def cmd_prep(args) -> int:
    cfg = _load_config(args)
    kind = cfg.str("dataset.kind")
    path = Path(cfg.str("dataset.path"))
    if not path.exists():
        raise ConfigError(f"dataset.path {path} does not exist")

    with open(path, "rb") as fh:
        if kind == "movielens":
            log = ds.parse_movielens(fh)
            split_mode = "last-item"
        elif kind == "tafeng":
            log = ds.parse_tafeng(
                fh,
                col_user=cfg.str("dataset.col_user", required=False) or ds.TAFENG_USER_COL,
                col_item=cfg.str("dataset.col_item", required=False) or ds.TAFENG_ITEM_COL,
                col_date=cfg.str("dataset.col_date", required=False) or ds.TAFENG_DATE_COL,
                date_format=cfg.str("dataset.date_format", required=False),
            )
            split_mode = "basket"
        else:
            raise ConfigError(f"dataset.kind must be movielens or tafeng, got {kind!r}")
    print(f"parsed: users={len(log.users)} items={len(log.items)} interactions={len(log)}")

    log = ds.filter_min_counts(log, cfg.int("dataset.min_item_users"),
                               cfg.int("dataset.min_user_items"))
    print(f"filtered: users={len(log.users)} items={len(log.items)} interactions={len(log)}")

    log, umap, imap = ds.reindex(log)
    split = ds.temporal_split(log, split_mode)
    print(
        f"split: train_interactions={len(split.train)} test_users={len(split.test)} "
        f"dropped_users={split.dropped_users}"
    )

    out = _out_dir(cfg)
    persistence.save_log(log, out / FULL_LOG)
    persistence.save_split(split, out / TRAIN_LOG, out / TEST_MAP)
    persistence.save_idmap(umap, "user", out / "users.map")
    persistence.save_idmap(imap, "item", out / "items.map")
    print(f"wrote {out / FULL_LOG}, {out / TRAIN_LOG}, {out / TEST_MAP} and id maps")
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    split = _load_split(cfg)
    train_cfg = cfg.train_config()
    model, report = joint_train(train_cfg, split.train)
    out = _out_dir(cfg)
    persistence.save_model(model, out / MODEL_FILE)
    persistence.save_trace(report, out / TRACE_FILE)
    print(
        f"trained {train_cfg.kind} f={train_cfg.f} iterations={report.iterations} "
        f"cls_steps={report.cls_steps} rank_steps={report.rank_steps} "
        f"skipped={report.skipped_negative_draws} backend={report.backend} "
        f"wall={report.wall_time_s:.1f}s"
    )
    print(f"wrote {out / MODEL_FILE} and {out / TRACE_FILE}")
    return 0


def _parse_range(spec: str) -> range:
    try:
        lo, hi = (int(s) for s in spec.split(":", 1))
    except ValueError:
        raise ConfigError(f"--range expects LO:HI, got {spec!r}") from None
    if lo < 1 or hi < lo:
        raise ConfigError(f"--range bounds must satisfy 1 <= LO <= HI, got {spec!r}")
    return range(lo, hi + 1)


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    split = _load_split(cfg)
    out = _out_dir(cfg)
    model = persistence.load_model(args.model or out / MODEL_FILE)
    k = cfg.int("eval.k")
    if args.range and args.mode != "fixed":
        raise ConfigError("--range only applies to fixed mode")

    if args.mode == "fixed" and args.range:
        rows = ["n\tf1\tprecision\trecall\tndcg\tcover_ratio"]
        for n in _parse_range(args.range):
            rep = metrics.evaluate_run(model, split, metrics.MODE_FIXED, k, n)
            rows.append(
                f"{n}\t{rep.f1:.17g}\t{rep.precision:.17g}\t{rep.recall:.17g}"
                f"\t{rep.ndcg:.17g}\t{rep.cover_ratio:.17g}"
            )
            print(f"n={n} {rep.to_text()}")
        table = "#dynak-report-table v1\n" + "\n".join(rows) + "\n"
        dest = out / "report_fixed_range.tsv"
        persistence.atomic_write(dest, table)
        print(f"wrote {dest}")
        return 0

    if args.mode == "fixed":
        if args.n is None:
            raise ConfigError("fixed mode needs --n or --range")
        rep = metrics.evaluate_run(model, split, metrics.MODE_FIXED, k, args.n)
        stem = f"report_fixed_top{args.n}"
    else:
        cap = args.n if args.n is not None else cfg.int("rec.cap")
        rep = metrics.evaluate_run(model, split, metrics.MODE_DYNAMIC, k, cap)
        stem = "report_dynamic"
    print(rep.to_text())
    persistence.atomic_write(out / f"{stem}.txt", f"#dynak-report v1\n{rep.to_text()}\n")
    persistence.atomic_write(out / f"{stem}_users.tsv", rep.per_user_tsv())
    print(f"wrote {out / (stem + '.txt')} and {out / (stem + '_users.tsv')}")
    return 0


def cmd_recommend(args) -> int:
    cfg = _load_config(args)
    split = _load_split(cfg)
    out = _out_dir(cfg)
    model = persistence.load_model(args.model or out / MODEL_FILE)
    mode = metrics.MODE_FIXED if args.mode == "fixed" else metrics.MODE_DYNAMIC
    n_or_cap = args.n if args.n is not None else cfg.int("rec.cap")
    users = [args.user] if args.user is not None else None
    if users and users[0] not in split.test:
        raise ConfigError(f"user {users[0]} is not in the test split")

    lists = [rec for _u, rec in metrics.user_recommendations(model, split, mode, n_or_cap, users)
             if rec is not None]
    body = recommend.format_recommendations(lists)
    dest = out / "recs.tsv"
    persistence.atomic_write(dest, "#dynak-recs v1\n" + body)
    print(f"wrote {dest} ({len(lists)} users)")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    if args.param not in SWEEPABLE:
        raise ConfigError(f"--param must be one of {SWEEPABLE}, got {args.param!r}")
    values = [v for v in (s.strip() for s in args.values.split(",")) if v]
    if not values:
        raise ConfigError("--values must list at least one value")
    for v in values:
        try:
            float(v)
        except ValueError:
            raise ConfigError(f"sweep value {v!r} is not a number") from None

    split = _load_split(cfg)
    out = _out_dir(cfg)
    k = cfg.int("eval.k")
    cap = cfg.int("rec.cap")

    rows = ["value\tf1\tndcg\tcover_ratio"]
    for v in values:
        point = persistence.ConfigFile(dict(cfg.values))
        point.apply_overrides([f"{args.param}={v}"])
        model, _report = joint_train(point.train_config(), split.train)
        rep = metrics.evaluate_run(model, split, metrics.MODE_DYNAMIC, k, cap)
        rows.append(f"{v}\t{rep.f1:.17g}\t{rep.ndcg:.17g}\t{rep.cover_ratio:.17g}")
        print(f"{args.param}={v} {rep.to_text()}")
    dest = out / f"sweep_{args.param}.tsv"
    persistence.atomic_write(dest, "#dynak-sweep v1\n" + "\n".join(rows) + "\n")
    print(f"wrote {dest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynak",
        description="Train and evaluate dynamic-K recommenders with personalized boundaries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the key=value config file")
        p.add_argument("overrides", nargs="*", metavar="key=value",
                       help="config overrides applied after the file")

    p = sub.add_parser("prep", help="parse, filter and split a raw dataset")
    common(p)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("train", help="run the joint SGD training")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on the prepared split")
    common(p)
    p.add_argument("--model", default=None, help="model file (default: <out.dir>/model.txt)")
    p.add_argument("--mode", choices=("dynamic", "fixed"), default="dynamic")
    p.add_argument("--n", type=int, default=None, help="fixed-N size / dynamic cap override")
    p.add_argument("--range", default=None, metavar="LO:HI",
                   help="fixed mode: one report per N in LO..HI")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("recommend", help="dump recommendation lists for test users")
    common(p)
    p.add_argument("--model", default=None)
    p.add_argument("--mode", choices=("dynamic", "fixed"), default="dynamic")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--user", type=int, default=None, help="restrict to one user id")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("sweep", help="retrain and evaluate across one hyperparameter")
    common(p)
    p.add_argument("--param", required=True, choices=SWEEPABLE)
    p.add_argument("--values", required=True, help="comma-separated value list")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DynakError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
