"""Command line: evolve, predict, evaluate, reproduce-paper, plot.

Exit status is 0 on success, 2 for usage or input errors and 1 for
anything unexpected.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import fields

import numpy as np

from .dataset import DatasetError, load_csv, table1
from .evolver import ConfigError, EvolutionConfig, TrainingSet, evolve
from .metrics import MetricDomainError, MetricsReport, mape, r2_residual, r_squared, rmse
from .modelfile import ModelFile, ModelFileError, config_digest, digest
from .reference import predict_ucs_eq2
from .svgplot import scatter_svg

MAPE_BAND = (4.2, 7.2)
R2_BAND = (0.87, 0.97)


class InputError(Exception):
    """Bad user input; reported with exit status 2."""


# ------------------------------------------------------------ run config

_LIST_KEYS = {"function_set"}
_PAIR_KEYS = {"rnc_range"}


def parse_run_config(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines into EvolutionConfig keyword arguments."""
    known = {f.name: f for f in fields(EvolutionConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise InputError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _convert(key, value)
        except ValueError as exc:
            raise InputError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    return out


def _convert(key: str, value: str):
    if key in _LIST_KEYS:
        items = [s for s in value.replace(",", " ").split() if s]
        return tuple(items)
    if key in _PAIR_KEYS:
        lo, hi = (float(s) for s in value.replace(",", " ").split())
        return (lo, hi)
    if key == "linking":
        return value
    if key == "rnc_enabled":
        low = value.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"not a boolean: {value!r}")
        return low in ("true", "1", "yes")
    if key == "target_fitness":
        return None if value.lower() in ("", "none") else float(value)
    default = EvolutionConfig.__dataclass_fields__[key].default
    if isinstance(default, int):
        return int(value)
    return float(value)


# -------------------------------------------------------------- helpers

def _load_model(path) -> ModelFile:
    try:
        return ModelFile.load(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except ModelFileError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_data(path, require_target=False):
    try:
        return load_csv(path, require_target=require_target)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except DatasetError as exc:
        raise InputError(f"{path}: {exc}") from None


def _predict(model: ModelFile, ds) -> np.ndarray:
    feats = ds.features()
    missing = [t for t in model.terminals if t not in feats]
    if missing:
        raise InputError(f"model uses unknown inputs {missing}")
    pred = np.asarray(model.predict(feats), dtype=np.float64)
    return np.broadcast_to(pred, (len(ds),))


def _safe(metric, y, p):
    try:
        return metric(y, p)
    except MetricDomainError:
        return float("nan")


def metrics_report(y, p) -> MetricsReport:
    return MetricsReport(mape=_safe(mape, y, p), r2=_safe(r_squared, y, p),
                         rmse=_safe(rmse, y, p), r2_residual=_safe(r2_residual, y, p))


# ------------------------------------------------------------- commands

def cmd_evolve(args, out) -> int:
    config_kw = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise InputError(f"{args.config}: {exc.strerror}") from None
        config_kw = parse_run_config(text, args.config)
    if args.seed is not None:
        config_kw["seed"] = args.seed
    try:
        config = EvolutionConfig(**config_kw)
    except (ConfigError, TypeError) as exc:
        raise InputError(f"{args.config or 'config'}: {exc}") from None

    ds = _load_data(args.train, require_target=True)
    if len(ds) == 0:
        raise InputError(f"{args.train}: no data rows")
    with open(args.train, "rb") as f:
        train_digest = digest(f.read())

    print("gen,best_fitness", file=out)
    result = evolve(config, TrainingSet.from_dataset(ds),
                    callback=lambda g, b: print(f"{g},{b!r}", file=out))
    model = ModelFile.from_chromosome(
        result.best, config.functions, ("n", "v"),
        {"seed": config.seed, "config_digest": config_digest(config),
         "train_digest": train_digest},
    )
    model.save(args.out)
    return 0


def cmd_predict(args, out) -> int:
    model = _load_model(args.model)
    ds = _load_data(args.input)
    pred = _predict(model, ds) if len(ds) else np.empty(0)

    with open(args.input, encoding="utf-8-sig", newline="") as f:
        rows = [r for r in csv.reader(f)]
    header, body = rows[0], [r for r in rows[1:] if any(c.strip() for c in r)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([h.strip() for h in header] + ["ucs_pred_mpa"])
    for row, p in zip(body, pred):
        w.writerow([c.strip() for c in row] + [repr(float(p))])
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())
    return 0


def cmd_evaluate(args, out) -> int:
    model = _load_model(args.model)
    ds = _load_data(args.data, require_target=True)
    if len(ds) == 0:
        raise InputError(f"{args.data}: no data rows")
    report = metrics_report(ds.target(), _predict(model, ds))
    print(report.to_json(), file=out)
    return 0


def cmd_reproduce_paper(args, out) -> int:
    ds = table1()
    feats = ds.features()
    report = metrics_report(ds.target(), predict_ucs_eq2(feats["n"], feats["v"]))
    checks = [
        ("mape", report.mape, MAPE_BAND),
        ("r2", report.r2, R2_BAND),
    ]
    passed = all(lo <= v <= hi for _, v, (lo, hi) in checks)
    print(report.to_json(), file=out)
    if not args.json:
        for name, value, (lo, hi) in checks:
            ok = "PASS" if lo <= value <= hi else "FAIL"
            print(f"{ok} {name} = {value:.6f} (band [{lo}, {hi}])", file=out)
        print("PASS" if passed else "FAIL", file=out)
    return 0 if passed else 1


def cmd_plot(args, out) -> int:
    model = _load_model(args.model)
    ds = _load_data(args.data, require_target=True)
    if len(ds) == 0:
        raise InputError(f"{args.data}: no data rows")
    y = ds.target()
    p = _predict(model, ds)
    r2 = _safe(r_squared, y, p)
    svg = scatter_svg(y, p, None if np.isnan(r2) else r2)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        f.write(svg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gepucs", description="Gene expression programming for rock UCS models."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="evolve a model from training data")
    p.add_argument("--train", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("predict", help="append model predictions to a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="print MAPE, R^2 and RMSE as JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("reproduce-paper",
                       help="score the published formula on the bundled test set")
    p.add_argument("--json", action="store_true", help="print the metrics JSON only")
    p.set_defaults(func=cmd_reproduce_paper)

    p = sub.add_parser("plot", help="write a measured-vs-predicted SVG scattergram")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"gepucs {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"gepucs {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
