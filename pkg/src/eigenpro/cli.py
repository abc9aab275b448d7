"""Command-line interface: ``eigenpro {train,eval,bench,analyze,reach-demo}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data or I/O error,
3 numeric failure (divergence, degenerate spectrum).

Training options can come from a ``key = value`` config file (``--config``);
command-line flags win on conflict.  Keys are the :class:`TrainConfig` field
names plus ``kernel`` / ``bandwidth``.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import fields, replace

import numpy as np
from threadpoolctl import threadpool_limits

from .data import load_csv, load_libsvm, to_classification
from .eigensolver import exact_eigensystem, kernel_eigensystem, rsvd
from .errors import DataError, DegenerateInputError, DivergenceError, InvalidInputError
from .kernels import KernelSpec
from .modelio import load_model, save_model
from .optimizer import TrainConfig, c_error, mse, predict, train
from .reach import heaviside_demo, spectrum_report
from .seeding import derive_rng

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("eigenpro")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- config

_INT_KEYS = {"k", "M", "m", "epochs", "d", "seed"}
_FLOAT_KEYS = {"delta", "bandwidth", "tau", "target_loss"}
_STR_KEYS = {"mode", "kernel", "eta", "solver", "cache"}
CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def _coerce(key, value):
    if key not in CONFIG_KEYS:
        raise UsageError(f"unknown config key {key!r}")
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return None if str(value).lower() in ("", "none") else float(value)
    except ValueError:
        raise UsageError(f"config key {key!r} needs a number, got {value!r}") from None
    if key == "eta" and value not in ("auto_bound", "auto_heuristic"):
        try:
            return float(value)
        except ValueError:
            raise UsageError(f"eta must be auto_bound, auto_heuristic or a number, got {value!r}") from None
    return value


def read_config_file(path) -> dict:
    out = {}
    try:
        with open(path) as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise UsageError(f"{path}:{line_no}: expected key = value")
                out[key.strip()] = _coerce(key.strip(), value.strip())
    except OSError as exc:
        raise DataError(f"cannot read config file: {exc.strerror}", path) from None
    return out


def parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise UsageError(f"override {pair!r} is not key=value")
        out[key.strip()] = _coerce(key.strip(), value.strip())
    return out


def build_config(settings: dict) -> TrainConfig:
    settings = {k: _coerce(k, v) if isinstance(v, str) else v for k, v in settings.items()}
    kernel = KernelSpec(settings.pop("kernel", "gaussian"), settings.pop("bandwidth", 1.0))
    names = {f.name for f in fields(TrainConfig)}
    return TrainConfig(kernel=kernel, **{k: v for k, v in settings.items() if k in names})


def _settings(args) -> dict:
    merged = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = _coerce(key, value) if isinstance(value, str) else value
    return merged


def _add_config_flags(p, target_flag=True):
    p.add_argument("--config", help="key = value config file (flags win)")
    p.add_argument("--mode", choices=("primal_kernel", "rff", "rbf", "linear"))
    p.add_argument("--kernel", choices=("gaussian", "laplace", "cauchy"))
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--k", type=int, help="number of eigen-directions (0 = plain SGD)")
    p.add_argument("--M", type=int, help="eigensolver subsample size")
    p.add_argument("--m", type=int, help="mini-batch size")
    p.add_argument("--tau", type=float, help="damping factor in (0, 1]")
    p.add_argument("--eta", help="auto_bound, auto_heuristic or a number")
    p.add_argument("--epochs", type=int)
    p.add_argument("--d", type=int, help="feature count for rff / rbf")
    p.add_argument("--seed", type=int)
    p.add_argument("--delta", type=float, help="failure probability for auto_bound")
    p.add_argument("--solver", choices=("rsvd", "nsvd", "exact"))
    if target_flag:
        p.add_argument("--target-loss", dest="target_loss", type=float,
                       help="stop once the train loss reaches this value")
    p.add_argument("--cache", choices=("auto", "always", "never"))


def _add_data_flags(p):
    p.add_argument("--format", choices=("csv", "libsvm"), default="csv")
    p.add_argument("--target-columns", default="-1",
                   help="comma-separated target column indices or header names")
    p.add_argument("--header", action="store_true", help="CSV files have a header row")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--task", choices=("regression", "classification_onehot"), default="regression")


def _load(args, path, classes=None):
    if args.format == "libsvm":
        ds = load_libsvm(path)
    else:
        cols = [c.strip() for c in args.target_columns.split(",") if c.strip()]
        ds = load_csv(path, cols, args.header, args.delimiter)
    if args.task == "classification_onehot":
        ds = to_classification(ds, classes)
    return ds


def _targets(ds, vector):
    return ds.Y[:, 0] if vector and ds.Y.shape[1] == 1 else ds.Y


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write output: {exc.strerror}", path) from None


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------- commands

def cmd_train(args) -> int:
    config = build_config(_settings(args))
    ds = _load(args, args.train)
    eval_set = None
    if args.eval:
        ev = _load(args, args.eval, ds.classes or None)
        eval_set = (ev.X, _targets(ev, True))
    model, report = train(ds.X, _targets(ds, True), config, eval_set, args.task)
    save_model(args.model, model, config.mode, config.seed, args.task, ds.classes)
    _write_text(args.report, report.to_csv(timing=args.timing))
    log.info("trained %d epochs, final train loss %.6g", len(report), report.final_loss)
    return EXIT_OK


def cmd_eval(args) -> int:
    saved = load_model(args.model)
    args.task = saved.task
    ds = _load(args, args.data, saved.classes or None)
    pred = predict(saved.model, ds.X)
    Y = _targets(ds, np.ndim(saved.model.alpha) == 1)
    rows = [("loss", repr(float(np.sum((pred - Y) ** 2) / ds.n))), ("mse", repr(mse(pred, Y)))]
    if saved.task == "classification_onehot":
        rows.append(("c_error", repr(c_error(pred, Y))))
    _write_text(args.out, _csv_text(("metric", "value"), rows))
    if args.predictions:
        P = pred.reshape(ds.n, -1)
        _write_text(args.predictions, _csv_text(
            [f"pred{j}" for j in range(P.shape[1])], [[repr(v) for v in r] for r in P.tolist()]))
    return EXIT_OK


def cmd_bench(args) -> int:
    base = _settings(args)
    a = {**base, "k": 0} if not (args.config_a or args.a) else dict(base)
    if args.config_a:
        a.update(read_config_file(args.config_a))
    a.update(parse_overrides(args.a))
    b = dict(base)
    if args.config_b:
        b.update(read_config_file(args.config_b))
    b.update(parse_overrides(args.b))
    ds = _load(args, args.data)
    y = _targets(ds, True)
    rows, epochs = [], []
    for name, settings in (("A", a), ("B", b)):
        config = replace(build_config(settings), target_loss=args.bench_target)
        _, report = train(ds.X, y, config, task=args.task)
        e = report.epochs_to_target(args.bench_target)
        epochs.append(e)
        secs = f"{report.seconds_to(e):.6f}" if (args.timing and e is not None) else ""
        rows.append((name, "not reached" if e is None else e, secs, repr(report.final_loss)))
    ea, eb = epochs
    if ea is None or eb is None:
        ratio = "n/a"
    elif eb == 0:
        ratio = repr(1.0) if ea == 0 else "inf"
    else:
        ratio = repr(ea / eb)
    rows.append(("ratio", ratio, "", ""))
    _write_text(args.out, _csv_text(
        ("config", "epochs_to_target", "seconds_to_target", "final_train_loss"), rows))
    return EXIT_OK


def cmd_analyze(args) -> int:
    ks = [int(v) for v in args.k_list.split(",") if v.strip()]
    if not ks or min(ks) < 0:
        raise UsageError("--k-list needs non-negative integers")
    ds = _load(args, args.data)
    M = min(args.M, ds.n)
    kmax = max(ks)
    if args.mode == "primal_kernel":
        spec = KernelSpec(args.kernel, args.bandwidth)
        es = kernel_eigensystem(spec, ds.X, kmax, M, args.seed)
    elif args.solver == "exact":
        X = ds.X if M == ds.n else ds.X[np.sort(
            derive_rng(args.seed, "subsample").choice(ds.n, M, replace=False))]
        es = exact_eigensystem(X.T @ X / M, kmax, M)
    else:
        es = rsvd(ds.X, kmax, M, args.seed)
    rows = [(r.k, r.index, repr(r.eigenvalue), repr(r.ratio)) for r in spectrum_report(es, ks)]
    _write_text(args.out, _csv_text(("k", "index", "eigenvalue", "ratio"), rows))
    return EXIT_OK


def cmd_reach_demo(args) -> int:
    ts = [int(float(v)) for v in args.t_list.split(",") if v.strip()]
    if len(ts) != 2:
        raise UsageError("--t-list needs exactly two iteration counts")
    res = heaviside_demo(args.s, ts, args.J)
    row = (repr(res.s), res.J, ts[0], ts[1], repr(float(res.gd_errors[0])),
           repr(float(res.gd_errors[1])), repr(res.truncation_error))
    _write_text(args.out, _csv_text(("s", "J", "t1", "t2", "gd_t1", "gd_t2", "truncation"), [row]))
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eigenpro", description="Preconditioned SGD for kernel least squares.")
    p.add_argument("--threads", type=int, default=None,
                   help="cap BLAS threads (default: library default, all cores)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    t = sub.add_parser("train", help="train a model and write a per-epoch report")
    t.add_argument("--train", required=True, help="training data file")
    t.add_argument("--eval", help="evaluation data file")
    t.add_argument("--model", required=True, help="output model file")
    t.add_argument("--report", required=True, help="output report CSV ('-' for stdout)")
    t.add_argument("--timing", action="store_true", help="fill the seconds column")
    _add_config_flags(t)
    _add_data_flags(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a saved model")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--out", default="-", help="metrics CSV ('-' for stdout)")
    e.add_argument("--predictions", help="write predictions CSV here")
    _add_data_flags(e)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="epochs-to-target comparison of two configs")
    b.add_argument("--data", required=True)
    b.add_argument("--target-loss", dest="bench_target", type=float, required=True)
    b.add_argument("--config-a")
    b.add_argument("--config-b")
    b.add_argument("--a", action="append", metavar="KEY=VALUE", help="override for config A")
    b.add_argument("--b", action="append", metavar="KEY=VALUE", help="override for config B")
    b.add_argument("--out", default="-")
    b.add_argument("--timing", action="store_true", help="fill the seconds column")
    _add_config_flags(b, target_flag=False)
    _add_data_flags(b)
    b.set_defaults(func=cmd_bench)

    a = sub.add_parser("analyze", help="eigenvalue decay report")
    a.add_argument("--data", required=True)
    a.add_argument("--mode", choices=("primal_kernel", "linear"), default="primal_kernel")
    a.add_argument("--kernel", choices=("gaussian", "laplace", "cauchy"), default="gaussian")
    a.add_argument("--bandwidth", type=float, default=1.0)
    a.add_argument("--k-list", dest="k_list", default="10,20,40,80,160")
    a.add_argument("--M", type=int, default=4800)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--solver", choices=("rsvd", "exact"), default="rsvd")
    a.add_argument("--out", default="-")
    _add_data_flags(a)
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("reach-demo", help="gradient-descent reconstruction of a step function")
    r.add_argument("--s", type=float, default=0.5)
    r.add_argument("--t-list", dest="t_list", default="100,1000000")
    r.add_argument("--J", type=int, default=200)
    r.add_argument("--out", default="-")
    r.set_defaults(func=cmd_reach_demo)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with threadpool_limits(limits=args.threads):
            return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, DegenerateInputError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidInputError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
