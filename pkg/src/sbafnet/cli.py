"""Command-line entry point: ``sbafnet <command> [flags]``.

Commands: synth, train, eval, gradcheck, emit-curve, bench-approx. Tabular
output is TSV with a header row.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .activation import (
    ActivationSpec,
    Kind,
    sbaf,
    sbaf_derivative,
    sbaf_derivative_flipped,
    sbaf_second_derivative,
)
from .approx import benchmark
from .dataio import Dataset, apply_normalization, format_csv, load_csv, normalize, split, synthesize
from .errors import SBAFError
from .gradcheck import DEFAULT_STEP, check_network, random_instance
from .metrics import evaluate
from .network import TrainConfig, init_network, load_network, save_network, train

log = logging.getLogger("sbafnet")

DEFAULT_SEGMENTS = ",".join(str(2**i) for i in range(11))


# argparse ``type=`` helpers; ArgumentTypeError messages get the flag name prepended


def _float_in(lo, hi, lo_open=False, hi_open=False):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        bad_lo = v <= lo if lo_open else v < lo
        bad_hi = v >= hi if hi_open else v > hi
        if not math.isfinite(v) or bad_lo or bad_hi:
            raise argparse.ArgumentTypeError(
                f"{text} is outside {'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}"
            )
        return v

    return parse


def _int_at_least(lo):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v

    return parse


_positive_int = _int_at_least(1)


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return v


def _int_list(text):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _layers(text):
    values = _int_list(text)
    if len(values) < 2:
        raise argparse.ArgumentTypeError("need at least an input and an output size")
    return values


def _sweep(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}")
    unit = _float_in(0.0, 1.0)
    a, b = unit(parts[0]), unit(parts[1])
    n = _positive_int(parts[2])
    if n == 1 and a != b:
        raise argparse.ArgumentTypeError("a sweep over a range needs n >= 2")
    return a, b, n


_positive = _float_in(0.0, math.inf, lo_open=True, hi_open=True)


def _add_activation_flags(p, kinds=True):
    if kinds:
        p.add_argument("--activation", choices=[k.value for k in Kind], default="sbaf")
    p.add_argument("--alpha", type=_float_in(0.0, 1.0), default=0.5, help="SBAF exponent (default 0.5)")
    p.add_argument("--k", type=_float_in(0.0, math.inf, hi_open=True), default=1.0, help="SBAF scale (default 1)")
    p.add_argument(
        "--eps", type=_float_in(0.0, 0.5, lo_open=True, hi_open=True), default=1e-6, help="clamp margin (default 1e-6)"
    )


def _spec(args) -> ActivationSpec:
    return ActivationSpec(Kind(getattr(args, "activation", "sbaf")), args.k, args.alpha, args.eps)


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return io.open(path, "w", encoding="utf-8", newline="\n")


def _write_text(path, text: str) -> None:
    fh = _open_out(path)
    try:
        fh.write(text)
    finally:
        if fh is not sys.stdout:
            fh.close()


# commands


def cmd_synth(args) -> int:
    ds = synthesize(args.kind, args.n, args.seed, overlap=args.overlap)
    _write_text(args.out, format_csv(ds, args.label))
    return 0


def _meta_path(model_path) -> Path:
    return Path(str(model_path) + ".meta.json")


def cmd_train(args) -> int:
    raw = load_csv(args.data, args.label)
    ds = normalize(raw)
    if args.layers[0] != ds.n_features:
        raise SBAFError(f"--layers input width {args.layers[0]} does not match {ds.n_features} features")
    if args.layers[-1] != ds.n_classes:
        raise SBAFError(f"--layers output width {args.layers[-1]} does not match {ds.n_classes} classes")
    if args.train_fraction < 1.0:
        train_ds, val_ds = split(ds, args.train_fraction, args.seed)
    else:
        train_ds, val_ds = ds, None

    cfg = TrainConfig(args.lr, args.epochs, args.seed, shuffle=not args.no_shuffle)
    net = init_network(args.layers, _spec(args), seed=args.seed)
    t0 = time.perf_counter()
    net, history = train(net, train_ds.features, train_ds.labels, cfg)
    log.info("trained %d epochs in %.2fs", cfg.epochs, time.perf_counter() - t0)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model_path = Path(args.model) if args.model else out_dir / "model.sbafnet"
    save_network(net, model_path)
    meta = {
        "label_column": args.label,
        "feature_names": ds.feature_names,
        "class_names": ds.class_names,
        "normalization": ds.normalization.tolist(),
    }
    _meta_path(model_path).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    lines = ["epoch\tmean_loss"] + [f"{i}\t{_fmt(v)}" for i, v in enumerate(history, start=1)]
    (out_dir / "loss_history.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    print(f"model\t{model_path}")
    print(f"train_accuracy\t{evaluate(net, train_ds).accuracy:.6f}")
    if val_ds is not None:
        print(f"validation_accuracy\t{evaluate(net, val_ds).accuracy:.6f}")
    print(f"final_mean_loss\t{_fmt(history[-1])}")
    return 0


def cmd_eval(args) -> int:
    net = load_network(args.model)
    raw = load_csv(args.data, args.label)
    meta_path = Path(args.meta) if args.meta else _meta_path(args.model)
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        ds = normalize(raw, class_names=meta["class_names"])
        norm = np.asarray(meta["normalization"], dtype=np.float64)
        ds = Dataset(apply_normalization(raw.features, norm), ds.labels, ds.class_names, norm, ds.feature_names)
    else:
        print(f"warning: no metadata at {meta_path}; normalising the data on its own range", file=sys.stderr)
        ds = normalize(raw)
    report = evaluate(net, ds)
    _write_text(args.out, report.to_tsv() if args.tsv else report.to_text())
    return 0


def cmd_gradcheck(args) -> int:
    spec = _spec(args)
    net, x, target = random_instance(args.layers, args.seed, spec)
    dfn = None
    if args.flip_sign:
        if spec.kind is not Kind.SBAF:
            raise SBAFError("--flip-sign only applies to SBAF")
        dfn = sbaf_derivative_flipped
    report = check_network(net, x, target, h=args.h, derivative_fn=dfn)
    _write_text(args.out, report.to_tsv())
    if report.straddled:
        print("excluded (probe straddles clamp boundary): " + " ".join(report.straddled), file=sys.stderr)
    ok = report.max_rel_error <= args.threshold
    print(
        f"max_rel_error {report.max_rel_error:.3e} {'<=' if ok else '>'} threshold {args.threshold:g}",
        file=sys.stderr,
    )
    return 0 if ok else 1


def _grid(spec: ActivationSpec, n: int) -> np.ndarray:
    # symmetric construction so the midpoint is exactly 0.5 for odd n
    i = np.arange(n)
    left = spec.lower + (0.5 - spec.lower) * (2 * i / (n - 1))
    right = spec.upper - (spec.upper - 0.5) * (2 * (n - 1 - i) / (n - 1))
    return np.where(2 * i <= n - 1, left, right)


def cmd_emit_curve(args) -> int:
    base = _spec(args)
    grid = _grid(base, args.grid)
    if args.alpha_sweep:
        a, b, n = args.alpha_sweep
        alphas = np.linspace(a, b, n) if n > 1 else np.array([a])
        lines = ["alpha\tx\ty"]
        for alpha in alphas:
            spec = ActivationSpec(Kind.SBAF, base.k, float(alpha), base.clamp_margin)
            ys = sbaf(grid, spec)
            lines += [f"{_fmt(alpha)}\t{_fmt(x)}\t{_fmt(y)}" for x, y in zip(grid, ys)]
    else:
        ys = sbaf(grid, base)
        d1 = sbaf_derivative(grid, base)
        d2 = sbaf_second_derivative(grid, base)
        lines = ["x\ty\tdydx\td2ydx2"]
        lines += [f"{_fmt(x)}\t{_fmt(y)}\t{_fmt(p)}\t{_fmt(q)}" for x, y, p, q in zip(grid, ys, d1, d2)]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_bench_approx(args) -> int:
    rows = benchmark(_spec(args), args.segments, args.grid, repeats=args.repeats)
    lines = ["segments\tmax_err_g\tmax_err_y\tns_per_eval_exact\tns_per_eval_approx"]
    for n, err_g, err_y, ns_exact, ns_approx in rows:
        lines.append(f"{n}\t{_fmt(err_g)}\t{_fmt(err_y)}\t{ns_exact:.3f}\t{ns_approx:.3f}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbafnet", description="SBAF neural networks from scratch.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    p.add_argument("--kind", choices=["blobs2", "habitability3"], required=True)
    p.add_argument("--n", type=_positive_int, required=True, help="number of samples")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--overlap", type=_float_in(0.0, 1.0), default=0.5, help="habitability3 psychro/meso overlap")
    p.add_argument("--label", default="class", help="name of the label column")
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a network on a CSV file")
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True, help="label column name")
    p.add_argument("--layers", type=_layers, required=True, help="comma-separated sizes, e.g. 2,4,2")
    _add_activation_flags(p)
    p.add_argument("--lr", type=_positive, default=0.05, help="learning rate (default 0.05)")
    p.add_argument("--epochs", type=_positive_int, default=500)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--no-shuffle", action="store_true", help="visit samples in file order")
    p.add_argument(
        "--train-fraction",
        type=_float_in(0.0, 1.0, lo_open=True),
        default=0.8,
        help="stratified train share; 1 trains on everything (default 0.8)",
    )
    p.add_argument("--out-dir", default=".", help="directory for loss_history.tsv (default .)")
    p.add_argument("--model", help="model path (default OUT_DIR/model.sbafnet)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model on a CSV file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--meta", help="normalisation metadata (default MODEL.meta.json)")
    p.add_argument("--tsv", action="store_true", help="TSV instead of aligned text")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="compare backprop gradients with finite differences")
    p.add_argument("--layers", type=_layers, default=[2, 2, 2])
    _add_activation_flags(p)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--h", type=_positive, default=DEFAULT_STEP, help="finite-difference step")
    p.add_argument("--threshold", type=_positive, default=1e-6, help="max relative error for exit 0")
    p.add_argument("--flip-sign", action="store_true", help="use the sign-reversed SBAF derivative")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("emit-curve", help="tabulate SBAF and its derivatives")
    _add_activation_flags(p, kinds=False)
    p.add_argument("--grid", type=_int_at_least(2), default=101, help="grid points (default 101)")
    p.add_argument("--alpha-sweep", type=_sweep, help="a:b:n, emit a long-format alpha/x/y surface")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_emit_curve)

    p = sub.add_parser("bench-approx", help="accuracy and speed of the piecewise-linear kernel")
    _add_activation_flags(p, kinds=False)
    p.add_argument("--segments", type=_int_list, default=_int_list(DEFAULT_SEGMENTS))
    p.add_argument("--grid", type=_int_at_least(2), default=10001, help="grid points (default 10001)")
    p.add_argument("--repeats", type=_positive_int, default=5, help="timing repeats (best is kept)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench_approx)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (SBAFError, ValueError, OSError) as exc:
        print(f"sbafnet {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
