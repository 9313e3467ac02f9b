"""Command line interface: ``ssma {toy,align,project,synthesize,experiment,eval-kappa}``.

Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import traceback
from collections import Counter
from pathlib import Path

import numpy as np

from . import io
from .alignment import AlignmentParams, fit_and_select, project, synthesize
from .errors import DataError, SSMAError
from .evaluate import (
    DEFAULT_C_GRID,
    METHODS,
    ConfusionMatrix,
    LinearClassifier,
    cohen_kappa,
    confusion_matrix,
    run_experiment,
)
from .synth import SETTINGS, toy_dataset

log = logging.getLogger("ssma")


def _summary_stream(output):
    return sys.stderr if output in (None, "-") else sys.stdout


def _alignment_args(p: argparse.ArgumentParser, with_dims=True):
    p.add_argument("--mu", type=float, default=1.0, help="weight of the geometry term (default 1)")
    p.add_argument("--k", type=int, default=9, help="neighbors in the per-domain kNN graphs (default 9)")
    if with_dims:
        p.add_argument("--dims", type=int, default=None, help="latent dimension; cross-validated when omitted")
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True,
                   help="per-domain feature standardization (default on)")


def cmd_toy(args) -> int:
    if args.classes < 2:
        return _usage(args, "--classes must be >= 2")
    ds = toy_dataset(args.setting, args.n_per_class, args.classes, args.noise, args.seed,
                     args.scale, args.rotation, args.translation)
    io.write_dataset(ds, args.output)
    out = _summary_stream(args.output)
    print(f"N={ds.n_samples} dims={ds.dims} classes={ds.class_count}", file=out)
    for dom in ds.domains:
        counts = Counter(dom.labels[dom.labeled].tolist())
        print(f"  domain {dom.id}: n={dom.n_samples} " + " ".join(f"c{c}={counts[c]}" for c in sorted(counts)), file=out)
    return 0


def cmd_align(args) -> int:
    ds = io.read_dataset(args.dataset)
    params = AlignmentParams(mu=args.mu, k=args.k, standardize=args.standardize, dims=args.dims)
    factory = lambda: LinearClassifier((DEFAULT_C_GRID[0],), args.folds, args.seed)  # noqa: E731
    model = fit_and_select(ds, params, factory, args.folds, args.seed)
    io.write_model(model, args.output)
    out = _summary_stream(args.output)
    lam = model.eigenvalues
    print(f"F: {model.F.shape[0]}x{model.F.shape[1]} blocks={list(model.domain_dims)} dims={model.dims}", file=out)
    print(f"eigenvalues: min={lam.min():.6g} max={lam.max():.6g} first={', '.join(f'{v:.6g}' for v in lam[:5])}", file=out)
    print(f"ridge: {model.ridge_used:.6g}  mu: {model.params.mu:g}", file=out)
    return 0


def cmd_project(args) -> int:
    model = io.read_model(args.model)
    ds = io.read_dataset(args.dataset)
    r = args.dims or model.dims
    rows = []
    for dom in ds.domains:
        if args.domain and dom.id != args.domain:
            continue
        Z = project(model, dom.id, dom.features, r)
        labels = dom.label_list()
        rows += [(j, dom.id, labels[j], Z[:, j]) for j in range(dom.n_samples)]
    with io._open_out(args.output) as fh:
        fh.write(io.format_coordinates(rows, r, "z"))
    return 0


def cmd_synthesize(args) -> int:
    model = io.read_model(args.model)
    ds = io.read_dataset(args.dataset)
    dom = ds.domain(args.src)
    Y = synthesize(model, args.src, args.dst, dom.features)
    labels = dom.label_list()
    extra = ()
    if args.src == args.dst:
        err = np.linalg.norm(Y - dom.features, axis=0) / np.maximum(np.linalg.norm(dom.features, axis=0), 1e-300)
        rows = [(j, dom.id, labels[j], np.r_[Y[:, j], err[j]]) for j in range(dom.n_samples)]
        extra = ("recon_error",)
    else:
        rows = [(j, dom.id, labels[j], Y[:, j]) for j in range(dom.n_samples)]
    with io._open_out(args.output) as fh:
        fh.write(io.format_coordinates(rows, Y.shape[0], "f", extra))
    return 0


def cmd_experiment(args) -> int:
    config = io.read_config(args.config)
    overrides = {
        "seed": args.seed,
        "methods": args.methods.split(",") if args.methods else None,
        "test_fraction": args.test_fraction,
        "mu": args.mu,
        "k": args.k,
        "dims": args.dims,
        "standardize": args.standardize,
    }
    data = config.to_dict() | {k: v for k, v in overrides.items() if v is not None}
    if data.get("dataset") and not Path(data["dataset"]).is_absolute():
        data["dataset"] = str(Path(args.config).parent / data["dataset"])
    config = type(config).from_dict(data)
    result = run_experiment(config)
    io.write_results(result, args.output)
    out = _summary_stream(args.output)
    print("method  role    budget  mean_kappa", file=out)
    for method, role, budget, k in result.summary():
        print(f"{method:<7} {role:<7} {budget:>6}  {k:.4f}", file=out)
    return 0


def cmd_eval_kappa(args) -> int:
    text = Path(args.input).read_text() if args.input != "-" else sys.stdin.read()
    rows = [line.split(",") for line in text.splitlines() if line.strip() and not line.startswith("#")]
    try:
        if args.confusion:
            cm = ConfusionMatrix(np.array([[int(v) for v in r] for r in rows]))
        else:
            if rows and not rows[0][0].strip().lstrip("-").isdigit():
                rows = rows[1:]  # header
            y_true = [int(r[0]) for r in rows]
            y_pred = [int(r[1]) for r in rows]
            cm = confusion_matrix(y_true, y_pred)
    except (ValueError, IndexError) as exc:
        raise DataError(f"{args.input}: cannot parse ({exc})") from None
    print(f"kappa={cohen_kappa(cm):.6f} accuracy={cm.accuracy():.6f} n={cm.total}")
    return 0


def _usage(args, message: str) -> int:
    args.parser.print_usage(sys.stderr)
    print(f"{args.parser.prog}: error: {message}", file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssma", description="Semisupervised manifold alignment.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toy", help="generate a two-spiral dataset")
    p.add_argument("--setting", choices=sorted(SETTINGS), default="sr",
                   help="deformation of domain 2: none, s (scale), sr (+rotation), srt (+translation)")
    p.add_argument("--n-per-class", type=int, default=667)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--scale", type=float, default=None)
    p.add_argument("--rotation", type=float, default=None, help="degrees")
    p.add_argument("--translation", type=float, nargs=2, default=None, metavar=("TX", "TY"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_toy, parser=p)

    p = sub.add_parser("align", help="fit projectors on a dataset file")
    p.add_argument("dataset")
    _alignment_args(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_align, parser=p)

    p = sub.add_parser("project", help="latent coordinates of every sample")
    p.add_argument("model")
    p.add_argument("dataset")
    p.add_argument("--dims", type=int, default=None)
    p.add_argument("--domain", default=None, help="only this domain")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_project, parser=p)

    p = sub.add_parser("synthesize", help="map samples of one domain into another domain's features")
    p.add_argument("model")
    p.add_argument("dataset")
    p.add_argument("--src", required=True)
    p.add_argument("--dst", required=True)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_synthesize, parser=p)

    p = sub.add_parser("experiment", help="labeled-budget sweep from a JSON config")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--methods", default=None, help=f"comma list from {','.join(METHODS)}")
    p.add_argument("--test-fraction", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dims", type=int, default=None)
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_experiment, parser=p)

    p = sub.add_parser("eval-kappa", help="Cohen's kappa of 'true,pred' rows or a confusion matrix")
    p.add_argument("input")
    p.add_argument("--confusion", action="store_true", help="input is a comma-separated confusion matrix")
    p.set_defaults(func=cmd_eval_kappa, parser=p)
    return parser


def _provenance(exc: BaseException) -> str:
    frames = [f for f in traceback.extract_tb(exc.__traceback__) if "ssma" in Path(f.filename).parts]
    return Path(frames[-1].filename).stem if frames else "ssma"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except SSMAError as exc:
        print(f"error [{_provenance(exc)}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
