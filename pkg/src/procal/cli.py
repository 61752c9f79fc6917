"""Command-line entry point.

Subcommands: ``perturb``, ``attack``, ``evaluate``, ``bench``, plus ``synth``
(write a synthetic blob dataset) and ``replay`` (re-run a command from its
manifest).  Exit codes: 0 success, 2 usage, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .attacks import METRIC_COLUMNS, run_attacks
from .baselines import CondensationConfig
from .dataset import Dataset, atomic_write_text, format_value, load_csv, make_blobs, to_csv_text
from .errors import ConfigError, NoLabels, NonConvergenceWarning, ProcalError, ProvenanceMissing
from .methods import MethodSpec
from .perturb import PerturbConfig, PerturbedDataset, perturb_static
from .reports import grid_csv, grid_text
from .seeding import derive_seed
from .stream import csv_source, line_source, open_stream, throughput_probe
from .utility import CVConfig, utility_comparison

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


# -- manifest ------------------------------------------------------------------

def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, command: str, argv: list[str], args: argparse.Namespace,
                   inputs: list, outputs: list, seconds: float, extra: dict | None = None) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    items = [
        ("command", command),
        ("argv", json.dumps(argv)),
        ("config", json.dumps(config, sort_keys=True)),
        ("seed", str(getattr(args, "seed", ""))),
        ("version", __version__),
        ("backend", _backend.NAME),
        ("inputs", json.dumps([str(p) for p in inputs])),
        ("outputs", json.dumps([str(p) for p in outputs])),
        ("cwd", os.getcwd()),
    ]
    for p in outputs:
        items.append((f"sha256:{p}", _sha256(p)))
    for k, v in (extra or {}).items():
        items.append((k, v if isinstance(v, str) else json.dumps(v)))
    items.append(("started_utc", datetime.now(timezone.utc).isoformat(timespec="seconds")))
    items.append(("wall_seconds", f"{seconds:.6f}"))
    atomic_write_text(path, "".join(f"{k}={v}\n" for k, v in items))


def read_manifest(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v
    return out


# -- helpers -------------------------------------------------------------------

def _spec_from_args(args, method: str | None = None) -> MethodSpec:
    spec = MethodSpec(
        method=method or args.method,
        mode=getattr(args, "mode", "static"),
        kprime=args.kprime,
        k=args.k,
        seed=args.seed,
        buffer=getattr(args, "buffer", None),
        threshold=getattr(args, "threshold", None),
        iterations=args.iterations,
        sigma=args.sigma,
    )
    if spec.method == "procal":
        spec.grouping()  # surfaces InvalidGroupSize / InvalidClusterCount before any I/O
    elif spec.method == "dc":
        CondensationConfig(spec.kprime, spec.seed)
    return spec


def _load(args) -> Dataset:
    return load_csv(args.input, has_header=not args.no_header, class_column=args.class_col)


def _provenance_text(prov: np.ndarray) -> str:
    return "source_row\n" + "".join(f"{int(i)}\n" for i in prov)


def _default_manifest(args) -> Path:
    return Path(args.manifest) if args.manifest else Path(str(args.out) + ".manifest")


# -- perturb -------------------------------------------------------------------

def _stream_perturb(args, spec: MethodSpec) -> tuple[str, np.ndarray, list[int]]:
    has_header = not args.no_header
    if args.input == "-":
        source = line_source(sys.stdin, args.class_col, has_header)
        schema = None
    else:
        source = csv_source(args.input, has_header, args.class_col, args.rate)
        with open(args.input, newline="", encoding="utf-8") as fh:
            first = next(csv.reader(fh), [])
        schema = first if has_header else None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if schema is not None:
        w.writerow([s.strip() for s in schema])
    sizes, prov = [], []
    session = open_stream(source, spec.stream_config(), keep_provenance=True)
    for block in session:
        n = block.values.shape[1]
        c = args.class_col
        if c is not None and c < 0:
            c += n + 1
        for i in range(len(block)):
            row = [format_value(v) for v in block.values[i]]
            if block.labels is not None:
                row.insert(c, str(block.labels[i]))
            w.writerow(row)
        sizes.append(len(block))
        prov.append(block.provenance)
    provenance = np.concatenate(prov) if prov else np.zeros(0, dtype=np.intp)
    return buf.getvalue(), provenance, sizes


def cmd_perturb(args, argv) -> int:
    spec = _spec_from_args(args)
    t0 = time.perf_counter()
    outputs = [Path(args.out)]
    extra = {"method_label": spec.label}
    if spec.mode == "stream":
        text, provenance, sizes = _stream_perturb(args, spec)
        extra["release_sizes"] = sizes
        atomic_write_text(args.out, text)
    else:
        d = _load(args)
        p = spec.run(d, keep_provenance=args.test_mode)
        atomic_write_text(args.out, to_csv_text(p.data, header=not args.no_header))
        provenance = p.provenance
    if args.test_mode:
        side = Path(str(args.out) + ".provenance.csv")
        atomic_write_text(side, _provenance_text(provenance))
        outputs.append(side)
    inputs = [] if args.input == "-" else [args.input]
    write_manifest(_default_manifest(args), "perturb", argv, args, inputs, outputs,
                   time.perf_counter() - t0, extra)
    return 0


# -- attack ----------------------------------------------------------------------

def _load_provenance(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return np.array([int(r[0]) for r in rows[1:] if r], dtype=np.intp)


def cmd_attack(args, argv) -> int:
    t0 = time.perf_counter()
    d = _load(args)
    inputs = [args.input]
    reports = []
    if args.perturbed:
        if not args.provenance:
            raise ProvenanceMissing("--perturbed needs --provenance (written by perturb --test-mode)")
        pd = load_csv(args.perturbed, has_header=not args.no_header, class_column=args.class_col)
        p = PerturbedDataset(pd, _load_provenance(args.provenance))
        reports.append(run_attacks(d, p, args.label or "perturbed", args.known_fraction,
                                   derive_seed(args.seed, "attack")))
        inputs += [args.perturbed, args.provenance]
    else:
        for method in args.method.split(","):
            spec = _spec_from_args(args, method.strip())
            p = spec.run(d, keep_provenance=True)
            reports.append(run_attacks(d, p, spec.label, args.known_fraction,
                                       derive_seed(args.seed, "attack")))
    header = ["method", *METRIC_COLUMNS]
    rows = [[r.method, *r.values()] for r in reports]
    out = Path(args.out)
    table = out.with_suffix(".txt")
    atomic_write_text(out, grid_csv(header, rows))
    atomic_write_text(table, grid_text(header, rows))
    sys.stdout.write(grid_text(header, rows))
    flags = {r.method: r.ica_converged for r in reports}
    write_manifest(_default_manifest(args), "attack", argv, args, inputs, [out, table],
                   time.perf_counter() - t0, {"ica_converged": flags})
    return 0


# -- evaluate --------------------------------------------------------------------

def cmd_evaluate(args, argv) -> int:
    t0 = time.perf_counter()
    if args.class_col is None:
        raise NoLabels("evaluate needs a class column (--class-col)")
    d = _load(args)
    specs = [_spec_from_args(args, m.strip()) for m in args.methods.split(",") if m.strip()]
    scalings = ["raw", "zscore"] if args.normalize == "both" else [args.normalize]
    perturbed = {s.label: s.run(d).data for s in specs}
    rows = []
    header = None
    for scaling in scalings:
        cfg = CVConfig(args.folds, args.knn_k, derive_seed(args.seed, "cv"), scaling == "zscore")
        table = utility_comparison(d, [(name, (lambda _d, out=out: out)) for name, out in perturbed.items()], cfg)
        header = ["dataset", "scaling", *table.columns]
        rows.append([Path(args.input).stem, scaling, *table.accuracies])
    out = Path(args.out)
    text = out.with_suffix(".txt")
    atomic_write_text(out, grid_csv(header, rows))
    atomic_write_text(text, grid_text(header, rows))
    sys.stdout.write(grid_text(header, rows))
    write_manifest(_default_manifest(args), "evaluate", argv, args, [args.input], [out, text],
                   time.perf_counter() - t0)
    return 0


# -- bench -----------------------------------------------------------------------

def cmd_bench(args, argv) -> int:
    t0 = time.perf_counter()
    values = [int(v) for v in args.values.split(",")]
    if args.k is None and args.kprime is None:
        raise ConfigError("bench needs --k or --kprime")
    mode, size = ("by_cluster_count", args.k) if args.k is not None else ("by_group_size", args.kprime)
    cfg = PerturbConfig.create(mode, size, seed=args.seed)
    timing_rows, work_rows = [], []
    for v in values:
        m, n = (v, args.fixed) if args.sweep == "m" else (args.fixed, v)
        data_seed = derive_seed(args.seed, "bench-data")
        d = make_blobs(m, n, classes=args.classes, seed=data_seed)
        digest = hashlib.sha256(d.values.tobytes()).hexdigest()
        out_digest = hashlib.sha256(perturb_static(d, cfg).data.values.tobytes()).hexdigest()
        work_rows.append([m, n, digest, out_digest])
        tp = throughput_probe(cfg, m, n, repeats=args.repeats, data_seed=data_seed,
                              classes=args.classes)
        timing_rows.append([m, n, tp.median_seconds, tp.rows_per_second, *tp.seconds])
    out = Path(args.out)
    work = Path(str(out) + ".workload.csv")
    header = ["m", "n", "median_seconds", "rows_per_second", *[f"run{i + 1}" for i in range(args.repeats)]]
    atomic_write_text(out, grid_csv(header, timing_rows))
    atomic_write_text(work, grid_csv(["m", "n", "data_sha256", "output_sha256"], work_rows))
    sys.stdout.write(grid_text(header, timing_rows))
    write_manifest(_default_manifest(args), "bench", argv, args, [], [out, work],
                   time.perf_counter() - t0, {"nondeterministic_outputs": [str(out)]})
    return 0


# -- synth / replay --------------------------------------------------------------

def cmd_synth(args, argv) -> int:
    t0 = time.perf_counter()
    d = make_blobs(args.m, args.n, args.classes, args.seed, args.spread, args.center_box)
    atomic_write_text(args.out, to_csv_text(d))
    write_manifest(_default_manifest(args), "synth", argv, args, [], [Path(args.out)],
                   time.perf_counter() - t0)
    return 0


def cmd_replay(args, argv) -> int:
    manifest = read_manifest(args.manifest_path)
    if "argv" not in manifest:
        raise ConfigError(f"{args.manifest_path}: no argv entry")
    prev = os.getcwd()
    os.chdir(manifest.get("cwd", prev))
    try:
        return main(json.loads(manifest["argv"]))
    finally:
        os.chdir(prev)


# -- parser ------------------------------------------------------------------------

def _add_io(p, out_required=True):
    p.add_argument("--in", dest="input", required=True, help="input CSV ('-' for stdin in stream mode)")
    p.add_argument("--out", required=out_required)
    p.add_argument("--class-col", type=int, default=None, help="index of the label column (negative counts from the end)")
    p.add_argument("--no-header", action="store_true", help="input has no header row")
    p.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest)")


def _add_method_params(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--k", type=int, default=None, help="number of k-means clusters")
    g.add_argument("--kprime", type=int, default=None, help="records per group")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=10, help="RP candidate draws")
    p.add_argument("--sigma", type=float, default=0.3, help="RP noise factor")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="procal", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({_backend.NAME} kernels)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("perturb", help="perturb a dataset or stream")
    _add_io(p)
    _add_method_params(p)
    p.add_argument("--method", choices=["procal", "dc", "rp"], default="procal")
    p.add_argument("--mode", choices=["static", "stream"], default="static")
    p.add_argument("--buffer", type=int, default=None, help="stream buffer size l")
    p.add_argument("--threshold", type=int, default=None, help="chunks per release t")
    p.add_argument("--rate", type=float, default=None, help="replay rate in rows/second")
    p.add_argument("--test-mode", action="store_true", help="also write a provenance sidecar")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("attack", help="run naive, known-I/O and ICA attacks")
    _add_io(p)
    _add_method_params(p)
    p.add_argument("--method", default="procal", help="comma-separated: procal,dc,rp")
    p.add_argument("--known-fraction", type=float, default=0.10)
    p.add_argument("--perturbed", default=None, help="attack an existing perturbed CSV instead")
    p.add_argument("--provenance", default=None, help="provenance sidecar for --perturbed")
    p.add_argument("--label", default=None, help="row label for --perturbed")
    p.set_defaults(func=cmd_attack, mode="static")

    p = sub.add_parser("evaluate", help="kNN cross-validated accuracy, original vs perturbed")
    _add_io(p)
    _add_method_params(p)
    p.add_argument("--methods", default="procal,dc,rp")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--knn-k", type=int, default=1)
    p.add_argument("--normalize", choices=["raw", "zscore", "both"], default="both")
    p.set_defaults(func=cmd_evaluate, mode="static")

    p = sub.add_parser("bench", help="runtime sweep over m or n")
    p.add_argument("--sweep", choices=["m", "n"], default="m")
    p.add_argument("--values", default="10000,20000,40000")
    p.add_argument("--fixed", type=int, default=20, help="the dimension held constant")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--k", type=int, default=None)
    g.add_argument("--kprime", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a labelled Gaussian-blob dataset")
    p.add_argument("--m", type=int, default=5000)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--center-box", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest_path")
    p.set_defaults(func=cmd_replay)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonConvergenceWarning)
            return args.func(args, argv)
    except ProcalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
