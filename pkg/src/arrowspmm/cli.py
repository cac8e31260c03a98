"""Command line: stats, generate, decompose, spmm and bench."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .decomposition import (
    decomposition_meta,
    la_decompose,
    load_decomposition,
    reconstruct,
    save_decomposition,
    verify_arrow_width,
    verify_tiles,
)
from .generators import GENERATORS, generate
from .mmio import FormatError, read_matrix_market, read_permutation, write_matrix_market
from .sim import (
    CostModel,
    baseline_15d_sim,
    decomposition_multiply_sim,
    ledger_summary,
    storage_report,
)
from .sparse import SparseSymMatrix, dense_spmm_reference, same_entries

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3
ORACLE_MAX_N = 4096
BENCH_COLUMNS = [
    "dataset",
    "algorithm",
    "seed",
    "n",
    "nnz",
    "b",
    "p",
    "c",
    "k",
    "order",
    "max_rank_volume_words",
    "total_volume_words",
    "critical_path",
    "storage_words",
    "status",
]


class UsageError(Exception):
    pass


class VerificationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def load_input(spec: str, seed: int = 0, pattern: bool = False) -> SparseSymMatrix:
    """A Matrix Market path or ``gen:<kind>:<n>[:param]``."""
    if spec.startswith("gen:"):
        fields = spec.split(":")
        if len(fields) not in (3, 4) or fields[1] not in GENERATORS:
            raise UsageError(f"bad generator spec {spec!r}; use gen:<kind>:<n>[:param] with kind in {sorted(GENERATORS)}")
        try:
            n = int(fields[2])
            param = float(fields[3]) if len(fields) == 4 else None
        except ValueError:
            raise UsageError(f"bad generator spec {spec!r}") from None
        try:
            return generate(fields[1], n, param, seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return read_matrix_market(spec, pattern=pattern)


def _emit(payload: dict, out: str | None, force: bool) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    _check_writable(Path(out), force)
    Path(out).write_text(text)


def _check_writable(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists; pass --force to overwrite")


def _envelope(schema: str, args: argparse.Namespace) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return {"schema": schema, "version": __version__, "config": config}


def graph_stats(a: SparseSymMatrix) -> dict:
    from .kernels import component_labels

    deg = a.degrees()
    _, ncomp = component_labels(a.n, a.row_offsets, a.col_indices)
    return {
        "vertices": a.n,
        "nnz": a.nnz,
        "edges": a.num_edges,
        "nnz_per_vertex": a.nnz / a.n if a.n else 0.0,
        "min_degree": int(deg.min()) if a.n else 0,
        "max_degree": int(deg.max()) if a.n else 0,
        "avg_degree": float(deg.mean()) if a.n else 0.0,
        "components": int(ncomp),
    }


def cmd_stats(args) -> int:
    a = load_input(args.input, args.seed, args.pattern)
    _emit({**_envelope("arrowspmm.stats/1", args), "stats": graph_stats(a)}, args.out, args.force)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.out is None:
        raise UsageError("generate needs --out")
    _check_writable(Path(args.out), args.force)
    a = load_input(f"gen:{args.kind}:{args.n}" + ("" if args.param is None else f":{args.param}"), args.seed)
    write_matrix_market(args.out, a, comment=f"generated {args.kind} n={args.n} seed={args.seed}")
    return EXIT_OK


def decomposition_checks(a: SparseSymMatrix, d) -> dict:
    width_ok = all(verify_arrow_width(p).ok and verify_tiles(p) for p in d.parts)
    return {"arrow_width": width_ok, "reconstruct": same_entries(reconstruct(d), a)}


def cmd_decompose(args) -> int:
    if args.width < 2:
        raise UsageError("--width must be at least 2")
    if args.out is None:
        raise UsageError("decompose needs --out")
    out = Path(args.out)
    if out.exists() and not args.force:
        raise FileExistsError(f"{out} exists; pass --force to overwrite")
    a = load_input(args.input, args.seed, args.pattern)
    perms = [read_permutation(p) for p in args.perm] if args.perm else None
    if args.strategy == "provided" and not perms:
        raise UsageError("strategy 'provided' needs --perm")
    d = la_decompose(a, args.width, args.strategy, args.seed, perms)
    checks = decomposition_checks(a, d)
    save_decomposition(d, out, force=True)
    report = {**_envelope("arrowspmm.decompose/1", args), "decomposition": decomposition_meta(d), "checks": checks}
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _emit(report, None, True)
    if not all(checks.values()):
        raise VerificationError(f"decomposition checks failed: {checks}")
    return EXIT_OK


def make_features(n: int, k: int, seed: int, ones: bool) -> np.ndarray:
    if ones:
        return np.ones((n, k))
    return np.random.default_rng(seed).random((n, k))


def run_spmm(a, d, x, algorithm, p, c, model):
    """One multiply; returns ``(Y, ledger)`` with Y in vertex order."""
    if algorithm == "arrow":
        return decomposition_multiply_sim(d, x, model)
    return baseline_15d_sim(a, x, p, c, model)


def cmd_spmm(args) -> int:
    model = CostModel(args.alpha, args.beta)
    path = Path(args.input)
    d = None
    if args.algorithm == "arrow":
        if not (path.is_dir() and (path / "meta.json").is_file()):
            raise FileNotFoundError(f"{path}: arrow needs a decomposition directory (see 'decompose')")
        d = load_decomposition(path)
        a = reconstruct(d)
    else:
        a = reconstruct(load_decomposition(path)) if path.is_dir() else load_input(args.input, args.seed, args.pattern)
        grid_ok = args.repl >= 1 and args.repl**2 <= args.ranks and args.ranks % args.repl == 0
        if not grid_ok:
            raise UsageError(f"invalid grid p={args.ranks}, c={args.repl}")
    report = _envelope("arrowspmm.spmm/1", args)
    report["n"], report["nnz"] = a.n, a.nnz
    report["backend"] = kernels.BACKEND
    iterations = []
    x = make_features(a.n, args.features, args.seed, args.ones)
    y = None
    for t in range(args.iters):
        y, ledger = run_spmm(a, d, x, args.algorithm, args.ranks, args.repl, model)
        iterations.append({"iteration": t, "warmup": t == 0, **ledger_summary(ledger)})
    report["iterations"] = iterations
    if d is not None:
        report["storage"] = storage_report(d, args.features, None)["totals"]
        report["order"] = d.order
    if y is not None:
        report["checksum"] = float(np.sum(y))
        if a.n <= ORACLE_MAX_N or args.force_oracle:
            ref = dense_spmm_reference(a, x)
            scale = max(float(np.abs(ref).max(initial=0.0)), 1.0)
            err = float(np.abs(y - ref).max(initial=0.0)) / scale
            report["oracle"] = {"checked": True, "rel_error": err, "pass": err <= 1e-12}
        else:
            report["oracle"] = {"checked": False}
        if args.print_y:
            report["y"] = y.tolist()
    _emit(report, args.out, args.force)
    if report.get("oracle", {}).get("pass") is False:
        raise VerificationError("result differs from the reference multiply")
    return EXIT_OK


def bench_rows(args):
    model = CostModel(args.alpha, args.beta)
    for dataset in args.input:
        for seed in args.seeds:
            try:
                a = load_input(dataset, seed, args.pattern)
            except (OSError, FormatError, UsageError) as exc:
                yield {"dataset": dataset, "seed": seed, "status": f"failed: {exc}"}
                continue
            for k in args.features:
                for p in args.ranks:
                    for algorithm in args.algorithms:
                        cells = []
                        if algorithm == "arrow":
                            widths = args.width or [max(2, -(-a.n // p))]
                            cells = [(b, None) for b in widths]
                        else:
                            cells = [(None, c) for c in (args.repl or [max(1, math.isqrt(p))])]
                        for b, c in cells:
                            row = {"dataset": dataset, "algorithm": algorithm, "seed": seed, "n": a.n, "nnz": a.nnz}
                            row.update({"b": b if b is not None else "", "p": p, "c": c if c is not None else "", "k": k})
                            try:
                                row.update(_bench_cell(a, algorithm, b, p, c, k, seed, args.strategy, model))
                                row["status"] = "ok"
                            except Exception as exc:  # a failed cell must not stop the sweep
                                row["status"] = f"failed: {type(exc).__name__}: {exc}"
                            yield row


def _bench_cell(a, algorithm, b, p, c, k, seed, strategy, model) -> dict:
    x = make_features(a.n, k, seed, False)
    if algorithm == "arrow":
        d = la_decompose(a, b, strategy, seed)
        y, ledger = decomposition_multiply_sim(d, x, model)
        storage = storage_report(d, k)["totals"]["total_words"]
        order = d.order
    else:
        y, ledger = baseline_15d_sim(a, x, p, c, model)
        h = -(-a.n // (p // c))
        storage = 2 * a.nnz + a.n + p * (h + 1) + c * a.n * k
        order = ""
    s = ledger_summary(ledger)
    return {
        "order": order,
        "max_rank_volume_words": s["max_recv_words"],
        "total_volume_words": s["total_words"],
        "critical_path": s["critical_path"],
        "storage_words": storage,
    }


def cmd_bench(args) -> int:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n", restval="")
    writer.writeheader()
    failed = 0
    for row in bench_rows(args):
        writer.writerow(row)
        failed += row["status"] != "ok"
    text = buf.getvalue()
    if args.out is None:
        sys.stdout.write(text)
    else:
        _check_writable(Path(args.out), args.force)
        Path(args.out).write_text(text)
    if failed:
        print(f"{failed} sweep cell(s) failed", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arrowspmm", description=__doc__)
    parser.add_argument("--version", action="version", version=f"arrowspmm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, *, needs_input=True):
        if needs_input:
            p.add_argument("--input", "-i", required=True, help="Matrix Market file, directory or gen:<kind>:<n>[:param]")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", "-o")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")
        p.add_argument("--pattern", action="store_true", help="set every value to 1.0")

    def cost(p):
        p.add_argument("--alpha", type=float, default=1.0, help="latency per message")
        p.add_argument("--beta", type=float, default=1.0, help="cost per word")

    p = sub.add_parser("stats", help="size and degree summary")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("generate", help="write a generated graph")
    common(p, needs_input=False)
    p.add_argument("--kind", required=True, choices=sorted(GENERATORS))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--param", type=float)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("decompose", help="arrow decomposition into a directory")
    common(p)
    p.add_argument("--width", "-w", type=int, required=True)
    p.add_argument("--strategy", default="random-forest", choices=["random-forest", "separator-tree", "provided"])
    p.add_argument("--perm", action="append", help="permutation file for 'provided' (repeatable)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("spmm", help="simulate repeated multiplies")
    common(p)
    cost(p)
    p.add_argument("--algorithm", default="arrow", choices=["arrow", "1.5d"])
    p.add_argument("--features", "-c", type=int, default=8, help="columns k of X")
    p.add_argument("--iters", "-z", type=int, default=1)
    p.add_argument("--ranks", "-p", type=int, default=1)
    p.add_argument("--repl", type=int, default=1, help="replication factor of the 1.5D grid")
    p.add_argument("--ones", action="store_true", help="X = all ones")
    p.add_argument("--force-oracle", action="store_true", help="compare against the reference for any n")
    p.add_argument("--print-y", action="store_true", help="include Y in the report")
    p.set_defaults(func=cmd_spmm)

    p = sub.add_parser("bench", help="CSV sweep")
    p.add_argument("--input", "-i", required=True, action="append")
    p.add_argument("--width", "-w", type=_int_list, help="arrow widths (default ceil(n/p))")
    p.add_argument("--ranks", "-p", type=_int_list, default=[4])
    p.add_argument("--repl", type=_int_list, help="1.5D replication (default isqrt(p))")
    p.add_argument("--features", "-c", type=_int_list, default=[16])
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--algorithms", type=lambda s: s.split(","), default=["arrow", "1.5d"])
    p.add_argument("--strategy", default="random-forest", choices=["random-forest", "separator-tree"])
    p.add_argument("--out", "-o")
    p.add_argument("--force", action="store_true")
    p.add_argument("--pattern", action="store_true")
    cost(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "features", None) is not None and isinstance(args.features, int) and args.features < 1:
            raise UsageError("--features must be positive")
        if getattr(args, "iters", 0) < 0:
            raise UsageError("--iters must be nonnegative")
        if getattr(args, "algorithms", None):
            bad = set(args.algorithms) - {"arrow", "1.5d"}
            if bad:
                raise UsageError(f"unknown algorithm(s) {sorted(bad)}")
        return args.func(args)
    except UsageError as exc:
        print(f"arrowspmm: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError) as exc:
        print(f"arrowspmm: {exc}", file=sys.stderr)
        return EXIT_IO
    except VerificationError as exc:
        print(f"arrowspmm: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        print(f"arrowspmm: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
