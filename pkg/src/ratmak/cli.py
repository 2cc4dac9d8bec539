"""Command-line interface: ``ratmak check|table|ring|witness``.

Exit codes:
    0   decided by criterion / witness found / command succeeded
    2   usage error (bad parameters, malformed input files)
    10  not decided by criterion
    11  witness not found within the restart budget
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path

from . import __version__, charclass, criteria, witness
from .gf2alg import D8, W3, format_poly

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_DECIDED = 10
EXIT_NOT_FOUND = 11

JOBS_ENV = "RATMAK_JOBS"
CSV_COLUMNS = ("n", "m", "k", "l", "variant", "verdict", "bounds_fired", "slice_degree", "slice_dim", "ideal_rank")
SCHEMA_PATH = Path(__file__).with_name("schema") / "run_report.schema.json"


class UsageError(Exception):
    pass


def human_verdict(admissible: bool) -> str:
    return "decided by criterion" if admissible else "not decided by criterion"


def parse_range(text: str) -> list[int]:
    """``"3"``, ``"3..7"`` (inclusive) or ``"1,2,5"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}") from None
    if not values:
        raise UsageError(f"empty range {text!r}")
    return values


def make_report(kind: str, argv: list[str], instances: list[dict], started: float, warnings: list[str] | None = None) -> dict:
    return {
        "tool": "ratmak",
        "version": __version__,
        "kind": kind,
        "command": list(argv),
        "instances": instances,
        "warnings": list(warnings or []),
        "timing": {"seconds": round(time.perf_counter() - started, 6)},
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _emit(args, report: dict, text: str) -> None:
    if args.json:
        payload = dump_report(report)
        if args.output:
            Path(args.output).write_text(payload)
        else:
            sys.stdout.write(payload)
    else:
        sys.stdout.write(text)
        if args.output:
            Path(args.output).write_text(dump_report(report))


# ---------------------------------------------------------------------------
# check


def _run_check(args) -> criteria.Verdict:
    which = args.criterion
    if which == "rattray":
        return criteria.rattray(args.n, args.m, args.k, variant=args.variant.replace("-", "_"), orth=args.orth)
    if which == "rattray2":
        return criteria.rattray2_grassmann(args.n, args.m)
    if which == "rattray3":
        return criteria.rattray3(args.n, args.m)
    if which == "makeev":
        if args.l is None:
            raise UsageError("makeev needs --l")
        return criteria.makeev(args.n, args.m, args.k, args.l, orth=args.orth)
    raise UsageError(f"unknown criterion {which!r}")


def cmd_check(args, argv) -> int:
    started = time.perf_counter()
    verdict = _run_check(args)
    k = {"rattray2": 2, "rattray3": 3}.get(args.criterion, args.k)
    record = {"n": args.n, "m": args.m, "k": k, "l": args.l, **verdict.to_dict()}
    try:
        record["bounds"] = criteria.bounds(args.n, args.m, k, args.l).to_dict()
    except criteria.InvalidInstance:
        record["bounds"] = {}
    if verdict.test_polynomial is not None:
        record["test_polynomial"] = str(verdict.test_polynomial)
        record["ideal"] = [str(g) for g in verdict.ideal.generators]
    lines = [
        f"{verdict.criterion} (n={args.n}, m={args.m}, k={k}" + (f", l={args.l}" if args.l else "") + ")",
        f"verdict: {human_verdict(verdict.admissible)}",
    ]
    if verdict.certificate is not None:
        c = verdict.certificate
        lines.append(
            f"certificate: member={c.member} degree={c.slice_degree} slice_dim={c.slice_dimension} ideal_rank={c.ideal_rank}"
        )
    lines += [f"note: {n}" for n in verdict.notes]
    _emit(args, make_report("check", argv, [record], started), "\n".join(lines) + "\n")
    return EXIT_OK if verdict.admissible else EXIT_NOT_DECIDED


# ---------------------------------------------------------------------------
# table


def table_row(job: tuple) -> dict:
    """Evaluate one sweep instance; module level so process pools can pickle it."""
    kind, n, m, k, l, variant, orth, cap = job
    name = {
        "rattray": f"{variant.replace('_', '-')}-{'orth' if orth else 'free'}",
        "makeev": "makeev-orth" if orth else "makeev",
        "rattray2": "rattray2",
        "rattray3": "rattray3",
    }[kind]
    row = {"n": n, "m": m, "k": k, "l": l, "variant": name, "verdict": "", "bounds_fired": "",
           "slice_degree": "", "slice_dim": "", "ideal_rank": ""}
    try:
        b = criteria.bounds(n, m, k, l)
    except criteria.InvalidInstance:
        row["verdict"] = "invalid"
        return row
    row["bounds_fired"] = ";".join(b.fired())
    if criteria.criterion_degree(kind, n, m, k, l, variant, orth) > cap:
        row["verdict"] = "capped"
        return row
    if kind == "rattray":
        v = criteria.rattray(n, m, k, variant, orth)
    elif kind == "makeev":
        v = criteria.makeev(n, m, k, l, orth)
    elif kind == "rattray2":
        v = criteria.rattray2_grassmann(n, m)
    else:
        v = criteria.rattray3(n, m)
    row["verdict"] = v.label
    if v.certificate is not None:
        row["slice_degree"] = v.certificate.slice_degree
        row["slice_dim"] = v.certificate.slice_dimension
        row["ideal_rank"] = v.certificate.ideal_rank
    return row


def sweep_jobs(args) -> list[tuple]:
    kind = args.criterion
    ns = parse_range(args.n)
    ms = parse_range(args.m)
    variant = args.variant.replace("-", "_")
    if kind == "rattray2":
        ks, ls = [2], [None]
    elif kind == "rattray3":
        ks, ls = [3], [None]
    else:
        ks = parse_range(args.k)
        ls = parse_range(args.l) if kind == "makeev" else [None]
    if max(ks) > criteria.MAX_K:
        raise UsageError(f"k is capped at {criteria.MAX_K}")
    jobs = []
    for n, k, m, l in product(ns, ks, ms, ls):
        cap = args.degree_cap if args.degree_cap is not None else criteria.degree_cap(k)
        jobs.append((kind, n, m, k, l, variant, args.orth, cap))
    return jobs


def run_sweep(jobs: list[tuple], workers: int) -> list[dict]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(table_row, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [table_row(j) for j in jobs]


def format_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    cells = [list(CSV_COLUMNS)] + [["" if r[c] is None else str(r[c]) for c in CSV_COLUMNS] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(CSV_COLUMNS))]
    return "".join("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n" for row in cells)


def cmd_table(args, argv) -> int:
    started = time.perf_counter()
    jobs = sweep_jobs(args)
    workers = args.jobs if args.jobs is not None else int(os.environ.get(JOBS_ENV, "1"))
    rows = run_sweep(jobs, max(1, workers))
    warnings = [f"capped: n={r['n']} m={r['m']} k={r['k']}" for r in rows if r["verdict"] == "capped"]
    report = make_report("table", argv, rows, started, warnings)
    if args.format == "json":
        args.json = True
    _emit(args, report, format_rows(rows, args.format))
    return EXIT_OK


# ---------------------------------------------------------------------------
# ring


def ring_query(args):
    cls = args.cls
    if cls == "dual":
        if args.k is None or args.l is None:
            raise UsageError("dual needs --k and --l")
        if args.l < 1:
            raise UsageError("--l must be >= 1")
        if args.multinomial:
            return charclass.dual_class_multinomial(args.k, args.l)
        return charclass.stiefel_dual_classes(args.k, args.l)[args.l]
    if cls == "euler-rattray":
        return charclass.euler_rattray(args.k or 2, args.m or 1, doubled=args.doubled)
    if cls == "euler-makeev":
        k = args.k or 2
        return charclass.euler_makeev(k, args.l or k, args.m or 1, orth=args.orth)
    if cls == "sym":
        return charclass.elementary_symmetric(args.k or 2, args.l or 1)
    if cls == "d8":
        d8 = charclass.d8_classes()
        comp = args.component or "total-plane"
        if comp == "total-r2":
            return d8.total_r2
        if comp == "total-plane":
            return d8.total_plane
        if comp == "euler":
            return d8.euler_r2_power(args.m or 1)
        if comp == "dual":
            return charclass.d8_plane_duals(args.l or 1)[args.l or 1]
        raise UsageError(f"unknown d8 component {comp!r}")
    if cls == "w3":
        w3 = charclass.w3_classes(args.m or 1)
        comp = args.component or "total"
        if comp == "total":
            return w3.total
        if comp == "test":
            return w3.test_element
        if comp == "euler":
            return w3.euler_r3
        if comp == "dual":
            return charclass.w3_duals(args.l or 1)[args.l or 1]
        raise UsageError(f"unknown w3 component {comp!r}")
    raise UsageError(f"unknown class {cls!r}")


def cmd_ring(args, argv) -> int:
    started = time.perf_counter()
    poly = ring_query(args)
    text = format_poly(poly)
    record = {"class": args.cls, "algebra": str(poly.algebra), "polynomial": text}
    _emit(args, make_report("ring", argv, [record], started), text + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# witness


def load_measure(source: str, n: int, seed: int) -> witness.SampledMeasure:
    if source.startswith("gauss:"):
        try:
            size = int(source.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad measure source {source!r}") from None
        return witness.SampledMeasure.gaussian(n, size, seed=seed)
    path = source[5:] if source.startswith("file:") else source
    try:
        mu = witness.SampledMeasure.load(path)
    except (OSError, witness.WitnessError) as exc:
        raise UsageError(str(exc)) from None
    if mu.dim != n:
        raise UsageError(f"measure {path} has dimension {mu.dim}, expected {n}")
    return mu


def cmd_witness(args, argv) -> int:
    started = time.perf_counter()
    if args.target == "frame":
        funcs = [
            witness.random_odd_sym(args.n, args.seed * 1000 + i, args.modulations) for i in range(args.m)
        ]
        res = witness.search_frame(funcs, args.n, args.k, tol=args.tol, max_restarts=args.restarts, seed=args.seed)
        record = {"target": "frame", "n": args.n, "k": args.k, "m": args.m, "seed": args.seed, **res.to_dict()}
        found = res.found
        text = f"frame search: {'found' if found else 'not found'} (residual {res.residual_norm:.3g}, restarts {res.restarts})\n"
    else:
        sources = args.measure or ["gauss:100000"]
        measures = [load_measure(s, args.n, args.seed + 7919 * i) for i, s in enumerate(sources)]
        l = args.l or args.k
        res = witness.search_equipartition(
            measures, args.n, args.k, l, orth=args.orth, tol=args.tol or 5e-3,
            max_restarts=args.restarts, seed=args.seed, mode=args.mode,
        )
        record = {"target": "equipart", "n": args.n, "k": args.k, "l": l, "m": len(measures), "seed": args.seed, **res.to_dict()}
        found = res.found
        text = f"equipartition search: {'found' if found else 'not found'} (max deviation {res.error:.3g}, mode {res.mode})\n"
    _emit(args, make_report("witness", argv, [record], started), text)
    return EXIT_OK if found else EXIT_NOT_FOUND


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ratmak", description="Rattray/Makeev criterion engine")
    parser.add_argument("--version", action="version", version=f"ratmak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="print the JSON run report")
        p.add_argument("--output", help="also write the JSON run report to this file")

    p = sub.add_parser("check", help="decide one instance")
    p.add_argument("criterion", choices=["rattray", "rattray2", "rattray3", "makeev"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--l", type=int)
    p.add_argument("--variant", choices=["odd", "odd-sym"], default="odd-sym")
    p.add_argument("--orth", action="store_true")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("table", help="sweep a parameter grid")
    p.add_argument("criterion", choices=["rattray", "rattray2", "rattray3", "makeev"])
    p.add_argument("--n", required=True, help="range such as 3..5")
    p.add_argument("--m", required=True)
    p.add_argument("--k", default="2")
    p.add_argument("--l", default="1..6")
    p.add_argument("--variant", choices=["odd", "odd-sym"], default="odd-sym")
    p.add_argument("--orth", action="store_true")
    p.add_argument("--format", choices=["table", "csv", "json"], default="table")
    p.add_argument("--jobs", type=int, help=f"worker processes (default ${JOBS_ENV} or 1)")
    p.add_argument("--degree-cap", type=int)
    common(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("ring", help="print a characteristic class")
    p.add_argument("cls", metavar="class", help="dual | euler-rattray | euler-makeev | sym | d8 | w3")
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--doubled", action="store_true")
    p.add_argument("--orth", action="store_true")
    p.add_argument("--multinomial", action="store_true", help="use the multinomial formula for dual classes")
    p.add_argument("--component")
    common(p)
    p.set_defaults(func=cmd_ring)

    p = sub.add_parser("witness", help="numeric witness search")
    p.add_argument("target", choices=["frame", "equipart"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--l", type=int)
    p.add_argument("--orth", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float)
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--modulations", type=int, default=2)
    p.add_argument("--measure", action="append", help="gauss:N or a point file (repeatable)")
    p.add_argument("--mode", choices=["auto", "halving", "free"], default="auto")
    common(p)
    p.set_defaults(func=cmd_witness)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "witness" and args.target == "frame" and args.tol is None:
        args.tol = 1e-10
    try:
        return args.func(args, argv)
    except (UsageError, criteria.InvalidInstance, charclass.ClassError) as exc:
        print(f"ratmak: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
