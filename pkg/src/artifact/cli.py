"""Command-line front end and CSV benchmark harness.

Exit codes: 0 the property holds, 1 it fails, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from itertools import product
from pathlib import Path

from . import aba_engine, fa_engine, oracles, ta_engine
from .core import (
    ParseError,
    StateRelation,
    generate_random_aba,
    generate_random_fa,
    generate_random_ta,
    normalize_aba,
    parse_aba,
    parse_fa,
    parse_ranked,
    parse_timbuk,
    serialize_aba,
    serialize_fa,
    serialize_timbuk,
)
from .lts_sim import maximal_simulation

CSV_HEADER = ("kind", "engine", "n_a", "n_b", "sym", "td", "fd", "seed",
              "result", "generated", "stored_peak", "time_ms")
BENCH_ENGINES = fa_engine.ENGINES + ("oracle",)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None


def _load(path: str, parser):
    text = _read(path)
    try:
        return parser(text)
    except ParseError as exc:
        where = f"{path}:{exc.line}" if exc.line else path
        raise UsageError(f"{where}: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _print_relation(rel: StateRelation, out):
    for p, q in sorted(rel.pairs()):
        print(f"{p} <= {q}", file=out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_sim(args, out) -> int:
    kind = args.kind
    if kind == "lts":
        nfa = _load(args.file, parse_fa)
        rel = maximal_simulation(nfa.to_lts())
    elif kind == "fa-forward":
        rel = fa_engine.fa_forward_simulation(_load(args.file, parse_fa))
    elif kind == "ta-upward":
        rel = ta_engine.ta_upward_simulation(_load(args.file, parse_timbuk))
    else:
        aba = normalize_aba(_load(args.file, parse_aba))
        rel = aba_engine.aba_forward_simulation(aba)
        if kind == "aba-backward":
            rel = aba_engine.aba_backward_simulation(aba, rel)
    _print_relation(rel, out)
    return 0


def _stats_line(engine, stats, ms) -> str:
    return (f"engine={engine} generated={stats.generated} "
            f"stored_peak={stats.stored_peak} time_ms={ms:.3f}")


def _word(w) -> str:
    return " ".join(w) if w else "ε"


def cmd_univ(args, out) -> int:
    t0 = time.perf_counter()
    if args.kind == "fa":
        a = _load(args.file, parse_fa)
        try:
            ok, stats, witness = fa_engine.fa_universality(a, args.engine)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        ta = _load(args.file, parse_timbuk)
        try:
            ok, stats = ta_engine.ta_universality(ta, args.engine)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        witness = None
    ms = (time.perf_counter() - t0) * 1000
    print("UNIVERSAL" if ok else "NOT UNIVERSAL", file=out)
    if not ok and args.kind == "fa":
        print(f"witness: {_word(witness)}", file=out)
    print(_stats_line(args.engine, stats, ms), file=out)
    return 0 if ok else 1


def cmd_incl(args, out) -> int:
    t0 = time.perf_counter()
    try:
        if args.kind == "fa":
            a, b = _load(args.a, parse_fa), _load(args.b, parse_fa)
            ok, stats, witness = fa_engine.fa_inclusion(a, b, args.engine)
        else:
            a, b = _load(args.a, parse_timbuk), _load(args.b, parse_timbuk)
            ok, stats = ta_engine.ta_inclusion(a, b, args.engine)
            witness = None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ms = (time.perf_counter() - t0) * 1000
    print("INCLUDED" if ok else "NOT INCLUDED", file=out)
    if not ok and args.kind == "fa":
        print(f"witness: {_word(witness)}", file=out)
    print(_stats_line(args.engine, stats, ms), file=out)
    return 0 if ok else 1


def cmd_reduce(args, out) -> int:
    if args.kind == "fa":
        a = _load(args.file, parse_fa)
        if args.relation == "mediated":
            raise UsageError("the mediated relation applies to --kind aba only")
        if args.relation == "forward":
            reduced = fa_engine.simulation_quotient(a)
        else:
            reduced = fa_engine.quotient_nfa(a, StateRelation.identity(a.states))
        before = (len(a.states), len(a.transitions))
        after = (len(reduced.states), len(reduced.transitions))
        text = serialize_fa(reduced)
    else:
        a = _load(args.file, parse_aba)
        before = (len(a.states), a.transition_count())
        a = normalize_aba(a)
        if args.relation == "identity":
            reduced = a
        else:
            fwd = aba_engine.aba_forward_simulation(a)
            if args.relation == "forward":
                reduced = aba_engine.quotient_aba(a, fwd.symmetric_core())
            else:
                if aba_engine.is_ambiguous(a, fwd):
                    if args.disambiguate:
                        a = aba_engine.remove_ambiguity(a, fwd)
                    elif not args.force:
                        raise UsageError("ambiguous input: two forward-equivalent states share "
                                         "a transition; use --disambiguate (or --force)")
                bwd = aba_engine.aba_backward_simulation(a, fwd)
                med = aba_engine.mediated_preorder(fwd, bwd)
                reduced = aba_engine.quotient_aba(a, med.symmetric_core())
        after = (len(reduced.states), reduced.transition_count())
        text = serialize_aba(reduced)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    print(f"states: {before[0]} -> {after[0]}", file=sys.stderr if not args.output else out)
    print(f"transitions: {before[1]} -> {after[1]}", file=sys.stderr if not args.output else out)
    return 0


def cmd_gen(args, out) -> int:
    try:
        if args.kind == "fa":
            text = serialize_fa(generate_random_fa(args.states, args.symbols, args.td, args.fd,
                                                   args.seed))
        elif args.kind == "aba":
            text = serialize_aba(generate_random_aba(args.states, args.symbols, args.td, args.fd,
                                                     args.seed))
        else:
            ranked = args.ranked or "a:0,f:2"
            text = serialize_timbuk(generate_random_ta(args.states, parse_ranked(ranked), args.td,
                                                       args.fd, args.seed, leaf_td=args.leaf_td))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return 0


# ---------------------------------------------------------------------------
# benchmark harness


def _frange(spec: str) -> list[float]:
    """``lo:hi:step`` (inclusive) or a comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad range {spec!r}")
        lo, hi, step = (float(x) for x in parts)
        if step <= 0:
            raise UsageError(f"bad range {spec!r}")
        out = []
        k = 0
        while lo + k * step <= hi + 1e-9:
            out.append(round(lo + k * step, 10))
            k += 1
        return out
    return [float(x) for x in spec.split(",") if x]


def parse_grid(text: str) -> dict:
    """``key=value`` pairs separated by ``;``.

    Keys: kind (fa|ta), op (univ|incl), n, nb, k, ranked, td, fd, leaf_td,
    seeds (count or lo:hi), engines (comma list), cap.
    """
    grid = {"kind": "fa", "op": "univ", "n": 20, "nb": None, "k": 2, "ranked": "a:0,f:2",
            "td": [1.0], "fd": [0.5], "leaf_td": None, "seeds": range(20),
            "engines": ["antichain"], "cap": 1 << 16}
    for item in filter(None, (s.strip() for s in text.split(";"))):
        if "=" not in item:
            raise UsageError(f"bad grid item {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        try:
            if key in ("kind", "op", "ranked"):
                grid[key] = val
            elif key in ("n", "nb", "k", "cap"):
                grid[key] = int(val)
            elif key == "leaf_td":
                grid[key] = float(val)
            elif key in ("td", "fd"):
                grid[key] = _frange(val)
            elif key == "seeds":
                if ":" in val:
                    lo, hi = (int(x) for x in val.split(":"))
                    grid[key] = range(lo, hi)
                else:
                    grid[key] = range(int(val))
            elif key == "engines":
                grid[key] = [e.strip() for e in val.split(",") if e.strip()]
            else:
                raise UsageError(f"unknown grid key {key!r}")
        except ValueError:
            raise UsageError(f"bad value for {key!r}: {val!r}") from None
    if grid["kind"] not in ("fa", "ta") or grid["op"] not in ("univ", "incl"):
        raise UsageError("grid kind must be fa|ta and op univ|incl")
    for e in grid["engines"]:
        if e not in BENCH_ENGINES:
            raise UsageError(f"unknown engine {e!r}")
    if grid["nb"] is None:
        grid["nb"] = grid["n"]
    return grid


def _instance(grid, td, fd, seed):
    kind = grid["kind"]
    if kind == "fa":
        def make(n, s):
            return generate_random_fa(n, grid["k"], td, fd, s)
    else:
        ranked = parse_ranked(grid["ranked"])

        def make(n, s):
            return generate_random_ta(n, ranked, td, fd, s, leaf_td=grid["leaf_td"])
    if grid["op"] == "univ":
        return (make(grid["n"], seed),)
    return make(grid["n"], 2 * seed), make(grid["nb"], 2 * seed + 1)


def run_cell(grid: dict, engine: str, td: float, fd: float, seed: int) -> dict:
    """One benchmark run; returns a CSV record."""
    autos = _instance(grid, td, fd, seed)
    kind, op = grid["kind"], grid["op"]
    t0 = time.perf_counter()
    generated = stored = ""
    try:
        if engine == "oracle":
            if kind == "fa":
                fn = oracles.fa_universal_subset if op == "univ" else oracles.fa_inclusion_product
            else:
                fn = oracles.ta_universal_classical if op == "univ" else oracles.ta_inclusion_classical
            result = "true" if fn(*autos, cap=grid["cap"]) else "false"
        else:
            if kind == "fa":
                fn = fa_engine.fa_universality if op == "univ" else fa_engine.fa_inclusion
            else:
                fn = ta_engine.ta_universality if op == "univ" else ta_engine.ta_inclusion
            res = fn(*autos, engine)
            stats = res[1]
            result = "true" if res[0] else "false"
            generated, stored = stats.generated, stats.stored_peak
    except oracles.OracleCapExceeded:
        result = "cap"
    ms = (time.perf_counter() - t0) * 1000
    sym = grid["k"] if kind == "fa" else grid["ranked"]
    return {"kind": f"{kind}-{op}", "engine": engine, "n_a": grid["n"],
            "n_b": grid["nb"] if op == "incl" else "", "sym": sym, "td": td, "fd": fd,
            "seed": seed, "result": result, "generated": generated, "stored_peak": stored,
            "time_ms": f"{ms:.3f}"}


def bench_cells(grid: dict):
    for td, fd, seed, engine in product(grid["td"], grid["fd"], grid["seeds"], grid["engines"]):
        yield engine, td, fd, seed


def run_bench(grid: dict, csv_path: str | None, jobs: int = 1, out=sys.stdout) -> int:
    # validate every instance up front so a bad density fails before any output
    for td, fd in product(grid["td"], grid["fd"]):
        try:
            _instance(grid, td, fd, 0)
        except ValueError as exc:
            raise UsageError(f"invalid grid cell td={td} fd={fd}: {exc}") from None
    handle = open(csv_path, "w", newline="") if csv_path else out
    try:
        writer = csv.DictWriter(handle, fieldnames=CSV_HEADER)
        writer.writeheader()
        cells = list(bench_cells(grid))
        if jobs <= 1:
            for cell in cells:
                writer.writerow(run_cell(grid, *cell))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(run_cell, grid, *cell) for cell in cells]
                for fut in as_completed(futures):
                    writer.writerow(fut.result())
    finally:
        if csv_path:
            handle.close()
    return 0


def cmd_bench(args, out) -> int:
    grid = parse_grid(args.grid)
    return run_bench(grid, args.csv, args.jobs, out)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sim", help="print a maximal simulation as 'p <= q' lines")
    s.add_argument("kind", choices=["lts", "fa-forward", "ta-upward", "aba-forward",
                                    "aba-backward"])
    s.add_argument("file")
    s.set_defaults(func=cmd_sim)

    s = sub.add_parser("univ", help="universality check")
    s.add_argument("file")
    s.add_argument("--kind", choices=["fa", "ta"], default="fa")
    s.add_argument("--engine", choices=fa_engine.ENGINES, default="antichain-sim")
    s.set_defaults(func=cmd_univ)

    s = sub.add_parser("incl", help="language inclusion check L(A) ⊆ L(B)")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--kind", choices=["fa", "ta"], default="fa")
    s.add_argument("--engine", choices=fa_engine.ENGINES, default="antichain-sim")
    s.set_defaults(func=cmd_incl)

    s = sub.add_parser("reduce", help="quotient an automaton by a simulation equivalence")
    s.add_argument("file")
    s.add_argument("--kind", choices=["fa", "aba"], default="fa")
    s.add_argument("--relation", choices=["forward", "mediated", "identity"], default="forward")
    s.add_argument("-o", "--output")
    s.add_argument("--force", action="store_true",
                   help="quotient by the mediated preorder even if the input is ambiguous")
    s.add_argument("--disambiguate", action="store_true",
                   help="remove forward ambiguity before the mediated quotient")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("gen", help="random automaton")
    s.add_argument("--kind", choices=["fa", "ta", "aba"], default="fa")
    s.add_argument("--states", type=int, required=True)
    s.add_argument("--symbols", type=int, default=2)
    s.add_argument("--ranked", help="ranked alphabet for TA, e.g. a:0,f:2")
    s.add_argument("--td", type=float, required=True)
    s.add_argument("--fd", type=float, required=True)
    s.add_argument("--leaf-td", type=float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("bench", help="run an engine grid and write CSV")
    s.add_argument("--grid", required=True,
                   help='e.g. "kind=fa;n=20;k=2;td=0.5:3.0:0.5;fd=0.1:1.0:0.1;seeds=20;'
                        'engines=antichain"')
    s.add_argument("--csv")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
