"""qgzeta command line: one JSON document per run on stdout or ``--out``."""
from __future__ import annotations

import argparse
import sys
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ExcludedPointError, GraphError, GroupError, LimitExceededError, NumericalError, \
    QGError, SingularParameterError
from .io import BUNDLED, FileFormatError, GraphFile, dumps, parse_graph_file
from .linalg import rel_residual
from .scattering import WALKS, find_secular_roots, walk_evolve
from .verify import file_identities, random_sigma, run_acceptance
from .zeta import (charpoly_via_reduction, covering_charpoly, covering_from_l_functions,
                   euler_product_series, l_function_reciprocal, prime_cycles, trace_series)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("charpoly", "cover", "zeta", "euler", "spectrum", "walk", "cycles", "verify")


class UsageError(QGError, ValueError):
    def __init__(self, message, field=None):
        self.field = field
        super().__init__(message)


def parse_complex(text: str) -> complex:
    """Accepts ``1.5``, ``0.3-0.2j`` or ``re,im``."""
    t = text.strip().replace(" ", "")
    try:
        if "," in t:
            re, im = t.split(",")
            return complex(float(re), float(im))
        return complex(t.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qgzeta", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, graph_required=True):
        if graph_required:
            sp.add_argument("graph", help=f"graph JSON file or bundled name ({', '.join(BUNDLED)})")
        sp.add_argument("--out", help="write the JSON document here instead of stdout")
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--seed", type=int, default=0)

    def samples(sp, flag, helptext):
        sp.add_argument(flag, type=parse_complex, action="append", help=helptext)
        sp.add_argument("--samples", type=int, default=5,
                        help="random points drawn (with --seed) when none are given")

    sp = sub.add_parser("charpoly", help="direct and reduced characteristic polynomial values")
    common(sp)
    sp.add_argument("--k", type=parse_complex, required=True)
    samples(sp, "--sigma", "evaluation point; repeatable")

    sp = sub.add_parser("cover", help="covering determinant against its irrep factorisation")
    common(sp)
    sp.add_argument("--k", type=parse_complex, required=True)
    samples(sp, "--sigma", "evaluation point; repeatable")

    sp = sub.add_parser("zeta", help="L-function reciprocal, three ways")
    common(sp)
    sp.add_argument("--k", type=parse_complex, required=True)
    sp.add_argument("--rep", help="representation name or index (default: all)")
    samples(sp, "--s", "evaluation point; repeatable")

    sp = sub.add_parser("euler", help="Euler product series against the trace series")
    common(sp)
    sp.add_argument("--k", type=parse_complex, required=True)
    sp.add_argument("--rep")
    sp.add_argument("--max-len", type=int, default=8, help="series order")

    sp = sub.add_parser("spectrum", help="secular roots and eigenmodes on an interval")
    common(sp)
    sp.add_argument("--kmin", type=float, required=True)
    sp.add_argument("--kmax", type=float, required=True)
    sp.add_argument("--grid", type=int, default=2000)

    sp = sub.add_parser("walk", help="evolve a state under one of the walk operators")
    common(sp)
    sp.add_argument("--k", type=parse_complex, required=True)
    sp.add_argument("--walk", default="GS", choices=WALKS)
    sp.add_argument("--steps", type=int, default=10)
    sp.add_argument("--start", default=None, help="arc id carrying the initial unit amplitude")

    sp = sub.add_parser("cycles", help="table of prime cycle classes")
    common(sp)
    sp.add_argument("--max-len", type=int, default=4)
    sp.add_argument("--k", type=parse_complex, default=None, help="also report weights t_C a_C")

    sp = sub.add_parser("verify", help="run the full identity suite")
    common(sp, graph_required=False)
    sp.add_argument("graph", nargs="*", help="extra graph files to check (default: bundled files)")
    return p


@dataclass
class Job:
    """Validated command and parameters."""

    command: str
    args: argparse.Namespace
    gf: GraphFile | None
    rng: np.random.Generator
    echo: dict = field(default_factory=dict)


def _draw(job, values, kind):
    if values:
        return list(values)
    if job.args.samples < 1:
        raise UsageError("--samples must be >= 1", "--samples")
    pts = [random_sigma(job.rng) for _ in range(job.args.samples)]
    return [1 / p for p in pts] if kind == "s" else pts


def _reps(job):
    gf = job.gf
    if gf.voltage is None or gf.irreps is None:
        raise UsageError("graph file has no group/voltage/representation data", "group")
    sel = getattr(job.args, "rep", None)
    if sel is None:
        return list(gf.irreps)
    names = [r.name for r in gf.irreps]
    if sel in names:
        return [gf.irreps[names.index(sel)]]
    try:
        return [gf.irreps[int(sel)]]
    except (ValueError, IndexError):
        raise UsageError(f"unknown representation {sel!r}; have {names}", "--rep") from None


def _agreement_doc(ag, point_key, point):
    return {point_key: point, "values": dict(ag.values), "residual": ag.residual}


def cmd_charpoly(job):
    G, k = job.gf.graph, job.args.k
    rows = [_agreement_doc(charpoly_via_reduction(G, k, s), "sigma", s)
            for s in _draw(job, job.args.sigma, "sigma")]
    return {"evaluations": rows}, {"worst": max(r["residual"] for r in rows)}


def cmd_cover(job):
    gf, k = job.gf, job.args.k
    _reps(job)
    rows = []
    for s in _draw(job, job.args.sigma, "sigma"):
        res = covering_charpoly(gf.graph, k, gf.voltage, gf.irreps, s)
        lp = covering_from_l_functions(gf.graph, k, gf.voltage, gf.irreps, s)
        rows.append({
            "sigma": s,
            "values": {**res.agreement.values, "l_product": lp["l_product"]},
            "factors": [{"rep": n, "degree": d, "det": f} for n, d, f in res.factors],
            "residual": max(res.agreement.residual, rel_residual(lp["l_product"], res.direct)),
        })
    return {"evaluations": rows}, {"worst": max(r["residual"] for r in rows)}


def cmd_zeta(job):
    gf, k = job.gf, job.args.k
    rows = []
    points = _draw(job, job.args.s, "s")
    for rho in _reps(job):
        for s in points:
            doc = _agreement_doc(l_function_reciprocal(gf.graph, k, gf.voltage, rho, s), "s", s)
            doc["rep"] = rho.name
            rows.append(doc)
    return {"evaluations": rows}, {"worst": max(r["residual"] for r in rows)}


def cmd_euler(job):
    gf, k, order = job.gf, job.args.k, job.args.max_len
    rows = []
    for rho in _reps(job):
        e = euler_product_series(gf.graph, k, gf.voltage, rho, order)
        t = trace_series(gf.graph, k, gf.voltage, rho, order)
        rows.append({"rep": rho.name, "euler": e.coeffs, "trace": t.coeffs,
                     "max_abs_diff": float(np.abs(e.coeffs - t.coeffs).max())})
    return {"series": rows}, {"worst": max(r["max_abs_diff"] for r in rows)}


def cmd_spectrum(job):
    a = job.args
    G = job.gf.graph
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        modes = find_secular_roots(G, a.kmin, a.kmax, a.grid)
    rows = [{"k": md.k, "degeneracy": md.degeneracy, "det_abs": md.det_abs,
             "residual": md.residual, "consistency": md.consistency,
             "phi": {v: md.phi[i] for i, v in enumerate(G.vertices)}} for md in modes]
    worst = max([max(r["residual"], r["consistency"]) for r in rows], default=0.0)
    return ({"roots": sorted({r["k"] for r in rows}), "modes": rows,
             "warnings": [str(w.message) for w in caught]}, {"worst": worst})


def cmd_walk(job):
    a = job.args
    G = job.gf.graph
    if a.steps < 0:
        raise UsageError("--steps must be >= 0", "--steps")
    psi = np.zeros(G.num_arcs, dtype=complex)
    try:
        psi[0 if a.start is None else G.arc_index(a.start)] = 1.0
    except (KeyError, GraphError):
        raise UsageError(f"unknown arc {a.start!r}; arcs are {list(G.arc_ids)}", "--start") from None
    hist = walk_evolve(G, a.k, a.walk, psi, a.steps, trace=True)
    norms = [h.norm for h in hist]
    return ({"arcs": list(G.arc_ids), "walk": a.walk,
             "trace": [{"step": i, "amplitudes": h.amplitudes, "probabilities": h.probabilities(),
                        "norm": h.norm} for i, h in enumerate(hist)]},
            {"norm_drift": max(abs(n - 1.0) for n in norms) if a.k.imag == 0 else None})


def cmd_cycles(job):
    a = job.args
    gf = job.gf
    cyc = prime_cycles(gf.graph, a.max_len, a.k, gf.voltage)
    ids = gf.graph.arc_ids
    rows = []
    for c in cyc:
        row = {"length": c.length, "arcs": [ids[i] for i in c.arcs]}
        if c.weight is not None:
            row["weight"] = c.weight
        if c.voltage is not None:
            row["voltage"] = gf.voltage.group.labels[c.voltage]
        rows.append(row)
    counts = {}
    for c in cyc:
        counts[c.length] = counts.get(c.length, 0) + 1
    return {"classes": rows, "count": len(rows), "by_length": counts}, {}


def cmd_verify(job):
    checks = run_acceptance(job.args.seed)
    files = job.args.graph or list(BUNDLED)
    for f in files:
        checks.append(file_identities(parse_graph_file(f), job.rng, tol=job.args.tol))
    for c in checks:
        print(c.line(), file=sys.stderr)
    failed = [c.name for c in checks if not c.passed]
    results = {"passed": not failed, "failed": failed,
               "checks": [{"name": c.name, "passed": c.passed, "residual": c.residual,
                           "tol": c.tol, "seconds": c.seconds} for c in checks]}
    return results, {c.name: c.residual for c in checks}


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def _error_doc(kind, exc, code, command=None):
    return {"command": command, "error": {"type": kind, "message": str(exc),
                                          "field": getattr(exc, "field", None),
                                          "source": getattr(exc, "source", None)},
            "exit_code": code}


def _emit(doc, out):
    text = dumps(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def run(argv=None) -> tuple[int, dict]:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return EXIT_INPUT, _error_doc("UsageError", exc, EXIT_INPUT)
    except SystemExit as exc:  # --help
        return (EXIT_OK if exc.code == 0 else EXIT_INPUT), None
    command = args.command
    echo = {k: v for k, v in vars(args).items() if k != "command"}
    t0 = time.perf_counter()
    try:
        gf = None
        if command != "verify":
            gf = parse_graph_file(args.graph)
        job = Job(command, args, gf, np.random.default_rng(args.seed), echo)
        t1 = time.perf_counter()
        results, residuals = HANDLERS[command](job)
    except (FileFormatError, UsageError, GraphError, GroupError, LimitExceededError,
            ExcludedPointError, SingularParameterError, OSError) as exc:
        return EXIT_INPUT, _error_doc(type(exc).__name__, exc, EXIT_INPUT, command)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        return EXIT_NUMERIC, _error_doc(type(exc).__name__, exc, EXIT_NUMERIC, command)
    t2 = time.perf_counter()
    doc = {"command": command, "inputs_echo": echo, "results": results, "residuals": residuals,
           "timings": {"parse": t1 - t0, "compute": t2 - t1}}
    if command == "verify":
        code = EXIT_OK if results["passed"] else EXIT_VERIFY
    else:
        worst = residuals.get("worst") if residuals else None
        code = EXIT_VERIFY if worst is not None and not worst <= args.tol else EXIT_OK
    doc["exit_code"] = code
    return code, doc


def main(argv=None) -> int:
    code, doc = run(argv)
    if doc is not None:
        _emit(doc, doc.get("inputs_echo", {}).get("out"))
    return code


if __name__ == "__main__":
    sys.exit(main())
