"""End-to-end identity suite behind the ``verify`` subcommand."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .graph import VoltageAssignment, random_graph
from .groups import characters_abelian, cyclic_group, product_group
from .io import GraphFile, parse_graph_file
from .linalg import determinant, eigenvalues, multiset_distance, rel_residual
from .scattering import WALKS, find_secular_roots, j0_matrix, u_gs, walk_operator
from .zeta import (charpoly_via_reduction, covering_charpoly, covering_from_l_functions,
                   euler_product_series, ihara_zeta_reciprocal, l_function_reciprocal,
                   trace_series)


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    tol: float
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: worst residual {self.residual:.3e} (tol {self.tol:.0e}, {self.seconds:.2f}s)"


class _Worst:
    def __init__(self):
        self.value = 0.0
        self.where = None

    def update(self, r, where=None):
        if not r <= self.value:  # NaN counts as worst
            self.value, self.where = r, where


def random_sigma(rng, rmin=0.5, rmax=1.5) -> complex:
    return complex(rng.uniform(rmin, rmax) * np.exp(2j * np.pi * rng.uniform()))


def k3_closed_form(k, L, A, lam, sigma, twisted=False):
    a = 2j * k / (2j * k - lam)
    t = np.exp(1j * L * (k - A))
    s = np.exp(1j * L * (k + A))
    b = sigma ** 2 + (2 * a - 1) * s * t
    head = b * (b * b - 3 * s * t * a * a * sigma ** 2)
    tail = a ** 3 * sigma ** 3 * (s ** 3 + t ** 3)
    return head + tail if twisted else head - tail


def k3_cover_closed_form(k, L, A, lam, sigma):
    a = 2j * k / (2j * k - lam)
    t = np.exp(1j * L * (k - A))
    s = np.exp(1j * L * (k + A))
    b = sigma ** 2 + (2 * a - 1) * s * t
    return b * b * (b * b - 3 * s * t * a * a * sigma ** 2) ** 2 - a ** 6 * sigma ** 6 * (s ** 3 + t ** 3) ** 2


def _draw_k3(rng, k3):
    k, L, A, lam = rng.uniform(0.5, 10), rng.uniform(0.5, 2), rng.uniform(-1, 1), rng.uniform(-3, 3)
    return (k, L, A, lam), k3.with_parameters(L, A, lam)


def _random_voltage(rng, graph, group):
    return VoltageAssignment.from_edges(
        graph, group, {j: int(rng.integers(group.order)) for j in range(graph.m)})


def _timed(fn):
    def run(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def criterion_k3_golden(rng, k3: GraphFile, tol=1e-8) -> CheckResult:
    """K3 charpoly against b(b^2 - 3st a^2 sigma^2) - a^3 sigma^3 (s^3 + t^3)."""
    w = _Worst()
    for _ in range(20):
        params, G = _draw_k3(rng, k3.graph)
        U = u_gs(G, params[0])
        for _ in range(10):
            sig = random_sigma(rng)
            direct = determinant(sig * np.eye(6) - U)
            w.update(rel_residual(direct, k3_closed_form(*params, sig)), params)
    return CheckResult("1 K3 golden charpoly", w.value <= tol, w.value, tol)


@_timed
def criterion_reduction(rng, tol=1e-8, graphs=50) -> CheckResult:
    """Direct 2m x 2m charpoly against both n x n reductions."""
    w = _Worst()
    for _ in range(graphs):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(max(n - 1, 1), 17))
        G = random_graph(rng, n, m)
        k = rng.uniform(0.5, 10)
        for _ in range(10):
            w.update(charpoly_via_reduction(G, k, random_sigma(rng)).residual, (n, m, k))
    return CheckResult("2 charpoly reduction", w.value <= tol, w.value, tol)


def _covering_cases(rng, k3: GraphFile, count=10):
    groups = [cyclic_group(2), cyclic_group(3), product_group([2, 2])]
    cases = []
    for i in range(count):
        grp = groups[i % 3]
        n = int(rng.integers(2, 6))
        m = int(rng.integers(n, n + 4))
        G = random_graph(rng, n, m)
        cases.append((G, _random_voltage(rng, G, grp), characters_abelian(grp)))
    return cases


@_timed
def criterion_covering(rng, k3: GraphFile, tol=1e-8) -> CheckResult:
    """Covering determinant against the irrep factorisation and the L-product."""
    w = _Worst()
    params, G = _draw_k3(rng, k3.graph)
    va = VoltageAssignment(G, k3.voltage.group, k3.voltage.voltage)
    closed = _Worst()
    for _ in range(10):
        sig = random_sigma(rng)
        res = covering_charpoly(G, params[0], va, k3.irreps, sig)
        w.update(res.agreement.residual, "K3/Z2")
        w.update(covering_from_l_functions(G, params[0], va, k3.irreps, sig).residual, "K3/Z2 L")
        closed.update(rel_residual(res.direct, k3_cover_closed_form(*params, sig)))
    for G, va, irreps in _covering_cases(rng, k3):
        k = rng.uniform(0.5, 10)
        for _ in range(10):
            sig = random_sigma(rng)
            w.update(covering_charpoly(G, k, va, irreps, sig).agreement.residual, (G.n, G.m))
            w.update(covering_from_l_functions(G, k, va, irreps, sig).residual, (G.n, G.m))
    worst = max(w.value, closed.value)
    return CheckResult("3 covering decomposition", worst <= tol, worst, tol,
                       detail={"closed_form_12x12": closed.value, "identities": w.value})


@_timed
def criterion_l_function(rng, k3: GraphFile, tol=1e-8) -> CheckResult:
    """Three-way L-function identity for every character; K3 chi_1 sextic."""
    w = _Worst()
    params, G = _draw_k3(rng, k3.graph)
    va = VoltageAssignment(G, k3.voltage.group, k3.voltage.voltage)
    for _ in range(10):
        s = 1 / random_sigma(rng)
        for rho in k3.irreps:
            w.update(l_function_reciprocal(G, params[0], va, rho, s).residual, ("K3", rho.name))
        twisted = l_function_reciprocal(G, params[0], va, k3.irreps[1], s)["direct"] / s ** 6
        w.update(rel_residual(twisted, k3_closed_form(*params, 1 / s, twisted=True)), "K3 chi1 sextic")
    for G, va, irreps in _covering_cases(rng, k3):
        k = rng.uniform(0.5, 10)
        for _ in range(10):
            s = 1 / random_sigma(rng)
            for rho in irreps:
                w.update(l_function_reciprocal(G, k, va, rho, s).residual, (G.n, G.m, rho.name))
    return CheckResult("4 L-function determinant", w.value <= tol, w.value, tol)


@_timed
def criterion_euler(rng, k3: GraphFile, tol=1e-8, order=8) -> CheckResult:
    """Euler product over prime cycles against the trace-oracle series."""
    w = _Worst()
    cases = []
    params, G = _draw_k3(rng, k3.graph)
    cases.append((G, params[0], VoltageAssignment(G, k3.voltage.group, k3.voltage.voltage), k3.irreps))
    for i in range(5):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(n - 1, n + 2))
        G = random_graph(rng, n, m, loops=False)
        grp = [cyclic_group(2), cyclic_group(3), product_group([2, 2])][i % 3]
        cases.append((G, rng.uniform(0.5, 10), _random_voltage(rng, G, grp), characters_abelian(grp)))
    for G, k, va, irreps in cases:
        for rho in irreps:
            e = euler_product_series(G, k, va, rho, order)
            t = trace_series(G, k, va, rho, order)
            w.update(float(np.abs(e.coeffs - t.coeffs).max()), (G.n, G.m, rho.name))
    return CheckResult("5 Euler product series", w.value <= tol, w.value, tol)


@_timed
def criterion_operators(rng, tol=1e-9, draws=20) -> CheckResult:
    """Conjugacy/inverse relations between the four walks, plus their unitarity."""
    w = _Worst()
    unit = _Worst()
    for _ in range(draws):
        n = int(rng.integers(1, 9))
        G = random_graph(rng, n, int(rng.integers(max(n - 1, 1), 13)))
        k = rng.uniform(0.5, 10)
        J = j0_matrix(G)
        I = np.eye(G.num_arcs)
        Ug, Uh, Ut, Up = (walk_operator(G, k, name) for name in WALKS)
        checks = {
            "gs_vs_hkss_inverse": J @ np.linalg.inv(Uh) @ J - Ug,
            "tilde_conjugate": J @ Ut @ J - Ug,
            "tilde_hkss_inverse": Ut @ Uh - I,
            "hkss_prime": J @ Uh @ J - Up,
            "gs_inverse": Ug @ Up - I,
        }
        for name, M in checks.items():
            w.update(float(np.abs(M).max()), name)
        for name, U in zip(WALKS, (Ug, Uh, Ut, Up)):
            unit.update(float(np.abs(U @ U.conj().T - I).max()), name)
    worst = max(w.value, unit.value)
    return CheckResult("6 operator identities", worst <= tol, worst, tol,
                       detail={"identities": w.value, "unitarity": unit.value})


def equilateral_oracle(k_min, k_max):
    """k with cos k in {1, -1/2} (unit-length Kirchhoff K3)."""
    out = []
    for c in (1.0, -0.5):
        base = np.arccos(c)
        for j in range(int(k_max // (2 * np.pi)) + 2):
            for k in (2 * np.pi * j + base, 2 * np.pi * j - base):
                if k_min < k < k_max:
                    out.append(k)
    return sorted(set(np.round(out, 12)))


@_timed
def criterion_spectrum(k3: GraphFile, tol=1e-6) -> CheckResult:
    """Secular roots of equilateral K3 and the four-walk eigenvalue-1 test."""
    G = k3.graph.with_parameters(1.0, 0.0, 0.0)
    modes = find_secular_roots(G, 0.1, 7.0, 2000)
    roots = sorted({round(md.k, 9) for md in modes})
    oracle = equilateral_oracle(0.1, 7.0)
    root_err = multiset_distance(roots, oracle) if len(roots) == len(oracle) else np.inf
    eig_err = 0.0
    for kk in roots:
        for name in WALKS:
            eig_err = max(eig_err, float(np.min(np.abs(eigenvalues(walk_operator(G, kk, name)) - 1))))
    mode_err = 0.0
    for md in modes:
        r = np.exp(1j * G.length * (md.k + G.potential))
        eq3 = float(np.abs(md.a - md.b[G.inverse] * r).max())
        mode_err = max(mode_err, md.consistency, eq3, md.residual)
    worst = max(root_err, eig_err, mode_err)
    return CheckResult("7 equilateral K3 spectrum", worst <= tol, worst, tol,
                       detail={"roots": roots, "oracle": oracle, "eigenvalue_one": eig_err,
                               "eigenmode": mode_err})


@_timed
def criterion_ihara(rng, graphs: dict, tol=1e-10) -> CheckResult:
    """Bass formula against det(I - uB); K3 against (1 - u^3)^2."""
    w = _Worst()
    for name, G in graphs.items():
        for _ in range(10):
            u = complex(rng.uniform(0.05, 0.3) * np.exp(2j * np.pi * rng.uniform()))
            res = ihara_zeta_reciprocal(G, u)
            w.update(res.residual, name)
            if name == "K3":
                w.update(rel_residual(res["bass"], (1 - u ** 3) ** 2, rtol=tol), "K3 closed form")
    return CheckResult("8 Ihara cross-check", w.value <= tol, w.value, tol)


def run_acceptance(seed: int = 0) -> list[CheckResult]:
    """Criteria 1-8 on the bundled graphs."""
    rng = np.random.default_rng(seed)
    k3 = parse_graph_file("k3_z2")
    k4 = parse_graph_file("k4")
    theta = parse_graph_file("theta_klein")
    return [
        criterion_k3_golden(rng, k3),
        criterion_reduction(rng),
        criterion_covering(rng, k3),
        criterion_l_function(rng, k3),
        criterion_euler(rng, k3),
        criterion_operators(rng),
        criterion_spectrum(k3),
        criterion_ihara(rng, {"K3": k3.graph, "K4": k4.graph, "theta": theta.graph}),
    ]


@_timed
def file_identities(gf: GraphFile, rng, tol=1e-8, samples=10) -> CheckResult:
    """Every identity applicable to one graph file at random k and sigma."""
    w = _Worst()
    G = gf.graph
    for _ in range(samples):
        k = rng.uniform(0.5, 10)
        sig = random_sigma(rng)
        w.update(charpoly_via_reduction(G, k, sig).residual, "reduction")
        if gf.voltage is not None and gf.irreps is not None:
            w.update(covering_charpoly(G, k, gf.voltage, gf.irreps, sig).agreement.residual, "covering")
            w.update(covering_from_l_functions(G, k, gf.voltage, gf.irreps, sig).residual, "l_product")
            for rho in gf.irreps:
                w.update(l_function_reciprocal(G, k, gf.voltage, rho, 1 / sig).residual, rho.name)
    return CheckResult(f"identities on {gf.name}", w.value <= tol, w.value, tol,
                       detail={"worst_at": str(w.where)})
