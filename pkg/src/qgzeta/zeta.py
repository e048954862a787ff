"""Determinant identities for the bond scattering matrix.

Covers the n x n reduction of det(sigma I - U), twisted blocks of a
voltage assignment, the covering decomposition, L-functions, their Euler
product over prime cycles and the Ihara zeta cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExcludedPointError, GroupError, LimitExceededError
from .graph import MetricGraph, VoltageAssignment, derived_covering
from .groups import IrrepSet, Representation, validate_representation
from .linalg import PowerSeries, determinant, kron, rel_residual, series_log_det
from .scattering import _vertex_factors, phases, u_gs

EXCLUDE_TOL = 1e-12
MAX_CYCLE_LEN = 12


@dataclass(frozen=True)
class Agreement:
    """Several evaluations of the same quantity.  ``residual`` is the
    largest relative deviation from the first value (absolute floor 1e-10)."""

    values: dict

    @property
    def reference(self) -> complex:
        return next(iter(self.values.values()))

    @property
    def residual(self) -> float:
        ref = self.reference
        return max((rel_residual(v, ref) for v in self.values.values()), default=0.0)

    def holds(self, rtol: float = 1e-8) -> bool:
        return self.residual <= rtol

    def __getitem__(self, key):
        return self.values[key]


@dataclass(frozen=True, eq=False)
class ReducedMatrices:
    sigma: complex
    A_tilde: np.ndarray
    A_bar: np.ndarray
    D_bar: np.ndarray


def _arc_weights(graph: MetricGraph, k: complex, sigma: complex):
    """x, t and w_e = t_e / (sigma^2 - t_e t_e^-1), checking exclusions."""
    x = _vertex_factors(graph, k)
    t, _ = phases(graph, k)
    tt = t * t[graph.inverse]
    sig2 = complex(sigma) ** 2
    gap = sig2 - tt
    bad = np.flatnonzero(np.abs(gap) <= EXCLUDE_TOL * max(1.0, abs(sig2)))
    if bad.size:
        edge = graph.edge_ids[bad[0] // 2]
        raise ExcludedPointError(f"sigma^2 = exp(2ikL) on edge {edge!r}")
    return x, t, tt, t / gap, tt / gap


def reduced_matrices(graph: MetricGraph, k: complex, sigma: complex) -> ReducedMatrices:
    """A~ (x at the terminus), A-bar (x at the origin) and D-bar at sigma^2."""
    x, _, _, w, ttw = _arc_weights(graph, k, sigma)
    o, te = graph.origin, graph.terminus
    n = graph.n
    At = np.zeros((n, n), dtype=complex)
    Ab = np.zeros((n, n), dtype=complex)
    np.add.at(At, (o, te), x[te] * w)
    np.add.at(Ab, (o, te), x[o] * w)
    dbar = np.zeros(n, dtype=complex)
    np.add.at(dbar, o, x[o] * ttw)
    return ReducedMatrices(complex(sigma), At, Ab, np.diag(dbar))


def _edge_product(graph, k, sigma, power=1):
    t, _ = phases(graph, k)
    tt = (t * t[graph.inverse])[::2]
    return np.prod((complex(sigma) ** 2 - tt) ** power)


def charpoly_via_reduction(graph: MetricGraph, k: complex, sigma: complex) -> Agreement:
    """det(sigma I_2m - U_GS) directly and through both n x n reductions."""
    red = reduced_matrices(graph, k, sigma)
    U = u_gs(graph, k)
    I = np.eye(graph.n)
    prod = _edge_product(graph, k, sigma)
    return Agreement({
        "direct": determinant(sigma * np.eye(U.shape[0]) - U),
        "tilde": determinant(I - sigma * red.A_tilde + red.D_bar) * prod,
        "bar": determinant(I - sigma * red.A_bar + red.D_bar) * prod,
    })


@dataclass(frozen=True, eq=False)
class TwistedBlocks:
    """Per group element h: U_h keeps columns f of U_GS with alpha(f) = h;
    A_tilde[h] / A_bar[h] keep arcs e with alpha(e) = h."""

    U: np.ndarray
    A_tilde: np.ndarray | None = None
    A_bar: np.ndarray | None = None
    D_bar: np.ndarray | None = None


def twisted_blocks(graph: MetricGraph, k: complex, va: VoltageAssignment,
                   sigma: complex | None = None) -> TwistedBlocks:
    p = va.group.order
    U = u_gs(graph, k)
    volt = va.voltage
    Uh = np.zeros((p,) + U.shape, dtype=complex)
    for h in range(p):
        cols = volt == h
        Uh[h][:, cols] = U[:, cols]
    if sigma is None:
        return TwistedBlocks(Uh)
    x, _, _, w, ttw = _arc_weights(graph, k, sigma)
    o, te = graph.origin, graph.terminus
    n = graph.n
    At = np.zeros((p, n, n), dtype=complex)
    Ab = np.zeros((p, n, n), dtype=complex)
    np.add.at(At, (volt, o, te), x[te] * w)
    np.add.at(Ab, (volt, o, te), x[o] * w)
    dbar = np.zeros(n, dtype=complex)
    np.add.at(dbar, o, x[o] * ttw)
    return TwistedBlocks(Uh, At, Ab, np.diag(dbar))


def twisted_operator(blocks: np.ndarray, rep: Representation) -> np.ndarray:
    """sum_h rho(h)^T (x) U_h, of size (d * 2m)."""
    return sum(kron(rep.matrices[h].T, blocks[h]) for h in range(blocks.shape[0]))


def twisted_reduced(blocks: np.ndarray, rep: Representation) -> np.ndarray:
    """sum_h rho(h) (x) A_h (no transpose)."""
    return sum(kron(rep.matrices[h], blocks[h]) for h in range(blocks.shape[0]))


def _check_rep(rep: Representation, va: VoltageAssignment):
    if rep.group.order != va.group.order:
        raise GroupError("representation and voltage use different groups")
    report = validate_representation(rep)
    if not report.passed:
        raise GroupError(f"invalid representation {rep.name!r} (violation {report.worst:.3g})")


def _check_irreps(irreps: IrrepSet, va: VoltageAssignment):
    if irreps.group.order != va.group.order:
        raise GroupError("irreps and voltage use different groups")
    total = sum(r.degree ** 2 for r in irreps)
    if total != va.group.order:
        raise GroupError(f"incomplete irrep set: sum of d^2 = {total} != {va.group.order}")


@dataclass(frozen=True)
class CoveringCharpoly:
    agreement: Agreement
    factors: list

    @property
    def direct(self) -> complex:
        return self.agreement["direct"]

    @property
    def decomposed(self) -> complex:
        return self.agreement["decomposed"]


def covering_charpoly(graph: MetricGraph, k: complex, va: VoltageAssignment,
                      irreps: IrrepSet, sigma: complex, reduced: bool = True) -> CoveringCharpoly:
    """det(sigma I - U(G^alpha)) on the built covering versus the product
    over irreps of det(sigma I - sum_h rho_i(h)^T (x) U_h)^{f_i}.

    With ``reduced`` the two n x n product forms (A-bar and A~) are added.
    ``factors`` lists, per irrep, (name, degree, factor determinant).
    """
    _check_irreps(irreps, va)
    cover = derived_covering(graph, va)
    Uc = u_gs(cover.covering, k)
    direct = determinant(sigma * np.eye(Uc.shape[0]) - Uc)
    blocks = twisted_blocks(graph, k, va, sigma if reduced else None)
    factors = []
    decomposed = 1.0 + 0j
    for rep in irreps:
        M = twisted_operator(blocks.U, rep)
        f = determinant(sigma * np.eye(M.shape[0]) - M)
        factors.append((rep.name, rep.degree, f))
        decomposed *= f ** rep.degree
    values = {"direct": direct, "decomposed": decomposed}
    if reduced:
        p = va.group.order
        prod = _edge_product(graph, k, sigma, p)
        for key, A in (("bar", blocks.A_bar), ("tilde", blocks.A_tilde)):
            total = 1.0 + 0j
            for rep in irreps:
                d = rep.degree
                M = np.eye(graph.n * d) - sigma * twisted_reduced(A, rep) + kron(np.eye(d), blocks.D_bar)
                total *= determinant(M) ** d
            values[key] = total * prod
    return CoveringCharpoly(Agreement(values), factors)


def l_function_reciprocal(graph: MetricGraph, k: complex, va: VoltageAssignment,
                          rho: Representation, s: complex) -> Agreement:
    """zeta_G(rho, alpha, s)^-1 = det(I - s sum_h rho(h)^T (x) U_h), with
    both n d x n d determinant expressions evaluated at sigma = 1/s."""
    _check_rep(rho, va)
    s = complex(s)
    if s == 0:
        raise ExcludedPointError("s must be nonzero")
    d = rho.degree
    blocks = twisted_blocks(graph, k, va, 1.0 / s)
    M = twisted_operator(blocks.U, rho)
    direct = determinant(np.eye(M.shape[0]) - s * M)
    t, _ = phases(graph, k)
    tt = (t * t[graph.inverse])[::2]
    prod = np.prod((1 - tt * s * s) ** d)
    I = np.eye(graph.n * d)
    D = kron(np.eye(d), blocks.D_bar)
    return Agreement({
        "direct": direct,
        "tilde": determinant(I - twisted_reduced(blocks.A_tilde, rho) / s + D) * prod,
        "bar": determinant(I - twisted_reduced(blocks.A_bar, rho) / s + D) * prod,
    })


def covering_from_l_functions(graph: MetricGraph, k: complex, va: VoltageAssignment,
                              irreps: IrrepSet, sigma: complex) -> Agreement:
    """sigma^{2mp} prod_rho zeta(rho, 1/sigma)^{-deg rho} against the
    covering's det(sigma I - U(G^alpha))."""
    _check_irreps(irreps, va)
    sigma = complex(sigma)
    cover = derived_covering(graph, va)
    Uc = u_gs(cover.covering, k)
    direct = determinant(sigma * np.eye(Uc.shape[0]) - Uc)
    blocks = twisted_blocks(graph, k, va)
    product = sigma ** Uc.shape[0]
    for rep in irreps:
        M = twisted_operator(blocks.U, rep)
        product *= determinant(np.eye(M.shape[0]) - M / sigma) ** rep.degree
    return Agreement({"direct": direct, "l_product": product})


# --- prime cycles -----------------------------------------------------------

@dataclass(frozen=True)
class PrimeCycleClass:
    """Rotation class of a prime cycle; ``arcs`` is the lexicographically
    least rotation (arc positions)."""

    arcs: tuple[int, ...]
    weight: complex | None = None
    voltage: int | None = None

    @property
    def length(self) -> int:
        return len(self.arcs)


def _successors(graph: MetricGraph):
    by_origin = [[] for _ in range(graph.n)]
    for a in range(graph.num_arcs):
        by_origin[graph.origin[a]].append(a)
    return [by_origin[graph.terminus[a]] for a in range(graph.num_arcs)]


def _lyndon_cycles(graph: MetricGraph, max_len: int):
    """Closed arc sequences that are Lyndon words, by constrained FKM.

    A prefix survives only while it is a pre-necklace; the tracked period
    ``p`` equals the word length exactly when the word is Lyndon.
    """
    succ = _successors(graph)
    out = {L: [] for L in range(1, max_len + 1)}
    word = []

    def extend(p):
        t = len(word)
        if graph.terminus[word[-1]] == graph.origin[word[0]] and p == t:
            out[t].append(tuple(word))
        if t == max_len:
            return
        ref = word[t - p]
        for b in succ[word[-1]]:
            if b < ref:
                continue
            word.append(b)
            extend(p if b == ref else t + 1)
            word.pop()

    for a in range(graph.num_arcs):
        word.append(a)
        extend(1)
        word.pop()
    return out


def cycle_weight(graph: MetricGraph, k: complex, arcs) -> complex:
    """t_C a_C with a_C = sigma_{e1 ep} sigma_{ep e(p-1)} ... sigma_{e2 e1}."""
    x = _vertex_factors(graph, k)
    t, _ = phases(graph, k)
    inv = graph.inverse
    w = 1.0 + 0j
    p = len(arcs)
    for i in range(p):
        e, f = arcs[(i + 1) % p], arcs[i]
        w *= t[e] * (x[graph.origin[e]] - (1.0 if inv[e] == f else 0.0))
    return w


def prime_cycles(graph: MetricGraph, max_len: int, k: complex | None = None,
                 va: VoltageAssignment | None = None) -> list[PrimeCycleClass]:
    """Every rotation class of prime cycles (backtracking allowed) with
    length <= max_len, ordered by length then representative."""
    if max_len > MAX_CYCLE_LEN:
        raise LimitExceededError(f"max_len {max_len} exceeds {MAX_CYCLE_LEN}")
    if max_len < 1:
        return []
    found = _lyndon_cycles(graph, max_len)
    out = []
    for L in range(1, max_len + 1):
        for arcs in sorted(found[L]):
            weight = cycle_weight(graph, k, arcs) if k is not None else None
            volt = None
            if va is not None:
                volt = 0
                for a in arcs:
                    volt = va.group.table[volt, va.voltage[a]]
                volt = int(volt)
            out.append(PrimeCycleClass(arcs, weight, volt))
    return out


def euler_product_series(graph: MetricGraph, k: complex, va: VoltageAssignment,
                         rho: Representation, order: int) -> PowerSeries:
    """prod over prime classes |C| <= order of det(I_d - rho(alpha(C))^T t_C a_C s^|C|)^-1,
    truncated at s^order."""
    if order > MAX_CYCLE_LEN:
        raise LimitExceededError(f"order {order} exceeds {MAX_CYCLE_LEN}")
    _check_rep(rho, va)
    total = PowerSeries.one(order)
    for cyc in prime_cycles(graph, order, k, va):
        M = rho.matrices[cyc.voltage].T * cyc.weight
        # det(I - xM) has ascending coefficients np.poly(M)
        factor = PowerSeries.from_poly(np.poly(M), order).substitute_power(cyc.length)
        total = total * factor.inverse()
    return total


def trace_series(graph: MetricGraph, k: complex, va: VoltageAssignment,
                 rho: Representation, order: int) -> PowerSeries:
    """det(I - s sum_h rho(h)^T (x) U_h)^-1 expanded via traces of powers."""
    M = twisted_operator(twisted_blocks(graph, k, va).U, rho)
    return (-series_log_det(M, order)).exp()


# --- Ihara zeta -------------------------------------------------------------

def edge_matrix(graph: MetricGraph) -> np.ndarray:
    """Non-backtracking arc matrix: B_ef = 1 iff t(e) = o(f) and f != e^-1."""
    B = (graph.terminus[:, None] == graph.origin[None, :]).astype(float)
    B[np.arange(graph.num_arcs), graph.inverse] = 0.0
    return B


def ihara_zeta_reciprocal(graph: MetricGraph, u: complex) -> Agreement:
    """Bass: (1-u^2)^{r-1} det(I - uA + u^2(D - I)) against det(I - uB)."""
    n = graph.n
    A = np.zeros((n, n))
    np.add.at(A, (graph.origin, graph.terminus), 1.0)
    D = np.diag(graph.degree.astype(float))
    r = graph.m - n + 1
    bass = (1 - u * u) ** (r - 1) * determinant(np.eye(n) - u * A + u * u * (D - np.eye(n)))
    B = edge_matrix(graph)
    edge = determinant(np.eye(graph.num_arcs) - u * B)
    return Agreement({"bass": complex(bass), "edge": edge})
