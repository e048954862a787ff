"""Bond scattering matrices, secular roots, eigenmodes and walk evolution."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NumericalError, SingularParameterError
from .graph import MetricGraph
from .linalg import determinant

POLE_TOL = 1e-13
BUILD_TOL = 1e-12
WALKS = ("GS", "HKSS", "TILDE", "PRIME")


class GridResolutionWarning(UserWarning):
    pass


def _vertex_factors(graph: MetricGraph, k: complex) -> np.ndarray:
    k = complex(k)
    denom = 1j * k * graph.degree - graph.lam
    scale = np.maximum(1.0, np.maximum(np.abs(k * graph.degree), np.abs(graph.lam)))
    bad = np.flatnonzero(np.abs(denom) <= POLE_TOL * scale)
    if bad.size:
        v = graph.vertices[bad[0]]
        raise SingularParameterError(f"k={k} is a pole of the vertex factor at {v!r} (ik d = lambda)")
    return 2j * k / denom


def vertex_factor(graph: MetricGraph, v, k: complex) -> complex:
    """x_v(k) = 2ik / (ik d_v - lambda_v)."""
    i = v if isinstance(v, (int, np.integer)) else graph.vertex_index(v)
    return complex(_vertex_factors(graph, k)[i])


def phases(graph: MetricGraph, k: complex) -> tuple[np.ndarray, np.ndarray]:
    """Per-arc ``t_e = exp(iL_e(k - A_e))`` and ``r_e = exp(iL_e(k + A_e))``."""
    k = complex(k)
    t = np.exp(1j * graph.length * (k - graph.potential))
    r = np.exp(1j * graph.length * (k + graph.potential))
    return t, r


def j0_matrix(graph: MetricGraph) -> np.ndarray:
    N = graph.num_arcs
    J = np.zeros((N, N))
    J[np.arange(N), graph.inverse] = 1.0
    return J


def f_matrix(graph: MetricGraph, x: np.ndarray) -> np.ndarray:
    """Block vertex matrix: F_ef = x_{o(e)} [o(e) = o(f)] - delta_ef."""
    o = graph.origin
    return np.where(o[:, None] == o[None, :], x[o][:, None], 0.0) - np.eye(graph.num_arcs)


def s_matrix(graph: MetricGraph, x: np.ndarray) -> np.ndarray:
    """Vertex scattering: S_ef = x_{t(f)} - delta_{e^-1 f} when t(f) = o(e)."""
    o, t, inv = graph.origin, graph.terminus, graph.inverse
    N = graph.num_arcs
    S = np.where(t[None, :] == o[:, None], x[t][None, :], 0.0).astype(complex)
    S[np.arange(N), inv] -= 1.0
    return S


@dataclass(frozen=True, eq=False)
class ScatteringSet:
    k: complex
    T: np.ndarray
    S: np.ndarray
    R: np.ndarray
    F: np.ndarray
    J0: np.ndarray
    x: np.ndarray


def scattering_set(graph: MetricGraph, k: complex) -> ScatteringSet:
    """All five arc-space matrices at wavenumber k.

    T and S are built from their entry formulas and checked against
    J0 R J0 and F J0.
    """
    x = _vertex_factors(graph, k)
    t, r = phases(graph, k)
    T, R = np.diag(t), np.diag(r)
    J0 = j0_matrix(graph)
    F = f_matrix(graph, x)
    S = s_matrix(graph, x)
    err = max(np.abs(T - J0 @ R @ J0).max(), np.abs(S - F @ J0).max())
    if err > BUILD_TOL * max(1.0, np.abs(x).max()):
        raise NumericalError(f"T = J0 R J0 / S = F J0 violated by {err:.3g}")
    return ScatteringSet(complex(k), T, S, R, F, J0, x)


def u_gs(graph: MetricGraph, k: complex) -> np.ndarray:
    """Gnutzmann-Smilansky bond scattering matrix T(k) S(k)."""
    x = _vertex_factors(graph, k)
    t, _ = phases(graph, k)
    return t[:, None] * s_matrix(graph, x)


def u_hkss(graph: MetricGraph, k: complex) -> np.ndarray:
    """S(-k) T(-k); S(-k) carries x_j(-k) = 2ik / (ik d_j + lambda_j)."""
    x = _vertex_factors(graph, -complex(k))
    _, r = phases(graph, k)
    return s_matrix(graph, x) * (1.0 / r)[None, :]


def u_tilde(graph: MetricGraph, k: complex) -> np.ndarray:
    """Ambainis-type quantum graph walk R(k) J0 F."""
    x = _vertex_factors(graph, k)
    _, r = phases(graph, k)
    F = f_matrix(graph, x)
    return r[:, None] * F[graph.inverse]


def u_prime(graph: MetricGraph, k: complex) -> np.ndarray:
    """J0 (T(k) F)^-1, using F^-1 = x(-k) J - I blockwise and T^-1 = T(k)^*."""
    x_minus = _vertex_factors(graph, -complex(k))
    t, _ = phases(graph, k)
    H_inv = f_matrix(graph, x_minus) * (1.0 / t)[None, :]
    return H_inv[graph.inverse]


_BUILDERS = {"GS": u_gs, "HKSS": u_hkss, "TILDE": u_tilde, "PRIME": u_prime}


def walk_operator(graph: MetricGraph, k: complex, which: str) -> np.ndarray:
    try:
        return _BUILDERS[which.upper()](graph, k)
    except KeyError:
        raise ValueError(f"unknown walk {which!r}; choose from {WALKS}") from None


def secular_det(graph: MetricGraph, k: complex) -> complex:
    """det(I - U_GS(k)); vanishes exactly on the quantum graph spectrum."""
    U = u_gs(graph, k)
    return determinant(np.eye(U.shape[0]) - U)


@dataclass(frozen=True)
class WalkState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.ndim != 1 or not np.all(np.isfinite(a)):
            raise ValueError("walk state must be a finite 1-d amplitude vector")
        object.__setattr__(self, "amplitudes", a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def walk_evolve(graph: MetricGraph, k: complex, which: str, state, steps: int,
                trace: bool = False):
    """Apply the selected walk operator ``steps`` times.

    With ``trace=True`` returns the list of states psi_0 .. psi_steps.
    """
    if not isinstance(state, WalkState):
        state = WalkState(state)
    if state.amplitudes.size != graph.num_arcs:
        raise ValueError(f"state has length {state.amplitudes.size}, expected {graph.num_arcs}")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    U = walk_operator(graph, k, which)
    psi = state.amplitudes
    history = [state]
    for _ in range(steps):
        psi = U @ psi
        if trace:
            history.append(WalkState(psi))
    return history if trace else WalkState(psi)


@dataclass(frozen=True)
class Eigenmode:
    """Solution data at a secular root.

    ``a`` solves a = U~ a (unit norm), ``b = F a`` and ``phi_j = a_e + b_e``
    for arcs e leaving j.  ``residual`` is ||(I - U~) a||, ``consistency``
    the largest spread of a_e + b_e among arcs sharing an origin.
    """

    k: float
    a: np.ndarray
    b: np.ndarray
    phi: np.ndarray
    residual: float
    consistency: float
    degeneracy: int
    det_abs: float


def eigenmodes_at(graph: MetricGraph, k: complex, null_tol: float = 1e-6) -> list[Eigenmode]:
    """Null directions of I - U~(k) via the SVD; at least one is returned."""
    k = complex(k)
    sset = scattering_set(graph, k)
    Ut = sset.R @ sset.J0 @ sset.F
    M = np.eye(graph.num_arcs) - Ut
    _, sv, Vh = np.linalg.svd(M)
    nullity = max(1, int(np.sum(sv <= null_tol)))
    det_abs = abs(determinant(M))
    out = []
    o = graph.origin
    for row in Vh[::-1][:nullity]:
        a = row.conj()
        a = a / np.linalg.norm(a)
        # fix the global phase for determinism
        j = int(np.argmax(np.abs(a)))
        a = a * (abs(a[j]) / a[j])
        b = sset.F @ a
        ab = a + b
        phi = np.zeros(graph.n, dtype=complex)
        np.add.at(phi, o, ab)
        phi /= graph.degree
        consistency = float(np.abs(ab - phi[o]).max())
        out.append(Eigenmode(
            k=k.real if k.imag == 0 else k,
            a=a, b=b, phi=phi,
            residual=float(np.linalg.norm(M @ a)),
            consistency=consistency,
            degeneracy=nullity,
            det_abs=det_abs,
        ))
    return out


def _newton_polish(g, k, lo, hi, h=1e-6, maxiter=60):
    """Newton steps on the complex det restricted to the real axis; a step is
    kept only if it lowers |det|."""
    val = g(k)
    for _ in range(maxiter):
        d = (g(k + h) - g(k - h)) / (2 * h)
        if d == 0:
            break
        k_new = min(max(k - (val / d).real, lo), hi)
        v_new = g(k_new)
        if not abs(v_new) < abs(val):
            break
        step, k, val = abs(k_new - k), k_new, v_new
        if step <= 4e-16 * abs(k):
            break
    return k, abs(val)


def find_secular_roots(graph: MetricGraph, k_min: float, k_max: float, grid_points: int = 2000,
                       *, accept: float = 1e-8, xtol: float = 1e-10,
                       null_tol: float = 1e-6) -> list[Eigenmode]:
    """Roots of det(I - U_GS(k)) on [k_min, k_max] with their eigenmodes.

    |det|^2 is scanned on a uniform grid; each local minimum is refined by
    bounded Brent (golden-section) minimisation of |det| on its two
    neighbouring cells, then polished by Newton steps on det itself (Brent
    alone stops near sqrt(eps) relative accuracy), and accepted when
    |det| < ``accept``.
    """
    if not k_min < k_max:
        return []
    if k_min <= 0:
        raise ValueError("k_min must be positive")
    if grid_points < 3:
        raise ValueError("grid_points must be >= 3")
    ks = np.linspace(k_min, k_max, grid_points)

    def f(k):
        return abs(secular_det(graph, k))

    vals = np.array([f(k) for k in ks]) ** 2
    cand = [i for i in range(grid_points)
            if (i == 0 or vals[i] <= vals[i - 1]) and (i == grid_points - 1 or vals[i] <= vals[i + 1])]
    roots = []
    for i in cand:
        lo, hi = ks[max(i - 1, 0)], ks[min(i + 1, grid_points - 1)]
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": xtol, "maxiter": 500})
        if not res.success:
            raise NumericalError(f"root refinement failed near k={ks[i]:.6g}: {res.message}")
        kstar, dval = _newton_polish(lambda k: secular_det(graph, k), float(res.x), lo, hi)
        if dval >= accept:
            continue
        if 0 < i < grid_points - 1 and min(kstar - lo, hi - kstar) < 10 * xtol:
            warnings.warn(f"minimum near k={kstar:.8g} sits on its bracket edge; grid may be too coarse",
                          GridResolutionWarning, stacklevel=2)
        if roots and abs(kstar - roots[-1]) < 1e-7:
            continue
        roots.append(kstar)
    modes = []
    for kstar in roots:
        modes.extend(eigenmodes_at(graph, kstar, null_tol=null_tol))
    return modes
