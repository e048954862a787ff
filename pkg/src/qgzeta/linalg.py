"""Dense complex linear algebra and truncated power series."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.polynomial import Polynomial

from .errors import LimitExceededError, NumericalError

RTOL = 1e-8
ATOL = 1e-10


def as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def determinant(M) -> complex:
    """Determinant by row-pivoted LU (LAPACK getrf)."""
    M = as_square(M)
    if M.shape[0] == 0:
        return 1.0 + 0j
    return complex(np.linalg.det(M))


def char_poly(M) -> Polynomial:
    """Monic p(sigma) = det(sigma I - M), coefficients in ascending degree.

    The determinant is sampled at N+1 equispaced points of the circle of
    radius ``max(1, ||M||_2)`` and interpolated by an inverse DFT.
    """
    M = as_square(M)
    N = M.shape[0]
    r = max(1.0, float(np.linalg.norm(M, 2))) if N else 1.0
    nodes = r * np.exp(2j * np.pi * np.arange(N + 1) / (N + 1))
    I = np.eye(N)
    vals = np.array([determinant(z * I - M) for z in nodes])
    coef = np.fft.fft(vals) / (N + 1) / r ** np.arange(N + 1)
    coef[N] = 1.0
    return Polynomial(coef)


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues with multiplicity (LAPACK QR iteration)."""
    M = as_square(M)
    if M.shape[0] > 200:
        raise ValueError("eigenvalues: matrix larger than 200x200")
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}") from exc


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def block_diag(blocks) -> np.ndarray:
    return scipy.linalg.block_diag(*[np.asarray(b, dtype=complex) for b in blocks])


def multiset_distance(a, b) -> float:
    """Bottleneck distance between two equal-size multisets of complex numbers."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return np.inf
    if a.size == 0:
        return 0.0
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(a[:, None] - b[None, :])
    # minimise the largest matched distance: assignment on a steep power of the cost
    rows, cols = linear_sum_assignment((cost / max(cost.max(), 1e-300)) ** 8)
    return float(cost[rows, cols].max())


def rel_residual(a, b, rtol=RTOL, atol=ATOL) -> float:
    """|a - b| scaled so that ``<= rtol`` means agreement at relative
    tolerance ``rtol`` with absolute floor ``atol``."""
    return float(abs(a - b) / max(abs(a), abs(b), atol / rtol))


@dataclass(frozen=True)
class PowerSeries:
    """Truncated series c_0 + c_1 s + ... + c_N s^N with fixed order N."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("power series needs a non-empty 1-d coefficient array")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def one(cls, order: int) -> "PowerSeries":
        c = np.zeros(order + 1, dtype=complex)
        c[0] = 1
        return cls(c)

    @classmethod
    def from_poly(cls, coeffs, order: int) -> "PowerSeries":
        c = np.zeros(order + 1, dtype=complex)
        coeffs = np.asarray(coeffs, dtype=complex)[: order + 1]
        c[: coeffs.size] = coeffs
        return cls(c)

    def _check(self, other):
        if other.order != self.order:
            raise ValueError("power series orders differ")

    def __add__(self, other):
        if isinstance(other, PowerSeries):
            self._check(other)
            return PowerSeries(self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[0] += other
        return PowerSeries(c)

    def __neg__(self):
        return PowerSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            self._check(other)
            return PowerSeries(np.convolve(self.coeffs, other.coeffs)[: self.order + 1])
        return PowerSeries(self.coeffs * other)

    __rmul__ = __mul__

    def inverse(self) -> "PowerSeries":
        a = self.coeffs
        if abs(a[0]) == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        b = np.zeros_like(a)
        b[0] = 1 / a[0]
        for n in range(1, a.size):
            b[n] = -np.dot(a[1 : n + 1], b[n - 1 :: -1][:n]) / a[0]
        return PowerSeries(b)

    def derivative(self) -> np.ndarray:
        return self.coeffs[1:] * np.arange(1, self.coeffs.size)

    def exp(self) -> "PowerSeries":
        """exp of a series with zero constant term (f' = f g')."""
        a = self.coeffs
        if abs(a[0]) > 0:
            raise ValueError("exp needs a zero constant term")
        da = a[1:] * np.arange(1, a.size)
        f = np.zeros_like(a)
        f[0] = 1
        for n in range(1, a.size):
            f[n] = np.dot(da[:n], f[n - 1 :: -1][:n]) / n
        return PowerSeries(f)

    def log(self) -> "PowerSeries":
        """log of a series with constant term 1."""
        a = self.coeffs
        if abs(a[0] - 1) > 1e-12:
            raise ValueError("log needs constant term 1")
        q = PowerSeries(a).inverse().coeffs
        da = self.derivative()
        # (log f)' = f' / f
        d = np.convolve(da, q)[: a.size - 1]
        out = np.zeros_like(a)
        out[1:] = d / np.arange(1, a.size)
        return PowerSeries(out)

    def substitute_power(self, k: int) -> "PowerSeries":
        """f(s) -> f(s^k), same truncation order."""
        c = np.zeros_like(self.coeffs)
        idx = np.arange(0, self.order + 1, k)
        c[idx] = self.coeffs[: idx.size]
        return PowerSeries(c)


MAX_SERIES_ORDER = 16


def series_log_det(F, order: int) -> PowerSeries:
    """Coefficients of log det(I - sF) = -sum_n tr(F^n) s^n / n."""
    F = as_square(F)
    if order > MAX_SERIES_ORDER:
        raise LimitExceededError(f"series order {order} exceeds {MAX_SERIES_ORDER}")
    c = np.zeros(order + 1, dtype=complex)
    P = np.eye(F.shape[0], dtype=complex)
    for n in range(1, order + 1):
        P = P @ F
        c[n] = -np.trace(P) / n
    return PowerSeries(c)


def det_series(F, order: int) -> PowerSeries:
    """Exact polynomial det(I - sF) truncated at ``order``."""
    F = as_square(F)
    # det(I - sF) = s^N det(s^-1 I - F): reversed characteristic coefficients
    return PowerSeries.from_poly(np.poly(F) if F.shape[0] else [1.0], order)
