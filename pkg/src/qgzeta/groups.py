"""Finite groups as Cayley tables, abelian characters, unitary representations."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import GroupError

REP_TOL = 1e-10


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Group on indices ``0..p-1`` with ``table[g, h] = index of g*h``.

    Index 0 is the identity.  Construction checks the group axioms.
    """

    labels: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        tab = np.asarray(self.table, dtype=int)
        p = len(self.labels)
        if p == 0:
            raise GroupError("group must have at least one element")
        if tab.shape != (p, p):
            raise GroupError(f"product table must be {p}x{p}")
        if tab.min() < 0 or tab.max() >= p:
            raise GroupError("product table refers to unknown elements")
        if not (np.array_equal(tab[0], np.arange(p)) and np.array_equal(tab[:, 0], np.arange(p))):
            raise GroupError("element 0 must be the identity")
        for row in tab:
            if len(set(row.tolist())) != p:
                raise GroupError("product table is not a Latin square")
        # (gh)k == g(hk) for all triples
        if not np.array_equal(tab[tab], tab[:, tab]):
            raise GroupError("product table is not associative")
        object.__setattr__(self, "table", _frozen(tab, int))
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def order(self) -> int:
        return len(self.labels)

    @property
    def inverse(self) -> np.ndarray:
        return np.argmin(self.table, axis=1)

    def mul(self, g: int, h: int) -> int:
        return int(self.table[g, h])

    def index(self, g) -> int:
        """Element index from an int index or a label."""
        if isinstance(g, (int, np.integer)) and not isinstance(g, bool):
            if not 0 <= g < self.order:
                raise GroupError(f"element index {g} out of range")
            return int(g)
        try:
            return self.labels.index(str(g))
        except ValueError:
            raise GroupError(f"unknown group element {g!r}") from None

    def element_order(self, g: int) -> int:
        k, h = 1, g
        while h != 0:
            h = self.table[h, g]
            k += 1
        return k

    def is_abelian(self) -> bool:
        return np.array_equal(self.table, self.table.T)

    def regular_matrices(self) -> np.ndarray:
        """Permutation matrices P_g with (P_g)_{ij} = 1 iff g_i g = g_j."""
        p = self.order
        P = np.zeros((p, p, p))
        for g in range(p):
            P[g, np.arange(p), self.table[:, g]] = 1.0
        return P


def cyclic_group(n: int) -> FiniteGroup:
    """Z_n; element j is the j-th power of a generator.  Z_2 is labelled
    multiplicatively as {1, -1}."""
    if n < 1:
        raise GroupError("cyclic group order must be >= 1")
    idx = np.arange(n)
    table = (idx[:, None] + idx[None, :]) % n
    labels = ("1", "-1") if n == 2 else tuple(["1"] + [f"g^{j}" if j > 1 else "g" for j in range(1, n)])
    return FiniteGroup(labels, table)


def product_group(orders) -> FiniteGroup:
    """Direct product Z_{n1} x ... x Z_{nr}; elements are tuples in
    lexicographic order, labelled like ``(0,1)``."""
    orders = [int(n) for n in orders]
    if not orders or min(orders) < 1:
        raise GroupError("product group orders must be >= 1")
    elems = list(itertools.product(*(range(n) for n in orders)))
    pos = {e: i for i, e in enumerate(elems)}
    table = np.empty((len(elems), len(elems)), dtype=int)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            table[i, j] = pos[tuple((x + y) % n for x, y, n in zip(a, b, orders))]
    labels = ["(" + ",".join(map(str, e)) + ")" for e in elems]
    return FiniteGroup(tuple(labels), table)


@dataclass(frozen=True, eq=False)
class Representation:
    group: FiniteGroup
    matrices: np.ndarray
    name: str = ""

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim == 1:
            mats = mats[:, None, None]
        if mats.ndim != 3 or mats.shape[0] != self.group.order or mats.shape[1] != mats.shape[2]:
            raise GroupError(f"representation needs {self.group.order} square matrices of equal size")
        if not np.all(np.isfinite(mats)):
            raise GroupError("representation has non-finite entries")
        object.__setattr__(self, "matrices", _frozen(mats, complex))

    @property
    def degree(self) -> int:
        return self.matrices.shape[1]

    def __call__(self, g: int) -> np.ndarray:
        return self.matrices[g]

    def character(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)

    @classmethod
    def trivial(cls, group: FiniteGroup) -> "Representation":
        return cls(group, np.ones((group.order, 1, 1)), "trivial")


@dataclass(frozen=True)
class RepresentationReport:
    passed: bool
    worst: float
    homomorphism: float
    identity: float
    unitarity: float


def validate_representation(rep: Representation, tol: float = REP_TOL) -> RepresentationReport:
    """Check homomorphism, rho(1) = I and unitarity; never raises."""
    G, M = rep.group, rep.matrices
    d = rep.degree
    prod = np.einsum("gij,hjk->ghik", M, M)
    hom = np.abs(prod - M[G.table]).max()
    ident = np.abs(M[0] - np.eye(d)).max()
    unit = np.abs(M @ M.conj().transpose(0, 2, 1) - np.eye(d)).max()
    worst = float(max(hom, ident, unit))
    return RepresentationReport(worst <= tol, worst, float(hom), float(ident), float(unit))


@dataclass(frozen=True, eq=False)
class IrrepSet:
    """Complete list of inequivalent irreducible representations, trivial first."""

    representations: tuple[Representation, ...]

    def __post_init__(self):
        reps = tuple(self.representations)
        if not reps:
            raise GroupError("empty irrep set")
        G = reps[0].group
        if any(r.group is not G and r.group.order != G.order for r in reps):
            raise GroupError("irreps belong to different groups")
        if reps[0].degree != 1 or not np.allclose(reps[0].matrices, 1.0):
            raise GroupError("first irrep must be the trivial representation")
        total = sum(r.degree ** 2 for r in reps)
        if total != G.order:
            raise GroupError(f"sum of squared degrees is {total}, group order is {G.order}")
        for r in reps:
            rep = validate_representation(r)
            if not rep.passed:
                raise GroupError(f"representation {r.name or '?'} invalid (violation {rep.worst:.3g})")
        object.__setattr__(self, "representations", reps)

    @property
    def group(self) -> FiniteGroup:
        return self.representations[0].group

    def __iter__(self):
        return iter(self.representations)

    def __len__(self):
        return len(self.representations)

    def __getitem__(self, i):
        return self.representations[i]


def characters_abelian(group: FiniteGroup) -> IrrepSet:
    """All |G| linear characters of an abelian group.

    The regular permutation matrices commute, so a generic combination of
    them has a simple spectrum and its eigenvectors diagonalise every P_g.
    Values are snapped to the exact roots of unity of the element orders.
    Characters are sorted by their phases (in [0, 2pi)) on the elements in
    order, so the trivial character comes first.
    """
    if not group.is_abelian():
        raise GroupError("characters_abelian needs an abelian group")
    p = group.order
    P = group.regular_matrices()
    rng = np.random.default_rng(12345)
    coef = rng.normal(size=p) + 1j * rng.normal(size=p)
    _, vecs = np.linalg.eig(np.tensordot(coef, P, axes=1))
    # P_g v = chi(g) v  ->  chi(g) = (v* P_g v) / (v* v)
    vals = np.einsum("ik,gij,jk->kg", vecs.conj(), P, vecs) / np.sum(np.abs(vecs) ** 2, axis=0)[:, None]
    orders = np.array([group.element_order(g) for g in range(p)])
    steps = np.rint(np.angle(vals) / (2 * np.pi) * orders) % orders
    chars = np.exp(2j * np.pi * steps / orders)
    chars.real[np.abs(chars.real) < 1e-15] = 0.0
    chars.imag[np.abs(chars.imag) < 1e-15] = 0.0
    keys = [tuple((steps[i] / orders).round(12)) for i in range(p)]
    order = sorted(range(p), key=lambda i: keys[i])
    if len(set(keys)) != p:
        raise GroupError("failed to separate the characters")
    reps = tuple(
        Representation(group, chars[i], name="chi%d" % j) for j, i in enumerate(order)
    )
    return IrrepSet(reps)
