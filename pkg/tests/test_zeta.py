import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgzeta.errors import ExcludedPointError, GroupError, LimitExceededError
from qgzeta.graph import VoltageAssignment, build_graph, derived_covering, random_graph
from qgzeta.groups import characters_abelian, cyclic_group, product_group
from qgzeta.linalg import determinant, rel_residual
from qgzeta.scattering import u_gs
from qgzeta.zeta import (charpoly_via_reduction, covering_charpoly, covering_from_l_functions,
                         euler_product_series, ihara_zeta_reciprocal,
                         l_function_reciprocal, prime_cycles, reduced_matrices, trace_series,
                         twisted_blocks, twisted_operator)

from oracles import closed_walk_classes
from strategies import graphs, sigmas, wavenumbers

GROUPS = [cyclic_group(2), cyclic_group(3), product_group([2, 2])]


def k3_data(k3, k=1.3, L=1.1, A=0.2, lam=0.7):
    G = k3.graph.with_parameters(L, A, lam)
    a = 2j * k / (2j * k - lam)
    t, s = np.exp(1j * L * (k - A)), np.exp(1j * L * (k + A))
    va = VoltageAssignment(G, k3.voltage.group, k3.voltage.voltage)
    return G, va, a, t, s


@given(graphs(max_n=8, max_extra=8), wavenumbers, sigmas())
def test_reduction_identity(G, k, sigma):
    assert charpoly_via_reduction(G, k, sigma).residual <= 1e-8


def test_reduction_excluded_point(k3):
    G, _, _, t, s = k3_data(k3)
    with pytest.raises(ExcludedPointError):
        reduced_matrices(G, 1.3, np.sqrt(s * t))


def test_k3_charpoly_closed_form(k3):
    G, _, a, t, s = k3_data(k3)
    sig = 0.7 - 0.4j
    b = sig ** 2 + (2 * a - 1) * s * t
    expected = b * (b * b - 3 * s * t * a * a * sig ** 2) - a ** 3 * sig ** 3 * (s ** 3 + t ** 3)
    assert rel_residual(determinant(sig * np.eye(6) - u_gs(G, 1.3)), expected) <= 1e-12


def test_k3_twisted_reduced_blocks(k3):
    G, va, a, t, s = k3_data(k3)
    sig = 0.8 + 0.3j
    blocks = twisted_blocks(G, 1.3, va, sig)
    c = a / (sig ** 2 - s * t)
    assert np.allclose(blocks.A_bar[1], c * np.array([[0, t, 0], [s, 0, 0], [0, 0, 0]]), atol=1e-14)
    assert np.allclose(blocks.A_bar[0], c * np.array([[0, 0, s], [0, 0, t], [t, s, 0]]), atol=1e-14)
    assert np.allclose(blocks.D_bar, 2 * c * s * t * np.eye(3), atol=1e-14)


def test_k3_cover_and_twisted_closed_forms(k3):
    G, va, a, t, s = k3_data(k3)
    sig = 1.1 + 0.2j
    b = sig ** 2 + (2 * a - 1) * s * t
    q = b * b - 3 * s * t * a * a * sig ** 2
    res = covering_charpoly(G, 1.3, va, k3.irreps, sig)
    assert res.agreement.residual <= 1e-12
    assert rel_residual(res.direct, b * b * q * q - a ** 6 * sig ** 6 * (s ** 3 + t ** 3) ** 2) <= 1e-12
    twisted = l_function_reciprocal(G, 1.3, va, k3.irreps[1], 1 / sig)
    assert twisted.residual <= 1e-12
    assert rel_residual(twisted["direct"] * sig ** 6, b * q + a ** 3 * sig ** 3 * (s ** 3 + t ** 3)) <= 1e-12


def test_twisted_blocks_sum_to_base_operator(rng):
    G = random_graph(rng, 4, 6)
    va = VoltageAssignment.from_edges(G, cyclic_group(3), {j: j % 3 for j in range(G.m)})
    blocks = twisted_blocks(G, 2.2, va)
    assert np.allclose(blocks.U.sum(axis=0), u_gs(G, 2.2), atol=1e-14)
    triv = characters_abelian(cyclic_group(3))[0]
    assert np.allclose(twisted_operator(blocks.U, triv), u_gs(G, 2.2), atol=1e-14)


@given(graphs(max_n=5, max_extra=3), st.integers(0, 2), wavenumbers, sigmas(), st.integers(0, 2 ** 32 - 1))
def test_covering_identities(G, gi, k, sigma, seed):
    grp = GROUPS[gi]
    rng = np.random.default_rng(seed)
    va = VoltageAssignment.from_edges(G, grp, {j: int(rng.integers(grp.order)) for j in range(G.m)})
    irreps = characters_abelian(grp)
    assert covering_charpoly(G, k, va, irreps, sigma).agreement.residual <= 1e-8
    assert covering_from_l_functions(G, k, va, irreps, sigma).residual <= 1e-8
    for rho in irreps:
        assert l_function_reciprocal(G, k, va, rho, 1 / sigma).residual <= 1e-8


def test_non_abelian_covering(k3_s3):
    G, irreps = k3_s3.graph.with_parameters(0.9, 0.3, -0.4), k3_s3.irreps
    va = VoltageAssignment(G, k3_s3.voltage.group, k3_s3.voltage.voltage)
    for sig in (0.9 + 0.1j, -0.6 + 1.2j):
        res = covering_charpoly(G, 2.4, va, irreps, sig)
        assert res.agreement.residual <= 1e-8
        assert covering_from_l_functions(G, 2.4, va, irreps, sig).residual <= 1e-8
        for rho in irreps:
            assert l_function_reciprocal(G, 2.4, va, rho, 1 / sig).residual <= 1e-8
    assert derived_covering(G, va).covering.n == 18


def test_rep_from_other_group_rejected(k3):
    G, va, *_ = k3_data(k3)
    with pytest.raises(GroupError):
        l_function_reciprocal(G, 1.0, va, characters_abelian(cyclic_group(3))[1], 0.5)


def test_k3_prime_cycle_counts(k3):
    cyc = prime_cycles(k3.graph, 3)
    by_len = [sum(c.length == L for c in cyc) for L in (1, 2, 3)]
    assert by_len == [0, 3, 2]


def test_single_edge_has_only_backtracking_cycles():
    G = build_graph(["a", "b"], [("a", "b", 1.0)])
    cyc = prime_cycles(G, 4)
    assert [c.arcs for c in cyc] == [(0, 1)]


@pytest.mark.parametrize("n, m, max_len", [(3, 3, 5), (3, 4, 4), (2, 3, 4), (4, 5, 4), (1, 2, 4)])
def test_prime_cycles_match_brute_force(n, m, max_len):
    G = random_graph(np.random.default_rng(n * 10 + m), n, m)
    found = prime_cycles(G, max_len)
    for L in range(1, max_len + 1):
        mine = {c.arcs for c in found if c.length == L}
        assert mine == closed_walk_classes(G, L)


def test_prime_cycle_length_limit(k3):
    with pytest.raises(LimitExceededError):
        prime_cycles(k3.graph, 13)


def test_cycle_weight_of_triangle(k3):
    G, va, a, t, s = k3_data(k3)
    # forward triangle e1 e2 e3: every turn is a non-backtracking pass with weight a
    cyc = [c for c in prime_cycles(G, 3, 1.3, va) if c.length == 3]
    weights = sorted(c.weight for c in cyc)
    assert np.allclose(sorted([a ** 3 * t ** 3, a ** 3 * s ** 3]), weights)
    assert all(k3.voltage.group.labels[c.voltage] == "-1" for c in cyc)


@given(graphs(max_n=4, max_extra=2, loops=False), st.integers(0, 2), wavenumbers,
       st.integers(0, 2 ** 32 - 1))
def test_euler_product_matches_trace_series(G, gi, k, seed):
    grp = GROUPS[gi]
    rng = np.random.default_rng(seed)
    va = VoltageAssignment.from_edges(G, grp, {j: int(rng.integers(grp.order)) for j in range(G.m)})
    for rho in characters_abelian(grp):
        e = euler_product_series(G, k, va, rho, 6)
        t = trace_series(G, k, va, rho, 6)
        assert np.abs(e.coeffs - t.coeffs).max() <= 1e-8


def test_euler_product_non_abelian(k3_s3):
    G = k3_s3.graph
    for rho in k3_s3.irreps:
        e = euler_product_series(G, 1.7, k3_s3.voltage, rho, 7)
        t = trace_series(G, 1.7, k3_s3.voltage, rho, 7)
        assert np.abs(e.coeffs - t.coeffs).max() <= 1e-8


def test_ihara_k3_closed_form(k3):
    for u in (0.1, 0.2 + 0.1j, -0.25j):
        res = ihara_zeta_reciprocal(k3.graph, u)
        assert res.residual <= 1e-12
        assert abs(res["bass"] - (1 - u ** 3) ** 2) <= 1e-13


def test_ihara_tree_is_one():
    G = build_graph(list("abcd"), [("a", "b", 1), ("b", "c", 1), ("b", "d", 1)])
    for u in (0.3, 0.1 + 0.2j):
        res = ihara_zeta_reciprocal(G, u)
        assert abs(res["bass"] - 1) <= 1e-14 and abs(res["edge"] - 1) <= 1e-14


@given(graphs(max_n=6, max_extra=4), st.floats(0.01, 0.3), st.floats(0, 2 * np.pi))
def test_bass_formula(G, r, th):
    assert ihara_zeta_reciprocal(G, r * np.exp(1j * th)).residual <= 1e-10
