import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgzeta.errors import GroupError
from qgzeta.groups import (FiniteGroup, IrrepSet, Representation, characters_abelian, cyclic_group,
                           product_group, validate_representation)


def test_z2_labels_and_inverse():
    Z2 = cyclic_group(2)
    assert Z2.labels == ("1", "-1")
    assert Z2.index("-1") == 1 and Z2.mul(1, 1) == 0


@given(st.integers(1, 12))
def test_cyclic_group_structure(n):
    G = cyclic_group(n)
    assert G.order == n and G.is_abelian()
    assert all(G.mul(g, G.inverse[g]) == 0 for g in range(n))
    if n > 1:
        assert G.element_order(1) == n


def test_product_group_orders():
    G = product_group([2, 2])
    assert G.order == 4
    assert [G.element_order(g) for g in range(4)] == [1, 2, 2, 2]


@pytest.mark.parametrize("table", [
    [[0, 1], [0, 1]],                     # not Latin
    [[1, 0], [0, 1]],                     # identity not at 0
    [[0, 1, 2], [1, 0, 2], [2, 2, 0]],    # not Latin in column
])
def test_bad_tables_rejected(table):
    with pytest.raises(GroupError):
        FiniteGroup(tuple("abc"[: len(table)]), np.array(table))


def test_non_associative_latin_square_rejected():
    # Latin square with identity 0 that is not a group (order 5 loop)
    table = np.array([[0, 1, 2, 3, 4],
                      [1, 0, 3, 4, 2],
                      [2, 4, 0, 1, 3],
                      [3, 2, 4, 0, 1],
                      [4, 3, 1, 2, 0]])
    with pytest.raises(GroupError, match="associative"):
        FiniteGroup(tuple("abcde"), table)


@given(st.integers(1, 10))
def test_cyclic_characters_match_closed_form(n):
    chars = characters_abelian(cyclic_group(n))
    table = np.array([r.character() for r in chars])
    expected = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    assert np.allclose(table, expected, atol=1e-14)


@pytest.mark.parametrize("orders", [[2, 2], [2, 3], [2, 2, 2], [4, 2]])
def test_character_orthogonality(orders):
    G = product_group(orders)
    X = np.array([r.character() for r in characters_abelian(G)])
    assert np.allclose(X @ X.conj().T, G.order * np.eye(G.order), atol=1e-12)


def test_characters_rejects_non_abelian(k3_s3):
    with pytest.raises(GroupError):
        characters_abelian(k3_s3.group)


def test_s3_irreps_from_file(k3_s3):
    irreps = k3_s3.irreps
    assert [r.degree for r in irreps] == [1, 1, 2]
    X = np.array([r.character() for r in irreps])
    # class sizes are folded into the plain element sum
    assert np.allclose(X @ X.conj().T, 6 * np.eye(3), atol=1e-12)


def test_validate_representation_reports_failure():
    Z3 = cyclic_group(3)
    bad = Representation(Z3, np.array([1, 1j, -1]))
    rep = validate_representation(bad)
    assert not rep.passed and rep.homomorphism > 0.5


def test_irrep_set_requires_full_degree_sum():
    chars = characters_abelian(cyclic_group(3))
    with pytest.raises(GroupError):
        IrrepSet(tuple(chars)[:2])
    with pytest.raises(GroupError):
        IrrepSet((chars[1], chars[0], chars[2]))
