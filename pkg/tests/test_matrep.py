import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srgroups.cyclo import CycNumber, root_of_unity
from srgroups.matrep import (
    ClosureOverflowError,
    CycMatrix,
    FiniteMatrixGroup,
    ShapeError,
    Subspace,
    averaging_projector,
    centre,
    conjugacy_classes,
    contains_all,
    enumerate_group,
    fixed_space,
    invariant_complement,
    is_normal,
    load_cached,
    nullspace,
    orbit_stabilizer,
    pack,
    restrict,
    save_cached,
    stabilizer_by_filter,
    unpack,
)

I4 = root_of_unity(4)


def quaternion_group():
    return FiniteMatrixGroup([CycMatrix([[I4, 0], [0, -I4]]), CycMatrix([[0, 1], [-1, 0]])])


def symmetric_group(n):
    # permutation matrices of a transposition and an n-cycle
    t = [[1 if (i, j) in ((0, 1), (1, 0)) or (i == j and i > 1) else 0 for j in range(n)] for i in range(n)]
    c = [[1 if i == (j + 1) % n else 0 for j in range(n)] for i in range(n)]
    return FiniteMatrixGroup([CycMatrix(t), CycMatrix(c)])


def binary_tetrahedral():
    h = CycNumber(1) / 2
    a = CycMatrix([[h * (1 + I4), h * (1 + I4)], [h * (-1 + I4), h * (1 - I4)]])
    return FiniteMatrixGroup([CycMatrix([[I4, 0], [0, -I4]]), CycMatrix([[0, 1], [-1, 0]]), a])


def test_small_orders():
    assert enumerate_group(quaternion_group()).order == 8
    assert enumerate_group(symmetric_group(4)).order == 24
    assert enumerate_group(binary_tetrahedral()).order == 24


def test_cap_overflow():
    with pytest.raises(ClosureOverflowError):
        enumerate_group(symmetric_group(5), cap=50)


def test_generator_order_does_not_matter():
    a = enumerate_group(binary_tetrahedral())
    b = enumerate_group(FiniteMatrixGroup(list(reversed(binary_tetrahedral().generators))))
    assert a.sorted_keys() == b.sorted_keys()


def test_linear_algebra_against_numpy():
    m = CycMatrix([[1, I4, 2], [0, 3, root_of_unity(8)], [1, 1, 1]])
    assert np.allclose(m.inverse().to_complex(), np.linalg.inv(m.to_complex()))
    assert abs(m.det().to_complex() - np.linalg.det(m.to_complex())) < 1e-9
    assert m.rank() == 3
    assert CycMatrix([[1, 2], [2, 4]]).rank() == 1


def test_charpoly_cayley_hamilton():
    m = CycMatrix([[0, I4, 1], [1, 0, 0], [0, 1, root_of_unity(3)]])
    cp = m.charpoly()
    acc = CycMatrix([[0] * 3] * 3)
    power = CycMatrix.identity(3)
    for c in cp:
        acc = acc + power * c
        power = power * m
    assert acc == CycMatrix([[0] * 3] * 3)


def test_nullspace():
    ns = nullspace([[1, 1, 0], [0, 1, 1]], 3)
    assert len(ns) == 1
    v = ns[0]
    assert any(not x.is_zero() for x in v)
    m = CycMatrix([[1, 1, 0], [0, 1, 1], [0, 0, 0]])
    assert all(x.is_zero() for x in m.apply(v))


def test_shape_errors():
    with pytest.raises(ShapeError):
        CycMatrix([[1, 2, 3], [4, 5, 6]])
    with pytest.raises(ShapeError):
        CycMatrix.identity(2).apply([1, 2, 3])


def test_pack_round_trip():
    g = enumerate_group(binary_tetrahedral())
    coords, den = pack(g.elements, 4)
    assert [unpack(c, den, 4) for c in coords] == g.elements


def test_centre_and_normality():
    G = enumerate_group(binary_tetrahedral())
    Z = centre(G)
    assert Z.order == 2
    Q = enumerate_group(quaternion_group())
    assert contains_all(Q, G)
    assert is_normal(Q, G)
    classes = conjugacy_classes(G, G.elements)
    assert sorted(len(c) for c in classes) == [1, 1, 4, 4, 4, 4, 6]


@pytest.mark.parametrize("n,v", [(4, (1, 0, 0, 0)), (4, (1, 1, 0, 0)), (5, (1, 2, 3, 0, 0))])
def test_orbit_stabilizer_product_law(n, v):
    G = enumerate_group(symmetric_group(n))
    orbit, H = orbit_stabilizer(G, v)
    assert len(orbit) * H.order == G.order
    F = stabilizer_by_filter(G, v)
    assert F.order == H.order and contains_all(F, H)


@given(st.permutations(range(4)), st.lists(st.integers(-2, 2), min_size=4, max_size=4))
def test_orbit_stabilizer_property(perm, v):
    G = enumerate_group(symmetric_group(4))
    orbit, H = orbit_stabilizer(G, v)
    assert len(orbit) * H.order == 24
    assert len(orbit) == len({tuple(v[p] for p in q) for q in itertools.permutations(range(4))})


def test_projector_and_complement():
    G = enumerate_group(symmetric_group(4))
    P = averaging_projector(G)
    assert P * P == P
    F = fixed_space(G)
    assert F.dim == 1 and F.contains((1, 1, 1, 1))
    C = invariant_complement(G, F)
    assert C.dim == 3
    R = restrict(G, C)
    assert R.order == 24


def test_cache_round_trip(tmp_path):
    G = enumerate_group(binary_tetrahedral())
    save_cached(G, str(tmp_path), "bt")
    H = load_cached(str(tmp_path), "bt", G.conductor)
    assert H is not None and H.sorted_keys() == G.sorted_keys()
    assert load_cached(str(tmp_path), "missing", G.conductor) is None


def test_subspace_coordinates():
    S = Subspace(3, [(1, 0, 1), (0, 1, I4)])
    assert S.contains((2, 3, 2 + 3 * I4))
    assert not S.contains((0, 0, 1))
    assert S.coordinates((2, 3, 2 + 3 * I4)) == (CycNumber(2), CycNumber(3))
