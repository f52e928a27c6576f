from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srgroups.cyclo import CycNumber, root_of_unity
from srgroups.matrep import CycMatrix, FiniteMatrixGroup, enumerate_group
from srgroups.ws2 import (
    U_VECTOR,
    V_VECTOR,
    RationalFunction,
    block_form,
    identify_g443,
    infer_invariant_forms,
    molien,
    pipeline_groups,
    poly_mul,
    stabilizer_pipeline,
    sym_invariants_dense,
    sym_invariants_monomial,
    ws2_generators,
)


@pytest.fixture(scope="module")
def cache_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("srg"))


@pytest.fixture(scope="module")
def groups(cache_dir):
    return pipeline_groups(cache_dir)


def float_molien_series(group, terms):
    """Independent oracle: average the power series of 1/det(I - tg) numerically."""
    acc = np.zeros(terms)
    for g in group.elements:
        ev = np.linalg.eigvals(g.to_complex())
        # 1/prod(1 - t lambda) = prod sum_j (lambda t)^j
        s = np.zeros(terms, dtype=complex)
        s[0] = 1
        for lam in ev:
            geo = lam ** np.arange(terms)
            s = np.convolve(s, geo)[:terms]
        acc = acc + s.real
    return np.rint(acc / group.order).astype(int).tolist()


def test_generators_are_symplectic_reflections():
    J = block_form(4)
    for m in ws2_generators():
        assert (m - CycMatrix.identity(8)).rank() == 2
        assert m.transpose() * J * m == J
    allowed = {CycNumber(x) for x in (0, 1, -1, Fraction(1, 2), Fraction(-1, 2))}
    i = root_of_unity(4)
    allowed |= {x * i for x in allowed}
    assert all(m[r, c] in allowed for m in ws2_generators() for r in range(8) for c in range(8))


def test_invariant_form_unique():
    forms = infer_invariant_forms(ws2_generators())
    assert len(forms) == 1
    om = forms[0]
    assert om.transpose() == -om and not om.det().is_zero()


def test_molien_small_groups():
    triv = enumerate_group(FiniteMatrixGroup([CycMatrix.identity(1)]))
    assert molien(triv) == RationalFunction.make([1], [1, -1])
    pm = enumerate_group(FiniteMatrixGroup([CycMatrix.diag([-1, -1])]))
    assert molien(pm) == RationalFunction.make([1, 0, 1], [1, 0, -2, 0, 1])
    assert molien(pm).degrees() is None


def test_molien_symmetric_group():
    # S_3 permuting coordinates has invariant degrees 1, 2, 3
    t = CycMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    c = CycMatrix([[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    S3 = enumerate_group(FiniteMatrixGroup([t, c]))
    assert molien(S3).degrees() == [1, 2, 3]
    assert molien(S3).series(8) == float_molien_series(S3, 8)


@given(st.lists(st.integers(1, 8), min_size=1, max_size=4))
def test_rational_function_degrees_round_trip(degrees):
    rf = RationalFunction.from_degrees(degrees)
    assert rf.degrees() == sorted(degrees)
    # series coefficients count partitions into the given parts
    n = 12
    counts = [0] * n
    counts[0] = 1
    for d in degrees:
        for j in range(d, n):
            counts[j] += counts[j - d]
    assert rf.series(n) == counts


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=4), st.lists(st.integers(-3, 3), min_size=1, max_size=3))
def test_rational_function_cancellation(num, extra):
    if not any(num) or not any(extra):
        return
    den = [1, -2, 1]
    a = RationalFunction.make(num, den)
    b = RationalFunction.make(poly_mul(num, extra), poly_mul(den, extra))
    assert a == b


def test_identify_rejects():
    triv = enumerate_group(FiniteMatrixGroup([CycMatrix.identity(3)]))
    assert not identify_g443(triv)
    z = root_of_unity(96)
    cyc = enumerate_group(FiniteMatrixGroup([CycMatrix.diag([z, z.inv(), 1])]))
    assert cyc.order == 96 and not identify_g443(cyc)


def test_pipeline_groups(groups):
    W, H, HW, HL = groups
    assert W.order == 82944 and H.order == 96 and HW.order == 96
    assert HL is not None and HL.order == 96
    assert identify_g443(HL)
    assert molien(HL) == RationalFunction.from_degrees([3, 4, 8])


def test_molien_float_oracle(groups):
    _, _, HW, HL = groups
    assert molien(HL).series(12) == float_molien_series(HL, 12)
    assert molien(HW).series(8) == float_molien_series(HW, 8)


def test_symmetric_power_invariants(groups):
    _, _, HW, _ = groups
    series = molien(HW).series(7)
    mono = [sym_invariants_monomial(HW.generators, k) for k in range(7)]
    assert mono == series
    dense = [sym_invariants_dense(HW.generators, k) for k in range(1, 5)]
    assert dense == series[1:5]


def test_report(cache_dir):
    rep = stabilizer_pipeline(full=True, cache_dir=cache_dir)
    assert rep.passed
    assert rep.orbit_size * rep.stabilizer_order == rep.group_order
    assert rep.filter_agrees and rep.projector_idempotent
    assert rep.fixed_contains_vectors and rep.fixed_dim == 2
    assert rep.omega_solution_dim == 1 and rep.w_gram_is_block_form and rep.lagrangian_isotropic
    assert rep.molien_num_degrees == [3, 4, 8]
    assert V_VECTOR != U_VECTOR
