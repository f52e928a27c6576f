"""Complex and symplectic reflections, found by scanning every element.

A complex reflection in GL_2 is g with rank(g - I) = 1; a symplectic
reflection in Sp_4 is t with rank(t - I) = 2.  The scans below first take
the rank modulo a single split prime, which can only undercount, so any
element with modular rank above the target is discarded with certainty.
The few survivors get an exact rank.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cyclo import CycNumber, root_of_unity
from .engine import engine, matmul_mod, rank_mod_p
from .families import (
    DerivedSpec,
    FamilySpec,
    build,
    build_Dd,
    build_EG,
    det_set,
    largest_reflection_subgroup,
    omega_form,
    s_matrix,
    vee,
    vee_coords,
    vee_group,
)
from .matrep import (
    CycMatrix,
    FiniteMatrixGroup,
    ShapeError,
    _Store,
    batch_ranks,
    centre,
    conjugacy_classes,
    contains_all,
    enumerate_group,
    is_normal,
    pack,
    recoordinate,
    unpack,
)


class LemmaViolation(AssertionError):
    """A structural statement failed; `witness` holds an offending element if any."""

    def __init__(self, message: str, witness: CycMatrix | None = None):
        super().__init__(message)
        self.witness = witness


def is_complex_reflection(g: CycMatrix) -> bool:
    if g.dim != 2:
        raise ShapeError(f"expected a 2x2 matrix, got {g.dim}x{g.dim}")
    return (g - CycMatrix.identity(2)).rank() == 1


def is_symplectic(t: CycMatrix, form: CycMatrix | None = None) -> bool:
    form = omega_form() if form is None else form
    return t.transpose() * form * t == form


def is_symplectic_reflection(t: CycMatrix) -> bool:
    if t.dim != 4:
        raise ShapeError(f"expected a 4x4 matrix, got {t.dim}x{t.dim}")
    return is_symplectic(t) and (t - CycMatrix.identity(4)).rank() == 2


# ---------------------------------------------------------------------------
# bulk scans
# ---------------------------------------------------------------------------

def deviation_ranks(num: np.ndarray, den: int, n: int, upto: int, chunk: int = 4096) -> np.ndarray:
    """rank(x - I) for a batch, exact wherever the answer is <= upto.

    Entries above `upto` are certified lower bounds only.
    """
    eng = engine(n)
    k = num.shape[1]
    out = np.empty(len(num), dtype=np.int64)
    col = eng.vand[:, :1]
    for s in range(0, len(num), chunk):
        sub = num[s:s + chunk].copy()
        for i in range(k):
            sub[:, i, i, 0] -= den
        m = len(sub)
        one = matmul_mod(sub.reshape(-1, eng.phi) % eng.p, col, eng.p).reshape(m, k, k)
        lb = rank_mod_p(one, eng.p)
        cand = np.nonzero(lb <= upto)[0]
        if len(cand):
            lb[cand] = batch_ranks(sub[cand], den, n)
        out[s:s + m] = lb
    return out


def reflection_indices(group: FiniteMatrixGroup) -> np.ndarray:
    """Indices of the complex reflections of an enumerated 2x2 group."""
    if group.dim != 2:
        raise ShapeError("complex reflections are scanned in dimension 2")
    r = deviation_ranks(group.coords, group.den, group.conductor, 1)
    return np.nonzero(r == 1)[0]


def reflections(group: FiniteMatrixGroup) -> list[CycMatrix]:
    return [group.element(int(i)) for i in reflection_indices(group)]


def reflection_count(spec0: FamilySpec) -> int:
    """|R(G_0)| by an exhaustive rank test."""
    return len(reflection_indices(build(spec0)))


def reflection_subgroup(group: FiniteMatrixGroup) -> FiniteMatrixGroup:
    """The subgroup generated by all complex reflections (the identity if there are none)."""
    gens = reflections(group)
    if not gens:
        gens = [CycMatrix.identity(group.dim)]
    return enumerate_group(FiniteMatrixGroup(gens, conductor=group.conductor), cap=group.order + 1)


def is_reflection_generated(group: FiniteMatrixGroup) -> bool:
    return reflection_subgroup(group).order == group.order


def _preserves_form_batch(num: np.ndarray, den: int, n: int, form: CycMatrix) -> np.ndarray:
    from .matrep import BatchOps
    ops = BatchOps(n)
    fn, fd = pack([form], n)
    lhs = ops.product(ops.product(np.swapaxes(num, 1, 2), fn), num)
    return np.all((lhs == fn * den * den).reshape(len(num), -1), axis=1)


# ---------------------------------------------------------------------------
# the inventory of E(G)
# ---------------------------------------------------------------------------

@dataclass
class ReflectionInventory:
    group: DerivedSpec
    complex_reflections: list[CycMatrix]
    symplectic_reflections: list[CycMatrix]
    split: tuple[list[CycMatrix], list[CycMatrix]]
    classes: list[list[CycMatrix]]
    n_g0: int
    dd_class_count: int
    fusion_consistent: bool
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def total_classes(self) -> int:
        return len(self.classes)

    def summary(self) -> dict:
        spec = self.group.base
        return {
            "spec": str(spec),
            "N": self.n_g0,
            "d": spec.d,
            "symplectic_reflections": len(self.symplectic_reflections),
            "complex_reflections": len(self.complex_reflections),
            "dd_part_classes": self.dd_class_count,
            "classes": self.total_classes,
            "checks": dict(sorted(self.checks.items())),
            "representatives": [c[0].serialize() for c in self.classes],
        }


def _keyset(num: np.ndarray, den: int, n: int, k: int) -> _Store:
    st = _Store(k, n, cap=max(len(num), 1) + 1)
    if len(num):
        st.add(num, den)
    return st


def _same_set(a: _Store, b_num: np.ndarray, b_den: int) -> bool:
    if a.count != len(b_num):
        return False
    return bool((a.lookup(b_num, b_den) >= 0).all()) if len(b_num) else True


def dd_part_closed_form(spec: FamilySpec) -> list[CycMatrix]:
    """{z^vee s : z in mu_d}."""
    s = s_matrix()
    return [vee(CycMatrix.diag([root_of_unity(spec.d, j)] * 2)) * s for j in range(spec.d)]


def inventory(spec: FamilySpec) -> ReflectionInventory:
    """Scan all 2|G| elements of E(G) and check the reflection structure."""
    G = build(spec)
    n = G.conductor
    spec0, d0, _ = largest_reflection_subgroup(spec)
    checks: dict[str, bool] = {}

    vnum, den = vee_coords(G)
    from .families import times_s
    snum = times_s(vnum)
    rv = deviation_ranks(vnum, den, n, 2)
    rs = deviation_ranks(snum, den, n, 2)
    v_idx = np.nonzero(rv == 2)[0]
    s_idx = np.nonzero(rs == 2)[0]
    s_brute = np.concatenate([vnum[v_idx], snum[s_idx]])
    brute = _keyset(s_brute, den, n, 4)

    # closed form R(G)^vee u {z^vee s}
    r_idx = reflection_indices(G)
    closed_v = vnum[r_idx]
    dd = dd_part_closed_form(spec)
    dnum, dden = pack(dd, n)
    l = math.lcm(den, dden)
    closed = np.concatenate([closed_v * (l // den), dnum * (l // dden)])
    checks["S(E(G)) equals closed form"] = _same_set(brute, closed, l)
    if not checks["S(E(G)) equals closed form"]:
        missing = brute.lookup(closed, l) < 0
        w = unpack(closed[int(np.nonzero(missing)[0][0])], l, n) if missing.any() else None
        raise LemmaViolation(f"{spec}: symplectic reflections differ from the closed form", w)
    checks["g-vee part is R(G)-vee"] = len(v_idx) == len(r_idx) and bool(np.array_equal(np.sort(v_idx), np.sort(r_idx)))
    checks["s part is mu_d-vee s"] = len(s_idx) == spec.d

    # R(G) = R(G_0)
    G0 = build(spec0)
    r0 = reflection_indices(G0)
    r0num, r0den = recoordinate(G0.coords[r0], G0.den, G0.conductor, n)
    rg = _keyset(G.coords[r_idx], G.den, n, 2)
    checks["R(G) equals R(G_0)"] = _same_set(rg, r0num, r0den)
    if not checks["R(G) equals R(G_0)"]:
        raise LemmaViolation(f"{spec}: R(G) differs from R(G_0)")
    N = len(r0)
    checks["|S| = N + d"] = brute.count == N + spec.d
    if not checks["|S| = N + d"]:
        raise LemmaViolation(f"{spec}: |S(E(G))| = {brute.count}, expected {N + spec.d}")

    # every symplectic reflection preserves the form
    checks["reflections symplectic"] = bool(_preserves_form_batch(s_brute, den, n, omega_form()).all())

    # conjugacy classes under E(G)
    E = build_EG(spec)
    gv = [unpack(closed_v[i], den, n) for i in range(len(closed_v))]
    allS = gv + dd
    classes = conjugacy_classes(E, allS)
    dd_keys = {m.to_bytes() for m in dd}
    dd_classes = 0
    mixed = False
    for c in classes:
        inside = [m.to_bytes() in dd_keys for m in c]
        if all(inside):
            dd_classes += 1
        elif any(inside):
            mixed = True
    checks["parts never conjugate"] = not mixed
    if mixed:
        raise LemmaViolation(f"{spec}: a D_d reflection is conjugate to a G_0 reflection")
    expected = 1 if spec.kind == "OT" else 2
    checks["D_d part class count"] = dd_classes == expected
    if dd_classes != expected:
        raise LemmaViolation(f"{spec}: {dd_classes} classes in the D_d part, expected {expected}")

    # fusion of [s] and [(zeta_d I)^vee s] happens iff zeta_d is a determinant
    s = s_matrix()
    t = dd[1 % spec.d]
    fused = any(s in c and t in c for c in classes)
    fusion_ok = fused == (root_of_unity(spec.d, 1) in det_set(spec))
    checks["fusion criterion"] = fusion_ok

    return ReflectionInventory(
        group=DerivedSpec(spec, "EG"),
        complex_reflections=[G.element(int(i)) for i in r_idx],
        symplectic_reflections=gv + dd,
        split=(gv, dd),
        classes=classes,
        n_g0=N,
        dd_class_count=dd_classes,
        fusion_consistent=fusion_ok,
        checks=checks,
    )


# ---------------------------------------------------------------------------
# the structural lemma suite for one spec
# ---------------------------------------------------------------------------

@dataclass
class LemmaResult:
    name: str
    passed: bool
    detail: str = ""


def _scalar_group(d: int, n: int) -> list[CycMatrix]:
    return [CycMatrix.diag([root_of_unity(d, j)] * 2) for j in range(d)]


def verify_lemmas(spec: FamilySpec) -> list[LemmaResult]:
    """Centre, determinants, D_d, normality and reflection checks for one group."""
    out: list[LemmaResult] = []
    G = build(spec)
    n = G.conductor
    d = spec.d

    Z = centre(G)
    mu = _scalar_group(d, n)
    znum, zden = pack(mu, n)
    ok = Z.order == d and bool(Z.contains_coords(znum, zden, n).all())
    out.append(LemmaResult("centre is mu_d", ok, f"|Z(G)| = {Z.order}"))

    dets = det_set(spec)
    e = d if spec.kind == "OT" else d // 2
    expected = {root_of_unity(e, j) for j in range(e)}
    out.append(LemmaResult("determinant set", dets == expected, f"{len(dets)} values, expected mu_{e}"))

    E = build_EG(spec)
    out.append(LemmaResult("|E(G)| = 2|G|", E.order == 2 * G.order, f"{E.order}"))
    form = omega_form()
    out.append(LemmaResult("E(G) symplectic", all(is_symplectic(g, form) for g in E.generators),
                           "generators preserve the form"))

    D = build_Dd(spec)
    r = vee(CycMatrix.diag([root_of_unity(d, 1)] * 2))
    s = s_matrix()
    dihedral = (D.order == 2 * d and (r ** d).is_identity() and (s * s).is_identity()
                and s * r * s.inverse() == r.inverse())
    out.append(LemmaResult("D_d dihedral of order 2d", dihedral, f"|D_d| = {D.order}"))
    out.append(LemmaResult("D_d normal in E(G)", contains_all(D, E) and is_normal(D, E)))

    Gv = vee_group(spec)
    out.append(LemmaResult("G-vee normal in E(G)", is_normal(Gv, E)))
    spec0, _, _ = largest_reflection_subgroup(spec)
    G0v = vee_group(spec0)
    out.append(LemmaResult("G_0-vee normal in E(G)", is_normal(G0v, E)))

    try:
        inv = inventory(spec)
        out.append(LemmaResult("S(E(G)) = R(G)-vee u mu_d-vee s", True,
                               f"|S| = {len(inv.symplectic_reflections)} = {inv.n_g0} + {d}"))
        out.append(LemmaResult("D_d part classes", True, f"{inv.dd_class_count} classes"))
        out.append(LemmaResult("fusion criterion", inv.fusion_consistent))
    except LemmaViolation as exc:
        out.append(LemmaResult("S(E(G)) = R(G)-vee u mu_d-vee s", False, str(exc)))
    return out
