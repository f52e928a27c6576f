"""Irreducible representations of the dihedral group D_d and the rigidity rules.

D_d (order 2d, d even) has four linear characters Triv, Sgn, V1, V2 and
two-dimensional representations Phi(i), 1 <= i <= d/2 - 1.  The centre
of G embeds in D_d as the rotations, and each irreducible restricts to
characters chi_l of mu_d, chi_l(zeta_d^k) = zeta_d^(kl).

Two decision rules are provided: one on the label (`always_rigid`) and one
on the central characters that occur (`all_constituents_rigid`).  They are
kept separate on purpose so their agreement can be tested.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

LINEAR = ("Triv", "Sgn", "V1", "V2")
KIND_ABC = "ABC"
KIND_D = "D"


@dataclass(frozen=True, order=True)
class DihedralIrrep:
    label: str
    d: int
    i: int = 0

    def __post_init__(self):
        if self.d < 2 or self.d % 2:
            raise ValueError(f"D_d needs an even d >= 2, got {self.d}")
        if self.label == "Phi":
            if not 1 <= self.i <= self.d // 2 - 1:
                raise ValueError(f"Phi({self.i}) does not exist for d={self.d}")
        elif self.label in LINEAR:
            if self.i:
                raise ValueError(f"{self.label} takes no index")
        else:
            raise ValueError(f"unknown label {self.label!r}")

    @property
    def dim(self) -> int:
        return 2 if self.label == "Phi" else 1

    def __str__(self) -> str:
        return f"Phi({self.i})" if self.label == "Phi" else self.label


@dataclass(frozen=True, order=True)
class CentralCharacter:
    index: int
    d: int

    def __post_init__(self):
        if not 0 <= self.index < self.d:
            raise ValueError("central character index out of range")


def irreps(d: int) -> list[DihedralIrrep]:
    """All irreducibles of D_d, linear ones first."""
    return [DihedralIrrep(l, d) for l in LINEAR] + [DihedralIrrep("Phi", d, i) for i in range(1, d // 2)]


def phi(i: int, d: int) -> DihedralIrrep:
    return DihedralIrrep("Phi", d, i)


def restrict_to_centre(rep: DihedralIrrep) -> tuple[int, ...]:
    """Indices l of the characters chi_l in the restriction, as a sorted multiset."""
    d = rep.d
    if rep.label in ("Triv", "Sgn"):
        return (0,)
    if rep.label in ("V1", "V2"):
        return (d // 2,)
    return tuple(sorted((rep.i, d - rep.i)))


def always_rigid(rep: DihedralIrrep, kind: str) -> bool:
    """The label rule: which irreducibles stay simple for every parameter."""
    d = rep.d
    if kind == KIND_ABC:
        # strict on both sides: 1 < i < (d - 2)/2
        return rep.label == "Phi" and 2 * rep.i > 2 and 2 * rep.i < d - 2
    if kind == KIND_D:
        if rep.label in ("V1", "V2"):
            return True
        return rep.label == "Phi" and rep.i > 1 and 2 * rep.i <= d - 2
    raise ValueError(f"unknown family kind {kind!r}")


def forbidden_indices(kind: str, d: int) -> set:
    """Central character indices that rule out rigidity (mod d).

    For odd d the half-integral members are kept as Fractions, so they
    never coincide with an integer index.
    """
    half = Fraction(d, 2)
    if kind == KIND_ABC:
        raw = [0, 1, half - 1, half, half + 1, d - 1]
    elif kind == KIND_D:
        raw = [0, 1, d - 1]
    else:
        raise ValueError(f"unknown family kind {kind!r}")
    out = set()
    for x in raw:
        x = Fraction(x) % d
        out.add(int(x) if x.denominator == 1 else x)
    return out


def all_constituents_rigid(restriction, kind: str, d: int) -> bool:
    """True iff no index of the multiset lies in the forbidden set."""
    bad = forbidden_indices(kind, d)
    return all((l % d) not in bad for l in restriction)


@dataclass(frozen=True)
class RigidityVerdict:
    rep: DihedralIrrep
    kind: str
    by_label: bool
    by_restriction: bool

    @property
    def consistent(self) -> bool:
        return self.by_label == self.by_restriction


def verdicts(d: int, kind: str) -> list[RigidityVerdict]:
    return [RigidityVerdict(r, kind, always_rigid(r, kind), all_constituents_rigid(restrict_to_centre(r), kind, d))
            for r in irreps(d)]


def boundary_anomalies(d_values, kinds=(KIND_ABC, KIND_D)) -> list[RigidityVerdict]:
    """Every (d, kind, rep) on which the two rules disagree."""
    return [v for d in d_values for k in kinds for v in verdicts(d, k) if not v.consistent]


def not_always_rigid(d: int, kind: str) -> set[str]:
    return {str(r) for r in irreps(d) if not always_rigid(r, kind)}


def expected_non_rigid(d: int, kind: str) -> set[str]:
    """The exceptional labels written out by hand."""
    out = {"Triv", "Sgn"}
    if d >= 4:
        out.add("Phi(1)")
    if kind == KIND_ABC:
        out |= {"V1", "V2"}
        if d >= 4:
            out.add(f"Phi({d // 2 - 1})")
    return out


def dimension_check(d: int) -> bool:
    """Sum of squared dimensions equals |D_d| = 2d."""
    return sum(r.dim ** 2 for r in irreps(d)) == 2 * d


def central_multiset(rep: DihedralIrrep) -> Counter:
    return Counter(restrict_to_centre(rep))
