"""Example classes of base manifolds and what their eigenvalue bounds imply.

Each entry records geometric properties of a base (M^n, g) as flags; the flags
determine a bound on the smallest Einstein-operator eigenvalue kappa_min on TT
tensors, which is then compared with the cone and hyperbolic-cone threshold
-(n-1)^2/4.

A lower bound b >= threshold proves (strict) stability. A known eigenvalue c
below the threshold proves instability. A known eigenvalue at or above the
threshold proves nothing, and is reported as indeterminate.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NotFound, ValidationError
from .model import BaseSpectrum, Kind, make_warp_model
from .verdict import Classification, MeshPolicy, classify, decide


class Flag(enum.Enum):
    KAEHLER_EINSTEIN = "KaehlerEinstein"
    NONNEG_SECTIONAL = "NonnegSectional"
    PRODUCT_OF_EINSTEIN = "ProductOfEinstein"
    KAEHLER_H11_GREATER_ONE = "KaehlerH11GreaterOne"
    REAL_KILLING_SPINOR = "RealKillingSpinor"
    SYMMETRIC_COMPACT_TYPE = "SymmetricCompactType"
    IMAGINARY_KILLING_SPINOR_TOTAL = "ImaginaryKillingSpinorTotal"

    @classmethod
    def parse(cls, value: "Flag | str") -> "Flag":
        if isinstance(value, cls):
            return value
        for flag in cls:
            if value in (flag.value, flag.name):
                return flag
        raise ValidationError(f"unknown catalog flag {value!r}")


class BoundTag(enum.Enum):
    LOWER_BOUND = "LowerBound"
    CONTAINS = "Contains"


@dataclass(frozen=True)
class KappaBound:
    tag: BoundTag
    value: Fraction

    def __str__(self) -> str:
        return f"{self.tag.value}({self.value})"


class EntryState(enum.Enum):
    STRICTLY_STABLE = "StrictlyStable"
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    INDETERMINATE = "Indeterminate-from-bound"
    NOT_APPLICABLE = "NotApplicable"


_POSITIVE_FLAGS = frozenset(Flag) - {Flag.IMAGINARY_KILLING_SPINOR_TOTAL}


def _bounds(flags: frozenset, n: int) -> tuple[KappaBound, ...]:
    if Flag.IMAGINARY_KILLING_SPINOR_TOTAL in flags:
        if flags & _POSITIVE_FLAGS:
            raise ValidationError("ImaginaryKillingSpinorTotal describes a Ricci-flat base and excludes the other flags")
        # the base is Ricci-flat with a parallel spinor, hence stable
        return (KappaBound(BoundTag.LOWER_BOUND, Fraction(0)),)
    lower = []
    if flags & {Flag.KAEHLER_EINSTEIN, Flag.NONNEG_SECTIONAL}:
        lower.append(Fraction(-2 * (n - 1)))
    if flags & {Flag.REAL_KILLING_SPINOR, Flag.SYMMETRIC_COMPACT_TYPE}:
        lower.append(Fraction(-((n - 1) ** 2), 4))
    contains = None
    if flags & {Flag.PRODUCT_OF_EINSTEIN, Flag.KAEHLER_H11_GREATER_ONE}:
        contains = Fraction(-2 * (n - 1))
    out = []
    if lower:
        out.append(KappaBound(BoundTag.LOWER_BOUND, max(lower)))
    if contains is not None:
        if lower and contains < max(lower):
            raise ValidationError(
                f"flags are contradictory: eigenvalue {contains} lies below the lower bound {max(lower)}"
            )
        out.append(KappaBound(BoundTag.CONTAINS, contains))
    if not out:
        raise ValidationError("an entry needs at least one flag")
    return tuple(out)


@dataclass(frozen=True)
class CatalogEntry:
    """A class of base manifolds of dimension n.

    ``bounds`` is derived from the flags. Kaehler bases with h^{1,1} > 1
    carry both a lower bound and a contained eigenvalue, which then agree.
    """

    name: str
    n: int
    flags: frozenset
    bounds: tuple[KappaBound, ...] = field(init=False)
    note: str = ""

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"base dimension must be an integer >= 2, got {self.n!r}")
        flags = frozenset(Flag.parse(f) for f in self.flags)
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "bounds", _bounds(flags, int(self.n)))

    @property
    def kappa_bound(self) -> KappaBound:
        """The bound that decides the verdict: a contained eigenvalue if there is one."""
        for b in self.bounds:
            if b.tag is BoundTag.CONTAINS:
                return b
        return self.bounds[0]

    @property
    def is_exp_total(self) -> bool:
        return Flag.IMAGINARY_KILLING_SPINOR_TOTAL in self.flags


def _state(c: Classification) -> EntryState:
    return EntryState(c.value)


def _classify_bound(kind: Kind, n: int, bounds) -> EntryState:
    model = _quiet_model(kind, n)
    for b in bounds:
        if b.tag is BoundTag.CONTAINS and b.value < model.threshold:
            return EntryState.UNSTABLE
    for b in bounds:
        if b.tag is BoundTag.LOWER_BOUND and b.value >= model.threshold:
            return _state(classify(model, b.value))
    return EntryState.INDETERMINATE


def _quiet_model(kind, n):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return make_warp_model(kind, n)


@dataclass(frozen=True)
class EntryVerdict:
    cone: EntryState
    sinh: EntryState
    exp: EntryState = EntryState.NOT_APPLICABLE

    def __iter__(self):
        return iter((self.cone, self.sinh))


def classify_entry(entry: CatalogEntry) -> EntryVerdict:
    if entry.is_exp_total:
        exp = _classify_bound(Kind.EXP, entry.n, entry.bounds)
        return EntryVerdict(EntryState.NOT_APPLICABLE, EntryState.NOT_APPLICABLE, exp)
    cone = _classify_bound(Kind.CONE, entry.n, entry.bounds)
    sinh = _classify_bound(Kind.SINH, entry.n, entry.bounds)
    return EntryVerdict(cone, sinh)


def _table() -> tuple[CatalogEntry, ...]:
    F = Flag
    rows = [CatalogEntry(f"kaehler-einstein-n{n}", n, {F.KAEHLER_EINSTEIN}) for n in (9, 10)]
    rows.append(CatalogEntry("nonneg-sectional-n9", 9, {F.NONNEG_SECTIONAL}))
    rows += [CatalogEntry(f"product-n{n}", n, {F.PRODUCT_OF_EINSTEIN}) for n in range(4, 9)]
    rows += [
        CatalogEntry(f"kaehler-h11-n{n}", n, {F.KAEHLER_EINSTEIN, F.KAEHLER_H11_GREATER_ONE}) for n in (4, 6, 8)
    ]
    rows.append(CatalogEntry("product-n9", 9, {F.PRODUCT_OF_EINSTEIN}, note="known eigenvalue above threshold"))
    rows += [CatalogEntry(f"real-killing-spinor-n{n}", n, {F.REAL_KILLING_SPINOR}) for n in (5, 6, 7)]
    rows += [CatalogEntry(f"symmetric-compact-n{n}", n, {F.SYMMETRIC_COMPACT_TYPE}) for n in range(4, 9)]
    rows += [CatalogEntry(f"imaginary-killing-spinor-n{n}", n, {F.IMAGINARY_KILLING_SPINOR_TOTAL}) for n in (4, 6)]
    return tuple(rows)


CATALOG: tuple[CatalogEntry, ...] = _table()


def get_entry(name: str) -> CatalogEntry:
    for e in CATALOG:
        if e.name == name:
            return e
    raise NotFound(f"no catalog entry named {name!r}")


def decide_entry(entry: CatalogEntry, policy: MeshPolicy | None = None) -> EntryVerdict:
    """Run the full numerical decision with the entry's bound as kappa_min.

    Indeterminate results cannot be reproduced this way and stay as they are.
    """
    expected = classify_entry(entry)
    kappa = entry.kappa_bound.value

    def run(kind, state):
        if state in (EntryState.NOT_APPLICABLE, EntryState.INDETERMINATE):
            return state
        model = _quiet_model(kind, entry.n)
        return _state(decide(model, BaseSpectrum(kappa=(kappa,)), policy).classification)

    if entry.is_exp_total:
        return EntryVerdict(EntryState.NOT_APPLICABLE, EntryState.NOT_APPLICABLE, run(Kind.EXP, expected.exp))
    return EntryVerdict(run(Kind.CONE, expected.cone), run(Kind.SINH, expected.sinh))
