"""Warped-product families and base spectral data.

Three Einstein warped products ``dr^2 + f(r)^2 g`` over an n-dimensional
base are supported:

* ``EXP``  -- f = e^r on the whole line, Ricci-flat base.
* ``CONE`` -- f = r on (0, inf), base normalized to scal = n(n-1); the total
  space is Ricci-flat.
* ``SINH`` -- f = sinh r on (0, inf), same base normalization; the total
  space has scal = -n(n+1).

Radial forms are never assembled in the r variable directly. Each model
carries a substitution ``s = s(r)`` (``e^r``, ``r`` and ``sinh r``
respectively) which maps the interval onto (0, inf) and turns the warp
function into ``f = s``. This keeps ``e^{nr}``-type weights from
overflowing and gives every family the same mesh machinery.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import MuViolation, NegativeEigenvalue, ObataViolation, ValidationError


class Kind(enum.Enum):
    EXP = "exp"
    CONE = "cone"
    SINH = "sinh"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"unknown model kind {value!r}; expected exp, cone or sinh") from None


@dataclass(frozen=True)
class WarpModel:
    kind: Kind
    n: int

    # -- geometry in the r variable -------------------------------------
    @property
    def dim(self) -> int:
        return self.n + 1

    @property
    def interval(self) -> tuple[float, float]:
        if self.kind is Kind.EXP:
            return (-math.inf, math.inf)
        return (0.0, math.inf)

    def f(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is Kind.EXP:
            return np.exp(r)
        if self.kind is Kind.CONE:
            return r.copy()
        return np.sinh(r)

    def f_prime(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is Kind.EXP:
            return np.exp(r)
        if self.kind is Kind.CONE:
            return np.ones_like(r)
        return np.cosh(r)

    def f_second(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is Kind.EXP:
            return np.exp(r)
        if self.kind is Kind.CONE:
            return np.zeros_like(r)
        return np.sinh(r)

    @property
    def scal_base(self) -> int:
        return 0 if self.kind is Kind.EXP else self.n * (self.n - 1)

    @property
    def scal_total(self) -> int:
        return 0 if self.kind is Kind.CONE else -self.n * (self.n + 1)

    @property
    def threshold(self) -> Fraction:
        """Critical value for the smallest TT eigenvalue of the base."""
        if self.kind is Kind.EXP:
            return Fraction(0)
        return -Fraction((self.n - 1) ** 2, 4)

    # -- substituted coordinate s ---------------------------------------
    def to_s(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is Kind.EXP:
            return np.exp(r)
        if self.kind is Kind.CONE:
            return r.copy()
        return np.sinh(r)

    def to_r(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind is Kind.EXP:
            return np.log(s)
        if self.kind is Kind.CONE:
            return s.copy()
        return np.arcsinh(s)

    def warp_s(self, s):
        """(f, f', f'') as functions of s, with f' and f'' still r-derivatives."""
        s = np.asarray(s, dtype=float)
        if self.kind is Kind.EXP:
            return s, s, s
        if self.kind is Kind.CONE:
            return s, np.ones_like(s), np.zeros_like(s)
        return s, np.sqrt(1.0 + s * s), s

    def dr_ds(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind is Kind.EXP:
            return 1.0 / s
        if self.kind is Kind.CONE:
            return np.ones_like(s)
        return 1.0 / np.sqrt(1.0 + s * s)


def make_warp_model(kind: Kind | str, n: int) -> WarpModel:
    kind = Kind.parse(kind)
    if isinstance(n, bool) or int(n) != n:
        raise ValidationError(f"base dimension must be an integer, got {n!r}")
    n = int(n)
    if n < 2:
        raise ValidationError(f"base dimension must be >= 2, got {n}")
    if n < 4:
        warnings.warn(
            f"n={n}: the base has constant curvature; results are sanity values only",
            stacklevel=2,
        )
    return WarpModel(kind, n)


@dataclass(frozen=True)
class BaseSpectrum:
    """Eigenvalues of the base manifold.

    kappa -- Einstein operator on TT tensors.
    lam   -- scalar Laplacian.
    mu    -- connection Laplacian on divergence-free 1-forms.

    Values are kept as given (int, float or Fraction) so that threshold
    comparisons can be made exactly.
    """

    kappa: tuple = ()
    lam: tuple = (0,)
    mu: tuple = ()

    def __post_init__(self):
        for name in ("kappa", "lam", "mu"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @property
    def kappa_min(self):
        return min(self.kappa, key=Fraction) if self.kappa else None


def _check_sorted(name: str, values: Sequence) -> None:
    exact = [Fraction(v) for v in values]
    if any(b < a for a, b in zip(exact, exact[1:])):
        raise ValidationError(f"{name} must be sorted ascending: {list(values)}")


def validate_spectrum(spec: BaseSpectrum, model: WarpModel) -> BaseSpectrum:
    """Return ``spec`` unchanged if it is admissible for ``model``.

    Supplied lists may be partial spectra, so a scalar list need not start
    with the constant mode; every entry must still be 0 or respect Obata's
    bound on positive Einstein bases.
    """
    for name in ("kappa", "lam", "mu"):
        values = getattr(spec, name)
        if any(not math.isfinite(float(v)) for v in values):
            raise ValidationError(f"{name} contains a non-finite entry")
        _check_sorted(name, values)

    n = model.n
    compact = model.kind is not Kind.EXP
    for v in spec.lam:
        x = Fraction(v)
        if x < 0:
            raise NegativeEigenvalue(f"Laplace eigenvalue {v} < 0")
        if compact and 0 < x < n:
            raise ObataViolation(f"Laplace eigenvalue {v} lies in (0, {n}) on a base with scal = n(n-1)")
    for v in spec.mu:
        x = Fraction(v)
        if x < 0:
            raise NegativeEigenvalue(f"1-form eigenvalue {v} < 0")
        if compact and x < n - 1:
            raise MuViolation(f"1-form eigenvalue {v} < n-1 = {n - 1}")
    return spec
