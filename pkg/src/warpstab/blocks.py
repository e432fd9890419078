"""Radial block forms of the Einstein operator on a warped product.

Every base eigenmode generates an invariant block of symmetric 2-tensors on
which the Einstein operator acts as a small system of 1D quadratic forms:

* ``TT(kappa)``         -- 1 component, ``phi f^2 h``
* ``CONFORMAL(lambda)`` -- 1 component, ``phi v g~``
* ``ONE_FORM(mu)``      -- 2 components, ``phi f^2 delta^* omega`` and ``psi dr.f omega``
* ``SCALAR(lambda)``    -- 3 components, ``phi f^2 (n nabla^2 v + Delta v g)``,
  ``psi dr.f nabla v`` and ``chi v (f^2 g - n dr dr)``

Weights are written for a general warp f and then pulled back to the
model's substituted variable s for assembly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .errors import UnsupportedCase, ValidationError
from .model import Kind, WarpModel
from .radial import DEFAULT_QUAD_ORDER, Mesh, RadialForm, assemble, min_rayleigh, tridiagonal


class Family(enum.Enum):
    TT = "V1"
    CONFORMAL = "V2"
    ONE_FORM = "V3"
    SCALAR = "V4"


@dataclass(frozen=True)
class BlockKind:
    family: Family
    eigenvalue: float

    @classmethod
    def tt(cls, kappa):
        return cls(Family.TT, kappa)

    @classmethod
    def conformal(cls, lam):
        return cls(Family.CONFORMAL, lam)

    @classmethod
    def one_form(cls, mu):
        return cls(Family.ONE_FORM, mu)

    @classmethod
    def scalar(cls, lam):
        return cls(Family.SCALAR, lam)

    @property
    def label(self) -> str:
        sym = {Family.TT: "kappa", Family.ONE_FORM: "mu"}.get(self.family, "lambda")
        return f"{self.family.value}({sym}={float(self.eigenvalue):g})"


COMPONENT_NAMES = {
    Family.TT: ("phi",),
    Family.CONFORMAL: ("phi",),
    Family.ONE_FORM: ("phi", "psi"),
    Family.SCALAR: ("phi", "psi", "chi"),
}


def radial_weights(model: WarpModel, kind: BlockKind, f, fp, fpp) -> dict:
    """Block weights in the r variable, evaluated on arrays f, f', f''.

    Returns ``{"coef": [...], "S": [...], "P": [...], "m": [...], "C": {(i, j): w}}``
    where ``coef[i]`` is the constant multiplying ``f^n`` in the mass weight of
    component i. Components are listed even when their coefficient vanishes.
    """
    n = model.n
    s = float(model.scal_base)
    st = float(model.scal_total)
    x = float(kind.eigenvalue)
    fn, fn1, fn2 = f**n, f ** (n - 1), f ** (n - 2)
    fam = kind.family

    if fam is Family.TT:
        return {"coef": [1.0], "S": [fn], "P": [x * fn2], "m": [fn], "C": {}}

    if fam is Family.CONFORMAL:
        c = n + 1.0
        return {"coef": [c], "S": [c * fn], "P": [c * x * fn2 - 2.0 * st * fn], "m": [c * fn], "C": {}}

    if fam is Family.ONE_FORM:
        c = x - s / n
        return {
            "coef": [0.5 * c, 2.0],
            "S": [0.5 * c * fn, 2.0 * fn],
            "P": [
                0.5 * c * c * fn2,
                2.0 * x * fn2 + (2 * n + 6) * fp**2 * fn2 - 4.0 * fpp * fn1,
            ],
            "m": [0.5 * c * fn, 2.0 * fn],
            "C": {(0, 1): -2.0 * c * fp * fn2},
        }

    a = n * x * ((n - 1) * x - s)
    b = 2.0 * x
    c = (n + 1.0) * n
    return {
        "coef": [a, b, c],
        "S": [a * fn, b * fn, c * fn],
        "P": [
            a * (x - 2.0 * s / n) * fn2,
            (2 * n + 6) * x * fp**2 * fn2 + 2.0 * x * (x - s / n) * fn2 - 4.0 * x * fpp * fn1,
            n * ((n + 1) * x - 2.0 * s / n) * fn2 + 2.0 * n * n * (n + 3) * fp**2 * fn2 - 4.0 * n * n * fpp * fn1,
        ],
        "m": [a * fn, b * fn, c * fn],
        "C": {
            (0, 1): -4.0 * ((n - 1) * x - s) * x * fp * fn2,
            (0, 2): 0.0 * fn,
            (1, 2): 4.0 * (n + 1) * x * fp * fn2,
        },
    }


@dataclass(frozen=True)
class BlockForm:
    model: WarpModel
    kind: BlockKind
    diag: tuple[RadialForm, ...]
    offdiag: dict = field(default_factory=dict)     # (i, j) -> weight in s
    components: tuple[str, ...] = ()                 # names of the retained components
    dropped: tuple[str, ...] = ()                    # components whose tensors vanish

    @property
    def size(self) -> int:
        return len(self.diag)

    @property
    def interval(self):
        return self.diag[0].interval


def _component_weight(model, kind, key, i, j=None):
    def weight(s):
        f, fp, fpp = model.warp_s(s)
        w = radial_weights(model, kind, f, fp, fpp)
        jac = model.dr_ds(s)
        if key == "C":
            return w["C"][(i, j)] * jac
        if key == "S":
            return w["S"][i] / jac
        return w[key][i] * jac

    return weight


def block_form(model: WarpModel, kind: BlockKind) -> BlockForm:
    """Block quadratic form for one base eigenvalue, in the model's s variable."""
    probe = radial_weights(model, kind, np.ones(1), np.ones(1), np.ones(1))
    coef = probe["coef"]
    scale = max(abs(c) for c in coef)
    keep, dropped = [], []
    names = COMPONENT_NAMES[kind.family]
    for i, c in enumerate(coef):
        if abs(c) <= 1e-13 * max(scale, 1.0):
            dropped.append(names[i])
        elif c < 0:
            raise ValidationError(f"{kind.label}: component {names[i]} has negative norm; eigenvalue below its floor")
        else:
            keep.append(i)
    if not keep:
        raise ValidationError(f"{kind.label}: every tensor in this block vanishes")

    interval = (0.0, np.inf)
    diag = tuple(
        RadialForm(
            _component_weight(model, kind, "S", i),
            _component_weight(model, kind, "P", i),
            _component_weight(model, kind, "m", i),
            interval,
            name=f"{kind.label}:{names[i]}",
        )
        for i in keep
    )
    offdiag = {}
    for (i, j) in probe["C"]:
        if i in keep and j in keep:
            offdiag[(keep.index(i), keep.index(j))] = _component_weight(model, kind, "C", i, j)
    return BlockForm(model, kind, diag, offdiag, tuple(names[i] for i in keep), tuple(dropped))


def with_mass(bf: BlockForm, mass: Callable[[np.ndarray], np.ndarray]) -> BlockForm:
    """Copy of ``bf`` whose component mass weights are replaced by ``mass``."""
    return replace(bf, diag=tuple(replace(c, m=mass) for c in bf.diag))


def assemble_block(bf: BlockForm, mesh: Mesh, order: int = DEFAULT_QUAD_ORDER):
    """Coupled pencil, unknowns ordered component-major."""
    K_blocks = [[None] * bf.size for _ in range(bf.size)]
    M_blocks = []
    for i, comp in enumerate(bf.diag):
        K, M = assemble(comp, mesh, order)
        K_blocks[i][i] = K
        M_blocks.append(M)
    for (i, j), w in bf.offdiag.items():
        C = tridiagonal(mesh, w, False, order, f"C{i}{j}")
        K_blocks[i][j] = C
        K_blocks[j][i] = C.T
    return sp.bmat(K_blocks, format="csr"), sp.block_diag(M_blocks, format="csr")


@dataclass
class BlockMinimum:
    kind: BlockKind
    sigma: float
    profiles: dict[str, np.ndarray]
    mesh: Mesh


def block_min(bf: BlockForm, mesh: Mesh, order: int = DEFAULT_QUAD_ORDER) -> BlockMinimum:
    K, M = assemble_block(bf, mesh, order)
    sigma, v = min_rayleigh(K, M)
    m = mesh.N - 1
    profiles = {name: v[k * m:(k + 1) * m] for k, name in enumerate(bf.components)}
    return BlockMinimum(bf.kind, sigma, profiles, mesh)


# ---------------------------------------------------------------------------
# explicit 3x3 reductions of the scalar block


class Definiteness(enum.Enum):
    POSITIVE_DEFINITE = "positive definite"
    POSITIVE_SEMIDEFINITE = "positive semidefinite"
    INDEFINITE = "indefinite"
    NEGATIVE_SEMIDEFINITE = "negative semidefinite"

    @property
    def nonnegative(self) -> bool:
        return self in (Definiteness.POSITIVE_DEFINITE, Definiteness.POSITIVE_SEMIDEFINITE)


def _matrix(kind: Kind, n: int, lam, which: str) -> np.ndarray:
    L = Fraction(lam)
    if kind is Kind.CONE and n == 4 and which == "A":
        rows = [
            [(12 * L - 45) * L * (L - 4), -12 * L * (L - 4), 0],
            [-12 * L * (L - 4), 2 * L * L + Fraction(25, 2) * L, 20 * L],
            [0, 20 * L, 20 * L + 245],
        ]
    elif kind is Kind.SINH and n == 5 and which == "A":
        rows = [
            [20 * L * (L - 5) ** 2, -16 * L * (L - 5), 0],
            [-16 * L * (L - 5), 20 * L, 12 * L],
            [0, 12 * L, 30 * L + 60],
        ]
    elif kind is Kind.SINH and n == 5 and which == "B":
        rows = [
            [20 * L * (L - 5), 0, 0],
            [0, 2 * L * (L - 2), 12 * L],
            [0, 12 * L, 396],
        ]
    elif kind is Kind.SINH and n == 4 and which == "A":
        rows = [
            [12 * L * (L - 4) ** 2, -12 * L * (L - 4), 0],
            [-12 * L * (L - 4), Fraction(29, 2) * L, 5 * L],
            [0, 5 * L, 20 * L + 40],
        ]
    elif kind is Kind.SINH and n == 4 and which == "B":
        rows = [
            [3 * L * (L - 4), 0, 0],
            [0, 2 * L * (L - 1), 15 * L],
            [0, 15 * L, 205],
        ]
    else:
        raise UnsupportedCase(f"no explicit matrix {which} for {kind.value} n={n}")
    return np.array([[float(x) for x in row] for row in rows])


SUPPORTED_MATRICES = ((Kind.CONE, 4, "A"), (Kind.SINH, 5, "A"), (Kind.SINH, 5, "B"), (Kind.SINH, 4, "A"), (Kind.SINH, 4, "B"))


def definiteness(mat: np.ndarray, rtol: float = 1e-10) -> Definiteness:
    ev = np.linalg.eigvalsh(mat)
    tol = rtol * max(np.linalg.norm(mat, 2), np.finfo(float).tiny)
    if ev[0] > tol:
        return Definiteness.POSITIVE_DEFINITE
    if ev[0] >= -tol:
        return Definiteness.POSITIVE_SEMIDEFINITE
    if ev[-1] <= tol:
        return Definiteness.NEGATIVE_SEMIDEFINITE
    return Definiteness.INDEFINITE


def special_matrix(kind: Kind | str, n: int, lam, which: str = "A") -> tuple[np.ndarray, Definiteness]:
    kind = Kind.parse(kind)
    mat = _matrix(kind, n, lam, which.upper())
    return mat, definiteness(mat)
