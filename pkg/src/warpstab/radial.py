"""Weighted 1D quadratic forms and their minimum Rayleigh quotients.

A :class:`RadialForm` stands for the pair

    Q(u) = int S (u')^2 + P u^2 ds,      M(u) = int m u^2 ds

on an open interval. Forms are discretized with continuous piecewise-linear
elements vanishing at both mesh ends. Every discrete trial function is a
compactly supported H^1 function, so the discrete minimum of Q/M is an upper
bound for the infimum over the interval; a negative discrete minimum is a
genuine certificate of negativity.

The smallest eigenvalue of the symmetric-definite pencil (K, M) is located
by Sylvester-inertia bisection (K - sigma M is positive definite iff sigma
lies below the spectrum, tested by banded Cholesky) and then polished by
shifted inverse iteration from below.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.linalg import lapack
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import NoConvergence, ValidationError, WeightOverflow

Weight = Callable[[np.ndarray], np.ndarray]

DEFAULT_N = 2048
DEFAULT_DOMAIN = (1e-4, 1e4)
DEFAULT_QUAD_ORDER = 8


@dataclass(frozen=True)
class RadialForm:
    S: Weight
    P: Weight
    m: Weight
    interval: tuple[float, float] = (0.0, math.inf)
    name: str = ""


class Spacing(enum.Enum):
    UNIFORM = "uniform"
    LOG = "log"


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray
    spacing: Spacing = Spacing.UNIFORM

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 9:
            raise ValidationError("a mesh needs at least 8 elements")
        if not np.all(np.isfinite(nodes)) or np.any(np.diff(nodes) <= 0):
            raise ValidationError("mesh nodes must be finite and strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        """Number of elements."""
        return self.nodes.size - 1

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.nodes[0]), float(self.nodes[-1])

    def refined(self) -> "Mesh":
        """Bisect every element (in log space for logarithmic meshes)."""
        x = np.log(self.nodes) if self.spacing is Spacing.LOG else self.nodes
        mid = 0.5 * (x[:-1] + x[1:])
        fine = np.empty(2 * x.size - 1)
        fine[0::2] = x
        fine[1::2] = mid
        if self.spacing is Spacing.LOG:
            fine = np.exp(fine)
            fine[0::2] = self.nodes
        return Mesh(fine, self.spacing)


def make_mesh(lo: float, hi: float, N: int = DEFAULT_N, spacing: Spacing | str = Spacing.LOG) -> Mesh:
    spacing = Spacing(spacing)
    if N < 8:
        raise ValidationError(f"mesh needs N >= 8 elements, got {N}")
    if not lo < hi:
        raise ValidationError(f"empty mesh domain [{lo}, {hi}]")
    if spacing is Spacing.LOG:
        if lo <= 0:
            raise ValidationError("logarithmic mesh needs a positive left end")
        nodes = np.geomspace(lo, hi, N + 1)
    else:
        nodes = np.linspace(lo, hi, N + 1)
    nodes[0], nodes[-1] = lo, hi
    return Mesh(nodes, spacing)


# ---------------------------------------------------------------------------
# assembly


def _quadrature(mesh: Mesh, order: int):
    """Quadrature points (E, q) and weights (E, q) plus reference coordinate t in [0, 1]."""
    xi, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (xi + 1.0)
    a, b = mesh.nodes[:-1], mesh.nodes[1:]
    h = b - a
    x = a[:, None] + h[:, None] * t[None, :]
    return x, 0.5 * w[None, :] * h[:, None], t, h


def _evaluate(weight: Weight, x: np.ndarray, label: str) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        vals = np.broadcast_to(np.asarray(weight(x), dtype=float), x.shape)
    if not np.all(np.isfinite(vals)):
        raise WeightOverflow(f"weight {label!r} is not finite at some quadrature node; use substituted coordinates")
    return vals


def tridiagonal(mesh: Mesh, weight: Weight, derivative: bool, order: int = DEFAULT_QUAD_ORDER, label: str = "") -> sp.csr_matrix:
    """Galerkin matrix of int weight * u v (or u' v') on interior hat functions."""
    x, wq, t, h = _quadrature(mesh, order)
    vals = _evaluate(weight, x, label) * wq
    if derivative:
        total = vals.sum(axis=1) / h**2
        e_ll = e_rr = total
        e_lr = -total
    else:
        e_ll = vals @ (1.0 - t) ** 2
        e_rr = vals @ t**2
        e_lr = vals @ (t * (1.0 - t))
    diag = e_rr[:-1] + e_ll[1:]
    off = e_lr[1:-1]
    return sp.diags([off, diag, off], [-1, 0, 1], format="csr")


def assemble(form: RadialForm, mesh: Mesh, order: int = DEFAULT_QUAD_ORDER) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Stiffness and mass matrices of ``form`` on ``mesh`` (Dirichlet at both ends)."""
    if order < 4:
        raise ValidationError("quadrature order must be at least 4")
    lo, hi = form.interval
    if not (lo <= mesh.nodes[0] and mesh.nodes[-1] <= hi):
        raise ValidationError(f"mesh [{mesh.nodes[0]}, {mesh.nodes[-1]}] leaves the interval ({lo}, {hi})")
    if lo == 0.0 and hi == math.inf and mesh.nodes[0] <= 0.0:
        raise ValidationError("truncation must stay strictly inside (0, inf)")
    K = tridiagonal(mesh, form.S, True, order, "S") + tridiagonal(mesh, form.P, False, order, "P")
    M = tridiagonal(mesh, form.m, False, order, "m")
    return K.tocsr(), M


# ---------------------------------------------------------------------------
# eigensolver


def _bandwidth(A: sp.coo_matrix) -> int:
    return int(np.max(np.abs(A.row - A.col))) if A.nnz else 0


def _to_upper_band(A: sp.spmatrix, u: int) -> np.ndarray:
    A = sp.coo_matrix(A)
    keep = A.col >= A.row
    ab = np.zeros((u + 1, A.shape[0]))
    ab[u + A.row[keep] - A.col[keep], A.col[keep]] = A.data[keep]
    return ab


class _BandedPencil:
    """Diagonally scaled, bandwidth-reduced copy of a pencil (K, M)."""

    def __init__(self, K, M):
        K = sp.csr_matrix(K, dtype=float)
        M = sp.csr_matrix(M, dtype=float)
        n = K.shape[0]
        pattern = (abs(K) + abs(M)).tocoo()
        if _bandwidth(pattern) > 8:
            perm = reverse_cuthill_mckee(sp.csr_matrix(pattern), symmetric_mode=True)
        else:
            perm = np.arange(n)
        self.perm = perm
        d = M.diagonal()
        if np.any(d <= 0):
            raise ValidationError("mass matrix must have a positive diagonal")
        scale = 1.0 / np.sqrt(d)
        self.scale = scale[perm]
        Dk = sp.diags(scale)
        Ks = (Dk @ K @ Dk).tocsr()[perm][:, perm]
        Ms = (Dk @ M @ Dk).tocsr()[perm][:, perm]
        self.u = max(_bandwidth(Ks.tocoo()), _bandwidth(Ms.tocoo()), 1)
        self.Kb = _to_upper_band(Ks, self.u)
        self.Mb = _to_upper_band(Ms, self.u)
        self.Ks, self.Ms = Ks, Ms
        self.diag_ratio = self.Kb[self.u]  # M scaled to unit diagonal

    def factor(self, sigma: float):
        c, info = lapack.dpbtrf(self.Kb - sigma * self.Mb, lower=0)
        return (c if info == 0 else None)

    def is_below_spectrum(self, sigma: float) -> bool:
        return self.factor(sigma) is not None


def _bisect_lower(pencil: _BandedPencil, rtol: float, max_iter: int):
    """Bracket the smallest eigenvalue: lo below the spectrum, hi at or above it."""
    hi = float(np.min(pencil.diag_ratio))  # Rayleigh quotient of a unit vector
    width = abs(hi) if hi != 0.0 else 1.0
    lo = hi - width
    for _ in range(max_iter):
        if pencil.is_below_spectrum(lo):
            break
        hi = lo
        width *= 4.0
        lo = hi - width
    else:
        raise NoConvergence("could not find a shift below the spectrum")

    for _ in range(max_iter):
        if hi - lo <= rtol * max(abs(lo), abs(hi)):
            break
        if lo < 0.0 < hi:
            mid = 0.0
        elif lo == 0.0:
            mid = hi * 1e-2
        elif hi == 0.0:
            mid = lo * 1e-2
        elif hi / lo > 4.0 or lo / hi > 4.0:
            mid = math.copysign(math.sqrt(lo * hi), hi)
        else:
            mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pencil.is_below_spectrum(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


def min_rayleigh(stiffness, mass, rtol: float = 1e-10, max_iter: int = 400, method: str = "auto"):
    """Smallest eigenvalue of ``stiffness x = sigma mass x`` and its eigenvector.

    Returns ``(sigma_min, v)`` with ``v`` mass-normalized (``v^T M v = 1``) and
    its largest-magnitude entry positive.
    """
    n = stiffness.shape[0]
    if stiffness.shape != (n, n) or mass.shape != (n, n):
        raise ValidationError("stiffness and mass must be square matrices of equal size")
    if n == 1:
        a = float(stiffness[0, 0]) if not sp.issparse(stiffness) else float(stiffness.toarray()[0, 0])
        b = float(mass[0, 0]) if not sp.issparse(mass) else float(mass.toarray()[0, 0])
        if not b > 0:
            raise ValidationError("mass must be positive definite")
        return a / b, np.array([1.0 / math.sqrt(b)])
    if method == "dense" or (method == "auto" and n <= 2):
        Kd = stiffness.toarray() if sp.issparse(stiffness) else np.asarray(stiffness, dtype=float)
        Md = mass.toarray() if sp.issparse(mass) else np.asarray(mass, dtype=float)
        try:
            w, V = scipy.linalg.eigh(Kd, Md)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(str(exc)) from exc
        v = V[:, 0]
        v = v / math.sqrt(v @ Md @ v)
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        return float(w[0]), v

    pencil = _BandedPencil(stiffness, mass)
    lo, hi = _bisect_lower(pencil, 1e-7, max_iter)
    chol = pencil.factor(lo)
    if chol is None:
        raise NoConvergence("lost positive definiteness at the lower bracket")

    rng = np.random.default_rng(12345)
    x = 1.0 + 0.1 * rng.standard_normal(n)
    Ms, Ks = pencil.Ms, pencil.Ks
    x /= math.sqrt(x @ (Ms @ x))
    theta_old = math.inf
    for it in range(max_iter):
        y = lapack.dpbtrs(chol, Ms @ x, lower=0)[0]
        x = y / math.sqrt(y @ (Ms @ y))
        theta = float(x @ (Ks @ x))
        if it >= 2 and abs(theta - theta_old) <= rtol * max(abs(theta), abs(lo), abs(hi), 1e-300):
            break
        theta_old = theta
    else:
        raise NoConvergence(f"inverse iteration stalled after {max_iter} steps (bracket [{lo}, {hi}])")

    v = np.empty(n)
    v[pencil.perm] = x * pencil.scale
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return theta, v


def rayleigh_quotient(stiffness, mass, v) -> float:
    return float(v @ (stiffness @ v)) / float(v @ (mass @ v))


def form_min(form: RadialForm, mesh: Mesh, order: int = DEFAULT_QUAD_ORDER):
    K, M = assemble(form, mesh, order)
    return min_rayleigh(K, M)


# ---------------------------------------------------------------------------
# infima on growing domains


@dataclass
class InfimumEstimate:
    domains: list[tuple[float, float]]
    mesh_sizes: list[tuple[int, ...]]
    raw: list[list[float]]          # sigma_min per domain, per mesh level
    values: list[float]             # mesh-extrapolated value per domain
    limits: list[float]             # domain-extrapolated running estimates
    limit: float
    converged: bool
    expected: float | None = None
    label: str = ""

    @property
    def finest(self) -> list[float]:
        return [r[-1] for r in self.raw]

    def relative_error(self) -> float:
        if self.expected is None:
            return math.nan
        return abs(self.limit - self.expected) / max(abs(self.expected), 1.0)


def _length(domain, spacing: Spacing) -> float:
    lo, hi = domain
    return math.log(hi / lo) if spacing is Spacing.LOG else hi - lo


def infimum_extrapolate(
    form: RadialForm,
    domains: Sequence[tuple[float, float]],
    mesh_sizes: Sequence[int] = (512, 1024),
    spacing: Spacing | str = Spacing.LOG,
    length_model: str = "inverse-square",
    tol: float = 1e-3,
) -> InfimumEstimate:
    """Estimate inf Q/M over the full interval from nested truncations.

    ``mesh_sizes`` are element counts on the first domain; larger domains keep
    the same element width, so meshes are nested across domains as long as the
    domains are. Each domain's value is Richardson-extrapolated in the mesh
    width (second-order convergence of P1 eigenvalues); the domain sequence is
    then extrapolated assuming ``sigma(L) = sigma_inf + c / L^2`` with L the
    (logarithmic) domain length, the rate of every Hardy-type truncation.
    """
    spacing = Spacing(spacing)
    domains = [tuple(map(float, d)) for d in domains]
    if not domains:
        raise ValidationError("need at least one domain")
    for (a0, b0), (a1, b1) in zip(domains, domains[1:]):
        if a1 > a0 or b1 < b0:
            raise ValidationError("domains must be nested and increasing")
    sizes0 = sorted(int(s) for s in mesh_sizes)
    L0 = _length(domains[0], spacing)

    raw, values, used = [], [], []
    for dom in domains:
        ratio = _length(dom, spacing) / L0
        sizes = tuple(max(8, int(round(N * ratio))) for N in sizes0)
        used.append(sizes)
        sig = [form_min(form, make_mesh(dom[0], dom[1], N, spacing))[0] for N in sizes]
        raw.append(sig)
        if len(sig) >= 2:
            h1, h2 = 1.0 / sizes[-2], 1.0 / sizes[-1]
            values.append(sig[-1] + (sig[-1] - sig[-2]) * h2**2 / (h1**2 - h2**2))
        else:
            values.append(sig[-1])

    limits = [values[0]]
    for k in range(1, len(values)):
        if length_model == "inverse-square":
            x0 = _length(domains[k - 1], spacing) ** -2
            x1 = _length(domains[k], spacing) ** -2
            limits.append(values[k] - (values[k - 1] - values[k]) * x1 / (x0 - x1))
        elif length_model == "none":
            limits.append(values[k])
        else:
            raise ValidationError(f"unknown length model {length_model!r}")
    converged = len(limits) >= 2 and abs(limits[-1] - limits[-2]) <= tol * max(abs(limits[-1]), 1.0)
    return InfimumEstimate(domains, used, raw, values, limits, limits[-1], converged, label=form.name)


# ---------------------------------------------------------------------------
# Hardy-type infima of the three warp families


def _power(k: float) -> Weight:
    return lambda s: s**k


def hardy_forms(n: int) -> dict[str, tuple[RadialForm, float]]:
    """The five model infima, all written in the substituted variable s.

    exp pairs use s = e^r, sinh pairs s = sinh r.
    """
    root = lambda s: np.sqrt(1.0 + s * s)  # noqa: E731
    zero = lambda s: np.zeros_like(s)  # noqa: E731
    h = (n - 1) ** 2 / 4.0
    return {
        "exp_first": (RadialForm(_power(n + 1), zero, _power(n - 3), name="exp (e^nr, e^(n-2)r)"), 0.0),
        "exp_second": (RadialForm(_power(n + 1), zero, _power(n - 1), name="exp (e^nr, e^nr)"), n * n / 4.0),
        "cone": (RadialForm(_power(n), zero, _power(n - 2), name="cone (r^n, r^(n-2))"), h),
        "sinh_first": (
            RadialForm(lambda s: s**n * root(s), zero, lambda s: s ** (n - 2) / root(s), name="sinh (sinh^n, sinh^(n-2))"),
            h,
        ),
        "sinh_second": (
            RadialForm(lambda s: s**n * root(s), zero, lambda s: s ** (n - 2) * root(s), name="sinh (sinh^n, cosh^2 sinh^(n-2))"),
            h,
        ),
    }


def hardy_domains(key: str, levels: int = 3) -> list[tuple[float, float]]:
    if key.startswith("sinh"):
        # the infimum concentrates at s -> 0; large s only raises the quotient
        return [(10.0 ** (-4 * k), 1e2) for k in range(2, 2 + levels)]
    return [(10.0 ** (-2 * k), 10.0 ** (2 * k)) for k in range(1, 1 + levels)]


def hardy_suite(n: int, mesh_sizes: Sequence[int] = (256, 512), levels: int = 3) -> dict[str, InfimumEstimate]:
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    table = {}
    for key, (form, expected) in hardy_forms(n).items():
        # the first exp quotient scales like a^2 on [a, b]; no log-length tail to remove
        model = "none" if key == "exp_first" else "inverse-square"
        est = infimum_extrapolate(form, hardy_domains(key, levels), mesh_sizes, length_model=model)
        est.expected = expected
        table[key] = est
    return table
