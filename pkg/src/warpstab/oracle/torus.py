"""Tensor-level finite-difference check of the block formulas.

The base is the flat torus (R / 2 pi Z)^n and the warp is f = e^r, so the
warped product is Einstein with Ric = -n g~. A test tensor is a finite sum
of terms ``C(r) T(x)`` where ``C`` is an (n+1) x (n+1) coefficient array on
a uniform r-grid and ``T`` is ``cos(k.x)`` or ``sin(k.x)``. Covariant
derivatives are formed from raw Christoffel symbols, r-derivatives by
second-order central differences and x-derivatives exactly; torus integrals
of trigonometric products are evaluated in closed form, so only the r
direction carries discretization error.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..blocks import BlockKind, Family, radial_weights
from ..errors import ResolutionTooCoarse, ValidationError
from ..model import Kind, WarpModel, make_warp_model


# ---------------------------------------------------------------------------
# radial profiles


@dataclass(frozen=True)
class Bump:
    """Smooth compactly supported profile a * exp(-1 / (1 - t^2)), t = (r - c) / w."""

    center: float = 0.0
    width: float = 1.0
    amplitude: float = 1.0

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width

    def _t(self, r):
        return (np.asarray(r, dtype=float) - self.center) / self.width

    def __call__(self, r):
        t = self._t(r)
        out = np.zeros_like(t)
        inside = np.abs(t) < 1.0
        ti = t[inside]
        out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - ti * ti))
        return out

    def derivative(self, r):
        t = self._t(r)
        out = np.zeros_like(t)
        inside = np.abs(t) < 1.0
        ti = t[inside]
        q = 1.0 - ti * ti
        out[inside] = self.amplitude * np.exp(-1.0 / q) * (-2.0 * ti / q**2) / self.width
        return out


DEFAULT_PROFILES = (Bump(0.0, 1.0, 1.0), Bump(0.2, 0.9, 0.8), Bump(-0.1, 1.1, 1.3))
DEFAULT_CONFORMAL = Bump(0.1, 0.95, 0.7)


# ---------------------------------------------------------------------------
# specification


class Species(enum.Enum):
    TT = "tt"
    ONE_FORM = "one-form"
    SCALAR = "scalar"


@dataclass(frozen=True)
class TorusTensorSpec:
    """A tensor built from one base eigenmode.

    ``radial`` holds the profiles (phi, psi, chi); a ``None`` entry switches
    that shape off. For TT only phi is used (phi f^2 A T); for one-forms phi
    multiplies f^2 delta^* omega and psi multiplies dr.f omega; for scalars
    phi, psi, chi multiply the three trace-free shapes and ``conformal`` the
    shape v g~.
    """

    base_dim: int
    mode: tuple[int, ...]
    species: Species
    amplitude: tuple = ()
    radial: tuple = (None, None, None)
    conformal: Bump | None = None
    phase: str = "cos"

    def __post_init__(self):
        n = self.base_dim
        object.__setattr__(self, "mode", tuple(int(x) for x in self.mode))
        amp = np.asarray(self.amplitude, dtype=float)
        object.__setattr__(self, "amplitude", tuple(map(tuple, amp)) if amp.ndim == 2 else tuple(amp))
        k = np.asarray(self.mode, dtype=float)
        if n < 3:
            raise ValidationError("torus base dimension must be >= 3")
        if k.shape != (n,):
            raise ValidationError(f"mode must have {n} entries")
        if self.phase not in ("cos", "sin"):
            raise ValidationError("phase must be 'cos' or 'sin'")
        if self.species is Species.TT:
            A = np.asarray(self.amplitude, dtype=float)
            if A.shape != (n, n) or not np.allclose(A, A.T):
                raise ValidationError("TT amplitude must be a symmetric n x n matrix")
            if abs(np.trace(A)) > 1e-12 or np.linalg.norm(A @ k) > 1e-12:
                raise ValidationError("TT amplitude must be trace-free with A.k = 0")
        elif self.species is Species.ONE_FORM:
            a = np.asarray(self.amplitude, dtype=float)
            if a.shape != (n,) or abs(a @ k) > 1e-12:
                raise ValidationError("one-form amplitude must be a vector orthogonal to k")

    @property
    def eigenvalue(self) -> float:
        """|k|^2: the TT, rough-Laplacian or scalar eigenvalue of the base mode."""
        return float(np.dot(self.mode, self.mode))

    def with_radial(self, radial=None, conformal=None) -> "TorusTensorSpec":
        return TorusTensorSpec(
            self.base_dim, self.mode, self.species, self.amplitude,
            tuple(radial) if radial is not None else (None, None, None), conformal, self.phase,
        )


def tt_amplitude(n: int, k) -> np.ndarray:
    """Unit-free trace-free A = u w^T + w u^T with u, w orthonormal and orthogonal to k."""
    u, w = _orthogonal_pair(n, k)
    return np.outer(u, w) + np.outer(w, u)


def one_form_amplitude(n: int, k) -> np.ndarray:
    return _orthogonal_pair(n, k)[0]


def _orthogonal_pair(n: int, k):
    k = np.asarray(k, dtype=float)
    basis = [k / np.linalg.norm(k)] if np.any(k) else []
    out = []
    for e in np.eye(n):
        v = e - sum((e @ b) * b for b in basis)
        if np.linalg.norm(v) > 1e-8:
            v /= np.linalg.norm(v)
            basis.append(v)
            out.append(v)
        if len(out) == 2:
            return out
    raise ValidationError("mode leaves no room for two orthogonal directions")


@dataclass(frozen=True)
class FDGrid:
    lo: float = -1.5
    hi: float = 1.5
    h: float = 1e-3
    order: int = 2

    @property
    def nodes(self) -> np.ndarray:
        N = int(round((self.hi - self.lo) / self.h))
        return np.linspace(self.lo, self.hi, N + 1)

    @property
    def spacing(self) -> float:
        r = self.nodes
        return float(r[1] - r[0])

    def halved(self) -> "FDGrid":
        return FDGrid(self.lo, self.hi, self.h / 2.0, self.order)


# ---------------------------------------------------------------------------
# tensors as trigonometric expansions


def _canonical(phase: str, k) -> tuple[tuple, float] | None:
    """Key and sign for cos/sin(k.x); None if the function vanishes."""
    k = tuple(int(x) for x in k)
    nz = [x for x in k if x != 0]
    if not nz:
        return (("cos", k), 1.0) if phase == "cos" else None
    if nz[0] < 0:
        k = tuple(-x for x in k)
        return (phase, k), (1.0 if phase == "cos" else -1.0)
    return (phase, k), 1.0


def _torus_factor(key, n: int) -> float:
    vol = (2.0 * math.pi) ** n
    return vol if not any(key[1]) else vol / 2.0


class _Field:
    """Dict from canonical trig key to coefficient arrays of a common shape."""

    def __init__(self):
        self.terms: dict = {}

    def add(self, phase, k, coef):
        ck = _canonical(phase, k)
        if ck is None:
            return
        key, sign = ck
        if key in self.terms:
            self.terms[key] = self.terms[key] + sign * coef
        else:
            self.terms[key] = sign * coef


def _warp(model: WarpModel, r):
    return model.f(r), model.f_prime(r), model.f_second(r)


def build_tensor(spec: TorusTensorSpec, model: WarpModel, r: np.ndarray) -> _Field:
    n = spec.base_dim
    d = n + 1
    f, fp, _ = _warp(model, r)
    k = np.asarray(spec.mode, dtype=float)
    lam = spec.eigenvalue
    base = np.s_[:, 1:, 1:]
    # T and dT/dx_i = sgn * k_i * T_other
    other = "sin" if spec.phase == "cos" else "cos"
    dsign = -1.0 if spec.phase == "cos" else 1.0
    out = _Field()

    def coef():
        return np.zeros((r.size, d, d))

    phi, psi, chi = spec.radial
    if spec.species is Species.TT:
        if phi is not None:
            C = coef()
            C[base] = (phi(r) * f**2)[:, None, None] * np.asarray(spec.amplitude)[None]
            out.add(spec.phase, spec.mode, C)
    elif spec.species is Species.ONE_FORM:
        a = np.asarray(spec.amplitude, dtype=float)
        if phi is not None:
            # delta^* omega = (1/2)(a_j d_i T + a_i d_j T)
            C = coef()
            sym = 0.5 * (np.outer(k, a) + np.outer(a, k)) * dsign
            C[base] = (phi(r) * f**2)[:, None, None] * sym[None]
            out.add(other, spec.mode, C)
        if psi is not None:
            C = coef()
            C[:, 0, 1:] = (psi(r) * f)[:, None] * a[None]
            C[:, 1:, 0] = C[:, 0, 1:]
            out.add(spec.phase, spec.mode, C)
    else:
        if spec.conformal is not None:
            C = coef()
            C[:, 0, 0] = spec.conformal(r)
            C[base] = (spec.conformal(r) * f**2)[:, None, None] * np.eye(n)[None]
            out.add(spec.phase, spec.mode, C)
        if phi is not None:
            # n nabla^2 v + (Delta v) g with nabla^2 T = -k k^T T and Delta T = |k|^2 T
            C = coef()
            C[base] = (phi(r) * f**2)[:, None, None] * (-n * np.outer(k, k) + lam * np.eye(n))[None]
            out.add(spec.phase, spec.mode, C)
        if psi is not None:
            C = coef()
            C[:, 0, 1:] = (psi(r) * f)[:, None] * (dsign * k)[None]
            C[:, 1:, 0] = C[:, 0, 1:]
            out.add(other, spec.mode, C)
        if chi is not None:
            C = coef()
            C[:, 0, 0] = -n * chi(r)
            C[base] = (chi(r) * f**2)[:, None, None] * np.eye(n)[None]
            out.add(spec.phase, spec.mode, C)
    return out


def christoffel(model: WarpModel, r: np.ndarray, n: int) -> np.ndarray:
    """Gamma[r, d, c, a] = Gamma^d_{ca} of dr^2 + f^2 (flat metric)."""
    f, fp, _ = _warp(model, r)
    G = np.zeros((r.size, n + 1, n + 1, n + 1))
    for i in range(1, n + 1):
        G[:, 0, i, i] = -fp * f
        G[:, i, 0, i] = fp / f
        G[:, i, i, 0] = fp / f
    return G


def curvature_action(model: WarpModel, r: np.ndarray, C: np.ndarray) -> np.ndarray:
    """(R h)_{bc} = g^{aa} g^{dd} R_{abcd} h_{ad} for the warped curvature over a flat base."""
    f, fp, fpp = _warp(model, r)
    n = C.shape[1] - 1
    out = np.zeros_like(C)
    tr = np.einsum("rii->r", C[:, 1:, 1:])
    out[:, 1:, 1:] = (fp**2 / f**2)[:, None, None] * (
        np.transpose(C[:, 1:, 1:], (0, 2, 1)) - tr[:, None, None] * np.eye(n)[None]
    ) - (fpp * f * C[:, 0, 0])[:, None, None] * np.eye(n)[None]
    out[:, 0, 0] = -fpp / f**3 * tr
    out[:, 0, 1:] = (fpp / f)[:, None] * C[:, 0, 1:]
    out[:, 1:, 0] = (fpp / f)[:, None] * C[:, 1:, 0]
    return out


def covariant_derivative(field_: _Field, model: WarpModel, r: np.ndarray, h: float) -> _Field:
    """Terms of (nabla h)[r, c, a, b] = nabla_c h_ab."""
    n = next(iter(field_.terms.values())).shape[1] - 1 if field_.terms else 0
    G = christoffel(model, r, n)
    out = _Field()
    for (phase, k), C in field_.terms.items():
        D = np.zeros((r.size, n + 1, n + 1, n + 1))
        D[:, 0] = np.gradient(C, h, axis=0, edge_order=2)
        D -= np.einsum("rdca,rdb->rcab", G, C)
        D -= np.einsum("rdcb,rad->rcab", G, C)
        out.add(phase, k, D)
        kk = np.asarray(k, dtype=float)
        if any(k):
            other = "sin" if phase == "cos" else "cos"
            sign = -1.0 if phase == "cos" else 1.0
            Dx = np.zeros_like(D)
            Dx[:, 1:] = sign * kk[None, :, None, None] * C[:, None, :, :]
            out.add(other, k, Dx)
    return out


def _metric_inverse(model: WarpModel, r: np.ndarray, n: int) -> np.ndarray:
    f = model.f(r)
    g = np.empty((r.size, n + 1))
    g[:, 0] = 1.0
    g[:, 1:] = (1.0 / f**2)[:, None]
    return g


def _pair_density(A: _Field, B: _Field, contract, n) -> np.ndarray | float:
    total = 0.0
    for key, X in A.terms.items():
        Y = B.terms.get(key)
        if Y is None:
            continue
        total = total + _torus_factor(key, n) * contract(X, Y)
    return total


def _integrate(density, r) -> float:
    if np.isscalar(density):
        return float(density)
    return float(np.trapezoid(density, r)) if hasattr(np, "trapezoid") else float(np.trapz(density, r))


def _check_grid(model: WarpModel, grid: FDGrid, n: int):
    if grid.order != 2:
        raise ValidationError("only second-order differences are implemented")
    if math.exp(n * grid.spacing) - 1.0 > 0.1:
        raise ResolutionTooCoarse(f"h_r = {grid.spacing} lets f^n vary by more than 10% per cell")


def _require_exp(model: WarpModel):
    if model.kind is not Kind.EXP:
        raise ValidationError("the torus oracle needs the exponential warp (flat base keeps it Einstein)")


@functools.lru_cache(maxsize=128)
def _prepared(model: WarpModel, spec: TorusTensorSpec, grid: FDGrid):
    """Tensor, covariant derivative and curvature action on the grid."""
    r = grid.nodes
    H = build_tensor(spec, model, r)
    D = covariant_derivative(H, model, r, grid.spacing)
    R = _Field()
    for key, C in H.terms.items():
        R.terms[key] = curvature_action(model, r, C)
    return H, D, R


def fd_bilinear(model: WarpModel, a: TorusTensorSpec, b: TorusTensorSpec, grid: FDGrid) -> float:
    """(Delta_E h_a, h_b) = int <nabla h_a, nabla h_b> - 2 <R h_a, h_b> over the warped product."""
    _require_exp(model)
    n = a.base_dim
    _check_grid(model, grid, n)
    r = grid.nodes
    f = model.f(r)
    gi = _metric_inverse(model, r, n)
    Ha, Da, Ra = _prepared(model, a, grid)
    Hb, Db, _ = _prepared(model, b, grid)
    if not Ha.terms or not Hb.terms:
        return 0.0
    grad = _pair_density(Da, Db, lambda X, Y: np.einsum("rc,ra,rb,rcab,rcab->r", gi, gi, gi, X, Y, optimize=True), n)
    curv = _pair_density(Ra, Hb, lambda X, Y: np.einsum("ra,rb,rab,rab->r", gi, gi, X, Y, optimize=True), n)
    return _integrate((grad - 2.0 * curv) * f**n, r)


def fd_inner(model: WarpModel, a: TorusTensorSpec, b: TorusTensorSpec, grid: FDGrid) -> float:
    """L^2 inner product of the two tensors."""
    n = a.base_dim
    r = grid.nodes
    f = model.f(r)
    gi = _metric_inverse(model, r, n)
    Ha, Hb = _prepared(model, a, grid)[0], _prepared(model, b, grid)[0]
    dens = _pair_density(Ha, Hb, lambda X, Y: np.einsum("ra,rb,rab,rab->r", gi, gi, X, Y), n)
    return _integrate(dens * f**n, r)


def fd_quadratic_form(model: WarpModel, spec: TorusTensorSpec, grid: FDGrid, check: bool = True) -> float:
    """(Delta_E h, h) by finite differences in r.

    With ``check`` the value is recomputed on the halved grid and a Richardson
    error estimate above 1% raises ResolutionTooCoarse.
    """
    q = fd_bilinear(model, spec, spec, grid)
    if check:
        q2 = fd_bilinear(model, spec, spec, grid.halved())
        err = abs(q - q2) * 4.0 / 3.0
        if err > 1e-2 * max(abs(q2), 1e-300) and err > 1e-12:
            raise ResolutionTooCoarse(f"estimated discretization error {err:.3g} exceeds 1% of {q2:.6g}")
    return q


# ---------------------------------------------------------------------------
# closed forms from the block weights


def _closed(model: WarpModel, family: Family, eig: float, key: str, i: int, j: int | None, u, v, base_norm2: float):
    """base_norm2 * int W u v (or u' v' for stiffness) dr, with W from the block weights."""
    kind = BlockKind(family, eig)
    lo = min(u.support[0], v.support[0])
    hi = max(u.support[1], v.support[1])

    def weights(r):
        r = np.atleast_1d(r)
        return radial_weights(model, kind, model.f(r), model.f_prime(r), model.f_second(r))

    if key == "Q":
        def g(r):
            w = weights(r)
            return (w["S"][i] * u.derivative(r) * v.derivative(r) + w["P"][i] * u(r) * v(r))[0]
    elif key == "m":
        def g(r):
            return (weights(r)["m"][i] * u(r) * v(r))[0]
    else:
        def g(r):
            return (weights(r)["C"][(i, j)] * u(r) * v(r))[0]
    val, _ = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)
    return base_norm2 * val


def _base_norm2(spec: TorusTensorSpec) -> float:
    """L^2(torus) norm squared of the base object h, omega or v."""
    n = spec.base_dim
    key = _canonical(spec.phase, spec.mode)
    if key is None:
        return 0.0
    vol = _torus_factor(key[0], n)
    if spec.species is Species.TT:
        A = np.asarray(spec.amplitude)
        return vol * float(np.sum(A * A))
    if spec.species is Species.ONE_FORM:
        a = np.asarray(spec.amplitude)
        return vol * float(a @ a)
    return vol


# shape name -> (species, family, component index, slot in the spec)
SHAPES = {
    "V1": (Species.TT, Family.TT, 0, "phi"),
    "V2": (Species.SCALAR, Family.CONFORMAL, 0, "conformal"),
    "V3.1": (Species.ONE_FORM, Family.ONE_FORM, 0, "phi"),
    "V3.2": (Species.ONE_FORM, Family.ONE_FORM, 1, "psi"),
    "V4.1": (Species.SCALAR, Family.SCALAR, 0, "phi"),
    "V4.2": (Species.SCALAR, Family.SCALAR, 1, "psi"),
    "V4.3": (Species.SCALAR, Family.SCALAR, 2, "chi"),
}
COUPLINGS = {"V3.12": ("V3.1", "V3.2"), "V4.12": ("V4.1", "V4.2"), "V4.13": ("V4.1", "V4.3"), "V4.23": ("V4.2", "V4.3")}


def shape_spec(name: str, n: int, k, profile: Bump, phase: str = "cos") -> TorusTensorSpec:
    species, _, _, slot = SHAPES[name]
    k = tuple(int(x) for x in k)
    amp = ()
    if species is Species.TT:
        amp = tt_amplitude(n, k)
    elif species is Species.ONE_FORM:
        amp = tuple(one_form_amplitude(n, k))
    radial = [None, None, None]
    conformal = None
    if slot == "conformal":
        conformal = profile
    else:
        radial[("phi", "psi", "chi").index(slot)] = profile
    return TorusTensorSpec(n, k, species, amp, tuple(radial), conformal, phase)


def combine(a: TorusTensorSpec, b: TorusTensorSpec, sign: float = 1.0) -> TorusTensorSpec:
    """Spec for h_a + sign * h_b when both live on the same mode and species."""
    if (a.mode, a.species, a.phase) != (b.mode, b.species, b.phase):
        raise ValidationError("can only combine shapes of one mode and species")
    radial = []
    for x, y in zip(a.radial, b.radial):
        if x is not None and y is not None:
            raise ValidationError("shapes overlap in one slot")
        radial.append(x if y is None else _scaled(y, sign))
    conformal = a.conformal if b.conformal is None else _scaled(b.conformal, sign)
    return TorusTensorSpec(a.base_dim, a.mode, a.species, a.amplitude, tuple(radial), conformal, a.phase)


def _scaled(p: Bump, c: float) -> Bump:
    return Bump(p.center, p.width, p.amplitude * c)


def closed_quadratic(model: WarpModel, name: str, n: int, k, profile: Bump) -> float:
    spec = shape_spec(name, n, k, profile)
    _, fam, i, _ = SHAPES[name]
    return _closed(model, fam, spec.eigenvalue, "Q", i, None, profile, profile, _base_norm2(spec))


def closed_norm(model: WarpModel, name: str, n: int, k, profile: Bump) -> float:
    spec = shape_spec(name, n, k, profile)
    _, fam, i, _ = SHAPES[name]
    return _closed(model, fam, spec.eigenvalue, "m", i, None, profile, profile, _base_norm2(spec))


def closed_coupling(model: WarpModel, pair: str, n: int, k, u: Bump, v: Bump) -> float:
    a, b = COUPLINGS[pair]
    spec = shape_spec(a, n, k, u)
    _, fam, i, _ = SHAPES[a]
    j = SHAPES[b][2]
    return _closed(model, fam, spec.eigenvalue, "C", i, j, u, v, _base_norm2(spec))


# ---------------------------------------------------------------------------
# flat-torus identities on the base, checked spectrally


def _fft_grad(F: np.ndarray, n: int, M: int) -> np.ndarray:
    """Exact derivatives of a trigonometric polynomial sampled on an M^n grid.

    F has shape (..., M, ..., M) with the n spatial axes last; returns an
    array with a new leading derivative axis of size n.
    """
    freqs = np.fft.fftfreq(M, d=1.0 / M)
    axes = tuple(range(F.ndim - n, F.ndim))
    Fh = np.fft.fftn(F, axes=axes)
    out = []
    for i in range(n):
        shape = [1] * F.ndim
        shape[F.ndim - n + i] = M
        out.append(np.real(np.fft.ifftn(1j * freqs.reshape(shape) * Fh, axes=axes)))
    return np.stack(out)


def base_identities(n: int, k, M: int = 8) -> dict[str, float]:
    """Deviations of the base commutation identities for v = cos(k.x), omega = a cos(k.x)."""
    k = np.asarray(k, dtype=float)
    axes = np.meshgrid(*[2 * np.pi * np.arange(M) / M] * n, indexing="ij")
    phase = sum(ki * xi for ki, xi in zip(k, axes))
    v = np.cos(phase)
    lam = float(k @ k)

    def lap(F):  # positive Laplacian, componentwise
        g = _fft_grad(F, n, M)
        return -sum(_fft_grad(g[i], n, M)[i] for i in range(n))

    def mean(F):
        return float(np.mean(F))

    dv = _fft_grad(v, n, M)                           # (n, grid)
    hess = np.stack([_fft_grad(dv[i], n, M) for i in range(n)])   # (n, n, grid)
    out = {}
    # (nabla^2)^* nabla^2 v = delta delta nabla^2 v = Delta^2 v on a flat base
    ddh = sum(_fft_grad(_fft_grad(hess[i, j], n, M)[j], n, M)[i] for i in range(n) for j in range(n))
    out["hessian_adjoint"] = float(np.max(np.abs(ddh - lap(lap(v)))))
    out["hessian_norm"] = abs(mean(np.sum(hess**2, axis=(0, 1))) - lam**2 * mean(v**2))
    # Delta_E (v g) = (Delta v) g, Delta_E nabla^2 v = nabla^2 Delta v
    out["conformal_commutator"] = float(np.max(np.abs(lap(v) - lam * v)))
    lap_hess = np.stack([np.stack([lap(hess[i, j]) for j in range(n)]) for i in range(n)])
    dlv = _fft_grad(lap(v), n, M)
    hess_lap = np.stack([_fft_grad(dlv[i], n, M) for i in range(n)])
    out["hessian_commutator"] = float(np.max(np.abs(lap_hess - hess_lap)))
    if lam > 0:
        a = one_form_amplitude(n, k)
        omega = a[:, None] * v.reshape(1, -1)
        omega = omega.reshape((n,) + v.shape)
        dom = np.stack([_fft_grad(omega[j], n, M) for j in range(n)], axis=1)   # dom[i, j] = d_i omega_j
        sym = 0.5 * (dom + np.swapaxes(dom, 0, 1))
        div = sum(dom[i, i] for i in range(n))
        out["one_form_divergence"] = float(np.max(np.abs(div)))
        # delta delta^* omega = (1/2) nabla^* nabla omega for divergence-free omega
        ddstar = np.stack([-sum(_fft_grad(sym[i, j], n, M)[i] for i in range(n)) for j in range(n)])
        rough = np.stack([lap(omega[j]) for j in range(n)])
        out["symmetrized_adjoint"] = float(np.max(np.abs(ddstar - 0.5 * rough)))
        # Delta_E delta^* omega = delta^* Delta_H omega
        lap_sym = np.stack([np.stack([lap(sym[i, j]) for j in range(n)]) for i in range(n)])
        dlo = np.stack([_fft_grad(rough[j], n, M) for j in range(n)], axis=1)
        sym_lap = 0.5 * (dlo + np.swapaxes(dlo, 0, 1))
        out["one_form_commutator"] = float(np.max(np.abs(lap_sym - sym_lap)))
        out["symmetrized_norm"] = abs(mean(np.sum(sym**2, axis=(0, 1))) - 0.5 * lam * mean(np.sum(omega**2, axis=0)))
    return out


# ---------------------------------------------------------------------------
# full report


@dataclass
class Section2Report:
    n: int
    modes: list
    h: float
    diagonal: dict[str, float] = field(default_factory=dict)       # relative deviations
    norms: dict[str, float] = field(default_factory=dict)
    couplings: dict[str, float] = field(default_factory=dict)      # deviation / scale
    zero_pairs: dict[str, float] = field(default_factory=dict)     # |value| / scale
    orthogonality: dict[str, float] = field(default_factory=dict)
    identities: dict[str, float] = field(default_factory=dict)
    polarization: dict[str, float] = field(default_factory=dict)
    order: dict[str, float] = field(default_factory=dict)
    vanishing: dict[str, float] = field(default_factory=dict)      # shapes that are zero tensors

    def worst(self) -> dict[str, float]:
        return {
            "diagonal": max(self.diagonal.values(), default=0.0),
            "norms": max(self.norms.values(), default=0.0),
            "couplings": max(self.couplings.values(), default=0.0),
            "zero_pairs": max(self.zero_pairs.values(), default=0.0),
            "orthogonality": max(self.orthogonality.values(), default=0.0),
            "identities": max(self.identities.values(), default=0.0),
            "polarization": max(self.polarization.values(), default=0.0),
        }


def _vanishes(name: str, k) -> bool:
    # shapes built from dv, delta^* omega or the trace-free Hessian vanish for k = 0
    return not any(k) and name in ("V3.1", "V4.1", "V4.2")


def _profile_for(name: str, profiles):
    slot = SHAPES[name][3]
    if slot == "conformal":
        return DEFAULT_CONFORMAL
    return profiles[("phi", "psi", "chi").index(slot)]


def _mode_label(k) -> str:
    return "(" + ",".join(str(int(x)) for x in k) + ")"


def verify_section2(
    model: WarpModel | None = None,
    n: int = 4,
    modes=None,
    profiles=DEFAULT_PROFILES,
    grid: FDGrid | None = None,
    order_levels: tuple[float, ...] = (8e-3, 4e-3, 2e-3),
) -> Section2Report:
    """Compare every block formula with the tensor-level finite-difference value."""
    model = model or make_warp_model(Kind.EXP, n)
    _require_exp(model)
    n = model.n
    grid = grid or FDGrid()
    if modes is None:
        e = np.eye(n, dtype=int)
        modes = [tuple([0] * n), tuple(e[0]), tuple(e[0] + e[1])]
    modes = [tuple(int(x) for x in k) for k in modes]
    rep = Section2Report(n, modes, grid.spacing)

    specs = {}
    for k in modes:
        for name in SHAPES:
            p = _profile_for(name, profiles)
            spec = shape_spec(name, n, k, p)
            tag = f"{name}{_mode_label(k)}"
            if _vanishes(name, k):
                rep.vanishing[tag] = abs(fd_bilinear(model, spec, spec, grid)) + abs(fd_inner(model, spec, spec, grid))
                continue
            specs[(name, k)] = spec
            fd = fd_quadratic_form(model, spec, grid)
            cf = closed_quadratic(model, name, n, k, p)
            rep.diagonal[tag] = abs(fd - cf) / abs(cf)
            nf = fd_inner(model, spec, spec, grid)
            nc = closed_norm(model, name, n, k, p)
            rep.norms[tag] = abs(nf - nc) / abs(nc)

        # couplings inside a block, directly and by polarization
        for pair, (a, b) in COUPLINGS.items():
            if (a, k) not in specs or (b, k) not in specs:
                continue
            sa, sb = specs[(a, k)], specs[(b, k)]
            ua, ub = _profile_for(a, profiles), _profile_for(b, profiles)
            fd = fd_bilinear(model, sa, sb, grid)
            cf = closed_coupling(model, pair, n, k, ua, ub)
            scale = math.sqrt(abs(closed_quadratic(model, a, n, k, ua)) * abs(closed_quadratic(model, b, n, k, ub)))
            tag = f"{pair}{_mode_label(k)}"
            target = rep.zero_pairs if pair == "V4.13" else rep.couplings
            target[tag] = abs(fd - cf) / scale
            plus = fd_bilinear(model, combine(sa, sb, 1.0), combine(sa, sb, 1.0), grid)
            minus = fd_bilinear(model, combine(sa, sb, -1.0), combine(sa, sb, -1.0), grid)
            pol = 0.25 * (plus - minus)
            rep.polarization[tag] = abs(pol - fd) / scale

    # pairs that must vanish: different blocks of one mode, different modes
    keys = list(specs)
    for (na, ka), (nb, kb) in itertools.combinations(keys, 2):
        same_block = ka == kb and SHAPES[na][1] is SHAPES[nb][1]
        if same_block:
            continue
        sa, sb = specs[(na, ka)], specs[(nb, kb)]
        val = fd_bilinear(model, sa, sb, grid)
        scale = math.sqrt(abs(fd_bilinear(model, sa, sa, grid)) * abs(fd_bilinear(model, sb, sb, grid)))
        tag = f"{na}{_mode_label(ka)}x{nb}{_mode_label(kb)}"
        rep.zero_pairs[tag] = abs(val) / scale
        inner = fd_inner(model, sa, sb, grid)
        nscale = math.sqrt(fd_inner(model, sa, sa, grid) * fd_inner(model, sb, sb, grid))
        rep.orthogonality[tag] = abs(inner) / nscale
    # the shapes inside one block are L^2-orthogonal as well
    for k in modes:
        for a, b in itertools.combinations(SHAPES, 2):
            if (a, k) in specs and (b, k) in specs and SHAPES[a][1] is SHAPES[b][1]:
                sa, sb = specs[(a, k)], specs[(b, k)]
                inner = fd_inner(model, sa, sb, grid)
                nscale = math.sqrt(fd_inner(model, sa, sa, grid) * fd_inner(model, sb, sb, grid))
                rep.orthogonality[f"{a}x{b}{_mode_label(k)}"] = abs(inner) / nscale

    for k in modes:
        for key, val in base_identities(n, k).items():
            rep.identities[f"{key}{_mode_label(k)}"] = val

    rep.order = convergence_order(model, n, modes[-1], profiles, order_levels, grid)
    return rep


def convergence_order(model, n, k, profiles=DEFAULT_PROFILES, levels=(8e-3, 4e-3, 2e-3), grid: FDGrid | None = None) -> dict[str, float]:
    """Observed order log2(e_h / e_{h/2}) per shape over successive halvings."""
    grid = grid or FDGrid()
    out = {}
    for name in SHAPES:
        if _vanishes(name, k):
            continue
        p = _profile_for(name, profiles)
        spec = shape_spec(name, n, k, p)
        cf = closed_quadratic(model, name, n, k, p)
        errs = [abs(fd_bilinear(model, spec, spec, FDGrid(grid.lo, grid.hi, h)) - cf) for h in levels]
        for j in range(len(errs) - 1):
            out[f"{name}{_mode_label(k)}[{j}]"] = math.log2(errs[j] / errs[j + 1])
    return out
