"""Stability decisions and their numerical certificates.

The classification itself is a comparison of the smallest TT eigenvalue of
the base against the model threshold, done in exact rational arithmetic.
Numerical block minima are attached as corroboration; only negativity is
ever certified numerically, through an explicit compactly supported profile
with negative discrete Rayleigh quotient.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .blocks import BlockForm, BlockKind, Family, block_form, block_min
from .errors import BudgetExceeded, InvalidState, NotFound, ValidationError
from .model import BaseSpectrum, Kind, WarpModel, validate_spectrum
from .radial import DEFAULT_DOMAIN, DEFAULT_N, Mesh, Spacing, make_mesh

NEGATIVITY_RTOL = 1e-6
MAX_ROUNDS = 12
MAX_ELEMENTS = 1 << 17


class Classification(enum.Enum):
    STRICTLY_STABLE = "StrictlyStable"
    STABLE = "Stable"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class MeshPolicy:
    """Truncation and resolution used for every block solve.

    ``domain`` is given in the model's substituted variable s (equal to r
    for cones); use :meth:`from_r_domain` to specify it in r.
    """

    domain: tuple[float, float] = DEFAULT_DOMAIN
    N: int = DEFAULT_N
    spacing: Spacing = Spacing.LOG
    workers: int | None = None

    @classmethod
    def from_r_domain(cls, model: WarpModel, lo: float, hi: float, **kw) -> "MeshPolicy":
        s_lo, s_hi = (float(v) for v in model.to_s(np.array([lo, hi], dtype=float)))
        if not (s_lo > 0 and s_hi > s_lo):
            raise ValidationError(f"r-domain [{lo}, {hi}] does not map to a positive s-interval")
        return cls((s_lo, s_hi), **kw)

    def mesh(self) -> Mesh:
        return make_mesh(self.domain[0], self.domain[1], self.N, self.spacing)

    def r_domain(self, model: WarpModel) -> tuple[float, float]:
        lo, hi = model.to_r(np.array(self.domain))
        return float(lo), float(hi)


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def classify(model: WarpModel, kappa_min) -> Classification:
    if _exact(kappa_min) < model.threshold:
        return Classification.UNSTABLE
    if model.kind is Kind.CONE:
        return Classification.STABLE
    return Classification.STRICTLY_STABLE


def block_scale(bf: BlockForm) -> float:
    """Coefficient scale used for the 'nonnegative within tolerance' band."""
    n = bf.model.n
    return float(max(1.0, abs(float(bf.kind.eigenvalue)), n * n, abs(bf.model.scal_total)))


# ---------------------------------------------------------------------------
# certificates


def _gauss(order: int):
    xi, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (xi + 1.0), 0.5 * w


@dataclass
class DestabilizerProfile:
    """A piecewise-linear V1 profile with negative Rayleigh quotient.

    ``nodes`` are in the substituted variable s and ``phi`` holds the node
    values including the two zero boundary values.
    """

    model: WarpModel
    kappa: object
    nodes: np.ndarray
    phi: np.ndarray
    rayleigh: float
    rounds: int = 0
    component: str = "V1"

    def recompute(self, order: int = 20) -> float:
        """Quotient of the stored profile, integrated in r with Gauss-Legendre.

        Shares nothing with the assembly path: each element is mapped to r,
        the weights are the unsubstituted ones (f^n, kappa f^(n-2)), and the
        profile derivative is taken by the chain rule.
        """
        model, n, kappa = self.model, self.model.n, float(self.kappa)
        s0, s1 = self.nodes[:-1], self.nodes[1:]
        r0, r1 = model.to_r(s0), model.to_r(s1)
        t, w = _gauss(order)
        r = r0[:, None] + (r1 - r0)[:, None] * t[None, :]
        wr = (r1 - r0)[:, None] * w[None, :]
        s = model.to_s(r)
        lam = (s - s0[:, None]) / (s1 - s0)[:, None]
        u = self.phi[:-1, None] * (1.0 - lam) + self.phi[1:, None] * lam
        du_ds = ((self.phi[1:] - self.phi[:-1]) / (s1 - s0))[:, None]
        du_dr = du_ds / model.dr_ds(s)
        f = model.f(r)
        num = np.sum(wr * (f**n * du_dr**2 + kappa * f ** (n - 2) * u**2))
        den = np.sum(wr * f**n * u**2)
        return float(num / den)


def _v1_min(model: WarpModel, kappa, mesh: Mesh):
    res = block_min(block_form(model, BlockKind.tt(kappa)), mesh)
    return res.sigma, res.profiles["phi"]


def _widen(domain, model: WarpModel):
    lo, hi = domain
    hi_new = hi * 10.0
    if model.kind is Kind.EXP:
        # keep e^{nr} representable in the r-coordinate recheck
        hi_new = min(hi_new, math.exp(600.0 / model.n))
    return lo / 10.0, max(hi, hi_new)


def find_destabilizer(model: WarpModel, kappa, policy: MeshPolicy | None = None) -> DestabilizerProfile:
    """Search for a V1 profile with quotient below -1e-6 |kappa|.

    Rounds alternate between widening the truncation tenfold at both ends
    (keeping the element density) and bisecting every element.
    """
    if _exact(kappa) >= model.threshold:
        raise NotFound(f"kappa = {kappa} is not below the threshold {model.threshold}; the V1 block is nonnegative")
    policy = policy or MeshPolicy()
    domain, N = tuple(policy.domain), policy.N
    target = -NEGATIVITY_RTOL * abs(float(kappa))
    history = []
    for rnd in range(MAX_ROUNDS + 1):
        mesh = make_mesh(domain[0], domain[1], N, policy.spacing)
        sigma, phi = _v1_min(model, kappa, mesh)
        history.append({"round": rnd, "domain": domain, "N": N, "sigma": sigma})
        if sigma < target:
            full = np.concatenate([[0.0], phi, [0.0]])
            return DestabilizerProfile(model, kappa, np.array(mesh.nodes), full, sigma, rnd)
        if rnd % 2 == 0:
            new = _widen(domain, model)
            growth = math.log(new[1] / new[0]) / math.log(domain[1] / domain[0])
            domain, N = new, int(math.ceil(N * growth))
        else:
            N *= 2
        if N > MAX_ELEMENTS:
            break
    raise BudgetExceeded(
        f"no negative V1 profile for kappa = {kappa} after {len(history)} rounds",
        diagnostics={"history": history},
    )


# ---------------------------------------------------------------------------
# decision


@dataclass
class StabilityVerdict:
    model: WarpModel
    classification: Classification
    threshold: Fraction
    kappa_min: object
    block_minima: dict[BlockKind, float] = field(default_factory=dict)
    block_scales: dict[BlockKind, float] = field(default_factory=dict)
    certificate: DestabilizerProfile | None = None
    policy: MeshPolicy | None = None

    def nonnegative(self, kind: BlockKind) -> bool:
        return self.block_minima[kind] >= -NEGATIVITY_RTOL * self.block_scales[kind]


def spectrum_blocks(spectrum: BaseSpectrum) -> list[BlockKind]:
    """Every block generated by the spectrum, ordered by family then index."""
    kinds = [BlockKind.tt(k) for k in spectrum.kappa]
    kinds += [BlockKind.conformal(x) for x in spectrum.lam]
    kinds += [BlockKind.one_form(x) for x in spectrum.mu]
    kinds += [BlockKind.scalar(x) for x in spectrum.lam]
    return kinds


def _default_workers() -> int:
    return max(1, min(4, os.cpu_count() or 1))


def block_minima(model: WarpModel, kinds, policy: MeshPolicy) -> tuple[dict, dict]:
    mesh = policy.mesh()

    def run(kind):
        bf = block_form(model, kind)
        return block_min(bf, mesh).sigma, block_scale(bf)

    workers = policy.workers or _default_workers()
    if workers == 1 or len(kinds) <= 1:
        results = [run(k) for k in kinds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, kinds))
    minima, scales = {}, {}
    for kind, (sigma, scale) in zip(kinds, results):
        minima[kind] = sigma
        scales[kind] = scale
    return minima, scales


def decide(model: WarpModel, spectrum: BaseSpectrum, policy: MeshPolicy | None = None) -> StabilityVerdict:
    policy = policy or MeshPolicy()
    validate_spectrum(spectrum, model)
    if not spectrum.kappa:
        raise ValidationError("the spectrum needs at least one TT eigenvalue kappa")
    kmin = spectrum.kappa_min
    cls = classify(model, kmin)
    minima, scales = block_minima(model, spectrum_blocks(spectrum), policy)
    cert = find_destabilizer(model, kmin, policy) if cls is Classification.UNSTABLE else None
    return StabilityVerdict(model, cls, model.threshold, kmin, minima, scales, cert, policy)


def strict_constant(model: WarpModel, spectrum: BaseSpectrum, policy: MeshPolicy | None = None) -> float:
    """Smallest computed block minimum of a strictly stable configuration."""
    if model.kind is Kind.CONE:
        raise InvalidState("Ricci-flat cones are stable at best, never strictly stable")
    verdict = decide(model, spectrum, policy)
    if verdict.classification is not Classification.STRICTLY_STABLE:
        raise InvalidState(f"verdict is {verdict.classification.value}, not StrictlyStable")
    return min(verdict.block_minima.values())
