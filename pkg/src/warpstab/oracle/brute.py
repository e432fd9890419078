"""Randomized Rayleigh-quotient search, independent of the eigensolver.

The pencil is rebuilt here with its own element quadrature (Gauss-Legendre
of a different order, dense storage); candidates are random piecewise-linear
profiles on random sub-intervals of the mesh, and the best of them are
polished by exact coordinate-wise line minimization of the quotient. The
result is a Rayleigh quotient of an explicit trial vector, so it can never
lie below the true discrete minimum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..blocks import BlockForm
from ..errors import ValidationError
from ..radial import Mesh, RadialForm

QUAD_ORDER = 12
CHUNKS = 8


def _element_data(mesh: Mesh, order: int):
    xi, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (xi + 1.0)
    a, b = mesh.nodes[:-1], mesh.nodes[1:]
    h = b - a
    x = a[:, None] + h[:, None] * t[None, :]
    return x, 0.5 * w[None, :] * h[:, None], t, h


def _dense(mesh: Mesh, weight, derivative: bool, order: int) -> np.ndarray:
    """Dense Galerkin matrix on all nodes, boundary rows removed afterwards."""
    x, wq, t, h = _element_data(mesh, order)
    vals = np.asarray(weight(x), dtype=float) * wq
    N = mesh.N
    A = np.zeros((N + 1, N + 1))
    if derivative:
        s = vals.sum(axis=1) / h**2
        loc = np.array([[1.0, -1.0], [-1.0, 1.0]])
        for e in range(N):
            A[e:e + 2, e:e + 2] += s[e] * loc
    else:
        ll = vals @ (1.0 - t) ** 2
        rr = vals @ t**2
        lr = vals @ (t * (1.0 - t))
        idx = np.arange(N)
        A[idx, idx] += ll
        A[idx + 1, idx + 1] += rr
        A[idx, idx + 1] += lr
        A[idx + 1, idx] += lr
    return A[1:-1, 1:-1]


def dense_pencil(form: RadialForm | BlockForm, mesh: Mesh, order: int = QUAD_ORDER):
    """(K, M, sizes) for a radial or block form, dense, component-major."""
    if isinstance(form, RadialForm):
        K = _dense(mesh, form.S, True, order) + _dense(mesh, form.P, False, order)
        M = _dense(mesh, form.m, False, order)
        return K, M, [K.shape[0]]
    m = mesh.N - 1
    k = form.size
    K = np.zeros((k * m, k * m))
    M = np.zeros_like(K)
    for i, comp in enumerate(form.diag):
        sl = slice(i * m, (i + 1) * m)
        K[sl, sl] = _dense(mesh, comp.S, True, order) + _dense(mesh, comp.P, False, order)
        M[sl, sl] = _dense(mesh, comp.m, False, order)
    for (i, j), w in form.offdiag.items():
        C = _dense(mesh, w, False, order)
        K[i * m:(i + 1) * m, j * m:(j + 1) * m] += C
        K[j * m:(j + 1) * m, i * m:(i + 1) * m] += C.T
    return K, M, [m] * k


def _random_profiles(rng: np.random.Generator, count: int, sizes) -> np.ndarray:
    """Random piecewise-linear node vectors, each component on a random sub-interval."""
    total = sum(sizes)
    U = np.zeros((count, total))
    off = 0
    for m in sizes:
        lo = rng.integers(0, m, size=count)
        hi = rng.integers(0, m, size=count)
        lo, hi = np.minimum(lo, hi), np.maximum(lo, hi) + 1
        kind = rng.integers(0, 4, size=count)[:, None]
        raw = rng.standard_normal((count, m))
        smooth = np.cumsum(np.abs(raw), axis=1)
        smooth = smooth * (smooth[:, -1:] - smooth)          # positive hump
        walk = np.exp(np.cumsum(raw * rng.uniform(0.0, 1.0, size=(count, 1)), axis=1))
        hump = np.select([kind == 0, kind == 1, kind == 2], [raw, np.abs(raw), smooth], walk)
        idx = np.arange(m)[None, :]
        mask = (idx >= lo[:, None]) & (idx < hi[:, None])
        U[:, off:off + m] = hump * mask * rng.standard_normal((count, 1))
        off += m
    return U


def _quotients(U, K, M):
    num = np.einsum("bi,ij,bj->b", U, K, U)
    den = np.einsum("bi,ij,bj->b", U, M, U)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(den > 0, num / den, np.inf)
    return q


def _polish(U, K, M, sweeps: int, tol: float = 1e-13):
    """Coordinate descent: replace u by the best vector in span{u, e_j}, batched."""
    U = U.copy()
    n = U.shape[1]
    Kd, Md = np.diag(K), np.diag(M)
    KU, MU = U @ K, U @ M
    Q = np.einsum("bi,bi->b", U, KU)
    D = np.einsum("bi,bi->b", U, MU)
    prev = Q / D
    for _ in range(sweeps):
        for j in range(n):
            y, z = KU[:, j], MU[:, j]
            a, b = Kd[j], Md[j]
            # smallest root of det([[Q, y], [y, a]] - th [[D, z], [z, b]]) = 0
            A2 = D * b - z * z
            B2 = -(Q * b + a * D - 2.0 * y * z)
            C2 = Q * a - y * y
            disc = np.sqrt(np.maximum(B2 * B2 - 4.0 * A2 * C2, 0.0))
            ok = A2 > 1e-14 * D * b
            with np.errstate(divide="ignore", invalid="ignore"):
                th = np.where(ok, (-B2 - disc) / (2.0 * A2), Q / D)
                # null vector (alpha, beta) of the 2x2 pencil at th, from the better row
                r1, r2, r3 = Q - th * D, y - th * z, a - th * b
                use_first = np.hypot(r1, r2) >= np.hypot(r2, r3)
                alpha = np.where(use_first, -r2, r3)
                beta = np.where(use_first, r1, -r2)
            improve = ok & np.isfinite(th) & (th < Q / D) & ((alpha != 0) | (beta != 0))
            if not np.any(improve):
                continue
            alpha = np.where(improve, alpha, 1.0)
            beta = np.where(improve, beta, 0.0)
            U *= alpha[:, None]
            U[:, j] += beta
            KU = alpha[:, None] * KU + beta[:, None] * K[j][None, :]
            MU = alpha[:, None] * MU + beta[:, None] * M[j][None, :]
            Q = alpha * alpha * Q + 2.0 * alpha * beta * y + beta * beta * a
            D = alpha * alpha * D + 2.0 * alpha * beta * z + beta * beta * b
            scale = np.sqrt(D)
            U /= scale[:, None]
            KU /= scale[:, None]
            MU /= scale[:, None]
            Q, D = Q / D, np.ones_like(D)
        cur = Q / D
        if np.all(np.abs(prev - cur) <= tol * np.maximum(np.abs(cur), 1.0)):
            break
        prev = cur
    return U, _quotients(U, K, M)


def _search(K, M, sizes, count: int, seed, keep: int, sweeps: int):
    rng = np.random.default_rng(seed)
    # node values are drawn for the mass-normalized unknowns
    U = _random_profiles(rng, count, sizes) / np.sqrt(np.diag(M))[None, :]
    q = _quotients(U, K, M)
    best = np.argsort(q)[:keep]
    _, polished = _polish(U[best], K, M, sweeps)
    return float(min(q.min(), polished.min()))


def brute_force_min(
    form,
    budget: int = 10_000,
    mesh: Mesh | None = None,
    seed: int = 0,
    workers: int = 1,
    keep: int = 4,
    sweeps: int = 200,
) -> float:
    """Smallest Rayleigh quotient found among ``budget`` random profiles.

    ``form`` is a RadialForm or BlockForm (``mesh`` required) or an explicit
    ``(K, M)`` pair. The budget is split into a fixed number of chunks with
    seeds spawned from ``seed``, so the result does not depend on ``workers``.
    """
    if budget < 1000:
        raise ValidationError("budget must be at least 1000")
    if isinstance(form, tuple):
        K = np.atleast_2d(np.asarray(form[0], dtype=float))
        M = np.atleast_2d(np.asarray(form[1], dtype=float))
        sizes = [K.shape[0]]
        if K.shape == (1, 1):
            return float(K[0, 0] / M[0, 0])
    else:
        if mesh is None:
            raise ValidationError("a mesh is required for radial and block forms")
        K, M, sizes = dense_pencil(form, mesh)
    seeds = np.random.SeedSequence(seed).spawn(CHUNKS)
    per = [budget // CHUNKS + (1 if i < budget % CHUNKS else 0) for i in range(CHUNKS)]
    jobs = [(K, M, sizes, c, s, keep, sweeps) for c, s in zip(per, seeds)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _search(*a), jobs))
    else:
        results = [_search(*a) for a in jobs]
    return min(results)


def random_form(rng: np.random.Generator) -> tuple[RadialForm, Mesh]:
    """A random power-weight form with a random small log mesh, for agreement tests."""
    from ..radial import make_mesh

    a = float(rng.uniform(0.0, 8.0))
    b = float(rng.uniform(-2.0, 6.0))
    d = float(rng.uniform(-2.0, 6.0))
    c = float(rng.uniform(-5.0, 5.0))
    lo = float(10 ** rng.uniform(-3, 0))
    hi = lo * float(10 ** rng.uniform(1, 4))
    N = int(rng.integers(12, 40))
    form = RadialForm(lambda s: s**a, lambda s: c * s**b, lambda s: s**d, name=f"(s^{a:.2f}, {c:.2f} s^{b:.2f}; s^{d:.2f})")
    return form, make_mesh(lo, hi, N)
