"""The nine acceptance criteria, each printing one PASS/FAIL line.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v``.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from warpstab.blocks import SUPPORTED_MATRICES, Definiteness, BlockKind, block_form, block_min, special_matrix
from warpstab.catalog import CATALOG, EntryState, classify_entry, decide_entry, get_entry
from warpstab.model import BaseSpectrum, make_warp_model
from warpstab.oracle.brute import brute_force_min, random_form
from warpstab.oracle.torus import verify_section2
from warpstab.radial import form_min, hardy_suite, make_mesh
from warpstab.verdict import Classification, MeshPolicy, decide, find_destabilizer


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"

    return emit


def test_criterion_1_hardy_constants(report):
    start = time.perf_counter()
    worst, bad = 0.0, []
    for n in range(4, 11):
        for key, est in hardy_suite(n).items():
            err = abs(est.limit) if est.expected == 0 else est.relative_error()
            worst = max(worst, err)
            if err > 0.02:
                bad.append(f"n={n} {key} {est.limit:.4g} vs {est.expected}")
    elapsed = time.perf_counter() - start
    report(1, "Hardy constants within 2% for n=4..10", not bad and elapsed < 30,
           f"worst error {worst:.2e}, {elapsed:.1f} s" + (f"; {bad}" if bad else ""))


def test_criterion_2_threshold_sharpness(report):
    model = make_warp_model("cone", 4)
    at = BlockKind.tt(Fraction(-9, 4))
    meshes = [(1e-2, 1e2, 128), (1e-4, 1e4, 512), (1e-4, 1e4, 2048), (1e-6, 1e6, 4096), (1e-8, 1e8, 1024)]
    sigmas = [block_min(block_form(model, at), make_mesh(lo, hi, N)).sigma for lo, hi, N in meshes]
    prof = find_destabilizer(model, Fraction(-235, 100), MeshPolicy((1e-6, 1e6)))
    again = prof.recompute()
    ok = min(sigmas) >= 0 and prof.rayleigh < 0 and again < 0 and abs(again - prof.rayleigh) <= 1e-6 * abs(prof.rayleigh)
    report(2, "cone n=4 threshold is sharp", ok,
           f"min sigma at -2.25 = {min(sigmas):.3e}; certificate at -2.35 = {prof.rayleigh:.4g}, recomputed {again:.4g}")


def test_criterion_3_ricci_flat_cone_not_strict(report):
    details, ok = [], True
    for n in (4, 9):
        bf = block_form(make_warp_model("cone", n), BlockKind.tt(0))
        values = []
        for k in range(5):
            hi = 10.0 * 2**k
            N = int(round(128 * np.log10(hi / 1e-4)))     # fixed elements per decade
            values.append(block_min(bf, make_mesh(1e-4, hi, N)).sigma)
        ok = ok and all(b < a for a, b in zip(values, values[1:])) and values[-1] < 1e-2 and min(values) >= 0
        details.append(f"n={n}: {values[0]:.3g} -> {values[-1]:.3g}")
    report(3, "cone kappa=0 V1 minimum tends to 0 under domain doubling", ok, "; ".join(details))


def test_criterion_4_exp_strict_stability(report):
    v = decide(make_warp_model("exp", 4), BaseSpectrum(kappa=(0,), lam=(0, 4), mu=(3,)))
    low = min(v.block_minima.values())
    ok = v.classification is Classification.STRICTLY_STABLE and low >= 3 * 0.95
    report(4, "exp n=4 every block minimum >= 3 - 5%", ok, f"smallest block minimum {low:.4f} over {len(v.block_minima)} blocks")


def test_criterion_5_sinh_strict_stability(report):
    details, ok = [], True
    for n in (4, 5, 6):
        model = make_warp_model("sinh", n)
        spec = BaseSpectrum(kappa=(model.threshold,), lam=(0, n, 2 * n), mu=(n - 1, 2 * n))
        v = decide(model, spec)
        rel = min(v.block_minima[k] / v.block_scales[k] for k in v.block_minima)
        prof = find_destabilizer(model, model.threshold - Fraction(1, 10))
        again = prof.recompute()
        ok = ok and rel >= -1e-3 and v.classification is Classification.STRICTLY_STABLE and prof.rayleigh < 0 and again < 0
        details.append(f"n={n}: min sigma/scale {rel:.3g}, certificate {prof.rayleigh:.3g}")
    report(5, "sinh cones strictly stable at threshold, unstable 0.1 below", ok, "; ".join(details))


def test_criterion_6_special_matrices(report):
    bad = []
    for kind, n, which in SUPPORTED_MATRICES:
        for lam in [0.0] + list(np.arange(n, n + 50.0 + 1e-9, 0.25)):
            mat, d = special_matrix(kind, n, lam, which)
            if not d.nonnegative or np.linalg.eigvalsh(mat)[0] < -1e-9 * max(1.0, np.abs(mat).max()):
                bad.append((kind.value, n, which, lam))
    cone0, d0 = special_matrix("cone", 4, 0)
    expect0 = np.zeros((3, 3))
    expect0[2, 2] = 245
    cone4, d4 = special_matrix("cone", 4, 4)
    sinh5, d5 = special_matrix("sinh", 5, 5, "B")
    exact = (
        np.array_equal(cone0, expect0) and d0 is Definiteness.POSITIVE_SEMIDEFINITE
        and d4 is Definiteness.POSITIVE_SEMIDEFINITE and np.linalg.matrix_rank(cone4) == 2
        and np.array_equal(sinh5, [[0, 0, 0], [0, 30, 60], [0, 60, 396]]) and d5 is Definiteness.POSITIVE_SEMIDEFINITE
    )
    report(6, "explicit matrices nonnegative on {0} and [n, n+50], degenerate cases exact", not bad and exact,
           f"{len(SUPPORTED_MATRICES)} matrices; failures {bad[:3]}" if bad else f"{len(SUPPORTED_MATRICES)} matrices")


def test_criterion_7_torus_oracle(report):
    rep = verify_section2(n=4)
    w = rep.worst()
    orders = list(rep.order.values())
    ok = (
        rep.h == pytest.approx(1e-3)
        and rep.modes == [(0, 0, 0, 0), (1, 0, 0, 0), (1, 1, 0, 0)]
        and w["diagonal"] <= 1e-3 and w["couplings"] <= 1e-3 and w["zero_pairs"] <= 1e-3
        and bool(orders) and all(abs(p - 2.0) <= 0.5 for p in orders)
    )
    report(7, "finite-difference tensor oracle matches the block formulas", ok,
           f"diagonal {w['diagonal']:.1e}, couplings {w['couplings']:.1e}, zero pairs {w['zero_pairs']:.1e}, "
           f"order {min(orders):.2f}..{max(orders):.2f}")


def test_criterion_8_catalog(report):
    S, SS, U = EntryState.STABLE, EntryState.STRICTLY_STABLE, EntryState.UNSTABLE
    expected = {"kaehler-einstein-n9": (S, SS)}
    expected.update({f"product-n{n}": (U, U) for n in range(4, 9)})
    expected.update({f"symmetric-compact-n{n}": (S, SS) for n in range(4, 9)})
    bad = []
    for name, want in expected.items():
        e = get_entry(name)
        if tuple(classify_entry(e)) != want or tuple(decide_entry(e)) != want:
            bad.append(name)
    for e in CATALOG:
        if e.name.startswith("real-killing-spinor"):
            if classify_entry(e).sinh is not SS or decide_entry(e).sinh is not SS:
                bad.append(e.name)
        elif decide_entry(e) != classify_entry(e):
            bad.append(e.name)
    report(8, "catalog verdicts reproduced by the bounds and by the solver", not bad,
           f"{len(CATALOG)} entries" + (f"; mismatches {bad}" if bad else ""))


def test_criterion_9_brute_force_agreement(report):
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for i in range(20):
        form, mesh = random_form(rng)
        sigma = form_min(form, mesh)[0]
        brute = brute_force_min(form, budget=10_000, mesh=mesh, seed=i)
        worst = min(worst, (brute - sigma) / max(1.0, abs(sigma)))
    report(9, "random search never undercuts the solver", worst >= -1e-6,
           f"worst relative undercut {worst:.2e} over 20 forms")
