import math

import numpy as np
import pytest
from scipy import integrate

from warpstab.errors import ResolutionTooCoarse, ValidationError
from warpstab.model import make_warp_model
from warpstab.oracle.torus import (
    Bump,
    FDGrid,
    Species,
    TorusTensorSpec,
    base_identities,
    closed_quadratic,
    combine,
    convergence_order,
    curvature_action,
    fd_bilinear,
    fd_inner,
    fd_quadratic_form,
    shape_spec,
    tt_amplitude,
    verify_section2,
)

EXP4 = make_warp_model("exp", 4)


@pytest.fixture(scope="module")
def report():
    return verify_section2(n=4)


def test_report_within_tolerance(report):
    worst = report.worst()
    assert worst["diagonal"] <= 1e-3
    assert worst["norms"] <= 1e-3
    assert worst["couplings"] <= 1e-3
    assert worst["zero_pairs"] <= 1e-3
    assert worst["orthogonality"] <= 1e-10
    assert worst["identities"] <= 1e-10
    assert worst["polarization"] <= 1e-10


def test_report_covers_every_shape_and_mode(report):
    assert report.modes == [(0, 0, 0, 0), (1, 0, 0, 0), (1, 1, 0, 0)]
    for shape in ("V1", "V2", "V3.1", "V3.2", "V4.1", "V4.2", "V4.3"):
        assert f"{shape}(1,0,0,0)" in report.diagonal
    # shapes that are zero tensors on the constant mode
    assert set(report.vanishing) == {"V3.1(0,0,0,0)", "V4.1(0,0,0,0)", "V4.2(0,0,0,0)"}
    assert all(v == 0 for v in report.vanishing.values())
    assert "V4.13(1,0,0,0)" in report.zero_pairs


def test_observed_order_is_two(report):
    assert report.order
    for v in report.order.values():
        assert 1.5 <= v <= 2.5
        # error ratio per halving
        assert 3.0 <= 2.0**v <= 5.0


def test_tt_constant_mode_against_direct_integral():
    n, p = 4, Bump(0.0, 1.0, 1.0)
    spec = shape_spec("V1", n, (0, 0, 0, 0), p)
    A = np.asarray(spec.amplitude)
    fd = fd_quadratic_form(EXP4, spec, FDGrid())
    val, _ = integrate.quad(lambda r: p.derivative(np.array([r]))[0] ** 2 * math.exp(n * r), -1, 1, epsrel=1e-13)
    exact = val * float(np.sum(A * A)) * (2 * math.pi) ** n
    assert fd == pytest.approx(exact, rel=1e-4)


def test_conformal_shape_against_written_formula():
    n, k, p = 4, (1, 1, 0, 0), Bump(0.1, 0.95, 0.7)
    spec = shape_spec("V2", n, k, p)
    lam, scal = 2.0, -n * (n + 1)

    def g(r):
        r1 = np.array([r])
        u, du = p(r1)[0], p.derivative(r1)[0]
        return (n + 1) * du**2 * math.exp(n * r) + (n + 1) * lam * u**2 * math.exp((n - 2) * r) \
            - 2 * scal * u**2 * math.exp(n * r)

    val, _ = integrate.quad(g, -0.85, 1.05, epsrel=1e-13)
    exact = val * (2 * math.pi) ** n / 2
    assert fd_quadratic_form(EXP4, spec, FDGrid()) == pytest.approx(exact, rel=1e-4)


def test_zero_tensor_gives_zero():
    spec = TorusTensorSpec(4, (1, 0, 0, 0), Species.SCALAR)
    assert fd_bilinear(EXP4, spec, spec, FDGrid()) == 0.0
    assert fd_inner(EXP4, spec, spec, FDGrid()) == 0.0


def test_curvature_of_the_metric():
    # Einstein with Ric = -n g~ implies R(g~) = -n g~ for the action used here
    n = 5
    model = make_warp_model("exp", n)
    r = np.linspace(-1, 1, 7)
    f = model.f(r)
    G = np.zeros((r.size, n + 1, n + 1))
    G[:, 0, 0] = 1.0
    G[:, 1:, 1:] = (f**2)[:, None, None] * np.eye(n)[None]
    np.testing.assert_allclose(curvature_action(model, r, G), -n * G, rtol=1e-14, atol=1e-14)


def test_distinct_modes_are_decoupled():
    a = shape_spec("V4.3", 4, (1, 0, 0, 0), Bump())
    b = shape_spec("V4.3", 4, (0, 1, 0, 0), Bump())
    scale = fd_bilinear(EXP4, a, a, FDGrid())
    assert abs(fd_bilinear(EXP4, a, b, FDGrid())) <= 1e-12 * scale


def test_polarization():
    k = (1, 0, 0, 0)
    a = shape_spec("V4.2", 4, k, Bump(0.2, 0.9, 0.8))
    b = shape_spec("V4.3", 4, k, Bump(-0.1, 1.1, 1.3))
    grid = FDGrid()
    direct = fd_bilinear(EXP4, a, b, grid)
    plus = combine(a, b, 1.0)
    minus = combine(a, b, -1.0)
    pol = 0.25 * (fd_bilinear(EXP4, plus, plus, grid) - fd_bilinear(EXP4, minus, minus, grid))
    assert pol == pytest.approx(direct, rel=1e-10)


def test_closed_form_uses_block_weights_with_base_norm():
    p = Bump()
    # V4.3 at k = 0: base norm is the torus volume
    assert closed_quadratic(EXP4, "V4.3", 4, (0, 0, 0, 0), p) > 0


@pytest.mark.parametrize("k", [(0, 0, 0, 0), (1, 0, 0, 0), (1, 1, 0, 0), (2, 1, 1, 0)])
def test_base_identities(k):
    for name, dev in base_identities(4, k).items():
        assert dev <= 1e-10, name


def test_grid_guards():
    spec = shape_spec("V1", 4, (1, 0, 0, 0), Bump())
    with pytest.raises(ResolutionTooCoarse):
        fd_bilinear(EXP4, spec, spec, FDGrid(h=0.1))
    with pytest.raises(ValidationError):
        fd_bilinear(make_warp_model("cone", 4), spec, spec, FDGrid())


def test_spec_validation():
    with pytest.raises(ValidationError):
        TorusTensorSpec(4, (1, 0, 0, 0), Species.TT, np.eye(4))          # not trace-free
    with pytest.raises(ValidationError):
        TorusTensorSpec(4, (1, 0, 0, 0), Species.ONE_FORM, (1.0, 0, 0, 0))   # not orthogonal to k
    A = tt_amplitude(4, (1, 1, 0, 0))
    assert abs(np.trace(A)) < 1e-14 and np.linalg.norm(A @ np.array([1, 1, 0, 0])) < 1e-14


def test_order_helper_on_single_mode():
    orders = convergence_order(EXP4, 4, (1, 0, 0, 0))
    assert all(1.5 <= v <= 2.5 for v in orders.values())
