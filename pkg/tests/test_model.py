from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from warpstab.errors import MuViolation, NegativeEigenvalue, ObataViolation, ValidationError
from warpstab.model import BaseSpectrum, Kind, make_warp_model, validate_spectrum


@pytest.mark.parametrize(
    "kind, n, scal_base, scal_total",
    [("cone", 4, 12, 0), ("exp", 4, 0, -20), ("sinh", 9, 72, -90)],
)
def test_scalar_curvatures(kind, n, scal_base, scal_total):
    m = make_warp_model(kind, n)
    assert m.scal_base == scal_base
    assert m.scal_total == scal_total


def test_thresholds_are_exact():
    assert make_warp_model("exp", 7).threshold == 0
    assert make_warp_model("cone", 4).threshold == Fraction(-9, 4)
    assert make_warp_model("sinh", 9).threshold == -16


def test_kind_parsing():
    assert Kind.parse("Cone") is Kind.CONE
    assert Kind.parse(Kind.SINH) is Kind.SINH
    with pytest.raises(ValidationError):
        Kind.parse("flat")


def test_dimension_checks():
    with pytest.raises(ValidationError):
        make_warp_model("cone", 1)
    with pytest.raises(ValidationError):
        make_warp_model("cone", 4.5)
    with pytest.raises(ValidationError):
        make_warp_model("cone", True)
    with pytest.warns(UserWarning):
        make_warp_model("cone", 3)


def test_deterministic():
    assert make_warp_model("sinh", 6) == make_warp_model("sinh", 6)


@given(st.sampled_from(list(Kind)), st.floats(1e-3, 20.0))
def test_warp_positive_and_exp_sinh_satisfy_f_second_equals_f(kind, r):
    m = make_warp_model(kind, 5)
    r = np.array([r])
    assert m.f(r)[0] > 0
    if kind is not Kind.CONE:
        np.testing.assert_allclose(m.f_second(r), m.f(r), rtol=0, atol=0)


@given(st.sampled_from(list(Kind)), st.floats(1e-3, 15.0))
def test_substitution_round_trip(kind, r):
    m = make_warp_model(kind, 4)
    s = m.to_s(np.array([r]))
    np.testing.assert_allclose(m.to_r(s), [r], rtol=1e-12)
    f, fp, fpp = m.warp_s(s)
    np.testing.assert_allclose(f, m.f(np.array([r])), rtol=1e-12)
    np.testing.assert_allclose(fp, m.f_prime(np.array([r])), rtol=1e-12)
    np.testing.assert_allclose(fpp, m.f_second(np.array([r])), rtol=1e-12)
    # dr/ds against a centred difference of to_r
    h = 1e-6 * s[0]
    fd = (m.to_r(s + h) - m.to_r(s - h)) / (2 * h)
    np.testing.assert_allclose(m.dr_ds(s), fd, rtol=1e-6)


class TestValidateSpectrum:
    cone4 = make_warp_model("cone", 4)

    def test_obata_boundary_accepted(self):
        spec = BaseSpectrum(kappa=(0,), lam=(0, 4))
        assert validate_spectrum(spec, self.cone4) is spec

    def test_obata_gap_rejected(self):
        with pytest.raises(ObataViolation):
            validate_spectrum(BaseSpectrum(lam=(0, 2)), self.cone4)

    def test_mu_bound(self):
        validate_spectrum(BaseSpectrum(mu=(3,)), self.cone4)
        with pytest.raises(MuViolation):
            validate_spectrum(BaseSpectrum(mu=(2.5,)), self.cone4)

    def test_negative_and_unsorted(self):
        with pytest.raises(NegativeEigenvalue):
            validate_spectrum(BaseSpectrum(lam=(-1,)), self.cone4)
        with pytest.raises(ValidationError):
            validate_spectrum(BaseSpectrum(kappa=(1, 0)), self.cone4)
        with pytest.raises(ValidationError):
            validate_spectrum(BaseSpectrum(kappa=(float("nan"),)), self.cone4)

    def test_flat_base_has_no_obata_gap(self):
        exp4 = make_warp_model("exp", 4)
        validate_spectrum(BaseSpectrum(kappa=(0,), lam=(0, 1), mu=(0.5,)), exp4)

    def test_kappa_min_is_exact(self):
        spec = BaseSpectrum(kappa=(Fraction(-9, 4), -2))
        assert spec.kappa_min == Fraction(-9, 4)
