from fractions import Fraction

import pytest

from warpstab.catalog import (
    CATALOG,
    BoundTag,
    CatalogEntry,
    EntryState,
    Flag,
    classify_entry,
    decide_entry,
    get_entry,
)
from warpstab.errors import NotFound, ValidationError

S, SS, U, IND, NA = (EntryState.STABLE, EntryState.STRICTLY_STABLE, EntryState.UNSTABLE,
                     EntryState.INDETERMINATE, EntryState.NOT_APPLICABLE)


def test_kaehler_nine():
    e = CatalogEntry("k9", 9, {Flag.KAEHLER_EINSTEIN})
    assert e.kappa_bound.tag is BoundTag.LOWER_BOUND and e.kappa_bound.value == -16
    cone, sinh = classify_entry(e)
    assert (cone, sinh) == (S, SS)


def test_product_five():
    e = CatalogEntry("p5", 5, {"ProductOfEinstein"})
    assert e.kappa_bound.tag is BoundTag.CONTAINS and e.kappa_bound.value == -8
    assert tuple(classify_entry(e)) == (U, U)


def test_real_killing_spinor_six():
    e = CatalogEntry("rks6", 6, {Flag.REAL_KILLING_SPINOR})
    assert e.kappa_bound.value == Fraction(-25, 4)
    assert classify_entry(e).sinh is SS


@pytest.mark.parametrize("n", range(4, 9))
def test_products_in_low_dimension_are_unstable(n):
    assert tuple(classify_entry(CatalogEntry("p", n, {Flag.PRODUCT_OF_EINSTEIN}))) == (U, U)


@pytest.mark.parametrize("n", range(4, 12))
def test_symmetric_compact_type_always_stable(n):
    assert tuple(classify_entry(CatalogEntry("s", n, {Flag.SYMMETRIC_COMPACT_TYPE}))) == (S, SS)


@pytest.mark.parametrize("n", range(4, 9))
def test_kaehler_bound_too_weak_below_nine(n):
    # a lower bound under the threshold proves nothing
    assert tuple(classify_entry(CatalogEntry("k", n, {Flag.KAEHLER_EINSTEIN}))) == (IND, IND)


def test_contained_eigenvalue_above_threshold_is_indeterminate():
    assert tuple(classify_entry(CatalogEntry("p9", 9, {Flag.PRODUCT_OF_EINSTEIN}))) == (IND, IND)


def test_kaehler_with_large_h11_carries_both_bounds():
    e = CatalogEntry("kh", 6, {Flag.KAEHLER_EINSTEIN, Flag.KAEHLER_H11_GREATER_ONE})
    assert [b.tag for b in e.bounds] == [BoundTag.LOWER_BOUND, BoundTag.CONTAINS]
    assert tuple(classify_entry(e)) == (U, U)


def test_imaginary_killing_spinor_total_space():
    v = classify_entry(CatalogEntry("iks", 5, {Flag.IMAGINARY_KILLING_SPINOR_TOTAL}))
    assert v.exp is SS
    assert (v.cone, v.sinh) == (NA, NA)


def test_contradictory_flags():
    with pytest.raises(ValidationError):
        CatalogEntry("x", 4, {Flag.PRODUCT_OF_EINSTEIN, Flag.SYMMETRIC_COMPACT_TYPE})
    with pytest.raises(ValidationError):
        CatalogEntry("x", 4, {Flag.IMAGINARY_KILLING_SPINOR_TOTAL, Flag.KAEHLER_EINSTEIN})
    with pytest.raises(ValidationError):
        CatalogEntry("x", 4, set())
    with pytest.raises(ValidationError):
        CatalogEntry("x", 4, {"Hyperkaehler"})


def test_lookup():
    assert get_entry("product-n5").n == 5
    with pytest.raises(NotFound):
        get_entry("missing")
    assert len({e.name for e in CATALOG}) == len(CATALOG)


@pytest.mark.parametrize("entry", CATALOG, ids=lambda e: e.name)
def test_catalog_agrees_with_numerical_decision(entry):
    assert decide_entry(entry) == classify_entry(entry)
