import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wedgelab.errors import (
    EvenFactorCount,
    InvalidParameter,
    NotAPole,
    PoleProximity,
)
from wedgelab.smatrix import (
    POLE_S,
    POLE_T,
    SMatrix,
    build_bullough_dodd,
    build_general,
    check_axioms,
    complete_orbit,
    elementary,
    eval as s_eval,
    product,
    residue,
)

SQRT3 = math.sqrt(3.0)


def f_rational(A, z):
    """Independent form f_A(z) = (sinh z + i sin A pi) / (sinh z - i sin A pi)."""
    c = 1j * math.sin(A * math.pi)
    return (cmath.sinh(z) + c) / (cmath.sinh(z) - c)


@pytest.mark.parametrize("A", [2 / 3, -0.5, -1 / 6, 0.3, -0.9])
def test_elementary_matches_rational_form(A):
    S = elementary(A)
    for z in [0.3, -1.2 + 0.4j, 2.0 + 2.5j, 0.1 - 1.0j]:
        assert abs(S.raw(z) - f_rational(A, z)) < 1e-13


def test_residue_golden_values():
    F = elementary(2 / 3)
    assert abs(residue(F, POLE_T) - 2 * SQRT3 * 1j) < 1e-8
    assert abs(residue(F, POLE_S) + 2 * SQRT3 * 1j) < 1e-8


def test_contour_residue_matches_analytic(S05):
    for p in (POLE_T, POLE_S):
        assert abs(residue(S05, p) - S05.analytic_residue(p)) < 1e-10


def test_bullough_dodd_residue_and_eta(S05):
    R = S05.residue_R
    assert abs(R.real) < 1e-10 and R.imag > 0
    assert abs(S05.eta - 1j * math.sqrt(2 * math.pi * abs(R))) < 1e-12
    # R = res f_{2/3} at 2 pi i/3 times the other factors there
    rest = f_rational(-0.5, POLE_S) * f_rational(-1 / 6, POLE_S)
    assert abs(R - (-2 * SQRT3 * 1j) * rest) < 1e-9


def test_crossing_relates_the_two_residues(S05, S3):
    for S in (S05, S3):
        assert abs(residue(S, POLE_T) + residue(S, POLE_S)) < 1e-8 * abs(S.residue_R)


@pytest.mark.parametrize("fixture", ["S05", "S15", "S3"])
def test_axioms_pass(fixture, request):
    S = request.getfixturevalue(fixture)
    rep = check_axioms(S)
    assert rep.all_pass, rep.residuals
    assert len(rep.entries()) == 6
    assert max(rep.residuals.values()) <= 1e-10


def test_f_two_thirds_fails_positivity():
    rep = check_axioms(elementary(2 / 3))
    assert not rep.passed["S5"]


def test_B_symmetry(S05, S15):
    t = np.linspace(-4, 4, 41) + 0.37j
    assert np.max(np.abs(S05.raw(t) - S15.raw(t))) < 1e-12


def test_zeros_mirror_poles(S05):
    for z in (-POLE_S, -POLE_T):
        assert abs(S05.raw(z + 1e-7)) < 1e-5


def test_unitarity_and_value_at_zero(S05, S3):
    t = np.linspace(-6, 6, 101)
    for S in (S05, S3):
        assert np.max(np.abs(np.abs(S.raw(t)) - 1)) < 1e-12
        assert abs(S.raw(0.0) + 1) < 1e-12


def test_errors():
    with pytest.raises(InvalidParameter, match="excluded"):
        build_bullough_dodd(1.0)
    with pytest.raises(InvalidParameter):
        build_bullough_dodd(2.5)
    with pytest.raises(EvenFactorCount):
        build_general([0.5, 0.3])
    with pytest.raises(InvalidParameter):
        build_general([0.5], a=-1.0)
    S = build_bullough_dodd(0.5)
    with pytest.raises(PoleProximity):
        s_eval(S, POLE_S + 1e-8)
    with pytest.raises(NotAPole):
        residue(S, 0.3j)


def test_eval_away_from_poles(S05):
    assert abs(s_eval(S05, 0.4) - S05.raw(0.4)) == 0


def test_product_multiplies(S05):
    P = product(elementary(2 / 3), elementary(-0.5), elementary(-1 / 6))
    z = 0.3 + 0.2j
    assert abs(P.raw(z) - S05.raw(z)) < 1e-14


def test_serialization_roundtrip(S3):
    T = SMatrix.from_json(S3.to_json())
    z = np.array([0.2, -1.1 + 0.3j])
    assert np.max(np.abs(T.raw(z) - S3.raw(z))) < 1e-15
    assert T.residue_R == S3.residue_R


def test_complete_orbit_is_closed():
    orb = complete_orbit(0.3 + 0.5j)
    assert len(orb) == 8
    for z in orb:
        assert any(abs(-z.conjugate() - w) < 1e-12 for w in orb)


def test_blaschke_zeros_keep_axioms():
    S = build_general([0.5], a=1.0, extra_zero_orbits=[0.3 + 0.5j])
    assert check_axioms(S).all_pass
    assert abs(S.raw(0.3 + 0.5j)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(
    Bs=st.lists(st.floats(0.05, 1.95).filter(lambda b: abs(b - 1) > 0.05), min_size=1, max_size=3).filter(
        lambda l: len(l) % 2 == 1
    ),
    a=st.floats(0.0, 2.0),
)
def test_value_at_zero_emerges(Bs, a):
    S = build_general(Bs, a)
    assert abs(S.raw(0.0) + 1) <= 1e-10
