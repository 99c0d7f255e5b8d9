import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wedgelab.errors import InvalidParameter, MismatchedParticleNumber, TooManyParticles, UncancelledPole
from wedgelab.fock import (
    Atom,
    FockVector,
    OneParticle,
    TensorProduct,
    cn_value,
    gaussian_overlap,
    inner_product,
    norm,
    symmetrize,
    tail_bound,
    vacuum,
)
from wedgelab.quadrature import QuadratureSpec

from oracles import hand_p2, hand_p3

A = Atom(0.3, 0.8, 0.1)
B = Atom(-0.4, 1.0, -0.2j)
C = Atom(0.5, 0.9, 0.05 + 0.1j)


def test_symmetrize_matches_hand_sums(S05):
    rng = np.random.default_rng(1)
    pts2 = rng.normal(size=(10, 2))
    pts3 = rng.normal(size=(10, 3))
    P2 = symmetrize(S05, [A, B], cn_power=0)
    P3 = symmetrize(S05, [A, B, C], cn_power=0)
    for p in pts2:
        assert abs(P2.at(*p) - hand_p2(S05, A, B, *p)) < 1e-12
    for p in pts3:
        assert abs(P3.at(*p) - hand_p3(S05, A, B, C, *p)) < 1e-12


def test_domain_multiplier_factorizes(S05):
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(10, 3))
    P = symmetrize(S05, [A, B, C], cn_power=1)
    P0 = symmetrize(S05, [A, B, C], cn_power=0)
    assert np.max(np.abs(P(pts) - cn_value(pts, -2.0) * P0(pts))) < 1e-13


@pytest.mark.parametrize("n", [2, 3])
def test_s_symmetry(S05, n):
    rng = np.random.default_rng(3)
    P = symmetrize(S05, [A, B, C][:n])
    for _ in range(5):
        t = rng.normal(size=n)
        for k in range(n - 1):
            s = t.copy()
            s[k], s[k + 1] = t[k + 1], t[k]
            assert abs(P.at(*t) - S05.raw(t[k + 1] - t[k]) * P.at(*s)) < 1e-13


def test_continuation_through_cancelled_pole(S05):
    P = symmetrize(S05, [A, B], cn_power=1)
    v = P.at(0.2, 0.2 + 1j * math.pi / 3)
    assert np.isfinite(v)
    P0 = symmetrize(S05, [A, B], cn_power=0)
    with pytest.raises(UncancelledPole):
        P0.at(0.2, 0.2 + 1j * math.pi / 3)


def test_network_matches_pointwise(S05):
    rng = np.random.default_rng(4)
    P = symmetrize(S05, [A, B, C])
    pts = rng.normal(size=(6, 3)) + 0.1j * rng.normal(size=(6, 3))
    assert np.max(np.abs(P(pts) - P.evaluate_network(pts))) < 1e-15


def test_one_particle_inner_product_oracle(S05, quad):
    got = inner_product(symmetrize(S05, [A]), symmetrize(S05, [B]), quad)
    assert abs(got - gaussian_overlap(A, B)) < 1e-13


def test_two_particle_inner_product_oracle(S05, quad):
    # with S-symmetry, <P2(a x b), P2(c x d)> has a closed form through
    # the unsymmetrized product: <P2 u, P2 v> = <u, P2 v>
    u = TensorProduct(OneParticle(S05, A), OneParticle(S05, B))
    P = symmetrize(S05, [Atom(-0.2, 0.9), Atom(0.6, 1.1, 0.1j)], cn_power=0)
    Pu = symmetrize(S05, [A, B], cn_power=0)
    assert abs(inner_product(Pu, P, quad) - inner_product(u, P, quad)) < 1e-12


def test_network_and_pointwise_inner_products_agree(S05, quad):
    P = symmetrize(S05, [A, B])
    Q = symmetrize(S05, [Atom(-0.2, 0.9), Atom(0.6, 1.1, 0.1j)])
    a = inner_product(P, Q, quad)
    b = inner_product(P, Q, quad, method="pointwise")
    assert abs(a - b) < 1e-13 * abs(a) + 1e-16


@settings(max_examples=10, deadline=None)
@given(mu=st.floats(-1, 1), sigma=st.floats(0.5, 1.5), br=st.floats(-0.3, 0.3), bi=st.floats(-0.5, 0.5))
def test_norm_of_atoms(mu, sigma, br, bi):
    from wedgelab.smatrix import build_bullough_dodd

    S = build_bullough_dodd(0.5)
    a = Atom(mu, sigma, complex(br, bi))
    assert abs(norm(symmetrize(S, [a])) ** 2 - gaussian_overlap(a, a).real) < 1e-12


def test_vacuum_and_mismatch(S05, quad):
    assert inner_product(vacuum(S05, 2.0), vacuum(S05, 3.0j), quad) == pytest.approx(6.0j)
    with pytest.raises(MismatchedParticleNumber):
        inner_product(vacuum(S05), symmetrize(S05, [A]), quad)


def test_parameter_errors(S05):
    with pytest.raises(TooManyParticles):
        symmetrize(S05, [A] * 5)
    with pytest.raises(InvalidParameter):
        symmetrize(S05, [A, B], cn_alpha=1.0)
    with pytest.raises(InvalidParameter):
        Atom(0.0, -1.0)


def test_tail_bound_is_small(S05):
    q = QuadratureSpec()
    assert tail_bound(symmetrize(S05, [A, B]), q) < 1e-12


def test_fock_vector_collects_components(S05):
    v = FockVector.of(vacuum(S05), symmetrize(S05, [A]), symmetrize(S05, [B]))
    assert v.numbers() == [0, 1]
    assert abs(v[1].at(0.3) - (A(0.3) + B(0.3))) < 1e-15
