import math

import numpy as np
import pytest

from wedgelab.errors import DomainViolation, WedgeMismatch
from wedgelab.fock import Atom, symmetrize
from wedgelab.verify import (
    PAIRS,
    CheckReport,
    CommutatorAnalysis,
    cancellation_pair,
    contour_shift_check,
    mixed_vectors,
    nontemperateness_probe,
    pair_c_routes,
    pair_sum_completeness,
    proposition_suite,
    tau_identity,
    weak_commutator,
)
from wedgelab.wedgefn import make_bump


@pytest.fixture(scope="module")
def one_particle(S05, f_left, g_right, quad):
    Phi, Psi = mixed_vectors(S05, 1)
    return Phi, Psi, CommutatorAnalysis(S05, f_left, g_right, Phi, Psi, quad)


def test_report_pass_rule():
    assert CheckReport.build("x", 1e-7, 1.0, 1e-6).passed
    assert not CheckReport.build("x", 2e-6, 1.0, 1e-6).passed
    assert not CheckReport.build("x", float("nan"), 1.0, 1e-6).passed
    d = CheckReport.build("x", 0.0, 0.0, 1e-6).to_dict()
    assert d["pass"] and d["residual"] == 0.0


def test_weak_commutator_one_particle(S05, f_left, g_right, one_particle):
    Phi, Psi, an = one_particle
    r = weak_commutator(S05, f_left, g_right, Phi, Psi, analysis=an)
    assert r.passed and r.scale > 0


@pytest.mark.parametrize("pair", PAIRS)
def test_pairs_cancel_one_particle(S05, f_left, g_right, one_particle, pair):
    Phi, Psi, an = one_particle
    assert cancellation_pair(S05, f_left, g_right, Phi, Psi, pair, analysis=an).passed


def test_pair_sum_completeness(S05, f_left, g_right, one_particle):
    Phi, Psi, an = one_particle
    assert pair_sum_completeness(S05, f_left, g_right, Phi, Psi, analysis=an).passed


def test_pair_c_routes_agree(S05, f_left, g_right, quad):
    Phi, Psi = symmetrize(S05, [Atom(0.1, 0.9)]), symmetrize(S05, [Atom(-0.2, 1.0, 0.1j)])
    r = pair_c_routes(S05, f_left, g_right, Phi, Psi, quad)
    assert r.passed
    assert r.metadata["vertical_segments"] < 1e-10


def test_tau_identity_three_particles(S05, f_left, g_right, quad):
    rng = np.random.default_rng(0)
    Phi = symmetrize(S05, [Atom(float(rng.uniform(-0.5, 0.5)), 0.9) for _ in range(3)])
    Psi = symmetrize(S05, [Atom(float(rng.uniform(-0.5, 0.5)), 1.0, 0.1j) for _ in range(3)])
    assert tau_identity(S05, f_left, g_right, Phi, Psi, 0, 1, quad).passed


def test_zero_amplitude_gives_exact_zero(S05, quad):
    f0 = make_bump((0.0, -1.0), 0.6, 0.0, "left")
    g0 = make_bump((0.1, 1.1), 0.55, 0.0, "right")
    Phi, Psi = mixed_vectors(S05, 1)
    r = weak_commutator(S05, f0, g0, Phi, Psi, quad)
    assert r.residual == 0.0 and r.passed


@pytest.mark.parametrize("eps", [0.0, 0.1, math.pi / 3])
@pytest.mark.parametrize("beta", [0.0, 0.2 - 0.1j])
def test_contour_shift(S05, quad, eps, beta):
    Phi = symmetrize(S05, [Atom(0.2, 0.9, beta), Atom(-0.3, 1.0)])
    Psi = symmetrize(S05, [Atom(-0.1, 1.1), Atom(0.4, 0.8, -beta)])
    r = contour_shift_check(Phi, Psi, eps, quad)
    assert r.passed
    if eps == 0.0:
        assert r.residual == 0.0


def test_negative_control_eta_doubled(S05, f_left, g_right, quad):
    Phi, Psi = mixed_vectors(S05, 1)
    r = weak_commutator(S05, f_left, g_right, Phi, Psi, quad, eta_scale=2.0)
    assert not r.passed and r.relative >= 1e-2


def test_negative_control_without_chi(S05, f_left, g_right, quad):
    Phi, Psi = mixed_vectors(S05, 1)
    r = weak_commutator(S05, f_left, g_right, Phi, Psi, quad, include_chi=False)
    assert not r.passed and r.relative >= 1e-2


def test_proposition_suite_one_particle(S05, f_left, g_right, quad):
    reports = proposition_suite(S05, f_left, g_right, quad, numbers=(1,))
    assert len(reports) == 6
    assert all(r.passed for r in reports), [(r.name, r.relative) for r in reports if not r.passed]


def test_nontemperateness_probe(S05, f_left):
    r = nontemperateness_probe(S05, f_left, symmetrize(S05, [Atom(0.0, 1.0)]))
    inc = r.metadata["increments"]
    assert r.passed and inc[0] > 0 and inc[1] > inc[0]


def test_wedge_and_domain_errors(S05, f_left, g_right, quad):
    Phi, Psi = mixed_vectors(S05, 1)
    with pytest.raises(WedgeMismatch):
        weak_commutator(S05, g_right, f_left, Phi, Psi, quad)
    bad = symmetrize(S05, [Atom(0.0, 1.0), Atom(0.3, 1.0)], cn_power=0)
    with pytest.raises(DomainViolation):
        weak_commutator(S05, f_left, g_right, bad, bad, quad)


def test_unknown_pair(S05, f_left, g_right, one_particle):
    Phi, Psi, an = one_particle
    with pytest.raises(ValueError):
        cancellation_pair(S05, f_left, g_right, Phi, Psi, "D", analysis=an)
