"""One pass/fail line per acceptance criterion, printed in the terminal summary."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import hand_p2, hand_p3
from wedgelab.fields import momentum_fusion_residual
from wedgelab.fock import Atom, symmetrize
from wedgelab.smatrix import POLE_S, POLE_T, build_general, check_axioms, elementary, residue
from wedgelab.verify import (
    PAIRS,
    CommutatorAnalysis,
    cancellation_pair,
    contour_shift_check,
    default_vectors,
    mixed_vectors,
    nontemperateness_probe,
    pair_sum_completeness,
    proposition_suite,
    random_configuration,
    tau_identity,
    weak_commutator,
)

DRAWS = 5


def record(k, ok, text):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {k}: {text}")
    assert ok, text


def worst(reports):
    return max(r.relative for r in reports)


def test_criterion_1_residue_golden_values():
    t = time.perf_counter()
    F = elementary(2 / 3)
    e1 = abs(residue(F, POLE_T) - 2 * math.sqrt(3) * 1j)
    e2 = abs(residue(F, POLE_S) + 2 * math.sqrt(3) * 1j)
    dt = time.perf_counter() - t
    record(1, max(e1, e2) <= 1e-8 and dt < 1, f"residue errors {e1:.1e}, {e2:.1e} (tol 1e-8), {dt:.2f} s")


def test_criterion_2_axiom_certification(S05, S15, S3):
    t = time.perf_counter()
    res = {}
    for name, S in (("S_0.5", S05), ("S_1.5", S15), ("S_0.5,0.3,1.7", S3)):
        rep = check_axioms(S)
        res[name] = max(rep.residuals.values()) if rep.all_pass else float("inf")
    grid = np.linspace(-6, 6, 241)[:, None] + np.linspace(-3, 3, 61)[None, :] * 1j
    grid = grid[np.abs(np.sinh(grid)) > 1e-3].ravel()
    ok_grid = np.isfinite(S05.raw(grid)) & (np.abs(S05.raw(grid)) < 1e8)
    sym = float(np.max(np.abs(S05.raw(grid[ok_grid]) - S15.raw(grid[ok_grid]))))
    dt = time.perf_counter() - t
    ok = max(res.values()) <= 1e-10 and sym <= 1e-12 and dt < 10
    text = ", ".join(f"{k} {v:.1e}" for k, v in res.items())
    record(2, ok, f"max axiom residuals {text} (tol 1e-10); |S_0.5 - S_1.5| {sym:.1e} (tol 1e-12); {dt:.1f} s")


def test_criterion_3_value_at_zero_emerges():
    rng = np.random.default_rng(2024)
    errs = []
    for _ in range(20):
        k = int(rng.choice([1, 3, 5]))
        Bs = []
        while len(Bs) < k:
            b = float(rng.uniform(0.05, 1.95))
            if abs(b - 1) > 0.05:
                Bs.append(b)
        S = build_general(Bs, float(rng.uniform(0, 2)))
        errs.append(abs(S.raw(0.0) + 1))
    record(3, max(errs) <= 1e-10, f"max |S(0)+1| over 20 draws {max(errs):.1e} (tol 1e-10)")


def test_criterion_4_weak_commutativity(S05):
    out = {}
    times = {}
    for n, tol in ((1, 1e-6), (2, 1e-5)):
        t = time.perf_counter()
        reps = [weak_commutator(S05, *random_configuration(seed, n, S05)) for seed in range(DRAWS)]
        times[n] = time.perf_counter() - t
        out[n] = (worst(reps), all(r.passed for r in reps) and worst(reps) <= tol)
    ok = out[1][1] and out[2][1] and times[2] < 300
    record(
        4,
        ok,
        f"worst relative residual n=1 {out[1][0]:.1e} (tol 1e-6), n=2 {out[2][0]:.1e} (tol 1e-5); "
        f"{DRAWS} draws each, n=2 in {times[2]:.1f} s",
    )


def test_criterion_5_cancellation_pairs(S05):
    rel = {p: 0.0 for p in PAIRS}
    comp = 0.0
    ok = True
    for n in (1, 2):
        for seed in range(DRAWS):
            f, g, _, _ = random_configuration(seed, n, S05)
            Phi, Psi = mixed_vectors(S05, n, seed)
            an = CommutatorAnalysis(S05, f, g, Phi, Psi)
            for p in PAIRS:
                r = cancellation_pair(S05, f, g, Phi, Psi, p, analysis=an)
                rel[p] = max(rel[p], r.relative)
                ok &= r.passed
            c = pair_sum_completeness(S05, f, g, Phi, Psi, analysis=an)
            comp = max(comp, c.relative)
            ok &= c.passed
    f, g, _, _ = random_configuration(0, 3, S05)
    P3, Q3 = default_vectors(S05, 3, 3)
    taus = [tau_identity(S05, f, g, P3, Q3, k, m) for k, m in ((0, 1), (2, 0), (1, 2))]
    ok &= all(r.passed for r in taus)
    text = ", ".join(f"{p} {v:.1e}" for p, v in rel.items())
    record(
        5,
        ok,
        f"worst pair residuals {text} (tol 1e-6 n=1, 1e-5 n=2); completeness {comp:.1e} (tol 1e-8); "
        f"tau n=3 {worst(taus):.1e} (tol 1e-7)",
    )


def test_criterion_6_negative_controls(S05):
    doubled, dropped = [], []
    for seed in range(DRAWS):
        f, g, Phi, Psi = random_configuration(seed, 1, S05)
        a = weak_commutator(S05, f, g, Phi, Psi, eta_scale=2.0)
        b = weak_commutator(S05, f, g, Phi, Psi, include_chi=False)
        doubled.append((a.relative, a.passed))
        dropped.append((b.relative, b.passed))
    fails = all(not p for _, p in doubled + dropped)
    lo2 = min(r for r, _ in doubled)
    lo0 = min(r for r, _ in dropped)
    ok = fails and lo2 >= 1e-2 and lo0 >= 1e-2
    record(
        6,
        ok,
        f"n=1 over {DRAWS} draws: eta x2 min relative {lo2:.1e}, chi dropped min relative {lo0:.1e} "
        f"(required >= 1e-2); check fails in every control: {fails}",
    )


def test_criterion_7_propositions(S05, f_left, g_right, quad):
    t = time.perf_counter()
    reps = proposition_suite(S05, f_left, g_right, quad, numbers=(1, 2))
    dt = time.perf_counter() - t
    ok = len(reps) == 12 and all(r.passed and r.relative <= 1e-8 for r in reps) and dt < 120
    record(7, ok, f"{sum(r.passed for r in reps)}/{len(reps)} pass, worst relative {worst(reps):.1e} (tol 1e-8), {dt:.1f} s")


def test_criterion_8_contour_shift(S05, quad):
    reps = []
    fam = [
        (symmetrize(S05, [Atom(0.2, 0.9)]), symmetrize(S05, [Atom(-0.3, 1.1)])),
        (symmetrize(S05, [Atom(0.2, 0.9), Atom(-0.5, 1.0)]), symmetrize(S05, [Atom(-0.3, 1.1), Atom(0.4, 0.8)])),
    ]
    for eps in (0.1, math.pi / 3):
        for Phi, Psi in fam:
            reps.append(contour_shift_check(Phi, Psi, eps, quad))
    ok = all(r.passed and r.relative <= 1e-9 for r in reps)
    record(8, ok, f"worst relative residual {worst(reps):.1e} over eps in (0.1, pi/3), n in (1, 2) (tol 1e-9)")


def test_criterion_9_oracles(S05):
    rng = np.random.default_rng(9)
    at = [Atom(0.3, 0.8, 0.1), Atom(-0.4, 1.0, -0.2j), Atom(0.5, 0.9, 0.05 + 0.1j)]
    P2 = symmetrize(S05, at[:2], cn_power=0)
    P3 = symmetrize(S05, at, cn_power=0)
    e2 = max(abs(P2.at(*p) - hand_p2(S05, *at[:2], *p)) for p in rng.normal(size=(10, 2)))
    e3 = max(abs(P3.at(*p) - hand_p3(S05, *at, *p)) for p in rng.normal(size=(10, 3)))
    th = rng.uniform(-5, 5, size=10)
    fus = max(momentum_fusion_residual(t) / math.cosh(t) for t in th)
    ok = e2 <= 1e-12 and e3 <= 1e-12 and fus <= 1e-14
    record(9, ok, f"symmetrize vs hand sums n=2 {e2:.1e}, n=3 {e3:.1e} (tol 1e-12); momentum fusion {fus:.1e} relative")


def test_criterion_10_nontemperateness(S05, f_left):
    r = nontemperateness_probe(S05, f_left, symmetrize(S05, [Atom(0.0, 1.0)]))
    inc = r.metadata["increments"]
    record(10, r.passed, f"log-norm increments {inc[0]:.13g}, {inc[1]:.13g} (positive and increasing)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
