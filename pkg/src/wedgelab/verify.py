"""Numerical checks of wedge-local commutation and its supporting identities.

Matrix elements are assembled from inner products of field outputs; no two
field applications are ever composed. For operators ``P`` of the left field
and ``Q`` of the right field the weak commutator is

    W[P, Q] = <P* Phi, Q Psi> - <Q* Phi, P Psi>,

and the sum of ``W`` over all parts of both fields equals
``<fct(f) Phi, fct'(g) Psi> - <fct'(g) Phi, fct(f) Psi>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainViolation, QuadratureBudgetExceeded, WedgeMismatch
from .fields import (
    Chi,
    SHIFT,
    apply_chi,
    apply_fct,
    apply_J,
    apply_poincare,
    apply_z,
    apply_zdagger,
    is_continuable,
    poincare_inverse,
)
from .fock import (
    Atom,
    FockVector,
    NFunction,
    inner_product,
    symmetrize,
)
from .network import Factor, Term, evaluate_terms, pair_sum, rule_policy
from .quadrature import QuadratureSpec, tensor_integrate
from .smatrix import SMatrix
from .wedgefn import (
    TestFunction,
    klein_gordon_apply,
    make_bump,
    reflect,
    transform,
)

DEFAULT_TOLERANCES = {0: 1e-6, 1: 1e-6, 2: 1e-5, 3: 1e-4}
PROPOSITION_TOLERANCE = 1e-8
COMPLETENESS_TOLERANCE = 1e-8
CONTOUR_TOLERANCE = 1e-9
TAU_TOLERANCE = 1e-7
ROUTE_TOLERANCE = 1e-6
VERTICAL_SEGMENT_BOUND = 1e-10
DOMAIN_EPS = 0.05


def default_tolerance(n: int) -> float:
    return DEFAULT_TOLERANCES.get(n, 1e-4)


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class CheckReport:
    name: str
    residual: float
    scale: float
    tolerance: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name, residual, scale, tolerance, **metadata) -> "CheckReport":
        residual = float(residual)
        scale = float(scale)
        ok = bool(np.isfinite(residual) and residual <= tolerance * scale)
        return cls(name, residual, scale, float(tolerance), ok, metadata)

    @classmethod
    def aborted(cls, name, error: Exception, tolerance=1.0) -> "CheckReport":
        return cls(name, math.inf, 1.0, float(tolerance), False, {"abort": f"{type(error).__name__}: {error}"})

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else (0.0 if self.residual == 0 else math.inf)

    def rescaled(self, factor: float) -> "CheckReport":
        tol = self.tolerance * factor
        ok = bool(np.isfinite(self.residual) and self.residual <= tol * self.scale)
        return CheckReport(self.name, self.residual, self.scale, tol, ok, self.metadata)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "scale": self.scale,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "metadata": self.metadata,
        }


# -- vectors and operators -------------------------------------------------


def components(v) -> dict:
    """Particle number -> evaluator for an evaluator, Fock vector or field result."""
    if v is None:
        return {}
    if isinstance(v, NFunction):
        return {} if v.is_zero() else {v.n: v}
    comp = getattr(v, "components", None)
    if comp is None:
        raise TypeError(f"not a vector: {type(v).__name__}")
    return {n: F for n, F in comp.items() if F is not None and not F.is_zero()}


def _top_n(*vs) -> int:
    return max((n for v in vs for n in components(v)), default=0)


def _ip(a, b, q) -> complex:
    if a is None or b is None or a.n != b.n or a.is_zero() or b.is_zero():
        return 0j
    return inner_product(a, b, q)


@dataclass(frozen=True)
class Op:
    """One part of a field: creation ``zd``, annihilation ``z`` or ``chi``."""

    kind: str
    fn: TestFunction
    primed: bool = False

    def adjoint(self) -> "Op":
        swap = {"zd": "z", "z": "zd", "chi": "chi"}
        return Op(swap[self.kind], self.fn, self.primed)

    def apply(self, S, v: NFunction, q, eta_scale=1.0):
        if self.kind == "zd":
            return apply_zdagger(self.fn.plus, v, self.primed, q.max_particles)
        if self.kind == "z":
            return None if v.n == 0 else apply_z(self.fn.plus, v, q, self.primed)
        return None if v.n == 0 else apply_chi(S, self.fn, v, self.primed, eta_scale)

    @property
    def label(self) -> str:
        return self.kind + ("'" if self.primed else "")


def field_parts(f: TestFunction, primed: bool, include_chi: bool = True) -> list:
    parts = [Op("zd", f, primed), Op("z", f, primed)]
    if include_chi:
        parts.append(Op("chi", f, primed))
    return parts


def _check_wedges(f, g):
    if f.wedge != "left":
        raise WedgeMismatch(f"the left field needs a left-wedge function, got {f.wedge}")
    if g.wedge != "right":
        raise WedgeMismatch(f"the right field needs a right-wedge function, got {g.wedge}")


def sample_domain(psi: NFunction, eps: float = DOMAIN_EPS, q: QuadratureSpec | None = None) -> float:
    """Largest value of Psi on the lines shifted by +/- i eps in each variable.

    Sampled on a coarse grid around the bulk of the vector; raises
    ``DomainViolation`` if a value is not finite.
    """
    if psi.n == 0:
        return 0.0
    t = np.linspace(-3.0, 3.0, 7 if psi.n <= 2 else 4)
    grid = np.stack(np.meshgrid(*([t] * psi.n), indexing="ij"), -1).reshape(-1, psi.n).astype(complex)
    worst = 0.0
    for k in range(psi.n):
        for s in (eps, -eps):
            pts = grid.copy()
            pts[:, k] += 1j * s
            vals = psi(pts)
            if not np.all(np.isfinite(vals)):
                raise DomainViolation(f"vector is not finite at shift {s:+g}i in variable {k}")
            worst = max(worst, float(np.max(np.abs(vals))))
    return worst


def _check_domain(*vs):
    for v in vs:
        for F in components(v).values():
            if F.n >= 1 and not is_continuable(F):
                raise DomainViolation("vector lacks the continuation needed by the bound-state term")
            sample_domain(F)


# -- the weak commutator and its bookkeeping -------------------------------


class CommutatorAnalysis:
    """All scalar products entering the weak commutator, computed once."""

    def __init__(self, S, f, g, Phi, Psi, q=None, eta_scale=1.0, include_chi=True):
        _check_wedges(f, g)
        if include_chi:
            _check_domain(Phi, Psi)
        self.S, self.f, self.g = S, f, g
        self.Phi, self.Psi = components(Phi), components(Psi)
        self.q = q or QuadratureSpec()
        self.eta_scale = eta_scale
        self.include_chi = include_chi
        self.left = field_parts(f, False, include_chi)
        self.right = field_parts(g, True, include_chi)
        self._applied: dict = {}
        self._products: dict = {}

    def _apply(self, op: Op, which: str, n: int):
        key = (op, which, n)
        if key not in self._applied:
            v = (self.Phi if which == "Phi" else self.Psi)[n]
            self._applied[key] = op.apply(self.S, v, self.q, self.eta_scale)
        return self._applied[key]

    def product(self, X: Op, Y: Op) -> list:
        """Nonzero values ``<X Phi_m, Y Psi_l>`` over all component pairs."""
        key = (X, Y)
        if key not in self._products:
            out = []
            for m in self.Phi:
                a = self._apply(X, "Phi", m)
                if a is None:
                    continue
                for l in self.Psi:
                    b = self._apply(Y, "Psi", l)
                    if b is None or a.n != b.n:
                        continue
                    out.append(_ip(a, b, self.q))
            self._products[key] = out
        return self._products[key]

    def W(self, P: Op, Q: Op) -> tuple:
        """(value, list of individual products) of W[P, Q]."""
        plus = self.product(P.adjoint(), Q)
        minus = self.product(Q.adjoint(), P)
        return sum(plus, 0j) - sum(minus, 0j), plus + [-v for v in minus]

    def full(self) -> tuple:
        """(LHS - RHS, individual products) of the weak commutator."""
        lhs = [v for X in self.left for Y in self.right for v in self.product(X, Y)]
        rhs = [v for X in self.left for Y in self.right for v in self.product(Y, X)]
        return sum(lhs, 0j) - sum(rhs, 0j), lhs + [-v for v in rhs], sum(lhs, 0j), sum(rhs, 0j)

    # slot-resolved chi chi' products
    def chi_slots(self) -> dict:
        """{(k, m): (<chi_k Phi, chi'_m Psi>, <chi'_m Phi, chi_k Psi>)} summed over particle numbers."""
        if "slots" in self._products:
            return self._products["slots"]
        out: dict = {}
        for n in sorted(set(self.Phi) & set(self.Psi)):
            if n == 0:
                continue
            ph, ps = self.Phi[n], self.Psi[n]
            cf = lambda v: Chi(self.f, v, False, self.eta_scale)
            cg = lambda v: Chi(self.g, v, True, self.eta_scale)
            rules = rule_policy(n, self.q.coarse(), self.q.fine())
            for k in range(n):
                for m in range(n):
                    a = pair_sum(cf(ph).slot_network(k), cg(ps).slot_network(m), rules)
                    b = pair_sum(cg(ph).slot_network(m), cf(ps).slot_network(k), rules)
                    pa, pb = out.get((k, m), (0j, 0j))
                    out[(k, m)] = (pa + a, pb + b)
        self._products["slots"] = out
        return out

    def _op(self, kind, primed):
        return Op(kind, self.g if primed else self.f, primed)

    def groups(self) -> dict:
        """Complex value and individual terms of every cancellation group."""
        zd, z = self._op("zd", False), self._op("z", False)
        zdp, zp = self._op("zd", True), self._op("z", True)
        groups: dict = {}
        vals, terms = [], []
        for P in (zd, z):
            for Q in (zdp, zp):
                v, t = self.W(P, Q)
                vals.append(v)
                terms += t
        groups["phi"] = (sum(vals, 0j), terms)
        if not self.include_chi:
            return groups
        chi, chip = self._op("chi", False), self._op("chi", True)
        a1, t1 = self.W(chi, zp)
        a2, t2 = self.W(z, chip)
        groups["A"] = (a1 + a2, t1 + t2)
        d1, s1 = self.W(chi, zdp)
        d2, s2 = self.W(zd, chip)
        groups["A_dagger"] = (d1 + d2, s1 + s2)
        slots = self.chi_slots()
        off = [(a, -b) for (k, m), (a, b) in slots.items() if k != m]
        diag = [(a, -b) for (k, m), (a, b) in slots.items() if k == m]
        groups["B"] = (sum((a + b for a, b in off), 0j), [x for p in off for x in p])
        dv = sum((a + b for a, b in diag), 0j)
        groups["C"] = (groups["phi"][0] + dv, groups["phi"][1] + [x for p in diag for x in p])
        groups["C_chi"] = (dv, [x for p in diag for x in p])
        return groups


def _scale(terms) -> float:
    return float(sum(abs(complex(t)) for t in terms))


def weak_commutator(
    S: SMatrix,
    f: TestFunction,
    g: TestFunction,
    Phi,
    Psi,
    q: QuadratureSpec | None = None,
    eta_scale: float = 1.0,
    include_chi: bool = True,
    tolerance: float | None = None,
    analysis: CommutatorAnalysis | None = None,
) -> CheckReport:
    """|<fct(f) Phi, fct'(g) Psi> - <fct'(g) Phi, fct(f) Psi>| against the sum of term magnitudes."""
    an = analysis or CommutatorAnalysis(S, f, g, Phi, Psi, q, eta_scale, include_chi)
    value, terms, lhs, rhs = an.full()
    n = _top_n(Phi, Psi)
    tol = default_tolerance(n) if tolerance is None else tolerance
    name = "weak commutator" if include_chi else "weak commutator without chi"
    if eta_scale != 1.0:
        name += f" (eta x{eta_scale:g})"
    return CheckReport.build(
        f"{name} n={n}",
        abs(value),
        _scale(terms),
        tol,
        value=_c(value),
        lhs=_c(lhs),
        rhs=_c(rhs),
        terms=len(terms),
        quadrature=an.q.describe(),
    )


PAIRS = ("A", "A_dagger", "B", "C")


def cancellation_pair(
    S, f, g, Phi, Psi, pair: str, q=None, eta_scale=1.0, tolerance=None, analysis=None
) -> CheckReport:
    """Residual of one cancellation group of the weak commutator.

    ``A``: W[chi, z'] + W[z, chi']; ``A_dagger``: W[chi, z'^dagger] + W[z^dagger, chi'];
    ``B``: chi chi' slot pairs whose shifted variables sit in different
    slots; ``C``: [phi, phi'] plus the chi chi' pairs sharing the slot.
    For ``C`` the [phi, phi'] side is also computed from the residue kernel
    (route i, one-particle components only) and by contour shifting (route ii).
    """
    if pair not in PAIRS:
        raise ValueError(f"pair must be one of {PAIRS}, got {pair!r}")
    an = analysis or CommutatorAnalysis(S, f, g, Phi, Psi, q, eta_scale, True)
    value, terms = an.groups()[pair]
    n = _top_n(Phi, Psi)
    tol = default_tolerance(n) if tolerance is None else tolerance
    meta = {"value": _c(value), "terms": len(terms)}
    if pair == "C":
        routes = phi_kernel_routes(S, f, g, Phi, Psi, an.q)
        meta.update({k: _c(v) if isinstance(v, complex) else v for k, v in routes.items()})
        meta["direct_phi"] = _c(an.groups()["phi"][0])
    return CheckReport.build(f"pair {pair} n={n}", abs(value), _scale(terms), tol, **meta)


def pair_sum_completeness(S, f, g, Phi, Psi, q=None, eta_scale=1.0, analysis=None) -> CheckReport:
    """The groups A, A_dagger, B, C add up to the full weak commutator."""
    an = analysis or CommutatorAnalysis(S, f, g, Phi, Psi, q, eta_scale, True)
    full, terms, _, _ = an.full()
    gr = an.groups()
    total = sum((gr[p][0] for p in PAIRS), 0j)
    n = _top_n(Phi, Psi)
    return CheckReport.build(
        f"pair-sum completeness n={n}",
        abs(total - full),
        _scale(terms),
        COMPLETENESS_TOLERANCE,
        pair_sum=_c(total),
        full=_c(full),
    )


# -- kernels of [phi(f), phi'(g)] ------------------------------------------


@dataclass(frozen=True, eq=False)
class ResidueKernel(NFunction):
    """Route (i): K(theta) Psi(theta) with K the residue formula.

    K = -2 pi i R sum_k [ g^-(t_k + 2 pi i/3) f^+(t_k + 2 pi i/3) prod_{j != k} S(t_k - t_j + 2 pi i/3)
                         - g^-(t_k + pi i/3) f^+(t_k + pi i/3) prod_{j != k} S(t_k - t_j + pi i/3) ],
    with g^-(z) = g^+(z - i pi). Coincident rapidities are singular for n >= 2.
    """

    f: TestFunction
    g: TestFunction
    psi: NFunction

    @property
    def n(self):
        return self.psi.n

    @property
    def smatrix(self):
        return self.psi.smatrix

    def _parts(self):
        S = self.smatrix
        c = -2j * math.pi * S.residue_R
        out = []
        for sign, sh in ((1.0, 2 * SHIFT), (-1.0, SHIFT)):
            for k in range(self.n):
                facs = [Factor(self.g.plus, (k,), sh - 3 * SHIFT), Factor(self.f.plus, (k,), sh)]
                facs += [Factor(S.raw, (k, j), sh) for j in range(self.n) if j != k]
                out.append((sign * c, facs))
        return out

    def network(self):
        return [t.with_factors(*facs).scaled(c) for c, facs in self._parts() for t in self.psi.network()]

    def __call__(self, pts):
        return evaluate_terms(self.network(), np.asarray(pts, dtype=complex).reshape(-1, self.n))

    def is_zero(self):
        return self.psi.is_zero()


@dataclass(frozen=True, eq=False)
class ShiftedContourKernel(NFunction):
    """Route (ii): K(theta) = -int [G(t) - G(t + i pi)] dt, G(t) = g^-(t) f^+(t) prod_j S(t - theta_j).

    The two horizontal lines bound the strip holding the poles of the
    S-factors; the t-integral runs on a fixed line rule.
    """

    f: TestFunction
    g: TestFunction
    psi: NFunction
    rule: object = None

    @property
    def n(self):
        return self.psi.n

    @property
    def smatrix(self):
        return self.psi.smatrix

    def network(self):
        S = self.smatrix
        lab = ("t", id(self))
        out = []
        for sign, sh in ((-1.0, 0j), (1.0, 3 * SHIFT)):
            facs = [Factor(self.g.minus, (lab,), sh), Factor(self.f.plus, (lab,), sh)]
            facs += [Factor(S.raw, (lab, j), sh) for j in range(self.n)]
            for t in self.psi.network():
                out.append(Term(t.coeff * sign, t.factors + tuple(facs), t.bound + ((lab, self.rule),)))
        return out

    def __call__(self, pts):
        return evaluate_terms(self.network(), np.asarray(pts, dtype=complex).reshape(-1, self.n))

    def is_zero(self):
        return self.psi.is_zero()


def vertical_segments(S, f, g, q: QuadratureSpec, n: int) -> float:
    """Bound on the two vertical sides of the shifted rectangle at +/- Theta.

    Uses sup |g^- f^+| on the sides times the largest |S|^n over offsets
    Theta - theta_j >= 1 (the vectors' mass beyond that is covered by the
    tail bound).
    """
    T = q.fine_theta_max
    y = np.linspace(0.0, math.pi, 61)
    gf = 0.0
    for side in (T, -T):
        z = side + 1j * y
        gf = max(gf, float(np.max(np.abs(g.minus(z) * f.plus(z)))))
    x = np.linspace(1.0, 2 * T, 80)
    Z = (x[:, None] + 1j * y[None, :]).ravel()
    smax = max(float(np.max(np.abs(S.raw(Z)))), float(np.max(np.abs(S.raw(-Z.conj() + 1j * math.pi)))))
    return math.pi * gf * smax**n


def phi_kernel_routes(S, f, g, Phi, Psi, q) -> dict:
    """<Phi, K Psi> by route (i) (one-particle only) and route (ii)."""
    P, Q = components(Phi), components(Psi)
    common = sorted(set(P) & set(Q) - {0})
    out: dict = {}
    seg = max((vertical_segments(S, f, g, q, n) for n in common), default=0.0)
    out["vertical_segments"] = seg
    if seg > VERTICAL_SEGMENT_BOUND:
        raise QuadratureBudgetExceeded(f"vertical contour sides contribute {seg:.2e} > {VERTICAL_SEGMENT_BOUND:g}")
    ii = 0j
    for n in common:
        K = ShiftedContourKernel(f, g, Q[n], q.fine())
        ii += pair_sum(P[n].network(), K.network(), rule_policy(n, q.coarse(), q.fine()))
    out["route_ii"] = ii
    if common and max(common) == 1:
        K = ResidueKernel(f, g, Q[1])
        out["route_i"] = pair_sum(P[1].network(), K.network(), rule_policy(1, q.coarse(), q.fine()))
    return out


def pair_c_routes(S, f, g, Phi, Psi, q=None, tolerance=ROUTE_TOLERANCE) -> CheckReport:
    """Route (i) against route (ii) for the [phi, phi'] side of pair C."""
    q = q or QuadratureSpec()
    r = phi_kernel_routes(S, f, g, Phi, Psi, q)
    if "route_i" not in r:
        raise ValueError("route (i) is evaluated on one-particle vectors only")
    a, b = r["route_i"], r["route_ii"]
    return CheckReport.build(
        "pair C routes",
        abs(a - b),
        abs(a) + abs(b),
        tolerance,
        route_i=_c(a),
        route_ii=_c(b),
        vertical_segments=r["vertical_segments"],
    )


def tau_identity(S, f, g, Phi, Psi, k: int, m: int, q=None, tolerance=TAU_TOLERANCE) -> CheckReport:
    """<chi_k Phi, chi'_m Psi> = <chi'_m Phi, chi_k Psi> for slots k != m."""
    q = q or QuadratureSpec()
    _check_wedges(f, g)
    n = Phi.n
    if Psi.n != n or not (0 <= k < n and 0 <= m < n):
        raise ValueError("slots must index the common particle number")
    rules = rule_policy(n, q.coarse(), q.fine())
    a = pair_sum(Chi(f, Phi).slot_network(k), Chi(g, Psi, True).slot_network(m), rules)
    b = pair_sum(Chi(g, Phi, True).slot_network(m), Chi(f, Psi).slot_network(k), rules)
    return CheckReport.build(
        f"tau identity n={n} slots ({k},{m})", abs(a - b), abs(a) + abs(b), tolerance, first=_c(a), second=_c(b)
    )


# -- contour shift lemma ---------------------------------------------------


def _shifted_first(psi: NFunction, eps: float) -> list:
    return [t.moved({0: (0, -1j * eps)}) for t in psi.network()]


def contour_shift_check(Phi: NFunction, Psi: NFunction, eps: float, q=None, tolerance=CONTOUR_TOLERANCE) -> CheckReport:
    """int <Phi(t - i eps), Psi(t)> dt = int <Phi(t), Psi(t - i eps)> dt.

    The first variable carries the family parameter; the others are the
    integrated L^2 variables.
    """
    q = q or QuadratureSpec()
    if Phi.n != Psi.n or Phi.n < 1:
        raise ValueError("families need a common particle number >= 1")
    rules = rule_policy(Phi.n, q.coarse(), q.fine())
    a = pair_sum(_shifted_first(Phi, eps), Psi.network(), rules)
    b = pair_sum(Phi.network(), _shifted_first(Psi, eps), rules)
    return CheckReport.build(
        f"contour shift eps={eps:.4g}", abs(a - b), abs(a) + abs(b), tolerance, first=_c(a), second=_c(b)
    )


# -- propositions ----------------------------------------------------------


def _norm_rules(n: int, q: QuadratureSpec):
    if n <= 2:
        return [q.coarse()] * n
    from .quadrature import composite_rule

    T = q.theta_max
    return [composite_rule(np.linspace(-T, T, 15), 10, "norm")] * n


def difference_norm(A: NFunction, B: NFunction, q: QuadratureSpec) -> float:
    """||A - B|| from pointwise differences (no cancellation between norms)."""
    if A.n != B.n:
        raise ValueError("particle numbers differ")
    if A.n == 0:
        return float(abs(A(np.zeros((1, 0)))[0] - B(np.zeros((1, 0)))[0]))
    val = tensor_integrate(lambda p: np.abs(A(p) - B(p)) ** 2, _norm_rules(A.n, q), q.chunk)
    return math.sqrt(max(0.0, val.real))


def _norm(A, q) -> float:
    if A is None or A.is_zero():
        return 0.0
    return math.sqrt(max(0.0, inner_product(A, A, q).real))


def default_vectors(S: SMatrix, n: int, seed: int = 0) -> tuple:
    """Two symmetrized atom vectors with n particles."""
    rng = np.random.default_rng(seed)

    def atoms():
        return [
            Atom(float(rng.uniform(-0.6, 0.6)), float(rng.uniform(0.7, 1.1)), complex(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)))
            for _ in range(n)
        ]

    return symmetrize(S, atoms()), symmetrize(S, atoms())


def chi_symmetry(S, f, eta, xi, q=None, tolerance=None) -> CheckReport:
    q = q or QuadratureSpec()
    a = _ip(eta, apply_chi(S, f, xi), q)
    b = _ip(apply_chi(S, f, eta), xi, q)
    tol = (1e-9 if xi.n == 1 else PROPOSITION_TOLERANCE) if tolerance is None else tolerance
    return CheckReport.build(f"chi symmetry n={xi.n}", abs(a - b), abs(a) + abs(b), tol, first=_c(a), second=_c(b))


def chi_covariance(S, f, psi, a=(0.0, 0.0), lam=0.0, q=None, tolerance=PROPOSITION_TOLERANCE, label=None) -> CheckReport:
    """||U chi(f) U* Psi - chi(f_(a,lam)) Psi|| against ||chi(f_(a,lam)) Psi||."""
    q = q or QuadratureSpec()
    ai, li = poincare_inverse(a, lam)
    moved = apply_poincare(a, lam, apply_chi(S, f, apply_poincare(ai, li, psi, f.mass)), f.mass)
    fa = transform(f, a, lam)
    direct = apply_chi(S, fa, psi)
    res = difference_norm(moved, direct, q)
    name = label or ("chi boost covariance" if lam else "chi translation covariance")
    return CheckReport.build(f"{name} n={psi.n}", res, _norm(direct, q), tolerance, a=list(a), lam=lam)


def fct_symmetry(S, f, Phi, psi, q=None, tolerance=PROPOSITION_TOLERANCE) -> CheckReport:
    """<Phi, fct(f) Psi> = <fct(f) Phi, Psi> with Phi spanning n-1, n, n+1."""
    q = q or QuadratureSpec()
    ours = apply_fct(S, f, psi, False, q)
    a_terms = [_ip(F, ours[n], q) for n, F in components(Phi).items() if ours[n] is not None]
    b_terms = []
    for n, F in components(Phi).items():
        res = apply_fct(S, f, F, False, q)
        b_terms.append(_ip(res[psi.n], psi, q) if res[psi.n] is not None else 0j)
    a, b = sum(a_terms, 0j), sum(b_terms, 0j)
    return CheckReport.build(
        f"fct symmetry n={psi.n}", abs(a - b), _scale(a_terms) + _scale(b_terms), tolerance, first=_c(a), second=_c(b)
    )


def klein_gordon(S, f, psi, q=None, tolerance=PROPOSITION_TOLERANCE) -> CheckReport:
    """||fct((box + m^2) f) Psi|| against ||fct(f) Psi||."""
    q = q or QuadratureSpec()
    kg = klein_gordon_apply(f)
    res = apply_fct(S, kg, psi, False, q)
    ref = apply_fct(S, f, psi, False, q)
    r = math.sqrt(sum(_norm(F, q) ** 2 for F in res.components.values()))
    s = math.sqrt(sum(_norm(F, q) ** 2 for F in ref.components.values()))
    return CheckReport.build(f"Klein-Gordon n={psi.n}", r, s, tolerance)


def j_reflection(S, g, psi, q=None, tolerance=PROPOSITION_TOLERANCE) -> CheckReport:
    """fct'(g) Psi = J fct(g_j) J Psi with g_j(x) = g(-x), per particle number."""
    q = q or QuadratureSpec()
    lhs = apply_fct(S, g, psi, True, q)
    inner = apply_fct(S, reflect(g), apply_J(psi), False, q)
    res2, ref2 = 0.0, 0.0
    for n, F in lhs.components.items():
        G = inner[n]
        if G is None:
            raise AssertionError(f"particle number {n} missing on the reflected side")
        res2 += difference_norm(F, apply_J(G, closed_form=False), q) ** 2
        ref2 += _norm(F, q) ** 2
    return CheckReport.build(f"J reflection n={psi.n}", math.sqrt(res2), math.sqrt(ref2), tolerance)


def proposition_suite(
    S, f, g, q=None, numbers=(1, 2), boost=0.4, translation=(-0.3, -0.6), seed=0
) -> list:
    """chi symmetry, chi covariance (boost, translation), fct symmetry, Klein-Gordon and J reflection."""
    q = q or QuadratureSpec()
    out = []
    for n in numbers:
        eta, xi = default_vectors(S, n, seed + n)
        lower, upper = default_vectors(S, n - 1, seed + 10 + n)[0], default_vectors(S, n + 1, seed + 20 + n)[0]
        Phi = FockVector.of(lower, eta, upper)
        checks = [
            lambda: chi_symmetry(S, f, eta, xi, q),
            lambda: chi_covariance(S, f, xi, (0.0, 0.0), boost, q),
            lambda: chi_covariance(S, f, xi, translation, 0.0, q),
            lambda: fct_symmetry(S, f, Phi, xi, q),
            lambda: klein_gordon(S, f, xi, q),
            lambda: j_reflection(S, g, xi, q),
        ]
        names = ["chi symmetry", "chi boost covariance", "chi translation covariance", "fct symmetry", "Klein-Gordon", "J reflection"]
        for name, c in zip(names, checks):
            try:
                out.append(c())
            except Exception as e:  # a numerical abort becomes a failed entry
                out.append(CheckReport.aborted(f"{name} n={n}", e, PROPOSITION_TOLERANCE))
    return out


# -- non-temperateness -----------------------------------------------------


def chi_translated_log_norm(S, f, psi1: NFunction, a, q=None) -> float:
    """log ||chi_1(f) U(a, 0) Psi_1|| on the truncation window, in log space.

    The integrand grows double-exponentially when f moved by -a leaves the
    left wedge, so values are accumulated with log-sum-exp.
    """
    q = q or QuadratureSpec()
    if psi1.n != 1:
        raise ValueError("the probe uses one-particle vectors")
    r = q.coarse()
    t = r.nodes.astype(complex)
    m = f.mass
    z = t - SHIFT
    # log |exp(i a.p(z))| = -Im(a.p(z))
    log_phase = -np.imag(m * (a[0] * np.cosh(z) - a[1] * np.sinh(z)))
    with np.errstate(divide="ignore"):
        logs = (
            2 * np.log(np.abs(f.plus(t + SHIFT)))
            + 2 * log_phase
            + 2 * np.log(np.abs(psi1(z[:, None])))
            + np.log(r.weights)
        )
    top = float(np.max(logs))
    total = top + math.log(float(np.sum(np.exp(logs - top))))
    return 0.5 * total + math.log(abs(S.eta))


def nontemperateness_probe(S, f, psi1, s_values=(1.0, 2.0, 3.0), eps=0.1, q=None) -> CheckReport:
    """log-norms along a = s(-1, -1 - eps) increase with increasing increments."""
    logs = [chi_translated_log_norm(S, f, psi1, (-s, -(1 + eps) * s), q) for s in s_values]
    inc = np.diff(logs)
    violations = int(np.sum(inc <= 0)) + int(np.sum(np.diff(inc) <= 0))
    return CheckReport.build(
        "non-temperateness growth",
        violations,
        1.0,
        0.5,
        log_norms=logs,
        increments=inc.tolist(),
        s=list(s_values),
    )


# -- random draws ----------------------------------------------------------


def random_bump(rng, wedge: str, quad=None) -> TestFunction:
    """A bump inside the given wedge with a margin."""
    while True:
        r = float(rng.uniform(0.4, 0.65))
        u = float(rng.uniform(-0.3, 0.3))      # time coordinate
        d = float(rng.uniform(0.85, 1.3))      # distance from the edge
        x1 = -(abs(u) + r * math.sqrt(2) + 0.1 + (d - 0.85)) if wedge == "left" else (abs(u) + r * math.sqrt(2) + 0.1 + (d - 0.85))
        try:
            return make_bump((u, x1), r, float(rng.uniform(0.5, 1.5)), wedge, quad=quad)
        except WedgeMismatch:
            continue


def random_configuration(seed: int, n: int, S: SMatrix, quad=None) -> tuple:
    """(f, g, Phi, Psi) for one random draw with n-particle vectors."""
    rng = np.random.default_rng(seed)
    f = random_bump(rng, "left", quad)
    g = random_bump(rng, "right", quad)

    def vec():
        atoms = [
            Atom(float(rng.uniform(-0.8, 0.8)), float(rng.uniform(0.6, 1.2)), complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)))
            for _ in range(n)
        ]
        return symmetrize(S, atoms, coeff=complex(rng.normal(), rng.normal()))

    return f, g, vec(), vec()


def mixed_vectors(S, n: int, seed: int = 0) -> tuple:
    """Fock vectors with components n-1 and n, so every group of terms is nonzero."""
    a, b = default_vectors(S, n - 1, seed)
    c, d = default_vectors(S, n, seed + 1)
    return FockVector.of(a, c), FockVector.of(b, d)
