"""Field operators acting on closed-form vectors.

All operators map evaluators to evaluators. Conventions:

* ``z(xi) = int conj(xi(t)) z(t) dt`` (antilinear smearing), so for a real
  test function ``phi(f) = z^dagger(f^+) + z(f^+)``;
* ``(z^dagger(xi) Psi)(l) = N^{-1/2} sum_k prod_{i<k} S(l_k - l_i) xi(l_k) Psi(l without k)``;
* the reflected operators insert or remove the last variable instead of the first;
* ``chi`` is evaluated in the pole-free form obtained by moving the shifted
  variable into the first slot, ``chi'`` by moving it into the last slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainViolation, TooManyParticles, WedgeMismatch
from .fock import (
    LinearCombination,
    NFunction,
    WaveFunction,
    Zero,
    _points,
)
from .network import Factor, Term
from .quadrature import LineRule, QuadratureSpec
from .smatrix import SMatrix
from .wedgefn import TestFunction

SHIFT = 1j * math.pi / 3


def _line(xi):
    """A one-variable callable from a one-particle evaluator or a function."""
    if isinstance(xi, NFunction):
        return lambda t: xi(np.asarray(t, dtype=complex).reshape(-1, 1))
    return lambda t: np.asarray(xi(np.asarray(t, dtype=complex)), dtype=complex)


def _drop(pts, k):
    return np.delete(pts, k, axis=1)


# -- creation --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Creation(NFunction):
    """z^dagger(xi) Psi (primed: z'^dagger(xi) Psi)."""

    xi: object
    psi: NFunction
    primed: bool = False

    @property
    def n(self):
        return self.psi.n + 1

    @property
    def smatrix(self):
        return self.psi.smatrix

    def __call__(self, pts):
        pts = _points(pts, self.n)
        N = self.n
        S = self.smatrix
        xi = _line(self.xi)
        out = np.zeros(pts.shape[0], dtype=complex)
        for k in range(N):
            pre = xi(pts[:, k])
            if self.primed:
                for i in range(k + 1, N):
                    pre = pre * S.raw(pts[:, i] - pts[:, k])
            else:
                for i in range(k):
                    pre = pre * S.raw(pts[:, k] - pts[:, i])
            out += pre * self.psi(_drop(pts, k))
        return out / math.sqrt(N)

    def is_zero(self):
        return self.psi.is_zero()

    def slot_network(self, k):
        N = self.n
        S = self.smatrix
        mapping = {s: (s if s < k else s + 1, 0j) for s in range(N - 1)}
        extra = [Factor(self.xi, (k,))]
        if self.primed:
            extra += [Factor(S.raw, (i, k)) for i in range(k + 1, N)]
        else:
            extra += [Factor(S.raw, (k, i)) for i in range(k)]
        c = 1 / math.sqrt(N)
        return [t.moved(mapping).with_factors(*extra).scaled(c) for t in self.psi.network()]

    def network(self):
        return [t for k in range(self.n) for t in self.slot_network(k)]


def apply_zdagger(xi, psi: NFunction, primed: bool = False, max_particles: int = 4) -> NFunction:
    """Smeared creation operator, sqrt(n+1) P_{n+1}(xi x Psi)."""
    if psi.n + 1 > max_particles + 1:
        raise TooManyParticles(f"creation would produce {psi.n + 1} particles")
    return Creation(xi, psi, primed)


# -- annihilation ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Annihilation(NFunction):
    """z(xi) Psi (primed: z'(xi) Psi), integrated on a fixed line rule."""

    xi: object
    psi: NFunction
    rule: LineRule
    primed: bool = False
    block: int = 1 << 17
    _weights: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.psi.n - 1

    @property
    def smatrix(self):
        return self.psi.smatrix

    def weights(self):
        if "w" not in self._weights:
            t = self.rule.nodes
            self._weights["w"] = np.conj(_line(self.xi)(t)) * self.rule.weights
        return self._weights["w"]

    def __call__(self, pts):
        pts = _points(pts, self.n)
        m, n = pts.shape
        t = self.rule.nodes.astype(complex)
        M = len(t)
        w = self.weights()
        out = np.empty(m, dtype=complex)
        step = max(1, self.block // M)
        for s in range(0, m, step):
            chunk = pts[s : s + step]
            c = len(chunk)
            rep = np.repeat(chunk, M, axis=0)
            col = np.tile(t, c)[:, None]
            full = np.hstack([rep, col] if self.primed else [col, rep])
            out[s : s + c] = (self.psi(full).reshape(c, M) @ w)
        return math.sqrt(n + 1) * out

    def is_zero(self):
        return self.psi.is_zero()

    def network(self):
        lab = ("a", id(self))
        m = self.psi.n
        if self.primed:
            mapping = {m - 1: (lab, 0j)}
        else:
            mapping = {0: (lab, 0j)}
            mapping.update({s: (s - 1, 0j) for s in range(1, m)})
        w = Factor(self.xi, (lab,), conj=True)
        c = math.sqrt(m)
        out = []
        for t in self.psi.network():
            moved = t.moved(mapping).with_factors(w)
            out.append(Term(moved.coeff * c, moved.factors, moved.bound + ((lab, self.rule),)))
        return out


def apply_z(xi, psi: NFunction, q: QuadratureSpec | None = None, primed: bool = False, rule=None) -> NFunction:
    """Smeared annihilation operator; the vacuum goes to the zero vector."""
    q = q or QuadratureSpec()
    if psi.n == 0:
        return Zero(psi.smatrix, 0)
    return Annihilation(xi, psi, rule or q.coarse(), primed)


# -- bound-state operator --------------------------------------------------


def is_continuable(psi: NFunction) -> bool:
    """Whether Psi is known to continue by +/- i pi/3 in each variable."""
    if isinstance(psi, WaveFunction):
        if psi.n <= 1:
            return True
        return psi.cn_power >= 1 and not (-math.pi / 3 <= psi.cn_alpha < 0)
    if isinstance(psi, LinearCombination):
        return all(is_continuable(F) for _, F in psi.terms)
    if isinstance(psi, (Poincare, Reflected)):
        return is_continuable(psi.psi)
    if isinstance(psi, Zero):
        return True
    return bool(getattr(psi, "continuable", False))


@dataclass(frozen=True, eq=False)
class Chi(NFunction):
    """chi(f) Psi (primed: chi'(g) Psi), particle number preserving."""

    f: TestFunction
    psi: NFunction
    primed: bool = False
    eta_scale: float = 1.0

    @property
    def n(self):
        return self.psi.n

    @property
    def smatrix(self):
        return self.psi.smatrix

    @property
    def prefactor(self) -> complex:
        return -1j * self.smatrix.eta * self.eta_scale

    def __call__(self, pts):
        pts = _points(pts, self.n)
        m, n = pts.shape
        S = self.smatrix
        out = np.zeros(m, dtype=complex)
        if n == 0:
            return out
        for k in range(n):
            rest = _drop(pts, k)
            if not self.primed:
                pre = self.f.plus(pts[:, k] + SHIFT)
                for j in range(k):
                    pre = pre * S.raw(pts[:, k] - pts[:, j])
                moved = np.hstack([(pts[:, k] - SHIFT)[:, None], rest])
            else:
                pre = self.f.plus(pts[:, k] - SHIFT)
                for j in range(k + 1, n):
                    pre = pre * S.raw(pts[:, j] - pts[:, k])
                moved = np.hstack([rest, (pts[:, k] + SHIFT)[:, None]])
            out += pre * self.psi(moved)
        return self.prefactor * out

    def is_zero(self):
        return self.psi.is_zero() or self.psi.n == 0 or self.eta_scale == 0

    def slot_network(self, k):
        """Networks of the term that shifts the variable in output slot k."""
        n = self.n
        S = self.smatrix
        if not self.primed:
            mapping = {0: (k, -SHIFT)}
            mapping.update({s: (s - 1 if s - 1 < k else s, 0j) for s in range(1, n)})
            extra = [Factor(self.f.plus, (k,), SHIFT)]
            extra += [Factor(S.raw, (k, j)) for j in range(k)]
        else:
            mapping = {n - 1: (k, SHIFT)}
            mapping.update({s: (s if s < k else s + 1, 0j) for s in range(n - 1)})
            extra = [Factor(self.f.plus, (k,), -SHIFT)]
            extra += [Factor(S.raw, (j, k)) for j in range(k + 1, n)]
        c = self.prefactor
        return [t.moved(mapping).with_factors(*extra).scaled(c) for t in self.psi.network()]

    def network(self):
        return [t for k in range(self.n) for t in self.slot_network(k)]


def chi_in_place(S: SMatrix, f: TestFunction, psi: NFunction, theta, primed=False, eta_scale=1.0) -> complex:
    """chi applied with the shifted variable kept in its slot (oracle form)."""
    theta = np.asarray(theta, dtype=complex)
    n = len(theta)
    total = 0j
    for k in range(n):
        x = theta.copy()
        if not primed:
            pre = complex(f.plus(np.array([theta[k] + SHIFT]))[0])
            for j in range(k):
                pre *= complex(S.raw(theta[k] - theta[j] + SHIFT))
            x[k] = theta[k] - SHIFT
        else:
            pre = complex(f.plus(np.array([theta[k] - SHIFT]))[0])
            for j in range(k + 1, n):
                pre *= complex(S.raw(theta[j] - theta[k] + SHIFT))
            x[k] = theta[k] + SHIFT
        total += pre * complex(psi(x.reshape(1, n))[0])
    return -1j * S.eta * eta_scale * total


def apply_chi(S: SMatrix, f: TestFunction, psi: NFunction, primed: bool = False, eta_scale: float = 1.0) -> NFunction:
    """Bound-state operator chi(f) (or chi'(g) when primed)."""
    want = "right" if primed else "left"
    if f.wedge != want:
        raise WedgeMismatch(f"{'chi prime' if primed else 'chi'} needs a {want}-wedge function, got {f.wedge}")
    if psi.smatrix is not S and psi.n > 0:
        # identical factorization is fine; different S is a caller error
        if psi.smatrix.fA_params != S.fA_params:
            raise DomainViolation("vector and operator use different S-matrices")
    if not is_continuable(psi):
        raise DomainViolation(
            "vector lacks the analytic continuation by i pi/3 (needs cn_power >= 1 and "
            "cn_alpha outside [-pi/3, 0))"
        )
    if psi.n == 0:
        return Zero(S, 0)
    return Chi(f, psi, primed, eta_scale)


# -- composite fields ------------------------------------------------------


@dataclass
class FieldResult:
    components: dict
    provenance: str

    def __getitem__(self, n):
        return self.components.get(n)

    def numbers(self):
        return sorted(n for n, F in self.components.items() if not F.is_zero())

    def merged(self, other: "FieldResult", provenance: str) -> "FieldResult":
        comp = dict(self.components)
        for n, F in other.components.items():
            comp[n] = comp[n] + F if n in comp else F
        return FieldResult(comp, provenance)

    def evaluate(self, n, pts):
        F = self.components.get(n)
        if F is None:
            return np.zeros(np.asarray(pts).reshape(-1, n).shape[0], dtype=complex)
        return F(pts)


def apply_phi(S: SMatrix, f: TestFunction, psi: NFunction, primed: bool = False, q=None) -> FieldResult:
    """phi(f) = z^dagger(f^+) + z(f^+); primed uses the reflected operators."""
    q = q or QuadratureSpec()
    comp = {psi.n + 1: apply_zdagger(f.plus, psi, primed, q.max_particles)}
    if psi.n >= 1:
        comp[psi.n - 1] = apply_z(f.plus, psi, q, primed)
    return FieldResult(comp, "phi'" if primed else "phi")


def apply_fct(S: SMatrix, f: TestFunction, psi: NFunction, primed: bool = False, q=None, eta_scale=1.0) -> FieldResult:
    """The wedge field phi(f) + chi(f) (primed: phi'(g) + chi'(g))."""
    res = apply_phi(S, f, psi, primed, q)
    chi = apply_chi(S, f, psi, primed, eta_scale)
    name = "fct'" if primed else "fct"
    return res.merged(FieldResult({psi.n: chi}, name), name)


# -- representations -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Poincare(NFunction):
    """(U(a, lam) Psi)(theta) = exp(i sum a.p(theta_k)) Psi(theta - lam)."""

    a: tuple
    lam: float
    psi: NFunction
    mass: float = 1.0

    @property
    def n(self):
        return self.psi.n

    @property
    def smatrix(self):
        return self.psi.smatrix

    def __call__(self, pts):
        pts = _points(pts, self.n)
        a0, a1 = self.a
        # a.p(theta) = m (a0 cosh - a1 sinh)
        phase = np.sum(self.mass * (a0 * np.cosh(pts) - a1 * np.sinh(pts)), axis=1)
        return np.exp(1j * phase) * self.psi(pts - self.lam)

    def is_zero(self):
        return self.psi.is_zero()

    def network(self):
        ph = Phase(self.a, self.mass)
        mapping = {s: (s, complex(-self.lam)) for s in range(self.n)}
        extra = [Factor(ph, (v,)) for v in range(self.n)]
        return [t.moved(mapping).with_factors(*extra) for t in self.psi.network()]


@dataclass(frozen=True)
class Phase:
    """z -> exp(i a.p(z))."""

    a: tuple
    mass: float = 1.0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(1j * self.mass * (self.a[0] * np.cosh(z) - self.a[1] * np.sinh(z)))


def apply_poincare(a, lam: float, psi: NFunction, mass: float = 1.0) -> NFunction:
    return Poincare((float(a[0]), float(a[1])), float(lam), psi, mass)


def poincare_inverse(a, lam: float):
    """(a', lam') with U(a', lam') = U(a, lam)^{-1}."""
    ch, sh = math.cosh(lam), math.sinh(lam)
    # -Lambda_{-lam} a
    return (-(ch * a[0] - sh * a[1]), -(-sh * a[0] + ch * a[1])), -lam


@dataclass(frozen=True, eq=False)
class Reflected(NFunction):
    """(J Psi)(theta) = conj(Psi(conj theta_n, ..., conj theta_1))."""

    psi: NFunction

    @property
    def n(self):
        return self.psi.n

    @property
    def smatrix(self):
        return self.psi.smatrix

    def __call__(self, pts):
        pts = _points(pts, self.n)
        return np.conj(self.psi(np.conj(pts[:, ::-1])))

    def is_zero(self):
        return self.psi.is_zero()

    def network(self):
        n = self.n
        mapping = {s: (n - 1 - s, 0j) for s in range(n)}
        return [t.moved(mapping).conjugated() for t in self.psi.network()]


def apply_J(psi: NFunction, closed_form: bool = True) -> NFunction:
    """Reflection; closed-form vectors stay closed-form (atoms reversed, conjugated)."""
    if closed_form and isinstance(psi, WaveFunction):
        return WaveFunction(
            psi.smatrix,
            tuple(a.conjugate() for a in reversed(psi.atoms)),
            psi.cn_power,
            psi.cn_alpha,
            complex(psi.coeff).conjugate(),
        )
    if isinstance(psi, Reflected):
        return psi.psi
    return Reflected(psi)


def momentum_fusion_residual(theta: float, mass: float = 1.0) -> float:
    """|p(t + i pi/3) + p(t - i pi/3) - p(t)| in the max norm."""
    z = np.array([theta + SHIFT, theta - SHIFT, theta], dtype=complex)
    p0, p1 = mass * np.cosh(z), mass * np.sinh(z)
    return float(max(abs(p0[0] + p0[1] - p0[2]), abs(p1[0] + p1[1] - p1[2])))
