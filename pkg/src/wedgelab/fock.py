"""S-symmetric n-particle wavefunctions in closed form.

Vectors are evaluators: objects with a particle number ``n`` and a
vectorized ``__call__`` taking an ``(m, n)`` array of complex rapidities.
The basic closed form is

    Psi(theta) = coeff * C_n(theta)^p * (1/n!) sum_sigma S^sigma(theta) prod_k a_k(theta_sigma(k))

which is ``C_n^p P_n (a_1 x ... x a_n)`` with the permutation action
``(D(sigma) Psi)(theta) = S^sigma(theta) Psi(theta^sigma)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidParameter,
    MismatchedParticleNumber,
    TooManyParticles,
    UncancelledPole,
)
from .network import Factor, Term, evaluate_terms, pair_sum, rule_policy
from .quadrature import QuadratureSpec, gaussian_tail_bound, tensor_integrate
from .smatrix import POLE_T, SMatrix

DEFAULT_CN_ALPHA = -2.0


def default_cn_power(n: int) -> int:
    """(n-2)! multipliers, and at least one from n = 2 on."""
    return 0 if n < 2 else max(1, math.factorial(n - 2))


@dataclass(frozen=True)
class Atom:
    """The entire function exp(-(z - mu)^2 / sigma^2 + beta z)."""

    mu: float = 0.0
    sigma: float = 1.0
    beta: complex = 0j

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameter(f"atom width must be positive, got {self.sigma}")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(-((z - self.mu) ** 2) / self.sigma**2 + self.beta * z)

    def conjugate(self) -> "Atom":
        """The atom z -> conj(a(conj z))."""
        return Atom(self.mu, self.sigma, complex(self.beta).conjugate())

    def effective_center(self) -> float:
        return self.mu + 0.5 * complex(self.beta).real * self.sigma**2


def gaussian_overlap(a: Atom, b: Atom) -> complex:
    """Closed form of int conj(a(t)) b(t) dt over the real line."""
    A = 1 / a.sigma**2 + 1 / b.sigma**2
    B = 2 * a.mu / a.sigma**2 + 2 * b.mu / b.sigma**2 + complex(a.beta).conjugate() + b.beta
    C = -(a.mu**2) / a.sigma**2 - b.mu**2 / b.sigma**2
    return complex(np.sqrt(np.pi / A) * np.exp(B * B / (4 * A) + C))


# -- permutations ----------------------------------------------------------


def inversions(sigma) -> list[tuple[int, int]]:
    """Pairs (a, b), a > b, of slots whose S-factor S(theta_a - theta_b) enters S^sigma."""
    n = len(sigma)
    return [
        (sigma[j], sigma[k])
        for j in range(n)
        for k in range(j + 1, n)
        if sigma[j] > sigma[k]
    ]


def s_sigma_factor(S: SMatrix, sigma, theta) -> complex:
    """prod over j < k with sigma(j) > sigma(k) of S(theta_sigma(j) - theta_sigma(k))."""
    theta = np.asarray(theta, dtype=complex)
    out = np.ones(theta.shape[:-1], dtype=complex) if theta.ndim > 1 else 1.0 + 0j
    for a, b in inversions(sigma):
        out = out * S(theta[..., a] - theta[..., b])
    return out


def cn_pair(d, alpha: float):
    """One pair factor of C_n, written as (d^2 + pi^2/9) / (d^2 + alpha^2)."""
    d = np.asarray(d, dtype=complex)
    return (d * d + (math.pi / 3) ** 2) / (d * d + alpha * alpha)


def cn_value(theta, alpha: float):
    theta = np.asarray(theta, dtype=complex)
    n = theta.shape[-1]
    out = np.ones(theta.shape[:-1], dtype=complex)
    for k in range(n):
        for j in range(k + 1, n):
            out = out * cn_pair(theta[..., j] - theta[..., k], alpha)
    return out


@dataclass(frozen=True)
class PairFactor:
    """Per-pair factor of a closed-form vector with C_n^p folded in.

    ``inverted`` gives S(d) c(d)^p, evaluated with the S pole at i pi/3
    cancelled against the zero of c; otherwise c(d)^p.
    """

    S: SMatrix
    power: int
    alpha: float
    inverted: bool

    def __call__(self, d):
        d = np.asarray(d, dtype=complex)
        S, p, al = self.S, self.power, self.alpha
        r = S.exclusion_radius
        if p == 0:
            if not self.inverted:
                return np.ones_like(d)
            if np.any(S.near_pole(d)):
                raise UncancelledPole("S-factor pole without a C_n multiplier")
            return S.raw(d)
        if np.any(np.abs(d * d + al * al) < r):
            raise UncancelledPole("evaluation at a pole of C_n")
        c = cn_pair(d, al)
        rest = c ** (p - 1) if p > 1 else np.ones_like(d)
        if not self.inverted:
            return c * rest
        near_t = np.abs(d - POLE_T) < r
        if np.any(S.near_pole(d) & ~near_t):
            raise UncancelledPole("S-factor pole not matched by a zero of C_n")
        return S.times_distance(d, POLE_T) * (d + POLE_T) / (d * d + al * al) * rest


# -- evaluators ------------------------------------------------------------


class NFunction:
    """Base class for vectorized n-particle evaluators."""

    n: int
    smatrix: SMatrix

    def __call__(self, pts) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def at(self, *theta) -> complex:
        """Scalar convenience evaluation at one point."""
        pts = np.array([theta], dtype=complex).reshape(1, self.n)
        return complex(self(pts)[0])

    def scaled(self, c: complex) -> "NFunction":
        return LinearCombination(((complex(c), self),))

    def __add__(self, other):
        return LinearCombination(((1.0, self), (1.0, other)))

    def __sub__(self, other):
        return LinearCombination(((1.0, self), (-1.0, other)))

    def is_zero(self) -> bool:
        return False

    def network(self) -> list:
        """The vector as a list of factor networks over slots 0..n-1."""
        raise NotImplementedError(f"{type(self).__name__} has no network form")

    def evaluate_network(self, pts) -> np.ndarray:
        """Pointwise evaluation through ``terms()``; an oracle for ``__call__``."""
        return evaluate_terms(self.network(), _points(pts, self.n))


def _points(pts, n):
    pts = np.asarray(pts, dtype=complex)
    if pts.ndim == 1:
        pts = pts.reshape(-1, n) if n else pts.reshape(-1, 0)
    if pts.shape[-1] != n:
        raise MismatchedParticleNumber(f"expected {n} rapidities per point, got {pts.shape[-1]}")
    return pts


@dataclass(frozen=True, eq=False)
class WaveFunction(NFunction):
    """Closed-form C_n^p P_n(atoms), times a complex coefficient."""

    smatrix: SMatrix
    atoms: tuple
    cn_power: int = 0
    cn_alpha: float = DEFAULT_CN_ALPHA
    coeff: complex = 1.0 + 0j

    @property
    def n(self) -> int:
        return len(self.atoms)

    def pair_factors(self):
        inv = PairFactor(self.smatrix, self.cn_power, self.cn_alpha, True)
        plain = PairFactor(self.smatrix, self.cn_power, self.cn_alpha, False)
        return inv, plain

    def network(self):
        n = self.n
        if n == 0:
            return [Term(complex(self.coeff), ())]
        inv_f, plain_f = self.pair_factors()
        c = complex(self.coeff) / math.factorial(n)
        out = []
        for sigma in itertools.permutations(range(n)):
            inv = set(inversions(sigma))
            facs = [Factor(self.atoms[k], (sigma[k],), localizing=True) for k in range(n)]
            for b in range(n):
                for a in range(b + 1, n):
                    if (a, b) in inv:
                        facs.append(Factor(inv_f, (a, b)))
                    elif self.cn_power:
                        facs.append(Factor(plain_f, (a, b)))
            out.append(Term(c, tuple(facs)))
        return out

    def __call__(self, pts):
        pts = _points(pts, self.n)
        m, n = pts.shape
        if n == 0:
            return np.full(m, self.coeff, dtype=complex)
        av = [atom(pts) for atom in self.atoms]  # av[k][:, j] = a_k(theta_j)
        inv_f, plain_f = self.pair_factors()
        pairs = {}
        for b in range(n):
            for a in range(b + 1, n):
                d = pts[:, a] - pts[:, b]
                pairs[(a, b)] = (inv_f(d), plain_f(d) if self.cn_power else None)
        total = np.zeros(m, dtype=complex)
        for sigma in itertools.permutations(range(n)):
            term = av[0][:, sigma[0]].copy()
            for k in range(1, n):
                term *= av[k][:, sigma[k]]
            inv = set(inversions(sigma))
            for key, (A, B) in pairs.items():
                if key in inv:
                    term *= A
                elif B is not None:
                    term *= B
            total += term
        return total * (self.coeff / math.factorial(n))

    def scaled(self, c):
        return WaveFunction(self.smatrix, self.atoms, self.cn_power, self.cn_alpha, self.coeff * c)

    def is_zero(self) -> bool:
        return self.coeff == 0


def symmetrize(
    S: SMatrix,
    atoms,
    cn_power: int | None = None,
    cn_alpha: float = DEFAULT_CN_ALPHA,
    coeff: complex = 1.0,
    max_particles: int = 4,
) -> WaveFunction:
    """Build C_n^p P_n(atoms) as a closed-form evaluator."""
    atoms = tuple(atoms)
    n = len(atoms)
    if n > max_particles:
        raise TooManyParticles(f"{n} particles exceeds the maximum {max_particles}")
    if not (cn_alpha < 0 or cn_alpha > math.pi):
        raise InvalidParameter(f"cn_alpha must be < 0 or > pi, got {cn_alpha}")
    if cn_power is None:
        cn_power = default_cn_power(n)
    if cn_power < 0:
        raise InvalidParameter("cn_power must be nonnegative")
    return WaveFunction(S, atoms, int(cn_power), float(cn_alpha), complex(coeff))


def vacuum(S: SMatrix, coeff: complex = 1.0) -> WaveFunction:
    return WaveFunction(S, (), 0, DEFAULT_CN_ALPHA, complex(coeff))


def eval_wf(psi: NFunction, theta) -> complex:
    """Evaluate at a single rapidity tuple (or an (m, n) batch)."""
    arr = np.asarray(theta, dtype=complex)
    if arr.ndim <= 1:
        return complex(psi(arr.reshape(1, psi.n))[0])
    return psi(arr)


@dataclass(frozen=True, eq=False)
class Zero(NFunction):
    smatrix: SMatrix
    n: int

    def __call__(self, pts):
        pts = _points(pts, self.n)
        return np.zeros(pts.shape[0], dtype=complex)

    def is_zero(self):
        return True

    def network(self):
        return []


@dataclass(frozen=True, eq=False)
class LinearCombination(NFunction):
    """sum_i c_i F_i with all F_i of the same particle number."""

    terms: tuple

    def __post_init__(self):
        ns = {F.n for _, F in self.terms}
        if len(ns) != 1:
            raise MismatchedParticleNumber(f"cannot add vectors with particle numbers {sorted(ns)}")

    @property
    def n(self):
        return self.terms[0][1].n

    @property
    def smatrix(self):
        return self.terms[0][1].smatrix

    def __call__(self, pts):
        pts = _points(pts, self.n)
        out = np.zeros(pts.shape[0], dtype=complex)
        for c, F in self.terms:
            if c != 0 and not F.is_zero():
                out += c * F(pts)
        return out

    def is_zero(self):
        return all(c == 0 or F.is_zero() for c, F in self.terms)

    def network(self):
        out = []
        for c, F in self.terms:
            if c != 0 and not F.is_zero():
                out.extend(t.scaled(c) for t in F.network())
        return out


@dataclass(frozen=True, eq=False)
class TensorProduct(NFunction):
    """(xi x Phi)(t, lam) = xi(t) Phi(lam); not S-symmetric in general."""

    xi: object
    phi: NFunction

    @property
    def n(self):
        return self.phi.n + 1

    @property
    def smatrix(self):
        return self.phi.smatrix

    localizing: bool = False

    def __call__(self, pts):
        pts = _points(pts, self.n)
        return self.xi(pts[:, 0]) * self.phi(pts[:, 1:])

    def network(self):
        mapping = {s: (s + 1, 0j) for s in range(self.phi.n)}
        head = Factor(self.xi, (0,), localizing=self.localizing)
        return [t.moved(mapping).with_factors(head) for t in self.phi.network()]


@dataclass(frozen=True, eq=False)
class OneParticle(NFunction):
    """Wraps a one-variable callable as a one-particle vector."""

    smatrix: SMatrix
    fn: object

    n = 1

    localizing: bool = False

    def __call__(self, pts):
        pts = _points(pts, 1)
        return np.asarray(self.fn(pts[:, 0]), dtype=complex)

    def network(self):
        return [Term(1.0 + 0j, (Factor(self.fn, (0,), localizing=self.localizing),))]


# -- Fock vectors ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FockVector:
    """A finite-particle vector: particle number -> evaluator."""

    components: dict = field(default_factory=dict)

    @classmethod
    def of(cls, *fs: NFunction) -> "FockVector":
        comp: dict = {}
        for F in fs:
            if F is None or F.is_zero():
                continue
            comp[F.n] = comp[F.n] + F if F.n in comp else F
        return cls(comp)

    def __getitem__(self, n):
        return self.components.get(n)

    def numbers(self):
        return sorted(self.components)

    @property
    def smatrix(self):
        return next(iter(self.components.values())).smatrix


# -- inner products --------------------------------------------------------


def default_rules(n: int, q: QuadratureSpec):
    return [q.coarse()] * n


def inner_product(
    phi: NFunction, psi: NFunction, q: QuadratureSpec | None = None, rules=None, method: str = "network"
) -> complex:
    """int conj(Phi) Psi over [-Theta, Theta]^n.

    ``method="network"`` contracts the factor networks; ``"pointwise"``
    evaluates both vectors on a tensor grid (``rules``, coarse by default).
    """
    q = q or QuadratureSpec()
    if phi.n != psi.n:
        raise MismatchedParticleNumber(f"<{phi.n}-particle, {psi.n}-particle>")
    if phi.is_zero() or psi.is_zero():
        return 0j
    if method == "network":
        chooser = rule_policy(phi.n, q.coarse(), q.fine()) if rules is None else (lambda _t: dict(enumerate(rules)))
        return pair_sum(phi.network(), psi.network(), chooser)
    if method != "pointwise":
        raise ValueError(f"unknown method {method!r}")
    rules = rules or default_rules(phi.n, q)
    return tensor_integrate(lambda p: np.conj(phi(p)) * psi(p), rules, q.chunk)


def fock_inner(Phi: FockVector, Psi: FockVector, q: QuadratureSpec | None = None) -> complex:
    return sum(
        (inner_product(Phi[n], Psi[n], q) for n in Phi.numbers() if Psi[n] is not None),
        0j,
    )


def tail_bound(psi: NFunction, q: QuadratureSpec | None = None) -> float:
    """Gaussian mass outside the truncation window for closed-form vectors."""
    q = q or QuadratureSpec()
    if not isinstance(psi, WaveFunction) or psi.n == 0:
        return 0.0
    centers = [a.effective_center() for a in psi.atoms]
    widths = [a.sigma for a in psi.atoms]
    return gaussian_tail_bound(centers, widths, q.theta_max)


def norm(psi: NFunction, q: QuadratureSpec | None = None) -> float:
    return math.sqrt(max(0.0, inner_product(psi, psi, q).real))
