"""Real compactly supported test functions and their on-shell transforms.

A test function is a smooth bump ``b(y) = A exp(-1/(1 - |y - c|^2 / r^2))``
pulled back along a Poincare transformation,
``f(x) = b(Lambda_lam^{-1}(x - a))``. Transforms are

    f^{+/-}(z) = (1/2 pi) int f(x) exp(+/- i p(z).x) d^2x,
    p(z) = m (cosh z, sinh z),  x.y = x0 y0 - x1 y1,

computed by a tensor Gauss-Legendre rule on the bump's bounding square.
The rule is fixed once per function, so f^{+/-} is the exact transform
of a discrete measure inside the support and is entire in z.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import QuadratureBudgetExceeded, WedgeMismatch
from .quadrature import QuadratureSpec, gauss_legendre

WEDGE_MARGIN = 0.05
_SQRT2 = math.sqrt(2.0)


def momentum(z, mass: float = 1.0):
    """On-shell two-momentum p(z) = m (cosh z, sinh z) as a pair of arrays."""
    z = np.asarray(z, dtype=complex)
    return mass * np.cosh(z), mass * np.sinh(z)


def minkowski(p, x):
    """x.y = x0 y0 - x1 y1."""
    return p[0] * x[0] - p[1] * x[1]


def boost(lam: float, x):
    ch, sh = math.cosh(lam), math.sinh(lam)
    return np.array([ch * x[0] + sh * x[1], sh * x[0] + ch * x[1]])


@dataclass(frozen=True)
class Profile:
    """Rest-frame bump data; ``kg`` marks the Klein-Gordon image of the bump."""

    center: tuple
    radius: float
    amplitude: float
    kg: bool = False

    def density(self, y0, y1, mass: float):
        """Pointwise value in rest-frame coordinates (vectorized)."""
        r2 = self.radius**2
        d0 = np.asarray(y0, dtype=float) - self.center[0]
        d1 = np.asarray(y1, dtype=float) - self.center[1]
        q = (d0**2 + d1**2) / r2
        inside = q < 1.0
        s = np.where(inside, 1.0 - q, 1.0)
        E = np.where(inside, np.exp(-1.0 / s), 0.0)
        if not self.kg:
            return self.amplitude * E
        # second derivatives of exp(-1/s), s = 1 - q, per axis
        def d2(di):
            qi = 2.0 * di / r2
            qii = 2.0 / r2
            return E * (qi**2 / s**4 - qii / s**2 - 2.0 * qi**2 / s**3)

        return self.amplitude * np.where(inside, d2(d0) - d2(d1) + mass**2 * E, 0.0)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Real test function: a (possibly Klein-Gordon-differentiated) bump
    moved by translation ``shift`` and rapidity boost ``boost``.
    """

    profile: Profile
    wedge: str = "none"
    mass: float = 1.0
    shift: tuple = (0.0, 0.0)
    boost: float = 0.0
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    _state: dict = field(default_factory=dict, repr=False, compare=False)

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if self.wedge not in ("left", "right", "none"):
            raise ValueError(f"wedge must be left, right or none, got {self.wedge!r}")
        if self.profile.radius <= 0 or self.mass <= 0:
            raise ValueError("radius and mass must be positive")
        if self.wedge != "none" and not self.inside(self.wedge):
            raise WedgeMismatch(
                f"support of the bump is not inside the {self.wedge} wedge with margin {WEDGE_MARGIN}"
            )
        self._state.setdefault("lock", threading.Lock())
        self._state.setdefault("cache", {})

    # geometry -------------------------------------------------------------
    def lightcone_extent(self):
        """(min, max) of x0 + x1 and of x0 - x1 over the support."""
        c, r, lam = self.profile.center, self.profile.radius, self.boost
        a = self.shift
        cp, cm = c[0] + c[1], c[0] - c[1]
        ap, am = a[0] + a[1], a[0] - a[1]
        ep, em = math.exp(lam), math.exp(-lam)
        plus = (ap + ep * (cp - r * _SQRT2), ap + ep * (cp + r * _SQRT2))
        minus = (am + em * (cm - r * _SQRT2), am + em * (cm + r * _SQRT2))
        return plus, minus

    def inside(self, wedge: str, margin: float = WEDGE_MARGIN) -> bool:
        plus, minus = self.lightcone_extent()
        m = margin * _SQRT2
        if wedge == "left":
            return plus[1] <= -m and minus[0] >= m
        if wedge == "right":
            return plus[0] >= m and minus[1] <= -m
        return True

    def __call__(self, x0, x1):
        """Pointwise value f(x)."""
        x = np.array([np.asarray(x0, float) - self.shift[0], np.asarray(x1, float) - self.shift[1]])
        y = boost(-self.boost, x)
        return self.profile.density(y[0], y[1], self.mass)

    # transforms -----------------------------------------------------------
    def _rule(self):
        """The fixed (order, weights, nodes) of the 2D rule, chosen adaptively."""
        st = self._state
        if "rule" in st:
            return st["rule"]
        with st["lock"]:
            if "rule" not in st:
                st["rule"] = self._choose_rule()
        return st["rule"]

    def _build(self, order):
        # nodes on the light-cone square around the rest-frame disk, mapped
        # to x+ = x0 + x1 and x- = x0 - x1 of the moved function
        x, w = gauss_legendre(order)
        c, r = self.profile.center, self.profile.radius
        h = r * _SQRT2
        yp = (c[0] + c[1]) + h * x
        ym = (c[0] - c[1]) + h * x
        y0 = 0.5 * (yp[:, None] + ym[None, :])
        y1 = 0.5 * (yp[:, None] - ym[None, :])
        dens = self.profile.density(y0, y1, self.mass)
        W = np.outer(w, w) * (h * h * 0.5 / (2 * math.pi)) * dens
        a = self.shift
        xp = (a[0] + a[1]) + math.exp(self.boost) * yp
        xm = (a[0] - a[1]) + math.exp(-self.boost) * ym
        # the smooth density has low numerical rank; keep singular values
        # above roundoff so each value costs O(order * rank)
        U, sv, Vt = np.linalg.svd(W)
        keep = max(1, int(np.sum(sv > 1e-16 * max(sv[0], 1e-300))))
        return order, xp, xm, W, U[:, :keep] * sv[:keep], Vt[:keep].T

    def _raw(self, rule, sign, z):
        # p(z).x = (m/2)(e^z x- + e^-z x+)
        _, xp, xm, _, U, V = rule
        z = np.asarray(z, dtype=complex)
        k = 0.5j * sign * self.mass
        Ep = np.exp(np.multiply.outer(k * np.exp(-z), xp))
        Em = np.exp(np.multiply.outer(k * np.exp(z), xm))
        return np.einsum("mk,mk->m", Ep @ U, Em @ V)

    def _probes(self):
        T = self.quad.fourier_probe_max
        t = np.linspace(-T, T, 29)
        shifts = [0.0]
        if self.wedge == "left":
            shifts += [math.pi / 3, 2 * math.pi / 3]
        elif self.wedge == "right":
            shifts += [-math.pi / 3, -2 * math.pi / 3]
        return np.concatenate([t + 1j * s for s in shifts])

    def _choose_rule(self):
        q = self.quad
        order = q.fourier_start_order
        prev = self._build(order)
        scale = float(np.sum(np.abs(prev[3])))
        if scale == 0.0:
            return prev
        z = self._probes()
        vals = {s: self._raw(prev, s, z if s > 0 else np.conj(z)) for s in (1, -1)}
        while order < q.fourier_max_order:
            order *= 2
            cur = self._build(order)
            new = {s: self._raw(cur, s, z if s > 0 else np.conj(z)) for s in (1, -1)}
            change = max(np.max(np.abs(new[s] - vals[s])) for s in (1, -1))
            if change <= q.fourier_rtol * scale:
                return prev
            prev, vals = cur, new
        raise QuadratureBudgetExceeded(
            f"2D transform did not converge to {q.fourier_rtol:g} at order {order}"
        )

    @property
    def rule_order(self) -> int:
        return self._rule()[0]

    def transform_values(self, sign: int, z):
        """Vectorized f^{sign}(z) with a thread-safe memo cache."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        uniq, inv = np.unique(flat, return_inverse=True)
        st = self._state
        cache = st["cache"]
        out = np.empty(uniq.shape, dtype=complex)
        with st["lock"]:
            hits = [cache.get((sign, v)) for v in uniq.tolist()]
        missing = np.array([h is None for h in hits], dtype=bool)
        if missing.any():
            rule = self._rule()
            todo = uniq[missing]
            vals = np.concatenate(
                [self._raw(rule, sign, todo[i : i + 2048]) for i in range(0, len(todo), 2048)]
            )
            with st["lock"]:
                if len(cache) < 2_000_000:
                    for k, v in zip(todo.tolist(), vals.tolist()):
                        cache[(sign, k)] = v
            out[missing] = vals
        if (~missing).any():
            out[~missing] = np.array([h for h in hits if h is not None], dtype=complex)
        return out[inv].reshape(z.shape)

    def plus(self, z):
        return self.transform_values(+1, z)

    def minus(self, z):
        return self.transform_values(-1, z)

    def l1_scale(self) -> float:
        """(1/2 pi) int |f|, a bound for |f^{+/-}| on the real line."""
        return float(np.sum(np.abs(self._rule()[3])))


def make_bump(center, radius, amplitude=1.0, wedge="none", mass=1.0, quad=None) -> TestFunction:
    prof = Profile(tuple(float(v) for v in center), float(radius), float(amplitude))
    return TestFunction(prof, wedge, float(mass), quad=quad or QuadratureSpec())


def fourier_pm(f: TestFunction, sign, z):
    """f^+(z) for sign '+' or +1, f^-(z) for '-' or -1."""
    s = {"+": 1, "-": -1, 1: 1, -1: -1}[sign]
    v = f.transform_values(s, z)
    return complex(v) if np.ndim(z) == 0 else v


def _wedge_after(f: TestFunction, new: TestFunction) -> str:
    for w in ("left", "right"):
        if new.inside(w):
            return w
    return "none"


def transform(f: TestFunction, a=(0.0, 0.0), lam: float = 0.0) -> TestFunction:
    """x -> f(Lambda_lam^{-1}(x - a)), composing with any existing motion."""
    a = np.asarray(a, dtype=float)
    new_shift = tuple(a + boost(lam, np.asarray(f.shift, float)))
    g = TestFunction(f.profile, "none", f.mass, tuple(float(v) for v in new_shift), f.boost + lam, f.quad)
    return replace(g, wedge=_wedge_after(f, g), _state={})


def reflect(f: TestFunction) -> TestFunction:
    """x -> f(-x); swaps the left and right wedges."""
    prof = replace(f.profile, center=(-f.profile.center[0], -f.profile.center[1]))
    wedge = {"left": "right", "right": "left", "none": "none"}[f.wedge]
    return TestFunction(prof, wedge, f.mass, (-f.shift[0], -f.shift[1]), f.boost, f.quad)


def klein_gordon_apply(f: TestFunction) -> TestFunction:
    """(box + m^2) f in closed form; box is Lorentz invariant so the motion is kept."""
    if f.profile.kg:
        raise ValueError("the Klein-Gordon operator is applied to plain bumps only")
    prof = replace(f.profile, kg=True)
    return TestFunction(prof, f.wedge, f.mass, f.shift, f.boost, f.quad)


def scaled(f: TestFunction, factor: float) -> TestFunction:
    """The function factor * f with the same support."""
    prof = replace(f.profile, amplitude=f.profile.amplitude * factor)
    return TestFunction(prof, f.wedge, f.mass, f.shift, f.boost, f.quad)
