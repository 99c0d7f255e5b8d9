"""Scalar two-particle S-matrices with bound-state poles.

Every S-matrix is a finite product of three kinds of factors:

* ``f_A(z) = tanh((z + A pi i)/2) / tanh((z - A pi i)/2)``, written in the
  equivalent rational form ``(sinh z + i sin(A pi)) / (sinh z - i sin(A pi))``;
* the singular factor ``exp(i a (e^z - e^-z))`` with ``a >= 0``;
* Blaschke factors ``(e^z - e^alpha) / (e^z - e^conj(alpha))``.

Poles of each factor are known in closed form, which gives a regularized
evaluation of ``S(z) (z - p)`` near any pole ``p`` and an analytic residue
used to cross-check the contour quadrature.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ContourInconsistent,
    EvenFactorCount,
    InvalidParameter,
    NotAPole,
    OrbitOverflow,
    PoleProximity,
)
from .quadrature import QuadratureSpec, circle_points

PI = math.pi
TWO_PI_I = 2j * PI
POLE_T = 1j * PI / 3
POLE_S = 2j * PI / 3
EXCLUSION_RADIUS = 1e-6
_MATCH = 1e-9


def sinhc(w):
    """sinh(w)/w, entire and accurate near 0 (complex-safe)."""
    return np.sinc(1j * np.asarray(w) / np.pi)


def _wrap(z: complex) -> complex:
    """Representative of z modulo 2 pi i with imaginary part in (-pi, pi]."""
    im = (z.imag + PI) % (2 * PI) - PI
    if abs(im + PI) < 1e-13:
        im = PI
    return complex(z.real, im)


def _nearest_image(z, p):
    """The translate of p by a multiple of 2 pi i closest to z (elementwise)."""
    k = np.round((np.imag(z) - p.imag) / (2 * PI))
    return p + TWO_PI_I * k


# -- factors ---------------------------------------------------------------


@dataclass(frozen=True)
class FAFactor:
    A: float

    def value(self, z):
        c = 1j * math.sin(self.A * PI)
        s = np.sinh(z)
        return (s + c) / (s - c)

    def poles(self):
        return [_wrap(1j * PI * self.A), _wrap(1j * PI * (1 - self.A))]

    def zeros(self):
        return [_wrap(-1j * PI * self.A), _wrap(1j * PI * (1 + self.A))]

    def times_distance(self, z, p):
        # sinh z - sinh p = 2 cosh((z+p)/2) sinh((z-p)/2)
        c = 1j * math.sin(self.A * PI)
        pz = _nearest_image(z, p)
        return (np.sinh(z) + c) / (np.cosh(0.5 * (z + pz)) * sinhc(0.5 * (z - pz)))


@dataclass(frozen=True)
class SingularFactor:
    a: float

    def value(self, z):
        return np.exp(2j * self.a * np.sinh(z))

    def poles(self):
        return []

    def zeros(self):
        return []


@dataclass(frozen=True)
class BlaschkeFactor:
    alpha: complex

    def value(self, z):
        ez = np.exp(z)
        return (ez - cmath.exp(self.alpha)) / (ez - cmath.exp(self.alpha.conjugate()))

    def poles(self):
        return [_wrap(self.alpha.conjugate())]

    def zeros(self):
        return [_wrap(self.alpha)]

    def times_distance(self, z, p):
        pz = _nearest_image(z, p)
        num = np.exp(z) - cmath.exp(self.alpha)
        return num / (np.exp(0.5 * (z + pz)) * sinhc(0.5 * (z - pz)))


# -- the S-matrix ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SMatrix:
    """Immutable, certified two-particle scattering function.

    ``poles`` lists the poles inside the physical strip. ``singularities``
    lists every pole of the factorization within one period.
    """

    kind: str
    fA_params: tuple
    singular_a: float = 0.0
    blaschke_zeros: tuple = ()
    poles: tuple = ()
    residue_R: complex = 0j
    eta: complex = 0j
    build_params: dict = field(default_factory=dict)
    exclusion_radius: float = EXCLUSION_RADIUS

    # construction helpers -------------------------------------------------
    @property
    def factors(self):
        facs = [FAFactor(A) for A in self.fA_params]
        if self.singular_a:
            facs.append(SingularFactor(self.singular_a))
        facs.extend(BlaschkeFactor(complex(a)) for a in self.blaschke_zeros)
        return facs

    @property
    def singularities(self) -> list[complex]:
        """Net poles modulo 2 pi i after zero/pole cancellation."""
        return [p for p, order in _net_orders(self.factors).items() if order > 0]

    # evaluation -----------------------------------------------------------
    def raw(self, z):
        """Product of factor values with no pole guard (vectorized)."""
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for fac in self.factors:
            out = out * fac.value(z)
        return out

    def __call__(self, z):
        return eval(self, z)

    def near_pole(self, z, radius: float | None = None) -> np.ndarray:
        """Boolean mask: z within ``radius`` of any pole (any period)."""
        r = self.exclusion_radius if radius is None else radius
        z = np.asarray(z, dtype=complex)
        mask = np.zeros(z.shape, dtype=bool)
        for p in self.singularities:
            mask |= np.abs(z - _nearest_image(z, p)) < r
        return mask

    def times_distance(self, z, pole: complex):
        """Regularized ``S(z) (z - pole')`` with pole' the nearest 2 pi i image.

        The factor carrying the pole is evaluated in its cancelled form, so
        the value is smooth across the pole and equals the residue there.
        """
        z = np.asarray(z, dtype=complex)
        pole = _wrap(complex(pole))
        out = np.ones_like(z)
        owner = None
        for fac in self.factors:
            if owner is None and any(abs(pole - p) < _MATCH for p in fac.poles()):
                owner = fac
                out = out * fac.times_distance(z, pole)
            else:
                out = out * fac.value(z)
        if owner is None:
            raise NotAPole(f"{pole} is not a pole of any factor")
        return out

    def analytic_residue(self, pole: complex) -> complex:
        """Limit of the regularized evaluation at the pole."""
        return complex(self.times_distance(np.array([complex(pole)]), pole)[0])

    # serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        c = lambda z: [float(complex(z).real), float(complex(z).imag)]
        return {
            "kind": self.kind,
            "fA_params": [float(a) for a in self.fA_params],
            "singular_a": float(self.singular_a),
            "blaschke_zeros": [c(z) for z in self.blaschke_zeros],
            "poles": [{"location": c(p), "order": int(o)} for p, o in self.poles],
            "residue_R": c(self.residue_R),
            "eta": c(self.eta),
            "build_params": self.build_params,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict, recertify: bool = True) -> "SMatrix":
        z = lambda v: complex(v[0], v[1])
        S = cls(
            kind=doc["kind"],
            fA_params=tuple(float(a) for a in doc["fA_params"]),
            singular_a=float(doc.get("singular_a", 0.0)),
            blaschke_zeros=tuple(z(v) for v in doc.get("blaschke_zeros", [])),
            poles=tuple((z(p["location"]), int(p["order"])) for p in doc.get("poles", [])),
            residue_R=z(doc.get("residue_R", [0, 0])),
            eta=z(doc.get("eta", [0, 0])),
            build_params=dict(doc.get("build_params", {})),
        )
        return _certify(S) if recertify else S

    @classmethod
    def from_json(cls, text: str, recertify: bool = True) -> "SMatrix":
        return cls.from_dict(json.loads(text), recertify)


def eval(S: SMatrix, z):
    """Evaluate S at z (scalar or array), refusing points near a pole."""
    arr = np.asarray(z, dtype=complex)
    bad = S.near_pole(arr)
    if np.any(bad):
        where = complex(arr[bad].ravel()[0]) if arr.ndim else complex(arr)
        raise PoleProximity(f"S evaluated within {S.exclusion_radius:g} of a pole at {where}")
    out = S.raw(arr)
    return complex(out) if np.ndim(z) == 0 else out


def _net_orders(factors) -> dict:
    """Map pole/zero location (mod 2 pi i) to net order (+ pole, - zero)."""
    orders: dict[complex, int] = {}

    def bump(loc, d):
        for key in orders:
            if abs(key - loc) < _MATCH:
                orders[key] += d
                return
        orders[loc] = d

    for fac in factors:
        for p in fac.poles():
            bump(p, +1)
        for q in fac.zeros():
            bump(q, -1)
    return {k: v for k, v in orders.items() if v != 0}


def strip_poles(S: SMatrix) -> list[tuple[complex, int]]:
    """Net poles with imaginary part in the open interval (0, pi)."""
    out = []
    for loc, order in _net_orders(S.factors).items():
        if order > 0 and 1e-12 < loc.imag < PI - 1e-12:
            out.append((loc, order))
    return sorted(out, key=lambda t: (t[0].imag, t[0].real))


# -- residues --------------------------------------------------------------


def contour_residue(S: SMatrix, z0: complex, radius: float, nodes: int) -> complex:
    """(1/2 pi i) times the circle integral of S, by the trapezoid rule."""
    pts, ph = circle_points(z0, radius, nodes)
    return complex(np.mean(S.raw(pts) * radius * ph))


def residue(S: SMatrix, z0: complex, q: QuadratureSpec | None = None) -> complex:
    """Residue of S at a declared simple pole via two-radius contour quadrature."""
    q = q or QuadratureSpec()
    z0 = complex(z0)
    declared = [p for p, _ in S.poles] or [p for p, _ in strip_poles(S)]
    if not any(abs(z0 - p) < _MATCH for p in declared):
        raise NotAPole(f"{z0} is not a declared pole")
    others = [p for p in _net_orders(S.factors) if abs(p - _wrap(z0)) > _MATCH]
    clearance = min((abs(p - z0) for p in others), default=math.inf)
    radii = [r for r in q.residue_radii if r < 0.5 * clearance]
    if len(radii) < 2:
        raise ContourInconsistent("no pair of contour radii fits between neighbouring singularities")
    vals = [contour_residue(S, z0, r, q.residue_nodes) for r in radii[:2]]
    if abs(vals[0] - vals[1]) > q.residue_rtol * max(abs(vals[0]), abs(vals[1]), 1e-300):
        raise ContourInconsistent(f"contour residues disagree: {vals[0]} vs {vals[1]}")
    # the smaller circle has the smaller higher-order aliasing
    return vals[1]


# -- builders --------------------------------------------------------------


def elementary(A: float) -> SMatrix:
    """The single factor f_A, certified where possible (residue may be negative)."""
    S = SMatrix(kind="elementary_fA", fA_params=(float(A),), build_params={"A": float(A)})
    return _certify(S, strict=False)


def product(*mats: SMatrix) -> SMatrix:
    """Pointwise product of S-matrices, certified afterwards."""
    fa, zs, a = [], [], 0.0
    for M in mats:
        fa.extend(M.fA_params)
        zs.extend(M.blaschke_zeros)
        a += M.singular_a
    S = SMatrix(kind="product", fA_params=tuple(fa), singular_a=a, blaschke_zeros=tuple(zs))
    return _certify(S, strict=False)


def _check_B(B) -> float:
    try:
        B = float(B)
    except (TypeError, ValueError) as exc:
        raise InvalidParameter(f"B must be a real number, got {B!r}") from exc
    if not (0.0 < B < 2.0) or not math.isfinite(B):
        raise InvalidParameter(f"B must lie in (0, 2), got {B}")
    if abs(B - 1.0) < 1e-12:
        raise InvalidParameter("B = 1 is excluded: S_1 = f_{-2/3} has no pole in the physical strip")
    return B


def _bd_params(B: float) -> list[float]:
    return [B / 3 - 2 / 3, -B / 3]


def build_bullough_dodd(B: float) -> SMatrix:
    """The Bullough-Dodd S-matrix f_{2/3} f_{B/3-2/3} f_{-B/3}."""
    B = _check_B(B)
    S = SMatrix(
        kind="bullough_dodd",
        fA_params=tuple([2 / 3] + _bd_params(B)),
        build_params={"B": B},
    )
    return _certify(S)


def complete_orbit(alpha: complex) -> list[complex]:
    """Close a Blaschke zero under the required reflections and bootstrap shift."""
    alpha = complex(alpha)
    if not (0.0 < alpha.imag < PI):
        raise OrbitOverflow(f"zero {alpha} lies outside the open strip R + i(0, pi)")
    orbit: list[complex] = []
    todo = [alpha]
    while todo:
        z = todo.pop()
        if any(abs(z - w) < 1e-12 for w in orbit):
            continue
        if not (1e-12 < z.imag < PI - 1e-12):
            raise OrbitOverflow(f"orbit of {alpha} leaves the strip at {z}")
        orbit.append(z)
        todo.append(-z.conjugate())
        todo.append(1j * PI - z)
        if z.imag < PI / 3 - 1e-12:
            todo.append(z + 1j * PI / 3)
        if len(orbit) > 64:
            raise OrbitOverflow(f"orbit of {alpha} does not close")
    return sorted(orbit, key=lambda w: (w.imag, w.real))


def build_general(B_list: Sequence[float], a: float = 0.0, extra_zero_orbits: Iterable[complex] = ()) -> SMatrix:
    """The general family f_{2/3} prod_k f_{B_k/3-2/3} f_{-B_k/3} S_inf S_Blaschke."""
    B_list = [_check_B(B) for B in B_list]
    if len(B_list) % 2 == 0:
        raise EvenFactorCount(
            f"the number of B factors must be odd for a positive residue, got {len(B_list)}"
        )
    a = float(a)
    if not (a >= 0.0 and math.isfinite(a)):
        raise InvalidParameter(f"singular parameter a must be >= 0, got {a}")
    zeros: list[complex] = []
    for alpha in extra_zero_orbits:
        for z in complete_orbit(complex(alpha)):
            if not any(abs(z - w) < 1e-12 for w in zeros):
                zeros.append(z)
    fa = [2 / 3]
    for B in B_list:
        fa.extend(_bd_params(B))
    S = SMatrix(
        kind="general_family",
        fA_params=tuple(fa),
        singular_a=a,
        blaschke_zeros=tuple(zeros),
        build_params={
            "B_list": B_list,
            "a": a,
            "extra_zero_orbits": [[complex(z).real, complex(z).imag] for z in extra_zero_orbits],
        },
    )
    return _certify(S)


def _certify(S: SMatrix, strict: bool = True, q: QuadratureSpec | None = None) -> SMatrix:
    """Attach poles, the residue R and eta computed by contour quadrature."""
    poles = tuple(strip_poles(S))
    locs = [p for p, _ in poles]
    has_s = any(abs(p - POLE_S) < _MATCH for p in locs)
    if strict and not (
        len(poles) == 2
        and all(o == 1 for _, o in poles)
        and has_s
        and any(abs(p - POLE_T) < _MATCH for p in locs)
    ):
        raise InvalidParameter(f"physical-strip poles must be simple at pi i/3 and 2 pi i/3, found {poles}")
    R = 0j
    if has_s:
        R = residue(SMatrix(S.kind, S.fA_params, S.singular_a, S.blaschke_zeros, poles), POLE_S, q)
        R = complex(R)
    eta = 1j * math.sqrt(2 * PI * abs(R))
    return SMatrix(
        kind=S.kind,
        fA_params=S.fA_params,
        singular_a=S.singular_a,
        blaschke_zeros=S.blaschke_zeros,
        poles=poles,
        residue_R=R,
        eta=eta,
        build_params=S.build_params,
        exclusion_radius=S.exclusion_radius,
    )


# -- axioms ----------------------------------------------------------------

AXIOMS = ("S1", "S2", "S3", "S4", "S5", "S6")
AXIOM_NAMES = {
    "S1": "unitarity",
    "S2": "hermitian analyticity",
    "S3": "crossing symmetry",
    "S4": "bootstrap equation",
    "S5": "positive residue",
    "S6": "value at zero",
}


@dataclass
class AxiomReport:
    residuals: dict
    tolerance: float
    grid: dict
    passed: dict
    notes: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(self.passed.values())

    def entries(self) -> list[dict]:
        return [
            {
                "name": f"axiom {k} ({AXIOM_NAMES[k]})",
                "residual": float(self.residuals[k]),
                "scale": 1.0,
                "tolerance": self.tolerance,
                "pass": bool(self.passed[k]),
            }
            for k in AXIOMS
        ]


def check_axioms(
    S: SMatrix,
    grid: QuadratureSpec | None = None,
    points: int = 200,
    window: float = 8.0,
    tolerance: float = 1e-10,
) -> AxiomReport:
    """Residuals of all six axioms on a uniform real grid; never raises."""
    if grid is not None:
        window = grid.extra.get("axiom_window", window)
        points = grid.extra.get("axiom_points", points)
        tolerance = grid.extra.get("axiom_tolerance", tolerance)
    t = np.linspace(-window, window, points)
    res, notes = {}, {}
    with np.errstate(all="ignore"):
        s = S.raw(t)
        res["S1"] = np.max(np.abs(s * np.conj(s) - 1))
        res["S2"] = np.max(np.abs(S.raw(-t) * s - 1))
        res["S3"] = np.max(np.abs(s - S.raw(1j * PI - t)))
        res["S4"] = np.max(np.abs(S.raw(t + 1j * PI / 3) - s * S.raw(t + 2j * PI / 3)))
        R = S.residue_R
        penalty = 0.0
        poles = strip_poles(S)
        expected = {POLE_T, POLE_S}
        if len(poles) != 2 or any(o != 1 for _, o in poles) or not all(
            any(abs(p - e) < _MATCH for p, _ in poles) for e in expected
        ):
            penalty += 1.0
            notes["pole_audit"] = f"strip poles {poles}"
        try:
            R_t = residue(S, POLE_T) if any(abs(p - POLE_T) < _MATCH for p, _ in poles) else None
            if R_t is not None and abs(R_t + R) > 1e-8 * max(abs(R), 1.0):
                notes["crossing_residue"] = f"res at pi i/3 = {R_t}, expected {-R}"
        except Exception as exc:  # audit only
            notes["crossing_residue"] = repr(exc)
        bound = _strip_bound(S, window)
        notes["strip_sup_sampled"] = bound
        if not math.isfinite(bound):
            penalty += 1.0
        res["S5"] = abs(R.real) + max(0.0, -R.imag) + penalty + (1.0 if R == 0 else 0.0)
        res["S6"] = abs(complex(S.raw(0.0)) + 1)
    res = {k: float(v) if np.isfinite(v) else math.inf for k, v in res.items()}
    passed = {k: res[k] <= tolerance for k in AXIOMS}
    return AxiomReport(
        residuals=res,
        tolerance=tolerance,
        grid={"window": window, "points": points},
        passed=passed,
        notes=notes,
    )


def _strip_bound(S: SMatrix, window: float, hole: float = 0.05) -> float:
    """Sampled sup of |S| in the physical strip away from the two poles."""
    x = np.linspace(-window, window, 161)
    y = np.linspace(0.02, PI - 0.02, 41)
    Z = (x[None, :] + 1j * y[:, None]).ravel()
    keep = (np.abs(Z - POLE_T) > hole) & (np.abs(Z - POLE_S) > hole)
    v = np.abs(S.raw(Z[keep]))
    return float(np.max(v)) if np.all(np.isfinite(v)) else math.inf
