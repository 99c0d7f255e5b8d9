"""Line rules, tensor-product integration and the quadrature policy object."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], cached and read-only."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class LineRule:
    """A one-dimensional rule: sum(weights * f(nodes))."""

    nodes: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        return np.tensordot(values, self.weights, axes=([axis], [0]))


def composite_rule(edges, order: int, label: str = "") -> LineRule:
    """Composite Gauss-Legendre rule with ``order`` nodes on each panel."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x).ravel()
    weights = (half * w).ravel()
    return LineRule(nodes, weights, label)


def graded_edges(theta_max: float, base_width: float, grading: float) -> np.ndarray:
    """Panel edges on [-theta_max, theta_max] whose width shrinks like 1/cosh.

    The local width is ``base_width / (1 + grading * cosh(theta))`` which
    tracks the phase velocity of on-shell plane waves ``exp(i p(theta).x)``.
    """
    right = [0.0]
    while right[-1] < theta_max:
        t = right[-1]
        h = base_width / (1.0 + grading * math.cosh(t))
        right.append(min(theta_max, t + h))
    right = np.array(right)
    return np.concatenate([-right[:0:-1], right])


def tensor_integrate(func, rules, chunk: int = 1 << 18) -> complex:
    """Integrate ``func`` over the tensor grid built from ``rules``.

    ``func`` receives an array of shape (m, n) of points and returns m
    values. Chunks are visited in a fixed order so the result is
    reproducible bit for bit.
    """
    n = len(rules)
    if n == 0:
        return complex(np.asarray(func(np.zeros((1, 0))))[0])
    shape = tuple(len(r) for r in rules)
    total = int(np.prod(shape))
    partial = []
    for start in range(0, total, chunk):
        idx = np.unravel_index(np.arange(start, min(total, start + chunk)), shape)
        pts = np.stack([rules[a].nodes[idx[a]] for a in range(n)], axis=-1)
        wts = rules[0].weights[idx[0]].copy()
        for a in range(1, n):
            wts *= rules[a].weights[idx[a]]
        partial.append(np.sum(wts * func(pts)))
    return complex(np.sum(np.array(partial)))


@dataclass(frozen=True)
class QuadratureSpec:
    """Truncation, node counts and tolerance policy for every integral.

    ``coarse`` rules integrate against Gaussian atoms; ``fine`` rules are
    used on axes where two plane-wave transforms meet without an atom.
    """

    theta_max: float = 7.0
    panel_width: float = 0.5
    panel_order: int = 16
    fine_base_width: float = 1.0
    fine_grading: float = 0.15
    fine_order: int = 16
    residue_nodes: int = 512
    residue_radii: tuple = (1e-2, 1e-3)
    residue_rtol: float = 1e-8
    fourier_start_order: int = 32
    fourier_max_order: int = 1024
    fourier_rtol: float = 1e-11
    fourier_probe_max: float = 7.0
    fine_theta_max: float = 6.0
    max_particles: int = 4
    chunk: int = 1 << 18
    tail_tolerance: float = 1e-12
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def coarse(self) -> LineRule:
        return _coarse_rule(self.theta_max, self.panel_width, self.panel_order)

    def fine(self) -> LineRule:
        return _fine_rule(self.fine_theta_max, self.fine_base_width, self.fine_grading, self.fine_order)

    def describe(self) -> dict:
        return {
            "theta_max": self.theta_max,
            "coarse_nodes": len(self.coarse()),
            "fine_nodes": len(self.fine()),
            "fourier_rtol": self.fourier_rtol,
        }

    def scaled(self, factor: float) -> "QuadratureSpec":
        """Same truncation with node density multiplied by ``factor``."""
        from dataclasses import replace

        return replace(
            self,
            panel_width=self.panel_width / factor,
            fine_base_width=self.fine_base_width / factor,
        )


@lru_cache(maxsize=32)
def _coarse_rule(theta_max, width, order):
    panels = max(1, int(math.ceil(2 * theta_max / width)))
    return composite_rule(np.linspace(-theta_max, theta_max, panels + 1), order, "coarse")


@lru_cache(maxsize=32)
def _fine_rule(theta_max, width, grading, order):
    return composite_rule(graded_edges(theta_max, width, grading), order, "fine")


def circle_points(center: complex, radius: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Equispaced points on a circle and the unit phases exp(i phi)."""
    phases = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    return center + radius * phases, phases


def gaussian_tail_bound(centers, widths, theta_max: float) -> float:
    """Upper bound on the squared-norm mass of exp(-(t-mu)^2/s^2) beyond theta_max.

    Uses the complementary error function on the worst atom; tilts are
    accounted for by the caller through an effective center shift.
    """
    worst = 0.0
    for mu, s in zip(centers, widths):
        gap = theta_max - abs(mu)
        if gap <= 0:
            return math.inf
        # integral_{gap}^{inf} exp(-2 t^2 / s^2) dt, both tails
        worst = max(worst, s * math.sqrt(math.pi / 2) * math.erfc(math.sqrt(2) * gap / s))
    return worst
