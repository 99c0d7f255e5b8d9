"""Vectors as sums of factor networks, contracted with BLAS.

Every vector built in this package is a finite sum of terms of the form

    coeff * prod u(x_v + s) * prod b(x_a - x_b + s)

with unary and binary factors over free rapidity variables, possibly with
extra bound variables that are integrated on their own line rule (from
annihilation operators). Inner products of two such sums are computed
term by term with ``numpy.einsum``, which turns the multidimensional
quadrature into a few matrix products.
"""

from __future__ import annotations

import itertools
import string
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .quadrature import LineRule


@dataclass(frozen=True)
class Factor:
    """``fn(arg)`` or, if ``conj``, ``conj(fn(conj(arg)))``.

    ``arg = x_v + shift`` for one variable and ``x_a - x_b + shift`` for two.
    ``localizing`` marks factors that decay fast along real lines.
    """

    fn: object
    vars: tuple
    shift: complex = 0j
    conj: bool = False
    localizing: bool = False

    def toggled(self) -> "Factor":
        return replace(self, shift=complex(self.shift).conjugate(), conj=not self.conj)

    def moved(self, mapping) -> "Factor":
        vs, extra = [], []
        for v in self.vars:
            nv, sh = mapping.get(v, (v, 0j))
            vs.append(nv)
            extra.append(sh)
        shift = self.shift + (extra[0] if len(vs) == 1 else extra[0] - extra[1])
        return replace(self, vars=tuple(vs), shift=complex(shift))

    def apply(self, arg):
        if not self.conj:
            return np.asarray(self.fn(arg), dtype=complex)
        return np.conj(np.asarray(self.fn(np.conj(arg)), dtype=complex))


@dataclass(frozen=True)
class Term:
    coeff: complex
    factors: tuple
    bound: tuple = ()  # ((label, LineRule), ...)

    def moved(self, mapping) -> "Term":
        return Term(self.coeff, tuple(f.moved(mapping) for f in self.factors), self.bound)

    def conjugated(self) -> "Term":
        return Term(complex(self.coeff).conjugate(), tuple(f.toggled() for f in self.factors), self.bound)

    def scaled(self, c) -> "Term":
        return Term(self.coeff * c, self.factors, self.bound)

    def with_factors(self, *extra) -> "Term":
        return Term(self.coeff, self.factors + tuple(extra), self.bound)

    def relabeled_bound(self, tag) -> "Term":
        ren = {lab: (tag, lab) for lab, _ in self.bound}
        if not ren:
            return self
        mapping = {lab: (new, 0j) for lab, new in ren.items()}
        return Term(
            self.coeff,
            tuple(f.moved(mapping) for f in self.factors),
            tuple((ren[lab], r) for lab, r in self.bound),
        )


def combine(left: Term, right: Term) -> Term:
    """conj(left) * right as one network (bound labels kept apart)."""
    L = left.relabeled_bound("L").conjugated()
    R = right.relabeled_bound("R")
    return Term(L.coeff * R.coeff, L.factors + R.factors, L.bound + R.bound)


# -- evaluation ------------------------------------------------------------


class FactorCache:
    """Thread-safe cache of factor values on rule nodes."""

    def __init__(self, max_bytes: int = 1 << 29):
        self._d: dict = {}
        self._lock = threading.Lock()
        self.max_bytes = max_bytes
        self.nbytes = 0

    def get(self, key, compute):
        with self._lock:
            hit = self._d.get(key)
        if hit is not None:
            return hit
        val = compute()
        with self._lock:
            size = val[0].nbytes if isinstance(val, tuple) else val.nbytes
            if self.nbytes + size <= self.max_bytes:
                self._d[key] = val
                self.nbytes += size
        return val

    def clear(self):
        with self._lock:
            self._d.clear()
            self.nbytes = 0


CACHE = FactorCache()


def _factor_array(f: Factor, rules: dict):
    try:
        key = (f.fn, f.shift, f.conj) + tuple((id(rules[v]), len(rules[v])) for v in f.vars)
        hash(key)
    except TypeError:
        key = None

    def compute():
        if len(f.vars) == 1:
            x = rules[f.vars[0]].nodes
            return f.apply(x + f.shift)
        xa = rules[f.vars[0]].nodes
        xb = rules[f.vars[1]].nodes
        return f.apply(np.subtract.outer(xa, xb) + f.shift)

    if key is None:
        return compute()
    # the stored tuple keeps the rules alive so their ids stay unique
    held = tuple(rules[v] for v in f.vars)
    return CACHE.get(key, lambda: (compute(), held))[0]


def contract(term: Term, free_rules: dict) -> complex:
    """Integrate one network over all its variables."""
    rules = dict(free_rules)
    rules.update(dict(term.bound))
    vars_ = sorted({v for f in term.factors for v in f.vars} | set(rules), key=repr)
    letters = dict(zip(vars_, string.ascii_letters))
    unary: dict = {}
    binary: dict = {}
    for f in term.factors:
        arr = _factor_array(f, rules)
        if len(f.vars) == 1:
            v = f.vars[0]
            unary[v] = unary[v] * arr if v in unary else arr
        else:
            a, b = f.vars
            if (b, a) in binary:
                binary[(b, a)] = binary[(b, a)] * arr.T
            elif (a, b) in binary:
                binary[(a, b)] = binary[(a, b)] * arr
            else:
                binary[(a, b)] = arr
    if not vars_:
        return complex(term.coeff)
    ops, subs = [], []
    for v in vars_:
        w = rules[v].weights
        ops.append(unary[v] * w if v in unary else w.astype(complex))
        subs.append(letters[v])
    for (a, b), arr in binary.items():
        ops.append(arr)
        subs.append(letters[a] + letters[b])
    expr = ",".join(subs) + "->"
    return complex(term.coeff * np.einsum(expr, *ops, optimize="greedy"))


_THREADS = {"n": 1}


def set_threads(n: int) -> None:
    """Worker count for pair sums; results are summed in a fixed order."""
    _THREADS["n"] = max(1, int(n))


def get_threads() -> int:
    return _THREADS["n"]


def pair_sum(left_terms, right_terms, free_rules_for) -> complex:
    """sum over (s, t) of the integral of conj(s) t.

    ``free_rules_for(term)`` returns the rule per free variable.
    """
    nets = [combine(s, t) for s, t in itertools.product(left_terms, right_terms)]

    def one(net):
        return contract(net, free_rules_for(net))

    if _THREADS["n"] > 1 and len(nets) > 1:
        with ThreadPoolExecutor(_THREADS["n"]) as ex:
            vals = list(ex.map(one, nets))
    else:
        vals = [one(net) for net in nets]
    return complex(sum(vals, 0j))


def localized_vars(term: Term) -> set:
    return {f.vars[0] for f in term.factors if f.localizing and len(f.vars) == 1}


def rule_policy(n: int, coarse: LineRule, fine: LineRule):
    """Coarse rule on variables held by a localizing factor, fine otherwise."""

    def choose(term: Term) -> dict:
        loc = localized_vars(term)
        return {v: (coarse if v in loc else fine) for v in range(n)}

    return choose


def evaluate_terms(terms, pts) -> np.ndarray:
    """Pointwise evaluation of a term sum (bound variables summed on their rules)."""
    pts = np.asarray(pts, dtype=complex)
    out = np.zeros(pts.shape[0], dtype=complex)
    for t in terms:
        if not t.bound:
            val = np.full(pts.shape[0], t.coeff, dtype=complex)
            for f in t.factors:
                if len(f.vars) == 1:
                    val *= f.apply(pts[:, f.vars[0]] + f.shift)
                else:
                    val *= f.apply(pts[:, f.vars[0]] - pts[:, f.vars[1]] + f.shift)
            out += val
            continue
        # one bound variable (annihilation outputs); sum on its rule
        (lab, rule), = t.bound
        x = rule.nodes.astype(complex)
        val = np.full((pts.shape[0], len(x)), t.coeff, dtype=complex)

        def col(v):
            return x[None, :] if v == lab else pts[:, v][:, None]

        for f in t.factors:
            if len(f.vars) == 1:
                val *= f.apply(col(f.vars[0]) + f.shift)
            else:
                val *= f.apply(col(f.vars[0]) - col(f.vars[1]) + f.shift)
        out += val @ rule.weights
    return out
