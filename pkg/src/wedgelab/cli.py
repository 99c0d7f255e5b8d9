"""Command-line entry point: ``run``, ``generate`` and ``axioms``.

Exit status: 0 when every check passes, 1 when a check fails, 2 on a
configuration error, 3 when a check aborted numerically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields as dc_fields
from importlib import resources

import yaml

from . import network
from .errors import ConfigError, InvalidParameter, WedgeLabError
from .fock import Atom, symmetrize
from .quadrature import QuadratureSpec
from .smatrix import SMatrix, build_bullough_dodd, build_general, check_axioms, elementary, residue, POLE_S, POLE_T
from .verify import (
    PAIRS,
    CheckReport,
    CommutatorAnalysis,
    cancellation_pair,
    contour_shift_check,
    default_vectors,
    mixed_vectors,
    nontemperateness_probe,
    pair_c_routes,
    pair_sum_completeness,
    proposition_suite,
    tau_identity,
    weak_commutator,
)
from .wedgefn import make_bump

THREADS_ENV = "WEDGELAB_THREADS"
SUITES = ("axioms", "propositions", "weak-commutativity", "cancellations", "contour-lemmas")
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3


# -- configuration ---------------------------------------------------------


class _Located:
    """Parsed document plus the source line of every key path."""

    def __init__(self, text: str):
        try:
            node = yaml.compose(text, Loader=yaml.SafeLoader)
            self.data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigError(f"cannot parse configuration: {e}", None, mark.line + 1 if mark else None) from None
        self.lines: dict = {}
        if node is not None:
            self._walk(node, ())

    def _walk(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                self.lines[path + (k.value,)] = k.start_mark.line + 1
                self._walk(v, path + (k.value,))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                self._walk(v, path + (str(i),))

    def line(self, *path):
        path = tuple(str(p) for p in path)
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)

    def error(self, message, *path):
        return ConfigError(message, ".".join(str(p) for p in path) or None, self.line(*path))


def _mapping(doc, value, *path) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise doc.error("expected a mapping", *path)
    return value


def _number(doc, value, *path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise doc.error(f"expected a number, got {value!r}", *path)
    return float(value)


def _complex(doc, value, *path) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(_number(doc, value[0], *path), _number(doc, value[1], *path))
    raise doc.error("complex numbers are written as [re, im]", *path)


def build_smatrix(doc: _Located, spec: dict) -> SMatrix:
    spec = _mapping(doc, spec, "smatrix")
    kind = spec.get("kind", "bullough-dodd")
    try:
        if kind == "bullough-dodd":
            if "B" not in spec:
                raise doc.error("missing B", "smatrix")
            return build_bullough_dodd(_number(doc, spec["B"], "smatrix", "B"))
        if kind == "elementary":
            return elementary(_number(doc, spec.get("A"), "smatrix", "A"))
        if kind == "general":
            B = spec.get("B", [])
            if not isinstance(B, list):
                raise doc.error("B must be a list for the general family", "smatrix", "B")
            Bs = [_number(doc, b, "smatrix", "B", i) for i, b in enumerate(B)]
            a = _number(doc, spec.get("a", 0.0), "smatrix", "a")
            zeros = [_complex(doc, z, "smatrix", "zeros", i) for i, z in enumerate(spec.get("zeros", []) or [])]
            return build_general(Bs, a, zeros)
    except InvalidParameter as e:
        field = "B" if "B" in str(e) or "excluded" in str(e) else None
        raise doc.error(str(e), "smatrix", *([field] if field else [])) from None
    raise doc.error(f"unknown S-matrix kind {kind!r}", "smatrix", "kind")


def build_quadrature(doc: _Located, spec: dict) -> QuadratureSpec:
    spec = _mapping(doc, spec, "quadrature")
    allowed = {f.name: f for f in dc_fields(QuadratureSpec) if f.name != "extra"}
    kw = {}
    for k, v in spec.items():
        if k not in allowed:
            raise doc.error(f"unknown quadrature setting {k!r}", "quadrature", k)
        default = allowed[k].default
        if isinstance(default, tuple):
            kw[k] = tuple(float(x) for x in v)
        elif isinstance(default, int) and not isinstance(default, bool):
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise doc.error(f"{k} must be a positive integer", "quadrature", k)
            kw[k] = v
        else:
            x = _number(doc, v, "quadrature", k)
            if x <= 0:
                raise doc.error(f"{k} must be positive", "quadrature", k)
            kw[k] = x
    return QuadratureSpec(**kw)


def build_function(doc, name, spec, quad):
    spec = _mapping(doc, spec, "functions", name)
    try:
        c = spec["center"]
        center = (_number(doc, c[0], "functions", name, "center"), _number(doc, c[1], "functions", name, "center"))
        radius = _number(doc, spec["radius"], "functions", name, "radius")
    except (KeyError, TypeError, IndexError):
        raise doc.error("a test function needs center [x0, x1] and radius", "functions", name) from None
    amp = _number(doc, spec.get("amplitude", 1.0), "functions", name, "amplitude")
    wedge = spec.get("wedge", "none")
    mass = _number(doc, spec.get("mass", 1.0), "functions", name, "mass")
    try:
        return make_bump(center, radius, amp, wedge, mass, quad)
    except (ValueError, WedgeLabError) as e:
        raise doc.error(str(e), "functions", name) from None


def build_vector(doc, S, spec, path, max_n):
    spec = _mapping(doc, spec, *path)
    atoms = spec.get("atoms")
    if not isinstance(atoms, list):
        raise doc.error("a vector needs a list of atoms [mu, sigma, beta]", *path)
    if len(atoms) > max_n:
        raise doc.error(f"{len(atoms)} particles exceeds the maximum {max_n}", *path, "atoms")
    parsed = []
    for i, a in enumerate(atoms):
        if not isinstance(a, list) or len(a) not in (2, 3):
            raise doc.error("an atom is [mu, sigma] or [mu, sigma, beta]", *path, "atoms", i)
        beta = _complex(doc, a[2], *path, "atoms", i) if len(a) == 3 else 0j
        try:
            parsed.append(Atom(_number(doc, a[0], *path, "atoms", i), _number(doc, a[1], *path, "atoms", i), beta))
        except (ValueError, WedgeLabError) as e:
            raise doc.error(str(e), *path, "atoms", i) from None
    try:
        return symmetrize(
            S,
            parsed,
            spec.get("cn_power"),
            _number(doc, spec.get("cn_alpha", -2.0), *path, "cn_alpha"),
            _complex(doc, spec.get("coeff", 1.0), *path, "coeff"),
            max_n,
        )
    except (ValueError, WedgeLabError) as e:
        raise doc.error(str(e), *path) from None


class RunConfig:
    """Validated run configuration."""

    def __init__(self, text: str, source: str = "<config>"):
        doc = _Located(text)
        self.source = source
        data = doc.data
        if not isinstance(data, dict):
            raise ConfigError("the configuration must be a mapping", None, 1)
        known = {"name", "smatrix", "functions", "vectors", "quadrature", "suites", "numbers", "output", "seed", "tolerance_scale"}
        for k in data:
            if k not in known:
                raise doc.error(f"unknown section {k!r}", k)
        self.name = str(data.get("name", source))
        self.quad = build_quadrature(doc, data.get("quadrature"))
        self.smatrix = build_smatrix(doc, data.get("smatrix"))
        self.seed = int(data.get("seed", 0))
        self.tolerance_scale = _number(doc, data.get("tolerance_scale", 1.0), "tolerance_scale")
        suites = data.get("suites", "all")
        if suites == "all":
            suites = list(SUITES)
        if isinstance(suites, str):
            suites = [suites]
        if not isinstance(suites, list) or not suites:
            raise doc.error("suites is 'all' or a list of suite names", "suites")
        for i, s in enumerate(suites):
            if s == "all":
                suites = list(SUITES)
                break
            if s not in SUITES:
                raise doc.error(f"unknown suite {s!r}; choose from {', '.join(SUITES)} or all", "suites", i)
        self.suites = [s for s in SUITES if s in suites]
        numbers = data.get("numbers", [1, 2])
        if not isinstance(numbers, list) or not all(isinstance(n, int) and not isinstance(n, bool) for n in numbers):
            raise doc.error("numbers is a list of particle numbers", "numbers")
        for i, n in enumerate(numbers):
            if not 1 <= n <= self.quad.max_particles:
                raise doc.error(f"particle number {n} outside 1..{self.quad.max_particles}", "numbers", i)
        self.numbers = list(numbers)
        fn = _mapping(doc, data.get("functions"), "functions")
        self.functions = {k: build_function(doc, k, v, self.quad) for k, v in fn.items()}
        needs_pair = {"propositions", "weak-commutativity", "cancellations"} & set(self.suites)
        if needs_pair:
            for k, w in (("f", "left"), ("g", "right")):
                if k not in self.functions:
                    raise doc.error(f"suites {sorted(needs_pair)} need a {w}-wedge function '{k}'", "functions")
                if self.functions[k].wedge != w:
                    raise doc.error(f"function '{k}' must be declared in the {w} wedge", "functions", k, "wedge")
        vecs = _mapping(doc, data.get("vectors"), "vectors")
        self.vectors: dict = {}
        for key, pair in vecs.items():
            try:
                n = int(key)
            except (TypeError, ValueError):
                raise doc.error("vectors are keyed by particle number", "vectors", key) from None
            pair = _mapping(doc, pair, "vectors", key)
            built = {}
            for role in ("phi", "psi"):
                if role not in pair:
                    raise doc.error(f"missing {role}", "vectors", key)
                v = build_vector(doc, self.smatrix, pair[role], ("vectors", key, role), self.quad.max_particles)
                if v.n != n:
                    raise doc.error(f"{role} has {v.n} particles, expected {n}", "vectors", key, role)
                built[role] = v
            self.vectors[n] = (built["phi"], built["psi"])
        out = _mapping(doc, data.get("output"), "output")
        self.output = out.get("path")
        self.format = out.get("format", "json")
        if self.format not in ("json", "csv"):
            raise doc.error("format must be json or csv", "output", "format")

    def vector_pair(self, n):
        return self.vectors.get(n) or default_vectors(self.smatrix, n, self.seed + n)


def load_config(path: str) -> RunConfig:
    """Read a config file, or a bundled config by name."""
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            return RunConfig(fh.read(), path)
    for suffix in ("", ".yaml"):
        res = resources.files("wedgelab").joinpath("configs", path + suffix)
        if res.is_file():
            return RunConfig(res.read_text(encoding="utf-8"), path)
    raise ConfigError(f"no configuration file or bundled config named {path!r}")


# -- suites ----------------------------------------------------------------


def _guard(name, fn):
    """Run one check; a numerical abort becomes a failed entry."""
    try:
        out = fn()
        return out if isinstance(out, list) else [out]
    except WedgeLabError as e:
        return [CheckReport.aborted(name, e)]


def suite_axioms(cfg):
    rep = check_axioms(cfg.smatrix)
    return [
        CheckReport(e["name"], e["residual"], e["scale"], e["tolerance"], e["pass"], {"grid": rep.grid})
        for e in rep.entries()
    ]


def suite_propositions(cfg):
    S, f, g, q = cfg.smatrix, cfg.functions["f"], cfg.functions["g"], cfg.quad
    out = proposition_suite(S, f, g, q, numbers=[n for n in cfg.numbers if n <= 2] or [1], seed=cfg.seed)
    psi1 = cfg.vector_pair(1)[1]
    out += _guard("non-temperateness growth", lambda: nontemperateness_probe(S, f, psi1, q=q))
    return out


def suite_weak(cfg):
    S, f, g, q = cfg.smatrix, cfg.functions["f"], cfg.functions["g"], cfg.quad
    out = []
    for n in cfg.numbers:
        Phi, Psi = cfg.vector_pair(n)
        out += _guard(f"weak commutator n={n}", lambda: weak_commutator(S, f, g, Phi, Psi, q))
    return out


def suite_cancellations(cfg):
    S, f, g, q = cfg.smatrix, cfg.functions["f"], cfg.functions["g"], cfg.quad
    out = []
    for n in cfg.numbers:
        if n > 2:
            continue
        Phi, Psi = mixed_vectors(S, n, cfg.seed + n)

        def run(Phi=Phi, Psi=Psi):
            an = CommutatorAnalysis(S, f, g, Phi, Psi, q)
            reps = [cancellation_pair(S, f, g, Phi, Psi, p, analysis=an) for p in PAIRS]
            return reps + [pair_sum_completeness(S, f, g, Phi, Psi, analysis=an)]

        out += _guard(f"cancellations n={n}", run)
    P1, Q1 = cfg.vector_pair(1)
    out += _guard("pair C routes", lambda: pair_c_routes(S, f, g, P1, Q1, q))
    if q.max_particles >= 3:
        P3, Q3 = default_vectors(S, 3, cfg.seed + 3)
        for k, m in ((0, 1), (2, 0)):
            out += _guard(f"tau identity n=3 slots ({k},{m})", lambda k=k, m=m: tau_identity(S, f, g, P3, Q3, k, m, q))
    return out


def suite_contours(cfg):
    S, q = cfg.smatrix, cfg.quad
    out = []
    plain = (symmetrize(S, [Atom(0.2, 0.9)]), symmetrize(S, [Atom(-0.3, 1.1)]))
    tilted = (symmetrize(S, [Atom(0.2, 0.9, 0.3 + 0.1j)]), symmetrize(S, [Atom(-0.3, 1.1, -0.2j)]))
    for label, (a, b) in (("gaussian", plain), ("tilted", tilted)):
        for eps in (0.0, 0.1, math.pi / 3):
            rep = contour_shift_check(a, b, eps, q)
            rep.name = f"{rep.name} {label}"
            out.append(rep)
    return out


SUITE_RUNNERS = {
    "axioms": suite_axioms,
    "propositions": suite_propositions,
    "weak-commutativity": suite_weak,
    "cancellations": suite_cancellations,
    "contour-lemmas": suite_contours,
}


def run_config(cfg: RunConfig, threads: int = 1, tolerance_scale: float | None = None) -> dict:
    """Execute the selected suites and assemble the report document."""
    network.set_threads(threads)
    scale = cfg.tolerance_scale if tolerance_scale is None else tolerance_scale

    def one(name):
        return name, _guard(name, lambda: SUITE_RUNNERS[name](cfg))

    if threads > 1 and len(cfg.suites) > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(one, cfg.suites))
    else:
        results = [one(s) for s in cfg.suites]
    entries = []
    for suite, reps in results:
        for r in reps:
            if scale != 1.0:
                r = r.rescaled(scale)
            d = r.to_dict()
            d["suite"] = suite
            entries.append(d)
    return {
        "config": cfg.name,
        "smatrix": cfg.smatrix.to_dict(),
        "quadrature": cfg.quad.describe(),
        "tolerance_scale": scale,
        "entries": entries,
        "summary": {
            "total": len(entries),
            "passed": sum(1 for e in entries if e["pass"]),
            "aborted": sum(1 for e in entries if "abort" in e["metadata"]),
        },
    }


def report_status(report: dict) -> int:
    if report["summary"]["aborted"]:
        return EXIT_ABORT
    return EXIT_PASS if report["summary"]["passed"] == report["summary"]["total"] else EXIT_FAIL


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if hasattr(o, "tolist"):
        return o.tolist()
    return str(o)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "name", "residual", "scale", "tolerance", "pass"])
    for e in report["entries"]:
        w.writerow([e.get("suite", ""), e["name"], repr(e["residual"]), repr(e["scale"]), repr(e["tolerance"]), e["pass"]])
    return buf.getvalue()


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# -- commands --------------------------------------------------------------


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    report = run_config(cfg, args.threads or default_threads(), args.tolerance_scale)
    fmt = args.format or cfg.format
    _emit(render(report, fmt), args.output or cfg.output)
    s = report["summary"]
    print(f"{s['passed']}/{s['total']} checks passed", file=sys.stderr)
    return report_status(report)


def cmd_generate(args) -> int:
    try:
        zeros = [complex(*(float(x) for x in z.split(","))) for z in args.zero]
        S = build_general(args.B, args.a, zeros)
    except WedgeLabError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"invalid parameters: {e}", file=sys.stderr)
        return EXIT_CONFIG
    R = residue(S, POLE_S)
    Rt = residue(S, POLE_T)
    summary = (
        f"residue_R = {R.real:.15g} {R.imag:+.15g}i\n"
        f"residue at i pi/3 = {Rt.real:.15g} {Rt.imag:+.15g}i\n"
        f"eta = {S.eta.real:.15g} {S.eta.imag:+.15g}i\n"
    )
    doc = S.to_json() + "\n"
    if args.output:
        _emit(doc, args.output)
        sys.stdout.write(summary)
    else:
        sys.stdout.write(doc)
        sys.stderr.write(summary)
    return EXIT_PASS


def cmd_axioms(args) -> int:
    try:
        with open(args.smatrix_file, encoding="utf-8") as fh:
            S = SMatrix.from_json(fh.read(), recertify=False)
    except (OSError, ValueError, KeyError, WedgeLabError) as e:
        print(f"cannot read S-matrix document: {e}", file=sys.stderr)
        return EXIT_CONFIG
    rep = check_axioms(S)
    entries = []
    for e in rep.entries():
        r = CheckReport(e["name"], e["residual"], e["scale"], e["tolerance"], e["pass"], {})
        if args.tolerance_scale not in (None, 1.0):
            r = r.rescaled(args.tolerance_scale)
        d = r.to_dict()
        d["suite"] = "axioms"
        entries.append(d)
    report = {
        "smatrix": S.to_dict(),
        "entries": entries,
        "summary": {"total": len(entries), "passed": sum(e["pass"] for e in entries), "aborted": 0},
    }
    _emit(render(report, args.format or "json"), args.output)
    return report_status(report)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wedgelab", description="Numerical checks for wedge-local fields with bound states.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help=f"worker threads (default: ${THREADS_ENV} or 1)")
    common.add_argument("--tolerance-scale", type=float, default=None, help="multiply every tolerance by X")
    common.add_argument("--output", default=None, help="write the report or document to PATH")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run the suites of a configuration")
    r.add_argument("config", help="config file or bundled config name")
    r.set_defaults(func=cmd_run)
    g = sub.add_parser("generate", parents=[common], help="build and certify a general-family S-matrix")
    g.add_argument("B", type=float, nargs="*", help="factor parameters B_k in (0, 2), B != 1")
    g.add_argument("--a", type=float, default=0.0, help="singular factor parameter a >= 0")
    g.add_argument("--zero", action="append", default=[], metavar="RE,IM", help="extra Blaschke zero orbit")
    g.set_defaults(func=cmd_generate)
    a = sub.add_parser("axioms", parents=[common], help="certify a serialized S-matrix")
    a.add_argument("smatrix_file")
    a.set_defaults(func=cmd_axioms)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
