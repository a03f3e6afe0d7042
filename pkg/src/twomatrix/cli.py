"""Command line front end: ``python -m twomatrix {forward,solve,correction,validate}``.

Every command reads a JSON configuration (validated against the shipped
schema before anything is computed) and writes a JSON report.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation failure.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import __version__
from . import correction as C
from . import io
from . import modelmap as mm
from . import validation
from .errors import ConfigError, NumericError
from .oracle import FDPlan
from .torusmap import find_endpoints

log = logging.getLogger("twomatrix")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

DEFAULT_TOLERANCES = {
    "solve_residual": 1e-11,
    "norm_residual": 1e-10,
    "df1_depsilon": 1e-5,
    "f1_gauge": 1e-9,
    "imag_epsilon": 1e-12,
}


@dataclass
class Run:
    """A validated configuration plus the command line overrides."""
    doc: dict
    model: mm.ModelSpec
    seed: object
    path: list
    quadrature: mm.QuadratureSpec
    tolerances: dict
    fd_step: float = 1e-4
    warnings: list = field(default_factory=list)

    @property
    def digest(self):
        return io.digest(self.doc)


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        io.validate(doc, "config")
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config does not match the schema: {exc.message}") from exc
    return doc


def build_run(doc, nodes=None, fd_step=None):
    """Turn a schema-valid document into domain objects (semantic checks here)."""
    try:
        model = io.model_from_dict(doc["model"])
        seed = io.params_from_dict(doc["seed"]) if "seed" in doc else None
        path = [io.model_from_dict(m) for m in doc.get("continuation", [])]
        qd = dict(doc.get("quadrature", {}))
        if nodes is not None:
            qd["circle_nodes"] = qd["cycle_nodes"] = nodes
        quad = mm.QuadratureSpec(**qd)
        plan = FDPlan(step=fd_step) if fd_step is not None else FDPlan()
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    unknown = set(doc.get("tolerances", {})) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ConfigError(f"unknown tolerance names: {sorted(unknown)}")
    tol = {**DEFAULT_TOLERANCES, **doc.get("tolerances", {})}
    if seed is not None and (seed.d1, seed.d2) != (model.d1, model.d2):
        raise ConfigError("seed degrees do not match the model")
    for m in path:
        if (m.d1, m.d2) != (model.d1, model.d2):
            raise ConfigError("continuation models must have the same degrees")
    run = Run(doc, model, seed, path, quad, tol, plan.step)
    if abs(model.epsilon.imag) > tol["imag_epsilon"]:
        run.warnings.append(f"epsilon has an imaginary part {model.epsilon.imag:.3g}; "
                            "the solution is complex")
    return run


# ---------------------------------------------------------------------------
# pipelines


def solve_run(run, cache=None):
    """Solved parameters for ``run.model``; consults and fills the cache directory."""
    key = run.digest
    if cache:
        hit = os.path.join(cache, f"{key}.json")
        if os.path.exists(hit):
            with open(hit) as fh:
                stored = json.load(fh)
            log.info("cache hit %s", hit)
            return io.params_from_dict(stored["params"]), {**stored["solve"],
                                                            "cache_hit": True}
    if run.seed is None:
        raise ConfigError("solving requires a seed")
    opts = mm.SolveOptions(tol=run.tolerances["solve_residual"], quadrature=run.quadrature)
    p = run.seed
    iterations = []
    for m in run.path + [run.model]:
        r = mm.solve_inverse(m, p, opts)
        p = r.params
        iterations.append(r.iterations)
    p = mm.canonical_gauge(p)
    residual = float(np.linalg.norm(mm.residual_vector(p, run.model, run.quadrature)))
    info = {"iterations": iterations, "residual": residual, "cache_hit": False}
    if cache:
        io.write_atomic(os.path.join(cache, f"{key}.json"),
                        {"config_hash": key, "params": io.params_to_dict(p), "solve": info})
    return p, info


def cmd_forward(run, cache=None):
    if run.seed is None:
        raise ConfigError("forward requires seed parameters")
    p, q = run.seed, run.quadrature
    g, gt, nres = mm.potentials_from_params(p, q)
    eps = mm.filling_fraction(p, q)
    n_plus, n_minus = mm.normalizations(p, q)
    result = {"g": io.clist(g), "gt": io.clist(gt), "epsilon": io.cpx(eps),
              "Gamma": io.cpx(mm.gamma_B(p, q)), "norm_residual": float(abs(nres)),
              "normalizations": io.clist([n_plus, n_minus])}
    # forward is a pure map: a hand seed need not satisfy the normalization,
    # so the residual is reported, not judged (solve enforces it)
    result["norm_ok"] = bool(abs(nres) < run.tolerances["norm_residual"])
    return result, []


def cmd_solve(run, cache=None):
    p, info = solve_run(run, cache)
    eps = find_endpoints(p)
    result = {"params": io.params_to_dict(p), "endpoints": io.endpoints_to_dict(eps),
              "solve": info, "gauge": io.to_jsonable(mm.gauge_report(p))}
    checks = [validation.check("solve-residual", "forward map reproduces the model",
                               info["residual"], run.tolerances["solve_residual"])]
    return result, checks


def _correction_checks(run, p, eps, locs):
    ctx = validation.Context(run.model, p, run.quadrature, run.fd_step)
    out = []
    for c in validation.suite_correction(ctx):
        if c["name"] == "dF1-deps":
            c["tol"] = run.tolerances["df1_depsilon"]
        if c["name"] == "f1-gauge":
            c["tol"] = run.tolerances["f1_gauge"]
        c["passed"] = bool(np.isfinite(c["value"]) and c["value"] < c["tol"])
        out.append(c)
    return out


def cmd_correction(run, cache=None):
    p, info = solve_run(run, cache)
    eps = find_endpoints(p)
    locs = C.all_local_data(p, eps)
    pts = C.sample_points(p, eps)
    y1 = C.y1_of_s(p, locs, pts)
    f = C.f1(p, eps)
    result = {"params": io.params_to_dict(p),
              "y1_samples": {"s": io.clist(pts), "y1": io.clist(y1)},
              "gamma1": io.cpx(C.gamma1(p, locs)),
              "dF1_depsilon": io.cpx(C.dF1_depsilon(p, locs)),
              "f1": io.cpx(f.value), "f1_branch": f.branch}
    return result, _correction_checks(run, p, eps, locs)


def cmd_validate(run, cache=None, suites=None):
    p, _ = solve_run(run, cache)
    ctx = validation.Context(run.model, p, run.quadrature, run.fd_step)
    results = validation.run(ctx, suites or validation.SUITES)
    checks = [dict(c, name=f"{suite}/{c['name']}") for suite, cs in results.items() for c in cs]
    summary = {s: all(c["passed"] for c in cs) for s, cs in results.items()}
    return {"params": io.params_to_dict(p), "suites": summary}, checks


COMMANDS = {"forward": cmd_forward, "solve": cmd_solve,
            "correction": cmd_correction, "validate": cmd_validate}


# ---------------------------------------------------------------------------


def make_report(command, run_digest, tolerances, result, checks=(), warnings=(), status=None):
    if status is None:
        status = "pass" if all(c["passed"] for c in checks) else "fail"
    doc = {"command": command, "tool_version": __version__, "config_hash": run_digest,
           "status": status, "tolerances": dict(tolerances), "result": result,
           "checks": list(checks), "warnings": list(warnings)}
    doc = io.to_jsonable(doc)
    io.validate(doc, "report")
    return doc


def parser():
    ap = argparse.ArgumentParser(prog="python -m twomatrix", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out", metavar="PATH", help="report file (default: config 'output' or stdout)")
        sp.add_argument("--cache", metavar="DIR", help="directory for solved parameters")
        sp.add_argument("--nodes", type=int, metavar="N", help="quadrature nodes (power of two)")
        sp.add_argument("--fd-step", type=float, metavar="H", help="finite-difference step")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "validate":
            sp.add_argument("--suite", action="append", choices=validation.SUITES, metavar="NAME",
                            help="run only this suite (repeatable)")
    return ap


def _emit(doc, out):
    if out:
        io.write_atomic(out, doc)
    else:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def main(argv=None):
    args = parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    tolerances = dict(DEFAULT_TOLERANCES)
    digest = "0" * 64
    out = args.out
    try:
        doc = load_config(args.config)
        digest = io.digest(doc)
        out = out or doc.get("output")
        run = build_run(doc, args.nodes, args.fd_step)
        tolerances = run.tolerances
        for w in run.warnings:
            log.warning(w)
        kw = {"suites": args.suite} if args.command == "validate" else {}
        result, checks = COMMANDS[args.command](run, args.cache, **kw)
        report = make_report(args.command, digest, tolerances, result, checks, run.warnings)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        _emit(make_report(args.command, digest, tolerances, {"error": str(exc)},
                          status="error"), out)
        return EXIT_CONFIG
    except NumericError as exc:
        log.error("numerical error: %s", exc)
        result = {"error": f"{type(exc).__name__}: {exc}"}
        last = getattr(exc, "last_iterate", None)
        if last is not None:
            result["last_iterate"] = io.params_to_dict(last)
        _emit(make_report(args.command, digest, tolerances, result, status="error"), out)
        return EXIT_NUMERIC
    _emit(report, out)
    return EXIT_OK if report["status"] == "pass" else EXIT_VALIDATION
