"""Invariant suites run by ``python -m twomatrix validate``.

Each suite returns a list of check dictionaries
``{name, anchor, value, tol, passed, info}`` where ``value`` is the measured
residual and ``tol`` the declared tolerance.
"""

from dataclasses import dataclass, field

import numpy as np

from . import correction as C
from . import elliptic as ell
from . import modelmap as mm
from . import oracle as O
from . import variations as V
from .torusmap import (find_endpoints, sheet_pair, track_endpoints, x_derivs,
                       x_of_u, y_derivs, y_of_u)

SUITES = ("elliptic", "torusmap", "modelmap", "variations", "correction", "oracle")


def check(name, anchor, value, tol, info=None):
    value = float(value)
    return {"name": name, "anchor": anchor, "value": value, "tol": float(tol),
            "passed": bool(np.isfinite(value) and value < tol), "info": info}


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@dataclass
class Context:
    """A solved model with memoized re-solves for finite differences."""
    model: object
    params: object
    quadrature: object = mm.QuadratureSpec()
    fd_step: float = 1e-4
    _cache: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps = find_endpoints(self.params)
        self.locs = C.all_local_data(self.params, self.eps)
        self.opts = mm.SolveOptions(tol=1e-13, quadrature=self.quadrature)
        self.reps = C.f1_representatives(self.params, self.eps)

    def solved(self, kind, k, t):
        key = (kind, k, t)
        if key not in self._cache:
            m = self.model
            if kind == "g":
                g = m.g.copy()
                g[k - 1] += t
                m = m.with_(g=g)
            elif kind == "eps":
                m = m.with_(epsilon=m.epsilon + t)
            q = mm.solve_inverse(m, self.params, self.opts).params
            ref = _Reps(*self.reps)
            self._cache[key] = (q, track_endpoints(q, ref))
        return self._cache[key]

    def central(self, kind, k, fun, h, difference=None):
        (qp, ep), (qm, em) = self.solved(kind, k, h), self.solved(kind, k, -h)
        fp, fm = fun(qp, ep), fun(qm, em)
        d = fp - fm if difference is None else difference(fp, fm)
        return d / (2 * h)


@dataclass
class _Reps:
    e: np.ndarray
    et: np.ndarray


def shrinking_residue(fun, p, pole, r=1e-4, n=8):
    """Limit of ``(u - pole) f(u)`` from radii ``r`` and ``r/2`` (one Richardson step)."""
    d = r * np.exp(2j * np.pi * (np.arange(n) + 0.3) / n)
    # a single point per radius would do; averaging directions removes the O(r) term too
    lim = [np.mean(dd * np.array([fun(p, pole + z) for z in dd])) for dd in (d, d / 2)]
    return 2 * lim[1] - lim[0]


def _rng_points(p, n, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-1, 1, (2, n))
    return a + b * p.tau


# ---------------------------------------------------------------------------


def suite_elliptic(ctx):
    p = ctx.params
    m = p.modulus
    u = _rng_points(p, 100, 1)
    th = ell.theta(u, m)
    out = [
        check("theta-odd", "theta oddness", np.max(np.abs(ell.theta(-u, m) + th)), 1e-12),
        check("theta-tau-shift", "theta quasi-periodicity",
              np.max(np.abs(ell.theta(u + m.tau, m) + th * np.exp(-1j * np.pi * (2 * u + m.tau)))
                     / np.maximum(1, np.abs(ell.theta(u + m.tau, m)))), 1e-12),
        check("Z-tau-shift", "Z quasi-periodicity",
              np.max(np.abs(ell.zfun(u + m.tau, m) - ell.zfun(u, m) + 2j * np.pi)), 1e-12),
        check("wp-periodic", "wp double periodicity",
              np.max((np.abs(ell.wp(u + 1, m) - ell.wp(u, m)) + np.abs(ell.wp(u + m.tau, m) - ell.wp(u, m)))
                     / np.maximum(1, np.abs(ell.wp(u, m)))), 1e-11),
    ]
    # fourth-order central difference: truncation ~h^4, rounding ~1e-16/h
    h = 1e-4
    z = {j: ell.zfun(u + j * h, m) for j in (-2, -1, 1, 2)}
    fd = (z[-2] - 8 * z[-1] + 8 * z[1] - z[2]) / (12 * h)
    out.append(check("wp-minus-Zprime", "wp = -Z'",
                     np.max(np.abs(fd + ell.wp(u, m)) / np.maximum(1, np.abs(fd))), 1e-8))
    return out


def suite_torusmap(ctx):
    p, eps = ctx.params, ctx.eps
    u = _rng_points(p, 50, 2)
    xd = np.array(x_derivs(p, u, 5))
    yd = np.array(y_derivs(p, u, 4))
    worst = 0.0
    for w in (1.0, p.tau):
        worst = max(worst, np.max(np.abs(np.array(x_derivs(p, u + w, 5)) - xd) / np.maximum(1, np.abs(xd))),
                    np.max(np.abs(np.array(y_derivs(p, u + w, 4)) - yd) / np.maximum(1, np.abs(yd))))
    out = [check("xy-ellipticity", "lattice invariance of x, y", worst, 1e-10),
           check("endpoint-count-x", "d2+3 zeros of x'", abs(len(eps.e) - (p.d2 + 3)), 0.5),
           check("endpoint-count-y", "d1+3 zeros of y'", abs(len(eps.et) - (p.d1 + 3)), 0.5)]
    for key, val in eps.residuals.items():
        out.append(check(f"endpoint-{key}", "endpoint sum constraints", val, 1e-9))
    for name, fun, pole, res in (("A", x_of_u, p.u_inf, p.A), ("At", y_of_u, -p.u_inf, p.At)):
        out.append(check(f"pole-scale-{name}", "residue from shrinking circles",
                         rel(shrinking_residue(fun, p, pole), res), 1e-6))
    e0 = eps.e[0]
    s = e0 + 0.01 * np.exp(0.7j)
    back = sheet_pair(p, sheet_pair(p, s, e0), e0)
    out.append(check("sheet-pair-involution", "sheet pair near a branch point", abs(back - s), 1e-10))
    return out


def suite_modelmap(ctx):
    p, m, q = ctx.params, ctx.model, ctx.quadrature
    res = np.linalg.norm(mm.forward(p, q) - m.target())
    n1, n2 = mm.normalizations(p, q)
    g1, gt1, _ = mm.potentials_from_params(p, q, check=False)
    q2 = mm.QuadratureSpec(circle_nodes=2 * q.circle_nodes, cycle_nodes=q.cycle_nodes)
    g2, gt2, _ = mm.potentials_from_params(p, q2, check=False)
    change = np.max(np.abs(np.concatenate([g2 - g1, gt2 - gt1]))
                    / np.maximum(1, np.abs(np.concatenate([g2, gt2]))))
    pi = mm.path_independence(p, q)
    du = mm.du_check(p, q, model=m)
    return [
        check("forward-residual", "forward map reproduces the model", res, 1e-10),
        check("normalization-plus", "normalization around u_inf", abs(n1 - 1), 1e-10),
        check("normalization-minus", "normalization around -u_inf", abs(n2 - 1), 1e-10),
        check("node-doubling", "contour quadrature convergence", change, 1e-10),
        check("A-path-independence", "epsilon cycle", pi["A"], 1e-10),
        check("B-path-independence", "Gamma cycle", pi["B"], 1e-10),
        check("du-A-period", "holomorphic differential normalization", abs(du["a_period"] - 1), 1e-6),
        check("du-B-period", "B-period of du vs dGamma/deps",
              abs(du["b_period"] - du["b_period_from_gamma"]), 1e-6),
        check("du-regular-plus", "du has no pole at u_inf", du["growth_plus"], 0.1),
        check("du-regular-minus", "du has no pole at -u_inf", du["growth_minus"], 0.1),
    ]


def _paired(ctx, fun, k):
    return O.contour_pair_dot(fun, ctx.params, k, ctx.quadrature, eps=ctx.eps)


def suite_variations(ctx):
    p, eps = ctx.params, ctx.eps
    m = p.modulus
    grid_s = 0.13 + 0.21 * m.tau + (np.arange(4)[:, None] * 0.23 + np.arange(4)[None, :] * 0.19 * m.tau).ravel()
    grid_u = 0.61 + 0.07 * m.tau + (np.arange(4)[:, None] * 0.17 + np.arange(4)[None, :] * 0.23 * m.tau).ravel()
    worst = 0.0
    for s in grid_s:
        for u in grid_u:
            w = ell.wp(s - u, m)
            worst = max(worst, abs(V.wronskian(p, eps, s, u) - w) / max(1, abs(w)))
    lhs, rhs = V.pair_wp_identity(p, eps)
    out = [check("wronskian-identity", "xdot y' - ydot x' = wp(s-u)", worst, 1e-9),
           check("pair-wp-identity", "pair sum of wp at the endpoints",
                 np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs))), 1e-8)]
    h = ctx.fd_step
    observables = {
        "tau": (lambda q, e: q.tau, lambda s: V.taudot(p, eps, s)),
        "u_inf": (lambda q, e: q.u_inf, lambda s: V.uinfdot(p, eps, s)),
        "e0": (lambda q, e: e.e[0], lambda s: V.edot(p, eps, s, 0)),
        "lnA": (lambda q, e: np.log(q.A), lambda s: V.Adot_over_A(p, eps, s)),
        "lnAt": (lambda q, e: np.log(q.At), lambda s: V.Atdot_over_At(p, eps, s)),
        "lnprod_yprime": (lambda q, e: np.sum(np.log(e.yd_e[:, 1])),
                          lambda s: V.dlog_prod_yprime(p, eps, s)),
    }
    for k in range(1, ctx.model.d1 + 2):
        for name, (obs, fld) in observables.items():
            fd = ctx.central("g", k, obs, h)
            an = _paired(ctx, fld, k)
            out.append(check(f"fd-{name}-g{k}", "analytic variation vs re-solve FD",
                             rel(an, fd), 1e-4, info={"analytic": an, "fd": fd}))
    sv = [0.37 + 0.11 * m.tau, 0.21 + 0.68 * m.tau, 0.77 + 0.43 * m.tau]
    gf = [V.gamma_field(p, eps, s) for s in sv]
    out.append(check("gamma-field-constant", "dGamma/dV1 = -2 i pi du",
                     max(abs(g + 2j * np.pi) for g in gf) / (2 * np.pi), 1e-6))
    return out


def suite_correction(ctx):
    p, eps, locs = ctx.params, ctx.eps, ctx.locs
    m = p.modulus
    out = []
    u = _rng_points(p, 30, 3)
    u = u[np.min(np.abs(np.subtract.outer(u, np.concatenate([eps.e, eps.e + 1, eps.e + m.tau]))), axis=1) > 0.05]
    base = C.y1_xprime(p, locs, u)
    worst = max(np.max(np.abs(C.y1_xprime(p, locs, u + w) - base) / np.maximum(1, np.abs(base)))
                for w in (1.0, m.tau))
    out.append(check("y1-ellipticity", "Y1 x' elliptic", worst, 1e-10))
    for c, tag in ((p.u_inf, "plus"), (-p.u_inf, "minus")):
        v = [np.max(np.abs(C.y1_xprime(p, locs, c + r * np.exp(2j * np.pi * np.arange(64) / 64))))
             for r in (0.1, 0.01)]
        out.append(check(f"y1-regular-{tag}", "Y1 x' regular at the poles of x",
                         np.log(v[1] / v[0]) / np.log(10), 0.1))
    worst4 = worst3 = worst_sheet = 0.0
    for L in locs:
        co = O.laurent_fit(lambda s: C.y1_xprime(p, locs, s), L.e, range(-4, -1), 0.01)
        worst4 = max(worst4, rel(co[-4], 1 / (8 * L.x2 * L.y1)))
        worst3 = max(worst3, rel(co[-3], -L.x3 / (24 * L.x2 ** 2 * L.y1)))
        cs = O.laurent_fit(np.vectorize(lambda s: C.sheet_term(p, s, L.e)), L.e, range(-4, -2),
                           0.01, n=32, atol=1e-6)
        worst_sheet = max(worst_sheet, rel(cs[-4], co[-4]), rel(cs[-3], co[-3]))
    out += [check("laurent-z-4", "leading pole 1/(8 x'' y')", worst4, 1e-6),
            check("laurent-z-3", "subleading pole -x'''/(24 x''^2 y')", worst3, 1e-6),
            check("sheet-matching", "pole matching with the colliding sheet", worst_sheet, 1e-6)]

    def f1_of(q, e):
        return C.f1(q, e, reps=(e.e, e.et))

    dF = ctx.central("eps", 0, f1_of, ctx.fd_step, C.f1_difference)
    g1 = C.gamma1(p, locs)
    out.append(check("dF1-deps", "dF1/deps = -2 i pi Gamma1", rel(C.dF1_depsilon(p, locs), dF), 1e-5,
                     info={"fd": dF, "gamma1": g1, "ratio_fd_over_gamma1": dF / g1}))
    a = C.f1(p, eps)
    ps = mm.half_period_shift(p)
    b = C.f1(ps, find_endpoints(ps))
    n = (a.value - b.value) * 24 / (2j * np.pi)
    out.append(check("f1-gauge", "F1 invariant under the half-period shift (mod 2 pi i/24)",
                     abs(n - np.round(n.real)) * 2 * np.pi / 24, 1e-9))
    for k in range(1, ctx.model.d1 + 2):
        fd = ctx.central("g", k, f1_of, ctx.fd_step, C.f1_difference)
        an = O.contour_pair(lambda s: -C.y1_xprime(p, locs, s), p, k, ctx.quadrature, eps=eps)
        out.append(check(f"f1-pairing-g{k}", "Y1 = -dF1/dV1", rel(an, fd), 1e-4,
                         info={"analytic": an, "fd": fd}))
    return out


def suite_oracle(ctx):
    p = ctx.params
    m = p.modulus
    c = 0.3 + 0.4 * m.tau
    co = O.laurent_fit(lambda s: ell.wp(s - c, m), c, range(-3, 1), 0.1)
    out = [check("laurent-wp", "wp expansion", abs(co[-2] - 1) + abs(co[0] + p.zeta1) + abs(co[-3]), 1e-9)]
    # Richardson-style gate on the step: halving it must not move the FD value
    obs = lambda q, e: q.tau  # noqa: E731
    d1 = ctx.central("g", 1, obs, ctx.fd_step)
    d2 = ctx.central("g", 1, obs, ctx.fd_step / 2)
    out.append(check("fd-halving", "FD step halving", rel(d2, d1), 1e-3))
    eps_fd = ctx.central("g", 1, lambda q, e: mm.filling_fraction(q, ctx.quadrature), ctx.fd_step)
    out.append(check("fd-constraint", "epsilon fixed along g_k", abs(eps_fd), 1e-7))
    return out


RUNNERS = {
    "elliptic": suite_elliptic,
    "torusmap": suite_torusmap,
    "modelmap": suite_modelmap,
    "variations": suite_variations,
    "correction": suite_correction,
    "oracle": suite_oracle,
}


def run(ctx, suites=SUITES):
    out = {}
    for name in suites:
        out[name] = RUNNERS[name](ctx)
    return out
