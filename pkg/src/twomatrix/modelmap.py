"""Dictionary between uniformization parameters and the potentials.

Potentials are ``V1(x) = g_0 + sum_k g_k x^k / k`` (and likewise ``V2`` with
``gt_k``).  On the physical sheet ``y = Y(x) ~ V1'(x) - 1/x`` as
``u -> u_inf`` and ``x ~ V2'(y) - 1/y`` as ``u -> -u_inf``.  The forward map
reads the couplings off as residues at ``+-u_inf``; the filling fraction and
its conjugate ``Gamma`` are periods of ``y dx``.

Cycles: the filling-fraction cycle runs along the ``1`` direction on the line
through the origin (``s -> s + 1``), the conjugate cycle along ``tau`` on the
line through ``1/2``.  With this choice the two-point kernel ``wp(s-u) ds du``
has vanishing filling-fraction period.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import elliptic as ell
from .cpoly import Poly
from .errors import (ContourTooTight, JacobianSingular, LeftDomain,
                     MaxIterations, ModulusDegenerate, PathBlocked, PoleProximity,
                     QuadratureNotConverged, SeriesCapExceeded)
from .torusmap import UniformParams, x_derivs, y_derivs

MAX_NODES = 8192


@dataclass(frozen=True)
class QuadratureSpec:
    circle_nodes: int = 256
    cycle_nodes: int = 512
    refinement_factor: int = 2
    rtol: float = 1e-10

    def __post_init__(self):
        for n in (self.circle_nodes, self.cycle_nodes):
            if n < 64 or n & (n - 1):
                raise ValueError("node counts must be powers of two >= 64")


def couplings_from_poly(V):
    """``[g_1, ..., g_{d+1}]`` from raw coefficients (``c_k = g_k / k``)."""
    c = V.coeffs
    return np.array([k * c[k] for k in range(1, len(c))], dtype=complex)


def poly_from_couplings(g, g0=0.0):
    g = np.asarray(g, dtype=complex)
    return Poly([g0] + [g[k - 1] / k for k in range(1, len(g) + 1)])


@dataclass(frozen=True)
class ModelSpec:
    V1: Poly
    V2: Poly
    epsilon: complex

    def __post_init__(self):
        if self.V1.degree < 2 or self.V2.degree < 2:
            raise ValueError("potentials must have degree >= 2")
        object.__setattr__(self, "epsilon", complex(self.epsilon))

    @property
    def d1(self):
        return self.V1.degree - 1

    @property
    def d2(self):
        return self.V2.degree - 1

    @property
    def g(self):
        return couplings_from_poly(self.V1)

    @property
    def gt(self):
        return couplings_from_poly(self.V2)

    @classmethod
    def from_couplings(cls, g, gt, epsilon):
        return cls(poly_from_couplings(g), poly_from_couplings(gt), epsilon)

    def target(self):
        """Right-hand side of the inverse problem: (g, gt, 1, epsilon)."""
        return np.concatenate([self.g, self.gt, [1.0, self.epsilon]])

    def with_(self, g=None, gt=None, epsilon=None):
        return ModelSpec.from_couplings(
            self.g if g is None else g, self.gt if gt is None else gt,
            self.epsilon if epsilon is None else epsilon)


# ---------------------------------------------------------------------------
# contour integrals


def _circle(center, r, n):
    w = np.exp(2j * np.pi * np.arange(n) / n)
    return center + r * w, r * w


def _nearest_other_singularity(p):
    m = p.modulus
    d_opp = float(ell.lattice_distance(2 * p.u_inf, m))
    d_self = min(abs(1), abs(m.tau), abs(m.tau - 1), abs(m.tau + 1))
    return min(d_opp, d_self)


def _winding_on(vals):
    ph = np.angle(np.append(vals, vals[0])[1:] / vals)
    return int(round(ph.sum() / (2 * np.pi)))


def _choose_radius(p, which):
    """Radius for a circle around ``+u_inf`` (``which='x'``) or ``-u_inf``.

    The function that gets inverted (x or y) must wind exactly once
    negatively on a circle of twice the radius: then the integrand is
    analytic in an annulus of ratio 2 and the trapezoid rule converges like
    ``2^-n``.  The radius starts just under half the distance to the nearest
    other pole and shrinks until the test passes.
    """
    r = 0.45 * _nearest_other_singularity(p)
    c = p.u_inf if which == "x" else -p.u_inf
    for _ in range(24):
        ok = True
        for rr in (r, 2 * r):
            s, _ = _circle(c, rr, 256)
            f = x_derivs(p, s, 0)[0] if which == "x" else y_derivs(p, s, 0)[0]
            if _winding_on(f) != -1:
                ok = False
                break
        if ok:
            return r
        r *= 0.8
    raise ContourTooTight("no admissible circle around the pole")


def _circle_moments(p, which, n, kmax):
    """``(1/2 i pi) oint f_k ds`` for k = 0..kmax on an n-node circle.

    which='x': f_k = y x' / x^k around u_inf; which='y': f_k = x y' / y^k around -u_inf.
    """
    r = _choose_radius(p, which)
    c = p.u_inf if which == "x" else -p.u_inf
    s, rw = _circle(c, r, n)
    xd = x_derivs(p, s, 1)
    yd = y_derivs(p, s, 1)
    if which == "x":
        a, b, da = yd[0], xd[0], xd[1]
    else:
        a, b, da = xd[0], yd[0], yd[1]
    base = a * da * rw
    inv = 1.0 / b
    out = []
    cur = base
    for _ in range(kmax + 1):
        out.append(np.mean(cur))
        cur = cur * inv
    return np.array(out)


def _converged(fn, n, rtol, what):
    """Evaluate ``fn(n)`` with node doubling until the change is below ``rtol``."""
    prev = fn(n)
    while True:
        n2 = 2 * n
        cur = fn(n2)
        scale = np.maximum(np.abs(cur), 1.0)
        if np.all(np.abs(cur - prev) <= rtol * scale):
            return cur, n2, float(np.max(np.abs(cur - prev) / scale))
        if n2 >= MAX_NODES:
            raise QuadratureNotConverged(f"{what}: no convergence with {n2} nodes")
        prev, n = cur, n2


def potentials_from_params(p, q=QuadratureSpec(), check=True):
    """Couplings encoded by ``p``.

    Returns ``(g, gt, norm_residual)`` where ``g_k = -(1/2 i pi) oint_{u_inf}
    y x'/x^k ds`` (counter-clockwise in u) so that ``y ~ V1'(x) - 1/x``, and
    likewise for ``gt``; ``norm_residual = (1/2 i pi) oint_{u_inf} y x' ds - 1``.
    """
    def fx(n):
        return _circle_moments(p, "x", n, p.d1 + 1)

    def fy(n):
        return _circle_moments(p, "y", n, p.d2 + 1)

    if check:
        mx, _, _ = _converged(fx, q.circle_nodes, q.rtol, "g_k contour")
        my, _, _ = _converged(fy, q.circle_nodes, q.rtol, "gt_k contour")
    else:
        mx, my = fx(q.circle_nodes), fy(q.circle_nodes)
    return -mx[1:], -my[1:], mx[0] - 1.0


def normalizations(p, q=QuadratureSpec()):
    """Both normalization integrals (around +u_inf with y dx, around -u_inf with x dy)."""
    mx = _circle_moments(p, "x", q.circle_nodes, 0)
    my = _circle_moments(p, "y", q.circle_nodes, 0)
    return complex(mx[0]), complex(my[0])


def _strip_coordinate(p, axis):
    """Lattice coordinate of u_inf along ``axis`` folded into [-1/2, 1/2)."""
    a, b = ell.lattice_coords(p.u_inf, p.modulus)
    c = a if axis == "a" else b
    return float(np.mod(c + 0.5, 1.0) - 0.5)


def cycle_base_points(p, which):
    """Two admissible base points for the filling-fraction (``'A'``) or conjugate (``'B'``) cycle.

    A-cycle lines ``b = const`` lie in the strip between the poles that
    contains the origin; B-cycle lines ``a = const`` lie in the strip that
    contains ``a = 1/2``.  The first point is the strip centre (largest
    clearance), the second sits 30% of the way towards a pole.
    """
    m = p.modulus
    if which == "A":
        half = abs(_strip_coordinate(p, "b"))
        mid = 0.0
        clearance = half * m.tau.imag
        pts = (mid * m.tau, 0.3 * half * m.tau + 0.17)
    else:
        half = 0.5 - abs(_strip_coordinate(p, "a"))
        mid = 0.5
        clearance = half * m.tau.imag / abs(m.tau)
        pts = (complex(mid), mid + 0.3 * half + 0.23 * m.tau)
    if clearance <= ell.POLE_GUARD * 1e3:
        raise PathBlocked(f"{which}-cycle strip has no clearance from the poles")
    return pts


def _line_integral(p, start, period, n):
    t = np.arange(n) / n
    s = start + period * t
    y = y_derivs(p, s, 0)[0]
    xp = x_derivs(p, s, 1)[1]
    return np.mean(y * xp) * period


def _cycle(p, which, q, base=None, check=True):
    period = 1.0 if which == "A" else p.tau
    b1, b2 = cycle_base_points(p, which)
    start = b1 if base is None else base

    def f(n):
        return np.array([_line_integral(p, start, period, n)])

    if check:
        val, _, _ = _converged(f, q.cycle_nodes // 2, q.rtol, f"{which}-cycle")
    else:
        val = f(q.cycle_nodes)
    return complex(val[0])


def filling_fraction(p, q=QuadratureSpec(), base=None, check=True):
    """``epsilon = (1/2 i pi) oint_A y x' ds``."""
    return _cycle(p, "A", q, base, check) / (2j * np.pi)


def gamma_B(p, q=QuadratureSpec(), base=None, check=True):
    """``Gamma = oint_B y x' ds``."""
    return _cycle(p, "B", q, base, check)


def path_independence(p, q=QuadratureSpec()):
    """Differences of the A and B periods between the two base points of each strip."""
    out = {}
    for which in ("A", "B"):
        b1, b2 = cycle_base_points(p, which)
        out[which] = abs(_cycle(p, which, q, b1) - _cycle(p, which, q, b2))
    return out


def forward(p, q=QuadratureSpec(), check=False):
    """Residual-ready image of ``p``: ``[g..., gt..., norm, epsilon]``."""
    g, gt, nres = potentials_from_params(p, q, check=check)
    eps = filling_fraction(p, q, check=check)
    return np.concatenate([g, gt, [nres + 1.0, eps]])


def model_from_params(p, q=QuadratureSpec()):
    g, gt, _ = potentials_from_params(p, q)
    return ModelSpec.from_couplings(g, gt, filling_fraction(p, q))


# ---------------------------------------------------------------------------
# gauge


GAUGE_SLACK = 1e-9


def canonical_gauge(p):
    """Re-centre by half periods so that ``u_inf`` has ``a``-coordinate in [0, 1/2)
    (up to ``GAUGE_SLACK`` below 0).

    Translating the origin by ``1/2`` maps ``u_inf -> u_inf + 1/2`` and
    ``(gamma, gammat) -> (-gamma, -gammat)`` without changing x, y up to the
    translation; all couplings and the A-period are unchanged.
    """
    a, _ = ell.lattice_coords(p.u_inf, p.modulus)
    # symmetric models sit on a = 0 exactly; keep roundoff on either side of it
    n = int(np.floor(2 * a + GAUGE_SLACK))
    if n == 0:
        return p
    sign = (-1) ** (n % 2)
    return replace(p, u_inf=p.u_inf - n / 2, gamma=sign * p.gamma,
                   gammat=sign * p.gammat)


def half_period_shift(p):
    """The gauge-equivalent parameter set with the origin moved by 1/2."""
    return replace(p, u_inf=p.u_inf + 0.5, gamma=-p.gamma, gammat=-p.gammat)


def gauge_report(p):
    a, b = ell.lattice_coords(p.u_inf, p.modulus)
    return {"u_inf_a": float(a), "u_inf_b": float(b),
            "pinned_im_ratio": float(p.u_inf.imag / p.tau.imag)}


# ---------------------------------------------------------------------------
# inverse problem


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-11
    max_iter: int = 60
    fd_step: float = 1e-7
    quadrature: QuadratureSpec = QuadratureSpec()


@dataclass
class SolveResult:
    params: UniformParams
    residual: float
    iterations: int
    history: list


def _valid(p):
    try:
        if p.tau.imag <= p.modulus.floor:
            return False
        p.check()
    except (ModulusDegenerate, PoleProximity, ValueError):
        return False
    return True


def _make(v, guess):
    try:
        return UniformParams.from_vector(v, guess.d1, guess.d2, template=guess)
    except (ModulusDegenerate, ValueError):
        return None


def residual_vector(p, model, q=QuadratureSpec()):
    return forward(p, q) - model.target()


def jacobian(p, q=QuadratureSpec(), step=1e-7):
    """Central-difference Jacobian of the forward map (holomorphic, real steps)."""
    v = p.to_vector()
    cols = []
    for j in range(len(v)):
        h = step * max(1.0, abs(v[j]))
        vp, vm = v.copy(), v.copy()
        vp[j] += h
        vm[j] -= h
        fp = forward(_make(vp, p), q)
        fm = forward(_make(vm, p), q)
        cols.append((fp - fm) / (2 * h))
    return np.array(cols).T


def solve_inverse(model, guess, opts=SolveOptions()):
    """Newton iteration for the parameters reproducing ``model``.

    Solves ``d1 + d2 + 4`` complex equations (couplings, normalization,
    filling fraction) in as many unknowns with a finite-difference Jacobian
    and a halving line search.  Returns a :class:`SolveResult`.
    """
    if (model.d1, model.d2) != (guess.d1, guess.d2):
        raise ValueError("model degrees do not match the guess")
    q = opts.quadrature
    target = model.target()
    p = guess
    try:
        F = forward(p, q) - target
    except (PoleProximity, SeriesCapExceeded, ContourTooTight, PathBlocked) as exc:
        raise LeftDomain(f"initial guess not admissible: {exc}", p) from exc
    nrm = np.linalg.norm(F)
    history = [nrm]
    for it in range(1, opts.max_iter + 1):
        if nrm < opts.tol:
            return SolveResult(p, float(nrm), it - 1, history)
        try:
            J = jacobian(p, q, opts.fd_step)
        except (PoleProximity, SeriesCapExceeded, ContourTooTight, PathBlocked) as exc:
            raise LeftDomain(f"Jacobian evaluation left the domain: {exc}", p) from exc
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > 1e14:
            raise JacobianSingular(f"Jacobian condition number {cond:.3g}")
        dv = np.linalg.solve(J, -F)
        v = p.to_vector()
        lam = 1.0
        for _ in range(30):
            cand = _make(v + lam * dv, p)
            if cand is not None and _valid(cand):
                try:
                    Fc = forward(cand, q) - target
                    nc = np.linalg.norm(Fc)
                except (PoleProximity, SeriesCapExceeded, ContourTooTight, PathBlocked):
                    nc = np.inf
                if nc < nrm or nc < opts.tol:
                    break
            lam *= 0.5
        else:
            raise LeftDomain("line search failed to reduce the residual", p)
        p, F, nrm = cand, Fc, nc
        history.append(nrm)
    if nrm < opts.tol:
        return SolveResult(p, float(nrm), opts.max_iter, history)
    raise MaxIterations(f"no convergence after {opts.max_iter} iterations "
                        f"(residual {nrm:.3g})", p)


def continuation(start_model, target_model, start_params, steps=10,
                 opts=SolveOptions()):
    """Walk linearly in (g, gt, epsilon) from a solved model to the target."""
    p = start_params
    a0, a1 = start_model.target(), target_model.target()
    d1, d2 = start_model.d1, start_model.d2
    path = []
    for t in np.linspace(0, 1, steps + 1)[1:]:
        v = (1 - t) * a0 + t * a1
        m = ModelSpec.from_couplings(v[:d1 + 1], v[d1 + 1:d1 + d2 + 2], v[-1])
        p = solve_inverse(m, p, opts).params
        path.append(p)
    return p, path


# ---------------------------------------------------------------------------
# holomorphic differential


def _growth_exponent(f, center, radii=(1e-1, 1e-2), n=64):
    vals = []
    for r in radii:
        s, _ = _circle(center, r, n)
        vals.append(np.max(np.abs(f(s))))
    return float(np.log(vals[1] / vals[0]) / np.log(radii[0] / radii[1]))


def _directional(fun, p, pdot, delta=1e-4, n=8):
    """Derivative of ``fun(p + t pdot)`` at ``t = 0`` by an n-point Cauchy stencil."""
    v = p.to_vector()
    scale = delta / max(1e-300, np.max(np.abs(pdot)))
    w = np.exp(2j * np.pi * np.arange(n) / n)
    acc = 0
    for wj in w:
        acc = acc + fun(_make(v + scale * wj * pdot, p)) / wj
    return acc / (n * scale)


def epsilon_tangent(p, model=None, h=1e-5, stencil=2, opts=None):
    """``dp/d epsilon`` at fixed potentials, by re-solving on a circle of radius ``h``.

    ``stencil=2`` is the central difference at ``epsilon +- h``; larger
    stencils use the ``stencil``-th roots of unity (complex filling fractions
    are admissible) and have truncation error ``O(h^stencil)``.
    Returns ``(pdot, solutions)``.
    """
    if opts is None:
        opts = SolveOptions(tol=1e-13)
    if model is None:
        model = model_from_params(p, opts.quadrature)
    w = np.exp(2j * np.pi * np.arange(stencil) / stencil)
    sols = [solve_inverse(model.with_(epsilon=model.epsilon + h * wj), p, opts).params
            for wj in w]
    pdot = sum(sp.to_vector() / wj for sp, wj in zip(sols, w)) / (stencil * h)
    return pdot, sols


def du_check(p, q=QuadratureSpec(), h=1e-5, model=None, opts=None, stencil=2):
    """Build ``du = (1/2 i pi) d(y dx)/d epsilon`` by re-solving around ``epsilon``.

    The tangent ``dp/d epsilon`` comes from :func:`epsilon_tangent`; ``x`` and
    ``y`` are then differentiated along it at fixed ``u`` and combined at
    fixed ``x``: ``du/ds = (1/2 i pi)(y_eps x' - y' x_eps)``.  (The fixed-``u``
    derivative of ``y x'`` differs from this by an exact differential with
    poles at ``+-u_inf`` and the same periods; its A-period is reported too.)

    Returns a dict with the A- and B-periods of ``du``, the B-period predicted
    from ``Gamma``, growth exponents at ``+-u_inf`` and ``max |du/ds - 1|`` on
    a sample grid.
    """
    if opts is None:
        opts = SolveOptions(tol=1e-13, quadrature=q)
    pdot, sols = epsilon_tangent(p, model, h, stencil, opts)

    def du(s):
        s = np.asarray(s, dtype=complex)
        xe = _directional(lambda pp: x_derivs(pp, s, 0)[0], p, pdot)
        ye = _directional(lambda pp: y_derivs(pp, s, 0)[0], p, pdot)
        xp = x_derivs(p, s, 1)[1]
        yp = y_derivs(p, s, 1)[1]
        return (ye * xp - yp * xe) / (2j * np.pi)

    def du_fixed_u(s):
        return _directional(lambda pp: y_derivs(pp, s, 0)[0] * x_derivs(pp, s, 1)[1],
                            p, pdot) / (2j * np.pi)

    n = q.cycle_nodes
    t = np.arange(n) / n
    a0, _ = cycle_base_points(p, "A")
    b0, _ = cycle_base_points(p, "B")
    a_period = complex(np.mean(du(a0 + t)))
    a_period_u = complex(np.mean(du_fixed_u(a0 + t)))
    b_period = complex(np.mean(du(b0 + t * p.tau)) * p.tau)
    w = np.exp(2j * np.pi * np.arange(stencil) / stencil)
    b_from_gamma = complex(sum(gamma_B(sp, q) / wj for sp, wj in zip(sols, w))
                           / (stencil * h) / (2j * np.pi))
    grid = (np.linspace(0.05, 0.95, 8)[:, None]
            + np.linspace(0.05, 0.95, 8)[None, :] * p.tau).ravel()
    grid = grid[(ell.lattice_distance(grid - p.u_inf, p.modulus) > 0.05)
                & (ell.lattice_distance(grid + p.u_inf, p.modulus) > 0.05)]
    return {
        "a_period": a_period,
        "a_period_fixed_u": a_period_u,
        "b_period": b_period,
        "b_period_from_gamma": b_from_gamma,
        "tau": p.tau,
        "growth_plus": _growth_exponent(du, p.u_inf),
        "growth_minus": _growth_exponent(du, -p.u_inf),
        "max_dev_from_ds": float(np.max(np.abs(du(grid) - 1.0))),
    }
