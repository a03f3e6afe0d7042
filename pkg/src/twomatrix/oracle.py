"""Independent checks: finite differences through the inverse solver, the
residue pairing that turns a field on the curve into a coupling derivative,
and FFT Laurent coefficients.
"""

from dataclasses import dataclass

import numpy as np

from . import elliptic as ell
from .errors import (InconsistentRadii, QuadratureNotConverged, RadiusInvalid,
                     StepTooLarge)
from .modelmap import (MAX_NODES, QuadratureSpec, SolveOptions, _circle,
                       solve_inverse)
from .torusmap import x_derivs
from .variations import DOT_SIGN

# d f / d g_k = KAPPA / k * (1/2 i pi) oint_{u_inf} x^k field ds, with
# field = x'(s) df/dV1(x(s)) and the circle run counter-clockwise.  Fixed by
# the joint fit over k = 1..d1+1 (see the derivation script in notebooks/).
KAPPA = -1.0


@dataclass(frozen=True)
class FDPlan:
    step: float = 1e-4
    scheme: str = "central"
    richardson: bool = False

    def __post_init__(self):
        if not 1e-9 <= self.step <= 1e-2:
            raise ValueError("FD step must lie in [1e-9, 1e-2]")
        if self.scheme != "central":
            raise ValueError("only central differences are supported")


@dataclass(frozen=True)
class FDResult:
    value: complex
    one_sided_gap: float
    halving_change: float = float("nan")


def _default_opts():
    return SolveOptions(tol=1e-13)


def _sub(a, b):
    return a - b


def fd_model(observable, model, shift, base, plan=FDPlan(), opts=None,
             difference=_sub):
    """Central difference of ``observable(solve_inverse(shift(model, t)))`` at ``t=0``.

    ``base`` is the solved parameter set of ``model``; every perturbed solve
    is seeded from it.  ``difference(a, b)`` computes ``a - b`` for the
    observable's values (useful for quantities defined modulo a branch).
    Raises :class:`StepTooLarge` when the two one-sided differences disagree
    by more than 10%.
    """
    opts = opts or _default_opts()

    def at(t):
        return observable(solve_inverse(shift(model, t), base, opts).params)

    def central(h):
        fp, fm = at(h), at(-h)
        return fp, fm, difference(fp, fm) / (2 * h)

    h = plan.step
    f0 = observable(base)
    fp, fm, d = central(h)
    fwd = difference(fp, f0) / h
    bwd = difference(f0, fm) / h
    gap = abs(fwd - bwd)
    if gap > 0.1 * max(abs(fwd), abs(bwd)) and gap > 1e-8:
        raise StepTooLarge(f"one-sided differences disagree ({fwd} vs {bwd})")
    scale = max(abs(fwd), abs(bwd), 1e-300)
    if not plan.richardson:
        return FDResult(complex(d), float(gap / scale))
    _, _, d2 = central(h / 2)
    change = abs(d2 - d) / max(abs(d2), 1e-300)
    return FDResult(complex((4 * d2 - d) / 3), float(gap / scale), float(change))


def _shift_g(k):
    def shift(m, t):
        g = m.g.copy()
        g[k - 1] += t
        return m.with_(g=g)
    return shift


def _shift_gt(k):
    def shift(m, t):
        gt = m.gt.copy()
        gt[k - 1] += t
        return m.with_(gt=gt)
    return shift


def _shift_eps(m, t):
    return m.with_(epsilon=m.epsilon + t)


def fd_gk(observable, model, k, base, plan=FDPlan(), opts=None, difference=_sub):
    """``d observable / d g_k`` through re-solves at ``g_k +- h``."""
    if not 1 <= k <= model.d1 + 1:
        raise ValueError(f"k must be in [1, {model.d1 + 1}]")
    return fd_model(observable, model, _shift_g(k), base, plan, opts, difference)


def fd_gtk(observable, model, k, base, plan=FDPlan(), opts=None, difference=_sub):
    """``d observable / d gt_k`` through re-solves at ``gt_k +- h``."""
    if not 1 <= k <= model.d2 + 1:
        raise ValueError(f"k must be in [1, {model.d2 + 1}]")
    return fd_model(observable, model, _shift_gt(k), base, plan, opts, difference)


def fd_epsilon(observable, model, base, plan=FDPlan(), opts=None, difference=_sub):
    """``d observable / d epsilon`` at fixed potentials."""
    return fd_model(observable, model, _shift_eps, base, plan, opts, difference)


# ---------------------------------------------------------------------------
# pairing


def pairing_radius(p, eps=None):
    """Half the distance from ``u_inf`` to the nearest other singularity of ``x^k field``."""
    m = p.modulus
    cands = [ell.lattice_distance(2 * p.u_inf, m),
             min(abs(1), abs(m.tau), abs(m.tau - 1), abs(m.tau + 1))]
    if eps is not None:
        cands.extend(ell.lattice_distance(p.u_inf - np.asarray(eps.e), m))
    return 0.5 * float(min(cands))


def contour_pair(field, p, k, q=QuadratureSpec(), eps=None, radius=None,
                 rtol=1e-10):
    """``KAPPA / k * (1/2 i pi) oint_{u_inf} x(s)^k field(s) ds``.

    ``field(s) = x'(s) df/dV1(x(s))`` is called with the array of circle
    nodes (wrap scalar-only callables in ``np.vectorize``); the circle avoids
    the endpoints in ``eps`` when given.  Node doubling must change the
    result by less than ``rtol`` (relative).
    """
    if radius is None:
        radius = pairing_radius(p, eps)

    def quad(n):
        s, rw = _circle(p.u_inf, radius, n)
        x = x_derivs(p, s, 0)[0]
        vals = np.broadcast_to(np.asarray(field(s), dtype=complex), s.shape)
        terms = x ** k * vals * rw
        return np.mean(terms), np.mean(np.abs(terms))

    n = q.circle_nodes
    prev, _ = quad(n)
    while True:
        cur, size = quad(2 * n)
        # relative to the result, or to the integrand when the result cancels
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-6 * size, 1e-300):
            break
        n *= 2
        if n >= MAX_NODES:
            raise QuadratureNotConverged("pairing contour did not converge")
        prev = cur
    return complex(KAPPA * cur / k)


def contour_pair_dot(field, p, k, q=QuadratureSpec(), eps=None, **kw):
    """Pairing of a field in the "dot" convention of :mod:`twomatrix.variations`."""
    return DOT_SIGN * contour_pair(field, p, k, q, eps, **kw)


# ---------------------------------------------------------------------------
# Laurent coefficients


def _laurent_once(f, center, orders, radius, n):
    z = np.exp(2j * np.pi * (np.arange(n) + 0.25) / n)
    vals = np.asarray(f(center + radius * z), dtype=complex)
    return np.array([np.mean(vals * (radius * z) ** (-j)) for j in orders])


def laurent_fit(f, center, orders, radius, n=128, rtol=1e-6, atol=1e-9):
    """Laurent coefficients ``c_j`` of ``f`` at ``center`` for ``j`` in ``orders``.

    ``f`` must accept an array of points.  Coefficients are the discrete
    Fourier coefficients on the circle of ``radius``; they are recomputed on
    ``radius/2`` and must agree to ``rtol`` (relative) or ``atol``.
    """
    if not np.isfinite(radius) or radius <= 0:
        raise RadiusInvalid(f"radius must be positive, got {radius}")
    orders = list(orders)
    a = _laurent_once(f, center, orders, radius, n)
    b = _laurent_once(f, center, orders, radius / 2, n)
    bad = np.abs(a - b) > rtol * np.abs(b) + atol
    if np.any(bad):
        worst = [orders[i] for i in np.flatnonzero(bad)]
        raise InconsistentRadii(f"Laurent coefficients of orders {worst} disagree "
                                "between the two radii")
    return dict(zip(orders, b))
