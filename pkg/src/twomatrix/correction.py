"""Genus-one corrections: the resolvent correction ``Y1``, ``Gamma1`` and ``F1``.

``Y1(x(s)) x'(s)`` is an elliptic function of ``s`` whose only poles are the
zeros ``e_k`` of ``x'``; near each of them it is fixed by matching the
singular part of the sheet sum.  ``F1`` is given in closed form through theta
functions of the endpoints.
"""

from dataclasses import dataclass, field

import numpy as np

from . import elliptic as ell
from .errors import DegenerateEndpoint, ThetaZeroHit
from .torusmap import (constrained_representatives, sheet_pair, x_derivs,
                       y_derivs)


@dataclass(frozen=True)
class EndpointLocalData:
    e: complex
    x2: complex
    x3: complex
    x4: complex
    x5: complex
    y1: complex
    y2: complex
    y3: complex
    r: complex
    s: complex
    t: complex

    @property
    def C(self):
        """Bracket multiplying ``wp(s - e)`` in ``Y1`` (before the ``zeta1`` term)."""
        return (self.x3 ** 2 / self.x2 ** 2 - self.x4 / self.x2
                + self.x3 / self.x2 * self.y2 / self.y1 - self.y3 / self.y1)


def local_data(p, e):
    """Derivative stack and the local coefficients ``r, s, t`` at the endpoint ``e``."""
    xd = x_derivs(p, e, 5)
    yd = y_derivs(p, e, 3)
    scale_x = max(1.0, abs(xd[0]))
    scale_y = max(1.0, abs(yd[0]))
    if abs(xd[2]) < 1e-8 * scale_x or abs(yd[1]) < 1e-8 * scale_y:
        raise DegenerateEndpoint(f"x'' or y' vanishes at e={e}")
    r = xd[3] / (3 * xd[2])
    s = xd[4] / (6 * xd[2])
    t = xd[5] / (60 * xd[2]) - r * s
    return EndpointLocalData(complex(e), xd[2], xd[3], xd[4], xd[5],
                             yd[1], yd[2], yd[3], r, s, t)


def all_local_data(p, eps):
    return [local_data(p, e) for e in eps.e]


def coefficients(p, locs):
    """Per-endpoint weights ``(a, b, c)`` of ``wp'', wp', wp`` in ``Y1 x'``."""
    z1 = p.zeta1
    out = []
    for L in locs:
        den = 48 * L.x2 * L.y1
        out.append((1 / den, L.x3 / (L.x2 * den), L.C / den - z1 / (2 * L.x2 * L.y1)))
    return np.array(out)


def y1_xprime(p, locs, s):
    """``Y1(x(s)) x'(s)``, the elliptic combination of ``wp'', wp', wp`` at the endpoints."""
    s = np.asarray(s, dtype=complex)
    coef = coefficients(p, locs)
    acc = np.zeros_like(s)
    for (a, b, c), L in zip(coef, locs):
        w = ell.wp_derivs(s - L.e, p.modulus, 2)
        acc = acc + a * w[2] + b * w[1] + c * w[0]
    return acc if acc.ndim else complex(acc)


def y1_of_s(p, locs, s):
    """The correction ``Y1`` to the resolvent at ``x(s)``."""
    return y1_xprime(p, locs, s) / x_derivs(p, s, 1)[1]


def sheet_term(p, s, e):
    """Singular sheet-sum contribution to ``Y1 x'(s)`` near the branch point ``e``.

    With ``st`` the colliding preimage of ``x(s)``, this is
    ``-wp(st - s) / (x'(st) (y(s) - y(st)))``: the sign is the one that
    reproduces the pole matching at ``e`` (compare :func:`sheet_term_literal`).
    """
    st = sheet_pair(p, s, e)
    m = p.modulus
    return -ell.wp(st - s, m) / (x_derivs(p, st, 1)[1] * (y_derivs(p, s, 0)[0]
                                                         - y_derivs(p, st, 0)[0]))


def sheet_sum_y1(p, s, e):
    """Sheet-sum counterpart of :func:`y1_of_s` near ``e`` (divided by ``x'(s)``)."""
    return sheet_term(p, s, e) / x_derivs(p, s, 1)[1]


def sheet_term_literal(p, s, e):
    """``wp(st - s) / (x'(st) x'(s) (y(s) - y(st)))`` exactly as the k-sum term is written."""
    st = sheet_pair(p, s, e)
    m = p.modulus
    return ell.wp(st - s, m) / (x_derivs(p, st, 1)[1] * x_derivs(p, s, 1)[1]
                                * (y_derivs(p, s, 0)[0] - y_derivs(p, st, 0)[0]))


def bargmann(p, s, u):
    """The Bargmann kernel ``wp(s - u)`` in the uniformizing coordinate."""
    return ell.wp(s - u, p.modulus)


def gamma1(p, locs):
    """``sum_k (C_k - 24 zeta1) / (48 x''(e_k) y'(e_k))``."""
    z1 = p.zeta1
    return complex(sum((L.C - 24 * z1) / (48 * L.x2 * L.y1) for L in locs))


def dF1_depsilon(p, locs):
    """Analytic ``dF1/d epsilon`` with the filling fraction defined by ``2 i pi epsilon = oint_A y dx``.

    Moving ``epsilon`` changes ``y dx`` by ``2 i pi ds``, which rescales the
    variation fields of the potential direction by ``-2 i pi``; hence the
    factor relative to :func:`gamma1`.
    """
    return -2j * np.pi * gamma1(p, locs)


# ---------------------------------------------------------------------------
# free energy


@dataclass(frozen=True)
class F1Value:
    value: complex
    log_terms: np.ndarray = field(repr=False)
    branch: int = 0

    @property
    def log_sum(self):
        return complex(np.sum(self.log_terms))


def f1_representatives(p, eps):
    """Endpoint representatives with exact sums ``-(d2-1) u_inf`` and ``(d1-1) u_inf``."""
    e = constrained_representatives(p, eps.e, -(p.d2 - 1) * p.u_inf)
    et = constrained_representatives(p, eps.et, (p.d1 - 1) * p.u_inf)
    return e, et


def _theta_checked(u, m):
    if np.any(ell.lattice_distance(u, m) <= ell.POLE_GUARD):
        raise ThetaZeroHit("theta argument on the lattice")
    return ell.theta(u, m)


def f1_log_terms(p, e, et):
    """Logarithms (principal branch) of every factor inside the ``F1`` logarithm."""
    m = p.modulus
    e = np.asarray(e, dtype=complex)
    et = np.asarray(et, dtype=complex)
    n, nt = len(e), len(et)
    terms = [4 * np.log(p.gamma), 4 * np.log(p.gammat), 8 * np.log(p.theta_prime0)]
    terms.append(n * nt * np.log(_theta_checked(2 * p.u_inf, m)))
    diff = (e[:, None] - et[None, :]).ravel()
    terms.extend(np.log(_theta_checked(diff, m)))
    terms.extend(-nt * np.log(_theta_checked(e - p.u_inf, m)))
    terms.extend(-n * np.log(_theta_checked(et + p.u_inf, m)))
    return np.array(terms, dtype=complex)


def f1(p, eps, reps=None):
    """``F1 = -(1/24) ln[gamma^4 gammat^4 theta'(0)^8 prod_ij theta(e_i - et_j) theta(2u_inf)
    / (theta(e_i - u_inf) theta(et_j + u_inf))]`` with the additive constant set to zero.

    The logarithm is assembled as a sum of principal logarithms; ``branch``
    is the integer ``n`` with ``sum = Log(product) + 2 i pi n``.
    """
    e, et = f1_representatives(p, eps) if reps is None else reps
    terms = f1_log_terms(p, e, et)
    total = np.sum(terms)
    principal = np.log(np.exp(total))
    branch = int(np.round((total - principal).imag / (2 * np.pi)))
    return F1Value(value=complex(-total / 24), log_terms=terms, branch=branch)


def f1_difference(a, b):
    """``a - b`` for two :class:`F1Value` evaluated on continuously tracked endpoints.

    Factor-wise logarithms are compared so that a branch jump of any single
    factor is removed (each factor moves by much less than ``pi``).
    """
    d = a.log_terms - b.log_terms
    d = d - 2j * np.pi * np.round(d.imag / (2 * np.pi))
    return complex(-np.sum(d) / 24)


def f1_ratio_form(p, eps):
    """``-(1/24) ln(theta'(0)^8 A^2 At^(d2+1) prod_i y'(e_i))`` up to a ``V1``-independent constant."""
    logs = (8 * np.log(p.theta_prime0) + 2 * np.log(p.A)
            + (p.d2 + 1) * np.log(p.At) + np.sum(np.log(eps.yd_e[:, 1])))
    return complex(-logs / 24)


# ---------------------------------------------------------------------------
# report


@dataclass
class CorrectionReport:
    y1_samples: list
    gamma1: complex
    f1: complex
    f1_branch: int
    validation: dict
    status: str = "pass"


def sample_points(p, eps, n_circle=64, n_approach=8):
    """Default sampling: a circle around the cell centre and rays towards each endpoint."""
    m = p.modulus
    centre = 0.5 + 0.5 * m.tau
    e = np.array([ell.reduce(z, m).reduced for z in eps.e])
    dmin = min(abs(a - b) for i, a in enumerate(e) for b in e[i + 1:])
    radius = 0.25 * dmin
    pts = list(centre + radius * np.exp(2j * np.pi * (np.arange(n_circle) + 0.5) / n_circle))
    for z in e:
        for j in range(n_approach):
            pts.append(z + 0.1 * 0.5 ** j * np.exp(0.3j))
    return np.array(pts)
