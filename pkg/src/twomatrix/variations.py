"""Derivatives of the uniformization data along a potential deformation.

Every quantity here is a "dot" derivative ``x'(s) d(.)/dV1(x(s))`` taken at a
fixed insertion point ``s`` on the curve, written in terms of

    alpha_i = wp(s - e_i) / (x''(e_i) y'(e_i)).

The formulas are implemented exactly as derived for the Wronskian convention
``xdot y' - ydot x' = wp(s - u)``.  The actual response of an observable to a
polynomial change of ``V1`` is obtained from these fields by the contour
pairing in :mod:`twomatrix.oracle`, which carries the one global sign
``DOT_SIGN`` relating the two conventions.
"""

from dataclasses import dataclass

import numpy as np

from . import elliptic as ell
from .torusmap import constrained_representatives, x_derivs, y_derivs

# A dot-field f(s) produced by this module equals DOT_SIGN * x'(s) df/dV1(x(s)),
# where df/dV1 is the loop insertion derivative realized by
# oracle.contour_pair.  The value is fixed by the FD cross-checks.
DOT_SIGN = -1


@dataclass(frozen=True)
class VariationPoint:
    s: complex
    alphas: np.ndarray
    C: complex


def _z(u, m):
    return ell.zfun(u, m)


def _out(x):
    return complex(x) if np.ndim(x) == 0 else x


def alphas(p, eps, s):
    """``alpha_i(s)``; for an array ``s`` the endpoint index is the last axis."""
    s = np.asarray(s, dtype=complex)
    den = eps.xd_e[:, 2] * eps.yd_e[:, 1]
    return ell.wp(s[..., None] - eps.e, p.modulus) / den


def variation_point(p, eps, s):
    a = alphas(p, eps, s)
    m = p.modulus
    C = -0.5 * np.sum(a * (_z(p.u_inf - eps.e, m) + _z(-p.u_inf - eps.e, m)))
    return VariationPoint(s=complex(s), alphas=a, C=complex(C))


def _bracket(p, eps, a, u):
    m = p.modulus
    return 0.5 * np.sum(a * (2 * _z(u - eps.e, m) + _z(p.u_inf + eps.e, m)
                             - _z(p.u_inf - eps.e, m)))


def xdot(p, eps, s, u):
    """``x'(u) / 2 * sum_i alpha_i [2Z(u-e_i) + Z(u_inf+e_i) - Z(u_inf-e_i)]``."""
    a = alphas(p, eps, s)
    return complex(x_derivs(p, u, 1)[1] * _bracket(p, eps, a, u))


def ydot(p, eps, s, u):
    """Mirror of :func:`xdot` with the extra ``-wp(s-u)/x'(u)`` term."""
    a = alphas(p, eps, s)
    xp = x_derivs(p, u, 1)[1]
    yp = y_derivs(p, u, 1)[1]
    return complex(yp * _bracket(p, eps, a, u) - ell.wp(s - u, p.modulus) / xp)


def wronskian(p, eps, s, u):
    """``xdot(u) y'(u) - ydot(u) x'(u)``; equals ``wp(s-u)`` identically."""
    xp = x_derivs(p, u, 1)[1]
    yp = y_derivs(p, u, 1)[1]
    return xdot(p, eps, s, u) * yp - ydot(p, eps, s, u) * xp


def taudot(p, eps, s):
    return _out(2j * np.pi * np.sum(alphas(p, eps, s), axis=-1))


def uinfdot(p, eps, s):
    """From ``-2 u_inf_dot = sum_i alpha_i (Z(u_inf-e_i) + Z(u_inf+e_i))``."""
    m = p.modulus
    a = alphas(p, eps, s)
    return _out(-0.5 * np.sum(a * (_z(p.u_inf - eps.e, m) + _z(p.u_inf + eps.e, m)), axis=-1))


def edot(p, eps, s, i):
    """Velocity of the endpoint ``e_i``.

    The formula involves ``Z(e_i - e_j)``, which is not periodic, so it is
    evaluated on representatives whose sum is exactly ``-(d2-1) u_inf``; the
    velocity itself does not depend on the representative.
    """
    m = p.modulus
    e = constrained_representatives(p, eps.e, -(p.d2 - 1) * p.u_inf)
    a = alphas(p, eps, s)
    C = -0.5 * np.sum(a * (_z(p.u_inf - e, m) + _z(-p.u_inf - e, m)), axis=-1)
    others = np.array([j for j in range(len(e)) if j != i])
    acc = -C - np.sum(a[..., others] * _z(e[i] - e[others], m), axis=-1)
    acc = acc - 0.5 * a[..., i] * eps.xd_e[i, 3] / eps.xd_e[i, 2]
    return _out(acc)


def Adot_over_A(p, eps, s):
    """``sum_i alpha_i wp(e_i - u_inf)`` (wp at the simple pole of x)."""
    a = alphas(p, eps, s)
    return _out(np.sum(a * ell.wp(eps.e - p.u_inf, p.modulus), axis=-1))


def Atdot_over_At(p, eps, s):
    """``sum_i alpha_i wp(e_i + u_inf)`` (wp at the simple pole of y)."""
    a = alphas(p, eps, s)
    return _out(np.sum(a * ell.wp(eps.e + p.u_inf, p.modulus), axis=-1))


def dlog_theta_prime0(p, eps, s):
    """``3/2 * zeta1 * sum_i alpha_i``, i.e. the heat equation applied to ``taudot``."""
    return _out(1.5 * p.zeta1 * np.sum(alphas(p, eps, s), axis=-1))


def _local_bracket(eps):
    x2, x3, x4 = eps.xd_e[:, 2], eps.xd_e[:, 3], eps.xd_e[:, 4]
    y1, y2, y3 = eps.yd_e[:, 1], eps.yd_e[:, 2], eps.yd_e[:, 3]
    return x2, x3, x4, y1, y2, y3


def _wp_tail(p, eps, s):
    """``1/2 sum_i [wp'(e_i-s) x''' / (x''^2 y') - wp''(e_i-s) / (x'' y')]``."""
    m = p.modulus
    x2, x3, _, y1, _, _ = _local_bracket(eps)
    s = np.asarray(s, dtype=complex)
    w = ell.wp_derivs(eps.e - s[..., None], m, 2)
    return 0.5 * np.sum(w[1] * x3 / (x2 ** 2 * y1) - w[2] / (x2 * y1), axis=-1)


def _pair_wp_sums(p, eps):
    """``P_j = sum_{i != j} wp(e_i - e_j)``."""
    d = eps.e[:, None] - eps.e[None, :]
    np.fill_diagonal(d, 0.5)  # placeholder off the lattice, masked below
    w = ell.wp(d, p.modulus)
    np.fill_diagonal(w, 0.0)
    return np.sum(w, axis=0)


def dlog_prod_yprime(p, eps, s, form="pairwise"):
    """``x'(s) d ln prod_i y'(e_i) / dV1(x(s))``.

    ``form='pairwise'`` keeps the double sum over endpoint pairs;
    ``form='reduced'`` is the closed form in terms of ``Adot/A`` and
    ``Atdot/At`` that eliminates the pair sum (including its ``-zeta1/2``
    term as written).  ``form='reduced_consistent'`` is the same closed form
    with the pair sum eliminated through :func:`pair_wp_identity`, which
    drops that term.
    """
    a = alphas(p, eps, s)
    x2, x3, x4, y1, y2, y3 = _local_bracket(eps)
    tail = _wp_tail(p, eps, s)
    z1 = p.zeta1
    if form == "pairwise":
        acc = -np.sum(a * _pair_wp_sums(p, eps), axis=-1)
        acc = acc + z1 * np.sum(a, axis=-1)
        acc = acc + np.sum(a / 2 * (y3 / y1 + x4 / (3 * x2) - 0.5 * x3 ** 2 / x2 ** 2
                                    - y2 / y1 * x3 / x2), axis=-1)
        return _out(acc + tail)
    head = np.sum(a / 2 * (y3 / y1 + x4 / x2 - x3 ** 2 / x2 ** 2 - y2 / y1 * x3 / x2), axis=-1)
    ends = -2 * Adot_over_A(p, eps, s) - (p.d2 + 1) * Atdot_over_At(p, eps, s)
    if form == "reduced":
        return _out(ends - 0.5 * z1 * np.sum(a, axis=-1) + head + tail)
    if form == "reduced_consistent":
        return _out(ends + head + tail)
    raise ValueError(f"unknown form {form!r}")


def pair_wp_identity(p, eps):
    """Per-endpoint residual of the pair-sum identity obtained from ``x''/x'``.

    ``sum_{i != j} wp(e_i - e_j) = zeta1 - x^(4)/(3x'') + (x'''/x'')^2/4
    + 2 wp(e_j - u_inf) + (d2+1) wp(e_j + u_inf)``.
    Returns ``(lhs, rhs)`` arrays.
    """
    m = p.modulus
    n = len(eps.e)
    x2, x3, x4 = eps.xd_e[:, 2], eps.xd_e[:, 3], eps.xd_e[:, 4]
    lhs = np.array([sum(ell.wp(eps.e[i] - eps.e[j], m) for i in range(n) if i != j)
                    for j in range(n)])
    rhs = (p.zeta1 - x4 / (3 * x2) + 0.25 * (x3 / x2) ** 2
           + 2 * ell.wp(eps.e - p.u_inf, m) + (p.d2 + 1) * ell.wp(eps.e + p.u_inf, m))
    return lhs, rhs


def epsilon_alphas(eps):
    """The filling-fraction analogue of ``alpha_i``: ``1 / (x''(e_i) y'(e_i))``."""
    return 1.0 / (eps.xd_e[:, 2] * eps.yd_e[:, 1])


def f1_field(p, eps, s, form="pairwise"):
    """Dot-derivative of ``F1`` assembled from the ratio form
    ``F1 = -(1/24) ln(theta'(0)^8 A^2 At^(d2+1) prod_i y'(e_i)) + const``.

    Equals ``x'(s) Y1(x(s))`` (see :func:`twomatrix.correction.y1_xprime`);
    with ``DOT_SIGN`` this is ``Y1 = -dF1/dV1``.
    """
    return _out(-(8 * dlog_theta_prime0(p, eps, s) + 2 * Adot_over_A(p, eps, s)
                  + (p.d2 + 1) * Atdot_over_At(p, eps, s)
                  + dlog_prod_yprime(p, eps, s, form)) / 24)


def gamma_field(p, eps, s, n=512):
    """Dot-derivative of ``Gamma = oint_B y dx`` assembled from ``xdot`` and ``ydot``.

    At fixed ``x`` the variation of ``y dx`` is ``(ydot x' - y' xdot) du``;
    integrating along the B-cycle gives a constant in ``s`` (``-2 i pi``).
    """
    from .modelmap import cycle_base_points

    b0, b1 = cycle_base_points(p, "B")
    m = p.modulus
    # the B line must stay clear of the insertion point
    base = b0 if ell.lattice_distance(_off_line(s - b0, m), m) > 0.05 else b1
    t = np.arange(n) / n
    u = base + t * p.tau
    vals = [ydot(p, eps, s, ui) * x_derivs(p, ui, 1)[1]
            - y_derivs(p, ui, 1)[1] * xdot(p, eps, s, ui) for ui in u]
    return complex(np.mean(vals) * p.tau)


def _off_line(d, m):
    """Component of ``d`` transverse to the tau direction (as a point on the real axis)."""
    a, _ = ell.lattice_coords(d, m)
    return a - np.round(a)
