"""Genus-one theta function, its logarithmic derivative and the Weierstrass family.

Conventions (lattice generated by ``1`` and ``tau``):

* ``theta`` is the odd Jacobi theta function ``theta_1(pi u | tau)``; it has a
  simple zero at every lattice point and obeys
  ``theta(u + tau) = -theta(u) exp(-i pi (2u + tau))`` and
  ``theta(u + 1) = -theta(u)``.
* ``Z = theta' / theta`` with ``Z(u + 1) = Z(u)``, ``Z(u + tau) = Z(u) - 2 i pi``
  and ``Z(u) ~ 1/u + zeta1 u``.
* ``wp = -Z'``, so ``wp(u) ~ 1/u^2 - zeta1`` (this differs from the classical
  Weierstrass function by the constant ``zeta1 + e``-type shift; only ``-Z'``
  is used downstream).

All evaluation routines accept scalars or numpy arrays.  Arguments are first
moved to the lattice cell centred on the origin and the quasi-periodic factor
is applied afterwards, which keeps every series in its fast-converging regime.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ModulusDegenerate, PoleProximity, SeriesCapExceeded

POLE_GUARD = 1e-8
IM_TAU_FLOOR = 0.02


@dataclass(frozen=True)
class Modulus:
    tau: complex
    series_tol: float = 1e-16
    max_terms: int = 64
    floor: float = IM_TAU_FLOOR
    q: complex = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tau = complex(self.tau)
        object.__setattr__(self, "tau", tau)
        if not np.isfinite(tau) or tau.imag <= 0:
            raise ModulusDegenerate(f"Im(tau) must be positive, got tau={tau}")
        if tau.imag <= self.floor:
            raise ModulusDegenerate(
                f"Im(tau)={tau.imag:.3g} is below the series floor {self.floor}")
        object.__setattr__(self, "q", np.exp(1j * np.pi * tau))

    @property
    def zeta_max_terms(self):
        # the Fourier series of Z converges only geometrically (not in n^2)
        return 16 * self.max_terms


@dataclass(frozen=True)
class TorusPoint:
    u: complex
    reduced: complex
    winding: tuple


def lattice_coords(u, m):
    """Real coordinates ``(a, b)`` with ``u = a + b tau``."""
    u = np.asarray(u, dtype=complex)
    b = u.imag / m.tau.imag
    a = u.real - b * m.tau.real
    return a, b


def reduce(u, m):
    """Representative of ``u`` in the parallelogram ``[0,1) + [0,1) tau``."""
    a, b = lattice_coords(u, m)
    j = int(np.floor(a))
    k = int(np.floor(b))
    red = complex(u) - j - k * m.tau
    # rounding can leave the representative a hair outside the cell
    ra, rb = lattice_coords(red, m)
    if ra >= 1.0:
        red -= 1
        j += 1
    if rb >= 1.0:
        red -= m.tau
        k += 1
    return TorusPoint(u=complex(u), reduced=complex(red), winding=(j, k))


def center(u, m):
    """Split ``u = v + j + k tau`` with ``v`` in the cell centred at 0."""
    u = np.asarray(u, dtype=complex)
    a, b = lattice_coords(u, m)
    k = np.round(b)
    j = np.round(a)
    return u - j - k * m.tau, j, k


def lattice_distance(u, m):
    """Distance from ``u`` to the nearest lattice point."""
    v, _, _ = center(u, m)
    best = np.abs(v)
    for dj in (-1, 0, 1):
        for dk in (-1, 0, 1):
            best = np.minimum(best, np.abs(v - dj - dk * m.tau))
    return best


def _out(x):
    return complex(x) if np.ndim(x) == 0 else x


def _sum_series(term, m, cap):
    """Add ``term(n)`` for n = 0, 1, ... until two consecutive terms are negligible."""
    total = term(0)
    small = 0
    for n in range(1, cap):
        t = term(n)
        total = total + t
        if np.all(np.abs(t) <= m.series_tol * (np.abs(total) + 1.0)):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise SeriesCapExceeded(
        f"theta series did not converge in {cap} terms (tau={m.tau})")


def _theta_series(v, m, k):
    """k-th derivative of the theta series at the centred argument ``v``."""
    q = m.q

    def term(n):
        w = (2 * n + 1) * np.pi
        return (2.0 * (-1) ** n * q ** ((n + 0.5) ** 2) * w ** k
                * np.sin(w * v + k * np.pi / 2))

    return _sum_series(term, m, m.max_terms)


def theta_derivs(u, m, max_order=4):
    """``[theta(u), theta'(u), ..., theta^(max_order)(u)]`` by term-wise differentiation."""
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    v, j, k = center(u, m)
    base = [_theta_series(v, m, r) for r in range(max_order + 1)]
    # theta(v + j + k tau) = (-1)^(j+k) exp(-i pi (2 k v + k^2 tau)) theta(v)
    fac = (-1.0) ** (j + k) * np.exp(-1j * np.pi * (2 * k * v + k * k * m.tau))
    lam = -2j * np.pi * k
    out = []
    for r in range(max_order + 1):
        acc = 0
        for s in range(r + 1):
            acc = acc + comb(r, s) * lam ** (r - s) * base[s]
        out.append(_out(fac * acc))
    return out


def theta(u, m):
    return theta_derivs(u, m, 0)[0]


@lru_cache(maxsize=None)
def _cot_poly(k):
    """Coefficients of P_k with d^k/dw^k cot(w) = P_k(cot w)."""
    p = np.array([0.0, 1.0])
    for _ in range(k):
        p = -P.polymul([1.0, 0.0, 1.0], P.polyder(p))
    return p


@lru_cache(maxsize=64)
def _lambert(q, n):
    return q ** (2 * n) / (1 - q ** (2 * n))


def _check_pole(v, guard):
    if np.any(np.abs(v) < guard):
        raise PoleProximity(
            f"argument within {guard:g} of a lattice point")


def zfun_derivs(u, m, max_order, pole_guard=POLE_GUARD):
    """``[Z(u), Z'(u), ..., Z^(max_order)(u)]``.

    Uses the expansion ``Z(v) = pi cot(pi v) + 4 pi sum_n q^2n/(1-q^2n) sin(2 pi n v)``
    so the pole at the origin is carried exactly by the cotangent.
    """
    v, _, k = center(u, m)
    _check_pole(v, pole_guard)
    c = 1.0 / np.tan(np.pi * v)
    res = []
    for r in range(max_order + 1):
        sing = np.pi ** (r + 1) * P.polyval(c, _cot_poly(r))

        def term(n, r=r):
            if n == 0:
                return np.zeros_like(v)
            w = 2 * np.pi * n
            return 4 * np.pi * _lambert(m.q, n) * w ** r * np.sin(w * v + r * np.pi / 2)

        val = sing + _sum_series(term, m, m.zeta_max_terms)
        if r == 0:
            val = val - 2j * np.pi * k
        res.append(_out(val))
    return res


def zfun(u, m, order=0, pole_guard=POLE_GUARD):
    """``Z^(order)(u)``."""
    return zfun_derivs(u, m, order, pole_guard)[order]


def wp(u, m, order=0, pole_guard=POLE_GUARD):
    """``order``-th derivative of ``wp = -Z'``."""
    return -zfun_derivs(u, m, order + 1, pole_guard)[order + 1]


def wp_derivs(u, m, max_order, pole_guard=POLE_GUARD):
    z = zfun_derivs(u, m, max_order + 1, pole_guard)
    return [-z[r + 1] for r in range(max_order + 1)]


def theta_prime0(m):
    return theta_derivs(0.0, m, 1)[1]


def zeta1(m):
    """Coefficient of ``u`` in ``Z(u) = 1/u + zeta1 u + O(u^3)``."""
    d = theta_derivs(0.0, m, 3)
    return d[3] / (3 * d[1])


def log_theta(u, m):
    """``log theta(u)`` continued through the quasi-periodicity.

    The value is ``log theta(v) + log(factor)`` with the factor's logarithm
    taken literally (``i pi (j + k) - i pi (2 k v + k^2 tau)``), so the result
    depends smoothly on ``u`` inside each lattice cell.
    """
    v, j, k = center(u, m)
    return _out(np.log(_theta_series(v, m, 0))
                + 1j * np.pi * (j + k) - 1j * np.pi * (2 * k * v + k * k * m.tau))
