"""Complex univariate polynomials.

Coefficients are stored in increasing degree order, ``coeffs[k]`` being the
coefficient of ``z**k``.  The potentials of the model are kept in this raw
form; the weighted couplings ``g_k`` (with ``V(x) = g_0 + sum g_k x^k / k``)
are converted at the model boundary, see :mod:`twomatrix.modelmap`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, ZeroLeadingCoefficient


@dataclass(frozen=True)
class Poly:
    coeffs: tuple

    def __init__(self, coeffs):
        c = [complex(v) for v in np.atleast_1d(np.asarray(coeffs, dtype=complex))]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [0j]
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        return eval_poly(self, z)

    def __len__(self):
        return len(self.coeffs)

    def array(self):
        return np.array(self.coeffs, dtype=complex)


def eval_poly(p, z):
    """Horner evaluation; ``z`` may be a scalar or an array."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for c in reversed(p.coeffs):
        acc = acc * z + c
    return acc if acc.ndim else complex(acc)


def derivative(p):
    if p.degree == 0:
        return Poly([0])
    return Poly([k * p.coeffs[k] for k in range(1, len(p.coeffs))])


def _companion_roots(c):
    return np.linalg.eigvals(np.polynomial.polynomial.polycompanion(c))


def roots(p, tol=1e-15, max_iter=500):
    """All roots of ``p`` by Aberth-Ehrlich simultaneous iteration.

    Initial guesses sit on a circle of radius ``1 + max|c_k / c_n|`` with a
    fixed angular offset, so results are reproducible.  If the iteration does
    not settle, the companion-matrix eigenvalues are polished instead.
    """
    c = p.array()
    n = p.degree
    if n < 1:
        raise ZeroLeadingCoefficient("roots() needs degree >= 1")
    if c[-1] == 0:
        raise ZeroLeadingCoefficient("leading coefficient is zero")
    if n == 1:
        return np.array([-c[0] / c[1]])

    dp = derivative(p)
    radius = 1.0 + np.max(np.abs(c[:-1] / c[-1]))
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)

    for _ in range(max_iter):
        ratio = eval_poly(p, z) / eval_poly(dp, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        corr = ratio / (1.0 - ratio * inv.sum(axis=1))
        corr = np.where(np.isfinite(corr), corr, 0.0)
        z = z - corr
        if np.all(np.abs(corr) <= tol * (1.0 + np.abs(z))):
            break
    else:
        z = _companion_roots(c)

    # A few plain Newton steps clean up the last digits (and the fallback).
    for _ in range(3):
        d = eval_poly(dp, z)
        step = np.where(d != 0, eval_poly(p, z) / np.where(d != 0, d, 1), 0)
        z = z - step
    if not np.all(np.isfinite(z)):
        raise NonConvergence("polynomial root iteration diverged")
    return np.sort_complex(z)
