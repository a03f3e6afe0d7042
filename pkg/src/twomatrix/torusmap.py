"""Elliptic uniformization ``x(u), y(u)`` of a genus-one spectral curve.

The curve is parametrised by the torus with periods ``(1, tau)``:

    x(u) = A (Z(u - u_inf) - Z(u + u_inf)) + A_0 + sum_{k=2}^{d2} A_k/(k-1)! wp^(k-2)(u + u_inf)
    y(u) = At (Z(u + u_inf) - Z(u - u_inf)) + At_0 + sum_{k=2}^{d1} At_k/(k-1)! wp^(k-2)(u - u_inf)

with ``A = gamma theta(2 u_inf) / theta'(0)`` and ``At = -gammat theta(2 u_inf) / theta'(0)``.
So ``x`` has a simple pole at ``u_inf`` and a pole of order ``d2`` at
``-u_inf``; ``y`` has a pole of order ``d1`` at ``u_inf`` and a simple pole at
``-u_inf``.  Branch points of ``Y(x)`` are the zeros of ``x'``.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from math import factorial

import numpy as np

from . import elliptic as ell
from .errors import (CollisionDetected, EndpointCountMismatch, NonConvergence,
                     PoleProximity, SeedEscaped)

COLLISION_TOL = 1e-6


@dataclass(frozen=True)
class UniformParams:
    d1: int
    d2: int
    modulus: ell.Modulus
    u_inf: complex
    gamma: complex
    gammat: complex
    xA: tuple  # (A_0, A_2, ..., A_d2)
    yA: tuple  # (At_0, At_2, ..., At_d1)

    def __post_init__(self):
        object.__setattr__(self, "xA", tuple(complex(a) for a in self.xA))
        object.__setattr__(self, "yA", tuple(complex(a) for a in self.yA))
        object.__setattr__(self, "u_inf", complex(self.u_inf))
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "gammat", complex(self.gammat))
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("d1 and d2 must be >= 1")
        if len(self.xA) != self.d2 or len(self.yA) != self.d1:
            raise ValueError(
                f"need {self.d2} x coefficients and {self.d1} y coefficients")

    @property
    def tau(self):
        return self.modulus.tau

    @property
    def n_params(self):
        return self.d1 + self.d2 + 4

    def to_vector(self):
        return np.array([self.gamma, self.gammat, self.u_inf, self.tau,
                         *self.xA, *self.yA], dtype=complex)

    @classmethod
    def from_vector(cls, v, d1, d2, template=None):
        v = np.asarray(v, dtype=complex)
        if template is not None:
            mod = replace(template.modulus, tau=complex(v[3]))
        else:
            mod = ell.Modulus(complex(v[3]))
        return cls(d1=d1, d2=d2, modulus=mod, u_inf=v[2], gamma=v[0],
                   gammat=v[1], xA=tuple(v[4:4 + d2]), yA=tuple(v[4 + d2:]))

    def with_(self, **kw):
        if "tau" in kw:
            kw["modulus"] = replace(self.modulus, tau=complex(kw.pop("tau")))
        return replace(self, **kw)

    # quantities every evaluation needs; cached on the (frozen) instance
    @cached_property
    def theta_prime0(self):
        return ell.theta_prime0(self.modulus)

    @cached_property
    def theta_2uinf(self):
        return ell.theta(2 * self.u_inf, self.modulus)

    @cached_property
    def A(self):
        """Residue of x at u_inf."""
        return self.gamma * self.theta_2uinf / self.theta_prime0

    @cached_property
    def At(self):
        """Residue of y at -u_inf."""
        return -self.gammat * self.theta_2uinf / self.theta_prime0

    @cached_property
    def zeta1(self):
        return ell.zeta1(self.modulus)

    def check(self):
        m = self.modulus
        for w in (self.u_inf, -self.u_inf, 2 * self.u_inf):
            if ell.lattice_distance(w, m) <= ell.POLE_GUARD:
                raise PoleProximity("u_inf too close to a half-lattice point")
        if self.gamma == 0 or self.gammat == 0:
            raise ValueError("gamma and gammat must be nonzero")
        if self.d2 >= 2 and self.xA[-1] == 0:
            raise ValueError("leading pole coefficient of x vanishes")
        if self.d1 >= 2 and self.yA[-1] == 0:
            raise ValueError("leading pole coefficient of y vanishes")


def _derivs(u, m, res, pole, simple_sign, const, coeffs, max_order):
    """Shared body of x_derivs / y_derivs.

    ``res * (Z(u - pole) - Z(u + pole)) * simple_sign`` carries the two simple
    poles; ``coeffs[k-2]`` multiplies ``wp^(k-2)(u + pole_hi)``.
    """
    u = np.asarray(u, dtype=complex)
    d = len(coeffs) + 1  # highest pole order
    top = max_order + d - 1
    zm = ell.zfun_derivs(u - pole, m, max_order)
    zp = ell.zfun_derivs(u + pole, m, top)
    out = []
    for r in range(max_order + 1):
        val = simple_sign * res * (zm[r] - zp[r])
        if r == 0:
            val = val + const
        for k in range(2, d + 1):
            # wp^(k-2) = -Z^(k-1)
            val = val - coeffs[k - 2] / factorial(k - 1) * zp[k - 1 + r]
        out.append(ell._out(val))
    return out


def x_derivs(p, u, max_order=5):
    """``[x(u), x'(u), ..., x^(max_order)(u)]``."""
    return _derivs(u, p.modulus, p.A, p.u_inf, 1.0, p.xA[0], p.xA[1:], max_order)


def y_derivs(p, u, max_order=4):
    """``[y(u), y'(u), ..., y^(max_order)(u)]``."""
    # y's high-order pole sits at +u_inf: reuse the x template with u_inf -> -u_inf
    return _derivs(u, p.modulus, p.At, -p.u_inf, 1.0, p.yA[0], p.yA[1:], max_order)


def x_of_u(p, u):
    return x_derivs(p, u, 0)[0]


def y_of_u(p, u):
    return y_derivs(p, u, 0)[0]


# ---------------------------------------------------------------------------
# zeros of x' and y'


def _poles_of(which, p):
    """Poles of x' (or y') as (position, multiplicity)."""
    if which == "x":
        return [(p.u_inf, 2), (-p.u_inf, p.d2 + 1)]
    return [(p.u_inf, p.d1 + 1), (-p.u_inf, 2)]


def _winding(f, corners, max_points=20000):
    """Winding number of ``f`` around the closed polygon ``corners``."""
    pts = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        pts.append(a + (b - a) * np.linspace(0, 1, 24, endpoint=False))
    z = np.concatenate(pts)
    vals = f(z)
    while True:
        zc = np.append(z, z[0])
        vc = np.append(vals, vals[0])
        dphi = np.angle(vc[1:] / vc[:-1])
        bad = np.abs(dphi) > 0.4
        if not bad.any():
            return int(round(dphi.sum() / (2 * np.pi))), np.min(np.abs(vals))
        if len(z) > max_points:
            raise NonConvergence("argument principle: boundary too close to a zero")
        mids = 0.5 * (zc[:-1][bad] + zc[1:][bad])
        idx = np.nonzero(bad)[0] + 1
        z = np.insert(z, idx, mids)
        vals = np.insert(vals, idx, f(mids))


def _offsets(coords, n):
    """Grid offset in [0, 1/n) maximising the clearance of ``coords`` from grid lines."""
    h = 1.0 / n
    r = np.sort(np.mod(coords, h))
    gaps = np.diff(np.concatenate([r, [r[0] + h]]))
    i = int(np.argmax(gaps))
    return (r[i] + gaps[i] / 2) % h


def find_zeros(f, fprime, poles, m, expected, grid=4, max_depth=8):
    """Zeros of an elliptic function inside one period parallelogram.

    ``poles`` lists (position, multiplicity).  The parallelogram is tiled so
    that no pole lies near a cell edge; the argument principle gives the zero
    count of each cell (winding + poles inside), cells holding more than one
    zero or a pole are subdivided, and isolated zeros are polished by Newton.
    """
    pa = np.array([ell.lattice_coords(w, m)[0] for w, _ in poles])
    pb = np.array([ell.lattice_coords(w, m)[1] for w, _ in poles])
    oa = _offsets(pa, grid)
    ob = np.mod(_offsets(pb, grid), 1.0 / grid)
    tau = m.tau

    def to_u(a, b):
        return a + b * tau

    def poles_in(a0, a1, b0, b1):
        cnt = 0
        for (w, mult), a, b in zip(poles, pa, pb):
            # bring the pole's coordinates into [a0, a0+1) x [b0, b0+1)
            aa = a0 + np.mod(a - a0, 1.0)
            bb = b0 + np.mod(b - b0, 1.0)
            if a0 < aa < a1 and b0 < bb < b1:
                cnt += mult
        return cnt

    def newton(z0, a0, a1, b0, b1):
        z = z0
        for _ in range(60):
            step = f(z) / fprime(z)
            z = z - step
            if abs(step) < 1e-15 * (1 + abs(z)):
                break
        else:
            return None
        a, b = ell.lattice_coords(z, m)
        pad = 0.05 * (a1 - a0)
        if a0 - pad <= a <= a1 + pad and b0 - pad <= b <= b1 + pad:
            return complex(z)
        return None

    found = []
    total = 0
    stack = []
    h = 1.0 / grid
    for i in range(grid):
        for j in range(grid):
            stack.append((oa + i * h, oa + (i + 1) * h, ob + j * h, ob + (j + 1) * h, 0))
    while stack:
        a0, a1, b0, b1, depth = stack.pop()
        corners = [to_u(a0, b0), to_u(a1, b0), to_u(a1, b1), to_u(a0, b1)]
        wnd, _ = _winding(f, corners)
        npole = poles_in(a0, a1, b0, b1)
        nz = wnd + npole
        if nz < 0:
            raise EndpointCountMismatch("negative zero count in a cell")
        if nz == 0:
            continue
        if nz == 1 and npole == 0:
            z = newton(to_u((a0 + a1) / 2, (b0 + b1) / 2), a0, a1, b0, b1)
            if z is not None:
                found.append(z)
                total += 1
                continue
        if depth >= max_depth:
            if nz >= 2 and npole == 0:
                raise CollisionDetected(
                    f"{nz} zeros could not be separated (cell width {a1 - a0:.2e})")
            raise NonConvergence("zero isolation failed")
        am, bm = (a0 + a1) / 2, (b0 + b1) / 2
        stack += [(a0, am, b0, bm, depth + 1), (am, a1, b0, bm, depth + 1),
                  (a0, am, bm, b1, depth + 1), (am, a1, bm, b1, depth + 1)]
    if total != expected:
        raise EndpointCountMismatch(f"found {total} zeros, expected {expected}")
    z = np.array(found)
    for i in range(len(z)):
        for j in range(i):
            if ell.lattice_distance(z[i] - z[j], m) < COLLISION_TOL:
                raise CollisionDetected("two endpoints coincide (critical model)")
    return z


def _sort_key(m):
    def key(w):
        t = ell.reduce(w, m).reduced
        a, b = ell.lattice_coords(t, m)
        return (round(float(a), 9), round(float(b), 9))
    return key


@dataclass(frozen=True)
class EndpointSet:
    """Zeros ``e`` of x' and ``et`` of y' with derivative caches.

    ``xd_e[i, r]`` is ``x^(r)(e_i)`` (r = 0..5), ``yd_e[i, r]`` is
    ``y^(r)(e_i)`` (r = 0..4); ``xd_et``/``yd_et`` likewise at ``et``.
    """
    e: np.ndarray
    et: np.ndarray
    xd_e: np.ndarray
    yd_e: np.ndarray
    xd_et: np.ndarray
    yd_et: np.ndarray
    residuals: dict = field(default_factory=dict)


def _derivative_table(p, pts):
    xd = np.array(x_derivs(p, np.asarray(pts, dtype=complex), 5)).T
    yd = np.array(y_derivs(p, np.asarray(pts, dtype=complex), 4)).T
    return xd.reshape(len(pts), 6), yd.reshape(len(pts), 5)


def endpoint_residuals(p, e, et):
    """Residuals of the lattice-sum and Z-sum constraints on the endpoints."""
    m = p.modulus
    uinf = p.u_inf
    # the Z-sums hold for representatives whose sums match exactly
    e = constrained_representatives(p, e, -(p.d2 - 1) * uinf)
    et = constrained_representatives(p, et, (p.d1 - 1) * uinf)
    s1 = np.sum(e) + (p.d2 - 1) * uinf
    s2 = np.sum(et) - (p.d1 - 1) * uinf
    z2 = ell.zfun(2 * uinf, m)
    return {
        "sum_e": float(ell.lattice_distance(s1, m)),
        "sum_et": float(ell.lattice_distance(s2, m)),
        "zsum_e": abs(np.sum(ell.zfun(uinf - e, m)) - (p.d2 + 1) * z2),
        "zsum_et": abs(np.sum(ell.zfun(uinf + et, m)) - (p.d1 + 1) * z2),
    }


def build_endpoint_set(p, e, et):
    e = np.asarray(e, dtype=complex)
    et = np.asarray(et, dtype=complex)
    xe, ye = _derivative_table(p, e)
    xt, yt = _derivative_table(p, et)
    return EndpointSet(e=e, et=et, xd_e=xe, yd_e=ye, xd_et=xt, yd_et=yt,
                       residuals=endpoint_residuals(p, e, et))


def find_endpoints(p):
    """Locate the ``d2+3`` zeros of x' and the ``d1+3`` zeros of y'.

    Endpoints are returned as representatives in the fundamental
    parallelogram, sorted lexicographically by their lattice coordinates.
    """
    p.check()
    m = p.modulus

    def xp(u):
        return x_derivs(p, u, 1)[1]

    def xpp(u):
        return x_derivs(p, u, 2)[2]

    def yp(u):
        return y_derivs(p, u, 1)[1]

    def ypp(u):
        return y_derivs(p, u, 2)[2]

    e = find_zeros(xp, xpp, _poles_of("x", p), m, p.d2 + 3)
    et = find_zeros(yp, ypp, _poles_of("y", p), m, p.d1 + 3)
    key = _sort_key(m)
    e = np.array(sorted((ell.reduce(z, m).reduced for z in e), key=key))
    et = np.array(sorted((ell.reduce(z, m).reduced for z in et), key=key))
    return build_endpoint_set(p, e, et)


def track_endpoints(p, reference):
    """Endpoints of ``p`` matched one-to-one with ``reference``.

    Each zero is re-polished by Newton from the reference position, so
    representatives and ordering follow continuously from ``reference``.
    Used when parameters are perturbed slightly (finite differences).
    """
    def polish(z, k):
        deriv = x_derivs if k == "x" else y_derivs
        for _ in range(60):
            d = deriv(p, z, 2)
            step = d[1] / d[2]
            z = z - step
            if abs(step) < 1e-15 * (1 + abs(z)):
                return z
        raise NonConvergence("endpoint tracking did not converge")

    e = np.array([polish(z, "x") for z in reference.e])
    et = np.array([polish(z, "y") for z in reference.et])
    return build_endpoint_set(p, e, et)


def constrained_representatives(p, pts, target):
    """Shift the last point by a lattice vector so that ``sum(pts) == target`` exactly."""
    pts = np.array(pts, dtype=complex)
    d = np.sum(pts) - target
    a, b = ell.lattice_coords(d, p.modulus)
    pts[-1] -= np.round(a) + np.round(b) * p.tau
    return pts


# ---------------------------------------------------------------------------


def sheet_pair(p, s, e, radius=0.1, max_iter=50):
    """The other preimage ``st`` of ``x(s)`` near the simple branch point ``e``."""
    if s == e:
        raise ValueError("s must differ from the endpoint")
    if abs(s - e) > radius:
        raise SeedEscaped("s is outside the neighbourhood of the endpoint")
    target = x_of_u(p, s)
    t = 2 * e - s
    for _ in range(max_iter):
        d = x_derivs(p, t, 1)
        step = (d[0] - target) / d[1]
        t = t - step
        if abs(t - e) > radius:
            raise SeedEscaped("Newton left the endpoint neighbourhood")
        if abs(step) < 1e-15 * (1 + abs(t)):
            break
    else:
        if abs(x_of_u(p, t) - target) > 1e-12 * max(1.0, abs(target)):
            raise NonConvergence("sheet_pair Newton did not converge")
    return complex(t)
