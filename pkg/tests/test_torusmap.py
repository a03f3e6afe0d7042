import numpy as np
import pytest

from twomatrix import elliptic as ell
from twomatrix.errors import PoleProximity, SeedEscaped
from twomatrix.torusmap import (UniformParams, constrained_representatives,
                                find_endpoints, sheet_pair, track_endpoints,
                                x_derivs, x_of_u, y_derivs, y_of_u)


def test_vector_roundtrip(sym):
    p = sym.params
    q = UniformParams.from_vector(p.to_vector(), p.d1, p.d2, template=p)
    assert q == p
    assert len(p.to_vector()) == p.n_params


def test_bad_shapes_are_rejected(sym):
    p = sym.params
    with pytest.raises(ValueError):
        p.with_(xA=(1.0,))
    with pytest.raises(ValueError):
        p.with_(d1=0)


def test_check_catches_half_period_u_inf(sym):
    with pytest.raises(PoleProximity):
        sym.params.with_(u_inf=0.5 * sym.params.tau).check()


def test_x_and_y_are_elliptic(sym):
    p = sym.params
    u = np.array([0.13 + 0.2j, 0.7 + 0.9j, -0.4 + 0.35j])
    for w in (1, p.tau, 2 - p.tau):
        np.testing.assert_allclose(x_derivs(p, u + w, 3), x_derivs(p, u, 3), rtol=1e-11)
        np.testing.assert_allclose(y_derivs(p, u + w, 3), y_derivs(p, u, 3), rtol=1e-11)


def test_derivative_stack_is_consistent(sym):
    p = sym.params
    u, h = 0.21 + 0.63j, 1e-5
    d = x_derivs(p, u, 2)
    assert abs((x_of_u(p, u + h) - x_of_u(p, u - h)) / (2 * h) - d[1]) < 1e-8 * abs(d[1])
    e = y_derivs(p, u, 2)
    assert abs((y_of_u(p, u + h) - y_of_u(p, u - h)) / (2 * h) - e[1]) < 1e-8 * abs(e[1])


def test_endpoints(sym):
    p, eps = sym.params, sym.eps
    assert len(eps.e) == p.d2 + 3 and len(eps.et) == p.d1 + 3
    assert np.max(np.abs(eps.xd_e[:, 1])) < 1e-10
    assert np.max(np.abs(eps.yd_et[:, 1])) < 1e-10
    assert max(eps.residuals.values()) < 1e-9


def test_endpoints_asymmetric(asym):
    assert max(asym.eps.residuals.values()) < 1e-9


def test_tracking_is_identity_at_the_same_point(sym):
    again = track_endpoints(sym.params, sym.eps)
    np.testing.assert_allclose(again.e, sym.eps.e, atol=1e-13)


def test_constrained_representatives(sym):
    p = sym.params
    target = -(p.d2 - 1) * p.u_inf
    e = constrained_representatives(p, sym.eps.e, target)
    assert abs(np.sum(e) - target) < 1e-12
    shift = e - sym.eps.e
    a, b = ell.lattice_coords(shift, p.modulus)
    np.testing.assert_allclose(a, np.round(a), atol=1e-12)
    np.testing.assert_allclose(b, np.round(b), atol=1e-12)


def test_sheet_pair(sym):
    p = sym.params
    e = sym.eps.e[1]
    s = e + 0.02 * np.exp(1.1j)
    st = sheet_pair(p, s, e)
    assert abs(st - s) > 1e-3
    assert abs(x_of_u(p, st) - x_of_u(p, s)) < 1e-12 * abs(x_of_u(p, s))
    # near a simple branch point the pair is approximately the reflection
    assert abs(st - (2 * e - s)) < 0.01
    with pytest.raises(SeedEscaped):
        sheet_pair(p, e + 0.5, e)


def test_find_endpoints_is_reproducible(sym):
    np.testing.assert_array_equal(find_endpoints(sym.params).e, sym.eps.e)
