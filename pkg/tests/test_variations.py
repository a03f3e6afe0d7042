import numpy as np
import pytest

from twomatrix import correction as C
from twomatrix import elliptic as ell
from twomatrix import oracle as O
from twomatrix import variations as V
from twomatrix.validation import Context, rel

S_POINTS = [0.37 + 0.5j, 0.81 + 1.1j, 0.12 + 0.2j]


def test_wronskian(asym):
    p, eps = asym.params, asym.eps
    for s in S_POINTS:
        for u in (0.6 + 0.3j, 0.2 + 1.2j, 0.9 + 0.75j):
            w = ell.wp(s - u, p.modulus)
            assert abs(V.wronskian(p, eps, s, u) - w) < 1e-9 * max(1, abs(w))


def test_vectorized_fields_match_scalar_calls(sym):
    p, eps = sym.params, sym.eps
    s = np.array(S_POINTS)
    for f in (V.taudot, V.uinfdot, V.Adot_over_A, V.Atdot_over_At, V.dlog_theta_prime0,
              V.dlog_prod_yprime, V.f1_field):
        np.testing.assert_allclose(f(p, eps, s), [f(p, eps, si) for si in s], rtol=1e-13)
    np.testing.assert_allclose(V.edot(p, eps, s, 2), [V.edot(p, eps, si, 2) for si in s],
                               rtol=1e-13)


def test_pair_wp_identity(asym):
    lhs, rhs = V.pair_wp_identity(asym.params, asym.eps)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9)


def test_closed_forms_of_prod_yprime(asym):
    p, eps = asym.params, asym.eps
    for s in S_POINTS:
        pair = V.dlog_prod_yprime(p, eps, s)
        assert abs(V.dlog_prod_yprime(p, eps, s, "reduced_consistent") - pair) < 1e-9 * abs(pair)
        # the variant with the extra -zeta1/2 sum(alpha) term is off by exactly that term
        extra = -0.5 * p.zeta1 * np.sum(V.alphas(p, eps, s))
        assert abs(V.dlog_prod_yprime(p, eps, s, "reduced") - pair - extra) < 1e-9 * abs(pair)
    with pytest.raises(ValueError):
        V.dlog_prod_yprime(p, eps, 0.3j, "other")


def test_heat_equation_for_theta_prime0(sym):
    # dlog theta'(0)/dV1 = (3 zeta1 / (4 i pi)) * taudot
    p, eps = sym.params, sym.eps
    s = S_POINTS[0]
    ratio = V.dlog_theta_prime0(p, eps, s) / V.taudot(p, eps, s)
    m, h = p.modulus, 1e-5
    fd = (np.log(ell.theta_prime0(ell.Modulus(m.tau + h)))
          - np.log(ell.theta_prime0(ell.Modulus(m.tau - h)))) / (2 * h)
    assert abs(ratio - fd) < 1e-8 * abs(fd)


def test_f1_field_is_y1(asym):
    p, eps, locs = asym.params, asym.eps, asym.locs
    s = np.array(S_POINTS)
    np.testing.assert_allclose(V.f1_field(p, eps, s), C.y1_xprime(p, locs, s), rtol=1e-10)


def test_gamma_field_is_constant(sym):
    vals = [V.gamma_field(sym.params, sym.eps, s) for s in S_POINTS[:2]]
    np.testing.assert_allclose(vals, -2j * np.pi, rtol=1e-8)


def test_endpoint_velocity_does_not_depend_on_representative(sym):
    p, eps = sym.params, sym.eps
    shifted = type(eps)(**{**eps.__dict__, "e": eps.e + np.array([0, 0, 1, 0, p.tau])})
    s = S_POINTS[1]
    for i in range(len(eps.e)):
        assert V.edot(p, shifted, s, i) == pytest.approx(V.edot(p, eps, s, i), rel=1e-12)


@pytest.mark.parametrize("k", [1, 3])
def test_taudot_against_asymmetric_resolve(asym, k):
    ctx = Context(asym.model, asym.params)
    p, eps = asym.params, asym.eps
    fd = ctx.central("g", k, lambda q, e: q.tau, 1e-4)
    an = O.contour_pair_dot(lambda s: V.taudot(p, eps, s), p, k, eps=eps)
    assert rel(an, fd) < 1e-6
