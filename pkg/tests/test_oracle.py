import numpy as np
import pytest

from twomatrix import modelmap as mm
from twomatrix import oracle as O
from twomatrix.errors import InconsistentRadii, RadiusInvalid, StepTooLarge
from twomatrix.torusmap import x_derivs


@pytest.mark.parametrize("step", [0.0, 1e-12, 0.1])
def test_fd_plan_range(step):
    with pytest.raises(ValueError):
        O.FDPlan(step=step)


def test_laurent_fit_on_a_known_function():
    f = lambda z: 2 / z ** 3 - 1j / z + 5 + z ** 2  # noqa: E731
    co = O.laurent_fit(lambda s: f(s - 0.3), 0.3, range(-3, 3), 0.5)
    expect = {-3: 2, -2: 0, -1: -1j, 0: 5, 1: 0, 2: 1}
    for k, v in expect.items():
        assert abs(co[k] - v) < 1e-12


def test_laurent_fit_detects_a_foreign_pole():
    f = lambda z: 1 / z + 1 / (z - 0.4)  # noqa: E731
    with pytest.raises(InconsistentRadii):
        O.laurent_fit(f, 0.0, [-1], 0.6)
    with pytest.raises(RadiusInvalid):
        O.laurent_fit(f, 0.0, [-1], -1.0)


class _Solved:
    def __init__(self, t):
        self.params = t


def _fake_solver(monkeypatch):
    # the "model" is a number and solving it returns that number
    monkeypatch.setattr(O, "solve_inverse", lambda model, base, opts: _Solved(model))


def test_fd_model_mechanics(monkeypatch):
    _fake_solver(monkeypatch)
    obs = lambda t: np.sin(t) + t ** 2  # noqa: E731
    res = O.fd_model(obs, 0.3, lambda m, t: m + t, 0.3, O.FDPlan(step=1e-4, richardson=True))
    assert res.value == pytest.approx(np.cos(0.3) + 0.6, rel=1e-10)
    assert res.halving_change < 1e-6


def test_fd_model_refuses_a_kink(monkeypatch):
    _fake_solver(monkeypatch)
    with pytest.raises(StepTooLarge):
        O.fd_model(abs, 0.0, lambda m, t: m + t, 0.0)


def test_fd_degree_ranges(sym):
    with pytest.raises(ValueError):
        O.fd_gk(lambda p: p.tau, sym.model, 0, sym.params)
    with pytest.raises(ValueError):
        O.fd_gtk(lambda p: p.tau, sym.model, sym.model.d2 + 2, sym.params)


def test_pairing_is_linear_and_kills_exact_differentials(sym):
    p, eps = sym.params, sym.eps
    field = lambda s: x_derivs(p, s, 1)[1]  # noqa: E731
    a1 = O.contour_pair(field, p, 1, eps=eps)
    a2 = O.contour_pair(lambda s: 2 * field(s) + 1, p, 1, eps=eps)
    b = O.contour_pair(lambda s: 1, p, 1, eps=eps)
    assert a2 == pytest.approx(2 * a1 + b, rel=1e-12, abs=1e-12)
    # x^k x' ds is exact
    assert abs(a1) < 1e-10


@pytest.mark.parametrize("k", [1, 2, 3])
def test_pairing_of_a_logarithmic_derivative(sym, k):
    # field x'/x^(k+1) makes the integrand x'/x, whose residue at the simple pole is -1
    p, eps = sym.params, sym.eps
    field = lambda s: x_derivs(p, s, 1)[1] / x_derivs(p, s, 0)[0] ** (k + 1)  # noqa: E731
    v = O.contour_pair(field, p, k, mm.QuadratureSpec(circle_nodes=64), eps=eps)
    assert v == pytest.approx(-O.KAPPA / k, rel=1e-12)


def test_fd_gk_on_the_example(sym):
    r = O.fd_gk(lambda p: p.tau, sym.model, 1, sym.params)
    assert r.one_sided_gap < 1e-3
    assert abs(r.value) > 0
