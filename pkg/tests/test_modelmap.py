import numpy as np
import pytest

from twomatrix import modelmap as mm
from twomatrix.cpoly import Poly
from twomatrix.errors import LeftDomain, MaxIterations


def test_coupling_conversion_roundtrip():
    g = np.array([0.3, -1.0 + 0.5j, 2.0])
    V = mm.poly_from_couplings(g, g0=1.5)
    assert V.coeffs[2] == pytest.approx(g[1] / 2)
    np.testing.assert_allclose(mm.couplings_from_poly(V), g)


def test_model_spec_validation():
    with pytest.raises(ValueError):
        mm.ModelSpec(Poly([0, 1]), Poly([0, 0, 1]), 0.5)
    m = mm.ModelSpec.from_couplings([0, 1, 2], [0, 3, 4, 5], 0.5)
    assert (m.d1, m.d2) == (2, 3)
    assert len(m.target()) == m.d1 + m.d2 + 4


@pytest.mark.parametrize("n", [32, 100, 96])
def test_quadrature_spec_rejects_bad_node_counts(n):
    with pytest.raises(ValueError):
        mm.QuadratureSpec(circle_nodes=n)


def test_forward_reproduces_the_example(sym):
    res = mm.forward(sym.params) - sym.model.target()
    assert np.linalg.norm(res) < 1e-10


def test_normalizations(sym):
    for n in mm.normalizations(sym.params):
        assert abs(n - 1) < 1e-10


def test_periods_do_not_depend_on_the_base_point(asym):
    out = mm.path_independence(asym.params)
    assert out["A"] < 1e-10 and out["B"] < 1e-10


def test_half_period_shift_is_a_symmetry(asym):
    p = asym.params
    q = mm.half_period_shift(p)
    np.testing.assert_allclose(mm.forward(q), mm.forward(p), atol=1e-11)
    np.testing.assert_allclose(mm.canonical_gauge(q).to_vector(), p.to_vector(), atol=1e-14)


def test_canonical_gauge_range(asym):
    for p in (asym.params, mm.half_period_shift(asym.params)):
        a = mm.gauge_report(mm.canonical_gauge(p))["u_inf_a"]
        assert -mm.GAUGE_SLACK <= a < 0.5


def test_solve_from_perturbed_guess(asym):
    p = asym.params
    guess = p.with_(tau=p.tau + 0.02, yA=tuple(np.array(p.yA) * 1.03))
    r = mm.solve_inverse(asym.model, guess)
    assert r.residual < 1e-11
    assert r.history[0] > r.history[-1]
    np.testing.assert_allclose(mm.canonical_gauge(r.params).to_vector(), p.to_vector(),
                               rtol=1e-8)


def test_max_iterations_keeps_last_iterate(sym):
    p = sym.params
    guess = p.with_(tau=p.tau * 1.05)
    with pytest.raises(MaxIterations) as err:
        mm.solve_inverse(sym.model, guess, mm.SolveOptions(max_iter=1))
    assert err.value.last_iterate is not None


def test_inadmissible_guess(sym):
    with pytest.raises(LeftDomain) as err:
        mm.solve_inverse(sym.model, sym.params.with_(u_inf=0.5))
    assert err.value.last_iterate.u_inf == 0.5


def test_continuation_reaches_target(sym, asym):
    p, path = mm.continuation(sym.model, asym.model, sym.params, steps=3)
    assert len(path) == 3
    assert np.linalg.norm(mm.residual_vector(p, asym.model)) < 1e-10


def test_holomorphic_differential(sym):
    du = mm.du_check(sym.params, model=sym.model)
    assert abs(du["a_period"] - 1) < 1e-6
    assert abs(du["b_period"] - du["tau"]) < 1e-6
    assert abs(du["b_period_from_gamma"] - du["tau"]) < 1e-6
    # the fixed-u derivative differs by an exact differential: same A-period
    assert abs(du["a_period_fixed_u"] - 1) < 1e-6
    assert du["growth_plus"] < 0.1 and du["growth_minus"] < 0.1
    assert du["max_dev_from_ds"] < 1e-5
