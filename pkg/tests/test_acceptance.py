"""The ten acceptance criteria, each at its declared tolerance and time budget.

A summary line per criterion is printed at the end of the pytest run (see
``conftest.py``).  Criterion 7 is asserted exactly as stated; the relation
that actually holds is covered in ``test_correction.py``.
"""

import time

import numpy as np
import pytest

from twomatrix import correction as C
from twomatrix import elliptic as ell
from twomatrix import modelmap as mm
from twomatrix import oracle as O
from twomatrix import variations as V
from twomatrix.torusmap import find_endpoints, x_derivs, x_of_u, y_derivs, y_of_u
from twomatrix.validation import Context, rel, shrinking_residue

TAU_GRID = [1j, 1.4j, 0.3 + 0.8j, -0.45 + 1.1j, 0.5 + 0.5j, 0.1 + 2.5j]


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def report(n, **values):
    print(f"criterion {n}: " + ", ".join(f"{k}={v:.3g}" for k, v in values.items()))


def test_criterion_01_elliptic_kernel():
    rng = np.random.default_rng(11)
    worst = {"theta": 0.0, "Z": 0.0, "wp": 0.0, "fd": 0.0}
    with Timer() as t:
        for tau in TAU_GRID:
            m = ell.Modulus(tau)
            a, b = rng.uniform(-1, 1, (2, 60))
            u = a + b * tau
            u = u[ell.lattice_distance(u, m) > 0.02]
            th = ell.theta(u, m)
            th1, tht = ell.theta(u + 1, m), ell.theta(u + tau, m)
            worst["theta"] = max(worst["theta"],
                                 np.max(np.abs(th1 + th) / np.maximum(1, np.abs(th))),
                                 np.max(np.abs(tht + th * np.exp(-1j * np.pi * (2 * u + tau)))
                                        / np.maximum(1, np.abs(tht))))
            z = ell.zfun(u, m)
            worst["Z"] = max(worst["Z"],
                             np.max(np.abs(ell.zfun(u + 1, m) - z)),
                             np.max(np.abs(ell.zfun(u + tau, m) - z + 2j * np.pi)))
            w = ell.wp(u, m)
            worst["wp"] = max(worst["wp"], np.max(
                (np.abs(ell.wp(u + 1, m) - w) + np.abs(ell.wp(u + tau, m) - w)) / np.maximum(1, np.abs(w))))
            h = 1e-4
            zs = {j: ell.zfun(u + j * h, m) for j in (-2, -1, 1, 2)}
            fd = (zs[-2] - 8 * zs[-1] + 8 * zs[1] - zs[2]) / (12 * h)
            worst["fd"] = max(worst["fd"], np.max(np.abs(fd + w) / np.maximum(1, np.abs(w))))
    report(1, **worst, seconds=t.elapsed)
    assert worst["theta"] < 1e-12
    assert worst["Z"] < 1e-12
    assert worst["wp"] < 1e-12
    assert worst["fd"] < 1e-8
    assert t.elapsed < 1.0


def test_criterion_02_uniformization_ellipticity(sym):
    p = sym.params
    rng = np.random.default_rng(12)
    with Timer() as t:
        a, b = rng.uniform(0, 1, (2, 200))
        u = a + b * p.tau
        xd, yd = np.array(x_derivs(p, u, 5)), np.array(y_derivs(p, u, 4))
        worst = 0.0
        for w in (1.0, p.tau, -2.0 + 3 * p.tau):
            dx = np.abs(np.array(x_derivs(p, u + w, 5)) - xd) / np.maximum(1, np.abs(xd))
            dy = np.abs(np.array(y_derivs(p, u + w, 4)) - yd) / np.maximum(1, np.abs(yd))
            worst = max(worst, dx.max(), dy.max())
        errA = rel(shrinking_residue(x_of_u, p, p.u_inf), p.A)
        errAt = rel(shrinking_residue(y_of_u, p, -p.u_inf), p.At)
    report(2, lattice=worst, A=errA, At=errAt, seconds=t.elapsed)
    assert worst < 1e-10
    assert errA < 1e-6 and errAt < 1e-6
    assert t.elapsed < 1.0


def test_criterion_03_endpoints(sym):
    p = sym.params
    with Timer() as t:
        eps = find_endpoints(p)
    report(3, **eps.residuals, seconds=t.elapsed)
    assert len(eps.e) == p.d2 + 3
    assert len(eps.et) == p.d1 + 3
    assert len(eps.residuals) == 4
    assert all(v < 1e-9 for v in eps.residuals.values())
    assert t.elapsed < 5.0


def test_criterion_04_forward_inverse_roundtrip(sym):
    p, q = sym.params, mm.QuadratureSpec()
    with Timer() as t:
        model = mm.model_from_params(p, q)
        guess = p.with_(tau=p.tau * 1.01, u_inf=p.u_inf * 0.99, gamma=p.gamma * 1.02,
                        xA=tuple(np.array(p.xA) * 0.98))
        back = mm.canonical_gauge(mm.solve_inverse(model, guess).params)
        vp, vb = p.to_vector(), back.to_vector()
        recovery = np.max(np.abs(vb - vp) / np.abs(vp))
        norms = mm.normalizations(p, q)
        g1, gt1, _ = mm.potentials_from_params(p, q)
        g2, gt2, _ = mm.potentials_from_params(p, mm.QuadratureSpec(circle_nodes=512))
        doubling = max(np.max(np.abs(g2 - g1) / np.maximum(1, np.abs(g2))),
                       np.max(np.abs(gt2 - gt1) / np.maximum(1, np.abs(gt2))))
    report(4, recovery=recovery, norm=max(abs(n - 1) for n in norms), doubling=doubling,
           seconds=t.elapsed)
    assert recovery < 1e-8
    assert all(abs(n - 1) < 1e-10 for n in norms)
    assert doubling < 1e-10
    assert t.elapsed < 10.0


def test_criterion_05_wronskian(sym):
    p, eps = sym.params, sym.eps
    m = p.modulus
    with Timer() as t:
        s = 0.137 + 0.291 * m.tau
        grid = (np.linspace(0.03, 0.97, 16)[:, None] + np.linspace(0.03, 0.97, 16)[None, :] * m.tau).ravel()
        worst = 0.0
        for u in grid:
            w = ell.wp(s - u, m)
            worst = max(worst, abs(V.wronskian(p, eps, s, u) - w) / max(1.0, abs(w)))
    report(5, worst=worst, seconds=t.elapsed)
    assert worst < 1e-9
    assert t.elapsed < 2.0


def test_criterion_06_analytic_vs_fd(sym):
    p, eps = sym.params, sym.eps
    observables = {
        "tau": (lambda q, e: q.tau, lambda s: V.taudot(p, eps, s)),
        "u_inf": (lambda q, e: q.u_inf, lambda s: V.uinfdot(p, eps, s)),
        "lnA": (lambda q, e: np.log(q.A), lambda s: V.Adot_over_A(p, eps, s)),
        "lnprod_yprime": (lambda q, e: np.sum(np.log(e.yd_e[:, 1])),
                          lambda s: V.dlog_prod_yprime(p, eps, s)),
    }
    for i in range(len(eps.e)):
        observables[f"e{i}"] = (lambda q, e, i=i: e.e[i], lambda s, i=i: V.edot(p, eps, s, i))
    errors = {}
    with Timer() as t:
        ctx = Context(sym.model, p, fd_step=1e-4)
        for k in range(1, sym.model.d1 + 2):
            for name, (obs, field) in observables.items():
                fd = ctx.central("g", k, obs, ctx.fd_step)
                an = O.contour_pair_dot(field, p, k, eps=eps)
                errors[f"{name}/g{k}"] = rel(an, fd)
    worst = max(errors, key=errors.get)
    report(6, worst_rel=errors[worst], seconds=t.elapsed)
    print(f"  worst observable {worst}")
    assert errors[worst] < 1e-4
    assert t.elapsed < 20.0


def test_criterion_07_gamma1_equals_dF1_depsilon(sym):
    p = sym.params
    with Timer() as t:
        ctx = Context(sym.model, p, fd_step=1e-4)
        dF = ctx.central("eps", 0, lambda q, e: C.f1(q, e, reps=(e.e, e.et)), 1e-4, C.f1_difference)
        g1 = C.gamma1(p, sym.locs)
    err = rel(g1, dF)
    ratio = dF / g1
    print(f"criterion 7: Gamma1={g1:.6g}, dF1/deps={dF:.6g}, ratio={ratio:.6g} "
          f"(-2 i pi = {-2j * np.pi:.6g})")
    report(7, rel_err=err, seconds=t.elapsed)
    assert t.elapsed < 10.0
    assert err < 1e-5


def test_criterion_08_y1_structure(sym):
    p, eps, locs = sym.params, sym.eps, sym.locs
    m = p.modulus
    with Timer() as t:
        rng = np.random.default_rng(18)
        a, b = rng.uniform(0, 1, (2, 40))
        u = a + b * m.tau
        u = u[np.min(ell.lattice_distance(u[:, None] - eps.e[None, :], m), axis=1) > 0.05]
        base = C.y1_xprime(p, locs, u)
        period = max(np.max(np.abs(C.y1_xprime(p, locs, u + w) - base) / np.maximum(1, np.abs(base)))
                     for w in (1.0, m.tau))
        growth = []
        for c in (p.u_inf, -p.u_inf):
            v = [np.max(np.abs(C.y1_xprime(p, locs, c + r * np.exp(2j * np.pi * np.arange(64) / 64))))
                 for r in (1e-1, 1e-2, 1e-3)]
            growth.append(max(np.log10(v[1] / v[0]), np.log10(v[2] / v[1])))
        lead = sub = match = 0.0
        limits = []
        for L in locs:
            co = O.laurent_fit(lambda s: C.y1_xprime(p, locs, s), L.e, range(-4, -1), 0.01)
            lead = max(lead, rel(co[-4], 1 / (8 * L.x2 * L.y1)))
            sub = max(sub, rel(co[-3], -L.x3 / (24 * L.x2 ** 2 * L.y1)))
            cs = O.laurent_fit(np.vectorize(lambda s: C.sheet_term(p, s, L.e)), L.e,
                               range(-4, -2), 0.01, n=32, atol=1e-6)
            match = max(match, rel(cs[-4], co[-4]), rel(cs[-3], co[-3]))
            # |dz|^2 (Y1 - sheet sum) -> 0 as s approaches the endpoint; below
            # dz ~ 3e-3 the z^-5 cancellation hits roundoff (~1e-16 / dz^3)
            lim = []
            for dz in (3e-2, 3e-3):
                s = L.e + dz * np.exp(0.7j)
                lim.append(abs(dz) ** 2 * abs(C.y1_of_s(p, locs, s) - C.sheet_sum_y1(p, s, L.e)))
            limits.append(lim)
    report(8, period=period, growth=max(growth), lead=lead, sub=sub, match=match,
           limit=max(l[1] for l in limits), seconds=t.elapsed)
    assert period < 1e-10
    assert max(growth) < 0.1
    assert lead < 1e-6 and sub < 1e-6
    assert match < 1e-6
    assert all(l[1] < l[0] / 5 for l in limits)
    assert t.elapsed < 5.0


def test_criterion_09_f1_potential_derivatives(sym):
    p, eps, locs = sym.params, sym.eps, sym.locs
    with Timer() as t:
        ctx = Context(sym.model, p, fd_step=1e-4)
        fd, paired = [], []
        for k in range(1, sym.model.d1 + 2):
            fd.append(ctx.central("g", k, lambda q, e: C.f1(q, e, reps=(e.e, e.et)), 1e-4,
                                  C.f1_difference))
            # the pairing with kappa = 1; the global constant is then fitted
            paired.append(O.contour_pair(lambda s: -C.y1_xprime(p, locs, s), p, k, eps=eps)
                          / O.KAPPA)
        fd, paired = np.array(fd), np.array(paired)
        kappa = np.vdot(paired, fd) / np.vdot(paired, paired)
        err = np.max(np.abs(kappa * paired - fd) / np.abs(fd))
    report(9, kappa_re=kappa.real, kappa_im=kappa.imag, max_rel=err, seconds=t.elapsed)
    assert abs(kappa - O.KAPPA) < 1e-4
    assert err < 1e-4
    assert t.elapsed < 15.0


def test_criterion_10_du_holomorphy(sym):
    with Timer() as t:
        du = mm.du_check(sym.params, model=sym.model)
    report(10, a_period_err=abs(du["a_period"] - 1), growth_plus=du["growth_plus"],
           growth_minus=du["growth_minus"], seconds=t.elapsed)
    assert abs(du["a_period"] - 1) < 1e-6
    assert du["growth_plus"] < 0.1 and du["growth_minus"] < 0.1
    assert t.elapsed < 5.0


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
