"""
Moving the filling fraction
===========================

Changing epsilon at fixed potentials moves y dx by a holomorphic
differential.  With epsilon normalized by ``2 i pi epsilon = oint_A y dx``
that differential is ``2 i pi du`` with ``du`` of unit A-period, which in the
uniformizing coordinate is just ``2 i pi ds``.  Consequently the derivative
of F1 along epsilon is ``-2 i pi`` times Gamma1 (the sum of the ``wp``
coefficients of ``Y1 x'``), not Gamma1 itself.  This script measures both
statements.
"""

# %%
import json
from importlib import resources

import numpy as np

from twomatrix import cli
from twomatrix import correction as C
from twomatrix import modelmap as mm
from twomatrix.torusmap import find_endpoints
from twomatrix.validation import Context

doc = json.loads(resources.files("twomatrix").joinpath("data", "examples", "symmetric.json").read_text())
run = cli.build_run(doc)
p, _ = cli.solve_run(run)
eps = find_endpoints(p)
locs = C.all_local_data(p, eps)

# %% du from re-solves at epsilon +- h
du = mm.du_check(p, model=run.model)
print("A-period of du:", du["a_period"])
print("B-period of du:", du["b_period"], " tau:", du["tau"])
print("B-period predicted from dGamma/deps:", du["b_period_from_gamma"])
print("growth exponents at +-u_inf:", du["growth_plus"], du["growth_minus"])
print("max |du/ds - 1| on a grid:", du["max_dev_from_ds"])

# %% F1 along epsilon
ctx = Context(run.model, p)
for h in (1e-3, 1e-4):
    dF = ctx.central("eps", 0, lambda q, e: C.f1(q, e, reps=(e.e, e.et)), h, C.f1_difference)
    g1 = C.gamma1(p, locs)
    print(f"h={h:g}: dF1/deps = {dF:.10f}, Gamma1 = {g1:.10f}, ratio = {dF / g1:.8f}")
print("-2 i pi =", -2j * np.pi)
