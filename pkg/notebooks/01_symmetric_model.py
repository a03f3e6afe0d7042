"""
A first look at the symmetric quartic-cubic model
=================================================

Solve the shipped symmetric example, look at the endpoints and the
genus-one correction.  Run with ``python notebooks/01_symmetric_model.py``.
"""

# %%
import json
from importlib import resources

import numpy as np

from twomatrix import cli
from twomatrix import correction as C
from twomatrix import modelmap as mm
from twomatrix.torusmap import find_endpoints, x_of_u

np.set_printoptions(precision=5, suppress=True)

# %% the configuration is plain JSON; complex numbers are [re, im] pairs
path = resources.files("twomatrix").joinpath("data", "examples", "symmetric.json")
doc = json.loads(path.read_text())
run = cli.build_run(doc)
print("g  =", run.model.g)
print("gt =", run.model.gt)
print("epsilon =", run.model.epsilon)

# %% Newton from the hand-made seed
result = mm.solve_inverse(run.model, run.seed)
p = mm.canonical_gauge(result.params)
print(f"{result.iterations} iterations, residual history:", np.array(result.history))
print("tau   =", p.tau)
print("u_inf =", p.u_inf, " Im(u_inf)/Im(tau) =", mm.gauge_report(p)["pinned_im_ratio"])

# %% the zeros of x' are the branch points of the resolvent
eps = find_endpoints(p)
for e in eps.e:
    print(f"e = {e:.6f}   x(e) = {x_of_u(p, e):.6f}")
print("sum constraints:", eps.residuals)

# %% Y1, Gamma1 and F1
locs = C.all_local_data(p, eps)
f = C.f1(p, eps)
print("Gamma1 =", C.gamma1(p, locs))
print("F1 =", f.value, "(branch integer", f.branch, ")")

# Y1 along a horizontal line through the cell
s = np.linspace(0.05, 0.95, 7) + 0.5 * p.tau
print(np.c_[s, C.y1_of_s(p, locs, s)])
