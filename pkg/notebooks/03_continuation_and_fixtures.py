"""
Walking to the asymmetric model
===============================

The asymmetric example is reached from the symmetric solution by
continuation in the couplings.  The script also regenerates the expected
output files that the tests compare against; pass ``--write`` to overwrite
them.  Every number in those files comes from this package itself.
"""

# %%
import json
import sys
from importlib import resources

import numpy as np

from twomatrix import __version__, cli, io
from twomatrix import correction as C
from twomatrix import modelmap as mm
from twomatrix.torusmap import find_endpoints

folder = resources.files("twomatrix").joinpath("data", "examples")

# %% continuation with a coarse and a fine path: both land on the same point
sym = cli.build_run(json.loads(folder.joinpath("symmetric.json").read_text()))
asym = cli.build_run(json.loads(folder.joinpath("asymmetric.json").read_text()))
p0 = mm.canonical_gauge(mm.solve_inverse(sym.model, sym.seed).params)
for steps in (2, 6):
    p1, path = mm.continuation(sym.model, asym.model, p0, steps=steps)
    p1 = mm.canonical_gauge(p1)
    print(f"{steps} steps: tau = {p1.tau:.12f}, u_inf = {p1.u_inf:.12f}")

# the gauge pin: Im(u_inf)/Im(tau) moves with the model
for p in (p0, p1):
    print(mm.gauge_report(p))

# %% expected-output fixtures
def fixture(name, run):
    p, info = cli.solve_run(run)
    eps = find_endpoints(p)
    locs = C.all_local_data(p, eps)
    f = C.f1(p, eps)
    return {
        "provenance": f"tool-derived: produced by twomatrix {__version__} itself, "
                      "not taken from any external table",
        "config": f"{name}.json",
        "config_hash": run.digest,
        "solve_iterations": info["iterations"],
        "params": io.params_to_dict(p),
        "pinned_im_ratio": mm.gauge_report(p)["pinned_im_ratio"],
        "gamma1": io.cpx(C.gamma1(p, locs)),
        "dF1_depsilon": io.cpx(C.dF1_depsilon(p, locs)),
        "f1": io.cpx(f.value),
        "f1_branch": f.branch,
        "rtol": 1e-8,
    }


for name, run in (("symmetric", sym), ("asymmetric", asym)):
    new = fixture(name, run)
    old = json.loads(folder.joinpath(f"{name}.expected.json").read_text())
    a = io.params_from_dict(new["params"]).to_vector()
    b = io.params_from_dict(old["params"]).to_vector()
    print(name, "max relative change vs stored fixture:", np.max(np.abs(a - b) / np.abs(b)))
    if "--write" in sys.argv:
        io.write_atomic(str(folder.joinpath(f"{name}.expected.json")), new)
