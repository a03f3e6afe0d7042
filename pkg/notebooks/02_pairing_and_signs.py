"""
Fixing the two global signs
===========================

The analytic variation fields in ``twomatrix.variations`` come with a fixed
Wronskian normalization.  An actual derivative with respect to a coupling is
obtained by pairing a field with ``x^k`` around ``u_inf``.  Two constants
enter: ``DOT_SIGN`` (relating the field convention to the loop insertion
derivative) and ``KAPPA`` (the normalization of the pairing itself, which
also carries a ``1/k``).  Both are read off from finite differences through
re-solves here.
"""

# %%
import json
from importlib import resources

import numpy as np

from twomatrix import cli
from twomatrix import correction as C
from twomatrix import oracle as O
from twomatrix import variations as V
from twomatrix.torusmap import find_endpoints
from twomatrix.validation import Context

doc = json.loads(resources.files("twomatrix").joinpath("data", "examples", "symmetric.json").read_text())
run = cli.build_run(doc)
p, _ = cli.solve_run(run)
eps = find_endpoints(p)
locs = C.all_local_data(p, eps)
ctx = Context(run.model, p)
ks = range(1, run.model.d1 + 2)

# %% raw pairings (no sign, no 1/k) against FD of tau, u_inf and F1
raw = {}
fd = {}
for k in ks:
    def bare(field, k=k):
        return O.contour_pair(field, p, k, eps=eps) / O.KAPPA * k
    raw[("tau", k)] = bare(lambda s: V.taudot(p, eps, s))
    raw[("u_inf", k)] = bare(lambda s: V.uinfdot(p, eps, s))
    raw[("F1", k)] = bare(lambda s: C.y1_xprime(p, locs, s))
    fd[("tau", k)] = ctx.central("g", k, lambda q, e: q.tau, 1e-4)
    fd[("u_inf", k)] = ctx.central("g", k, lambda q, e: q.u_inf, 1e-4)
    fd[("F1", k)] = ctx.central("g", k, lambda q, e: C.f1(q, e, reps=(e.e, e.et)), 1e-4,
                                C.f1_difference)

# %% the ratio FD / raw pairing, per observable and k
print(" observable  k   FD / raw pairing      k * ratio")
for key in raw:
    r = fd[key] / raw[key]
    print(f"{key[0]:>10} {key[1]:2d}   {r:.10f}   {key[1] * r:.10f}")

# k * ratio is the same number for every k, so the pairing carries 1/k.
# For tau and u_inf (dot fields) that number is +1; for F1 with the field
# x' Y1 it is +1 as well, i.e. dF1/dV1 = -Y1 once the pairing constant is
# KAPPA = -1 and the dot fields carry DOT_SIGN = -1:
#     (+1) = KAPPA * DOT_SIGN         for the dot fields
#     (+1) = KAPPA * (-1)             for F1 with the field -x' Y1
print("KAPPA =", O.KAPPA, " DOT_SIGN =", V.DOT_SIGN)

# %% the dot field assembled from the ratio form of F1 is x' Y1 itself
s = np.array([0.3 + 0.4j, 0.8 + 1.1j])
print(V.f1_field(p, eps, s) - C.y1_xprime(p, locs, s))
