"""JSON encoding of models, parameters and reports.

Complex numbers are stored as ``[re, im]`` pairs.  Schemas live in the
package's ``data`` directory.
"""

import hashlib
import json
import os
import tempfile
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from .elliptic import Modulus
from .modelmap import ModelSpec
from .torusmap import UniformParams


def cpx(v):
    return [float(np.real(v)), float(np.imag(v))]


def uncpx(v):
    return complex(v[0], v[1])


def clist(vs):
    return [cpx(v) for v in vs]


def unclist(vs):
    return [uncpx(v) for v in vs]


@lru_cache(maxsize=None)
def schema(name):
    text = resources.files("twomatrix").joinpath("data", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name):
    jsonschema.validate(doc, schema(name))


def model_to_dict(m):
    return {"g": clist(m.g), "gt": clist(m.gt), "epsilon": cpx(m.epsilon)}


def model_from_dict(d):
    return ModelSpec.from_couplings(unclist(d["g"]), unclist(d["gt"]), uncpx(d["epsilon"]))


def params_to_dict(p):
    return {"d1": p.d1, "d2": p.d2, "tau": cpx(p.tau), "u_inf": cpx(p.u_inf),
            "gamma": cpx(p.gamma), "gammat": cpx(p.gammat),
            "xA": clist(p.xA), "yA": clist(p.yA)}


def params_from_dict(d):
    return UniformParams(d1=d["d1"], d2=d["d2"], modulus=Modulus(uncpx(d["tau"])),
                         u_inf=uncpx(d["u_inf"]), gamma=uncpx(d["gamma"]),
                         gammat=uncpx(d["gammat"]), xA=tuple(unclist(d["xA"])),
                         yA=tuple(unclist(d["yA"])))


def endpoints_to_dict(eps):
    return {"e": clist(eps.e), "et": clist(eps.et),
            "xd_e": [clist(r) for r in eps.xd_e], "yd_e": [clist(r) for r in eps.yd_e],
            "xd_et": [clist(r) for r in eps.xd_et], "yd_et": [clist(r) for r in eps.yd_et],
            "residuals": {k: float(v) for k, v in eps.residuals.items()}}


def canonical(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def digest(doc):
    return hashlib.sha256(canonical(doc).encode()).hexdigest()


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return cpx(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_atomic(path, doc):
    """Write JSON to ``path`` through a temporary file and an atomic rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=".json")
    try:
        os.chmod(tmp, 0o644)
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
