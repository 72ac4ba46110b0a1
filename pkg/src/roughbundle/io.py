"""JSON and CSV exchange formats.

GridPath:          {"times": [...], "values": [[...], ...]}
BranchedRoughPath: {"alpha", "N", "alphabet", "geometric", "times", "values": {forest literal: [...]}}
ControlledPath:    {"times", "components": {forest literal: [...]}}   (the rough path is stored separately)
SmoothControlData: {"times", "alphabet", "N", "epsilon", "components": {...}}
PolyVectorField:   {"n", "alphabet", "fields": [[component polynomial, ...] per label]},
                   a polynomial being [[exponents, "rational"], ...]
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .approximation import SmoothControlData
from .controlled import ControlledPath, control_tables
from .forest import parse_forest
from .rde import PolyVectorField
from .roughpath import BranchedRoughPath, GridPath, algebra_tables, degree_for_alpha


def _load(src):
    if isinstance(src, (str, Path)):
        with open(src) as fh:
            return json.load(fh)
    return src


def _dump(obj, dest=None):
    text = json.dumps(obj, indent=1)
    if dest is None:
        return text
    Path(dest).write_text(text)
    return text


def gridpath_from_json(src) -> GridPath:
    d = _load(src)
    return GridPath(d["times"], d["values"])


def gridpath_to_json(p: GridPath, dest=None):
    return _dump({"times": p.times.tolist(), "values": p.values.tolist()}, dest)


def roughpath_to_json(X: BranchedRoughPath, dest=None):
    vals = {str(h): X.values[:, k].tolist() for k, h in enumerate(X.forests)}
    return _dump({"alpha": X.alpha, "N": X.N, "alphabet": list(X.alphabet), "geometric": X.geometric,
                  "times": X.times.tolist(), "values": vals}, dest)


def roughpath_from_json(src) -> BranchedRoughPath:
    d = _load(src)
    alpha = float(d["alpha"])
    alphabet = tuple(d["alphabet"])
    N = degree_for_alpha(alpha)
    if "N" in d and int(d["N"]) != N:
        raise ValueError("stored N does not match alpha")
    tb = algebra_tables(alphabet, N)
    vals = np.zeros((len(d["times"]), len(tb.forests)))
    for lit, col in d["values"].items():
        vals[:, tb.index[parse_forest(lit)]] = col
    return BranchedRoughPath(d["times"], alpha, alphabet, vals, bool(d.get("geometric", False)))


def controlled_to_json(Z: ControlledPath, dest=None):
    comps = {str(h): Z.values[:, k].tolist() for k, h in enumerate(Z.forests)}
    return _dump({"times": Z.times.tolist(), "components": comps}, dest)


def controlled_from_json(src, X: BranchedRoughPath) -> ControlledPath:
    d = _load(src)
    if len(d["times"]) != len(X.times) or not np.allclose(d["times"], X.times, rtol=0, atol=1e-12):
        raise ValueError("controlled path and rough path have different grids")
    comps = {parse_forest(k): v for k, v in d["components"].items()}
    return ControlledPath.from_components(X, comps)


def control_to_json(f: SmoothControlData, dest=None):
    comps = {str(h): f.values[:, k].tolist() for k, h in enumerate(f.forests)}
    return _dump({"times": f.times.tolist(), "alphabet": list(f.alphabet), "N": f.N,
                  "epsilon": f.epsilon, "components": comps}, dest)


def control_from_json(src) -> SmoothControlData:
    d = _load(src)
    alphabet, N = tuple(d["alphabet"]), int(d["N"])
    ct = control_tables(alphabet, N)
    vals = np.zeros((len(d["times"]), len(ct.forests)))
    for lit, col in d["components"].items():
        vals[:, ct.index[parse_forest(lit)]] = col
    return SmoothControlData(d["times"], alphabet, N, vals, d.get("epsilon"))


def field_from_json(src) -> PolyVectorField:
    return PolyVectorField.from_json(_load(src))


def field_to_json(F: PolyVectorField, dest=None):
    return _dump(F.to_json(), dest)


def write_csv(rows, header, dest=None) -> str:
    import io as _io
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    text = buf.getvalue()
    if dest is not None:
        Path(dest).write_text(text)
    return text
