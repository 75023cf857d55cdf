"""JSON and CSV input/output.

File layouts (all JSON objects, keys as listed):

family spec
    {"space": "r41", "tag": "i_lambda", "lambda": {"name": "sin:z1"}}
    with optional "theta" or "c"; "lambda" may instead be
    {"lattice": {"x1": [...], "x2": [...], "values": [[...], ...]}}.
immersion lattice
    {"space": "s41", "x1": [...], "x2": [...], "points": n1 x n2 x dim array,
     "time_axis": optional ambient vector}
metric lattice
    {"axes": [a1, a2, a3, a4], "metric": n1 x n2 x n3 x n4 x 4 x 4 array}
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .families import FamilySpec, lattice_field, scalar_field
from .immersion import LatticeImmersion
from .space_forms import ConfigurationError, LatticeMetric, space_form


def _clean(obj):
    """Make reports JSON-safe: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(path_or_obj):
    if isinstance(path_or_obj, dict):
        return path_or_obj
    try:
        return json.loads(Path(path_or_obj).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read {path_or_obj}: {exc}") from None


def family_spec_from_json(data) -> FamilySpec:
    data = _load(data)
    try:
        lam = data["lambda"]
        if "lattice" in lam:
            L = lam["lattice"]
            field = lattice_field(L["x1"], L["x2"], L["values"])
        else:
            field = scalar_field(lam["name"])
        return FamilySpec(data["space"], data["tag"], field, data.get("theta"), data.get("c"))
    except KeyError as exc:
        raise ConfigurationError(f"family spec is missing {exc}") from None


def family_spec_to_json(spec: FamilySpec) -> str:
    return dumps(spec.to_json())


def immersion_from_json(data) -> LatticeImmersion:
    data = _load(data)
    try:
        M = space_form(data["space"])
        return LatticeImmersion(M, data["x1"], data["x2"], np.asarray(data["points"], float),
                                data.get("time_axis"), name=data.get("name", "lattice"))
    except KeyError as exc:
        raise ConfigurationError(f"immersion lattice is missing {exc}") from None


def immersion_to_json(f, resolution: int | None = None) -> dict:
    """Sample a chart immersion on its grid (a padded lattice) for export."""
    u, v = f.grid_axes()
    pts = np.stack(np.meshgrid(u, v, indexing="ij"), -1)
    out = {"space": f.space_form.key, "x1": u.tolist(), "x2": v.tolist(),
           "points": f(pts.reshape(-1, 2)).reshape(len(u), len(v), -1).tolist(), "name": f.name}
    if f.time_axis is not None:
        out["time_axis"] = list(map(float, f.time_axis))
    return out


def metric_from_json(data) -> LatticeMetric:
    data = _load(data)
    try:
        return LatticeMetric(data["axes"], np.asarray(data["metric"], float))
    except KeyError as exc:
        raise ConfigurationError(f"metric lattice is missing {exc}") from None


def metric_to_json(lm: LatticeMetric) -> dict:
    return {"axes": [a.tolist() for a in lm.axes], "metric": lm.values.tolist()}


def mesh_csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if v is None else repr(float(v)) for v in r])
    return buf.getvalue()


def mesh_json(columns: list[str], rows: list[list], meta: dict | None = None) -> str:
    return dumps({"columns": columns, "rows": rows, "meta": meta or {}})
