"""JSON schemas for groups, polyhedra, and cone metrics.

All writers emit a schema_version field and sorted keys so repeated runs
are byte-identical.
"""

import json

import numpy as np

from . import groups as G
from . import polyhedra as P
from .conemetric import ConeMetricSurface, validate
from .errors import SchemaError

SCHEMA_VERSION = 1


def _require(cond, msg):
    if not cond:
        raise SchemaError(msg)


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})")


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# group.json

def parse_group(data, where="group"):
    _require(isinstance(data, dict), f"{where}: expected an object")
    _require("genus" in data, f"{where}: missing 'genus'")
    genus = data["genus"]
    _require(isinstance(genus, int) and genus >= 2,
             f"{where}: genus must be an integer >= 2")
    if "preset" in data:
        _require(data["preset"] == "regular",
                 f"{where}: unknown preset {data['preset']!r}")
        return {"genus": genus, "preset": "regular", "zvc": None}
    _require("zvc" in data, f"{where}: needs either 'preset' or 'zvc'")
    zvc = data["zvc"]
    want = 6 * genus - 6
    _require(isinstance(zvc, list) and len(zvc) == want,
             f"{where}: zvc must be a list of {want} floats")
    return {"genus": genus, "preset": None,
            "zvc": np.array([float(v) for v in zvc])}


def group_to_json(group):
    if group.preset == "regular":
        return {"schema_version": SCHEMA_VERSION, "genus": group.genus,
                "preset": "regular"}
    return {"schema_version": SCHEMA_VERSION, "genus": group.genus,
            "zvc": [float(v) for v in group.zvc]}


# ---------------------------------------------------------------------------
# polyhedron.json

def parse_polyhedron(data, where="polyhedron"):
    _require(isinstance(data, dict), f"{where}: expected an object")
    for key in ("group", "base_points", "heights"):
        _require(key in data, f"{where}: missing '{key}'")
    grp = parse_group(data["group"], where=f"{where}.group")
    bps = data["base_points"]
    hts = data["heights"]
    _require(isinstance(bps, list) and all(
        isinstance(p, list) and len(p) == 2 for p in bps),
        f"{where}: base_points must be a list of [u, v] pairs")
    _require(isinstance(hts, list) and len(hts) == len(bps),
             f"{where}: heights must match base_points in length")
    return P.PolyhedronParams(genus=grp["genus"], zvc=grp["zvc"],
                              preset=grp["preset"],
                              base_points=np.array(bps, dtype=float),
                              heights=np.array(hts, dtype=float))


def params_to_json(params):
    group = ({"genus": params.genus, "preset": "regular"}
             if params.preset else
             {"genus": params.genus, "zvc": [float(v) for v in params.zvc]})
    return {"schema_version": SCHEMA_VERSION,
            "group": group,
            "base_points": [[float(u), float(v)] for u, v in params.base_points],
            "heights": [float(h) for h in params.heights]}


# ---------------------------------------------------------------------------
# metric.json

def parse_metric(data, where="metric"):
    _require(isinstance(data, dict), f"{where}: expected an object")
    for key in ("genus", "triangles", "lengths", "gluing"):
        _require(key in data, f"{where}: missing '{key}'")
    genus = data["genus"]
    _require(isinstance(genus, int) and genus >= 2,
             f"{where}: genus must be an integer >= 2")
    tris = data["triangles"]
    _require(isinstance(tris, list) and all(
        isinstance(t, list) and len(t) == 3 for t in tris),
        f"{where}: triangles must be vertex-label triples")
    gluing = []
    for pair in data["gluing"]:
        _require(isinstance(pair, list) and len(pair) == 2 and all(
            isinstance(s, list) and len(s) == 2 for s in pair),
            f"{where}: gluing entries are [[t, e], [t, e]] slot pairs")
        gluing.append((tuple(int(v) for v in pair[0]),
                       tuple(int(v) for v in pair[1])))
    lengths = {}
    for k, v in data["lengths"].items():
        try:
            lengths[int(k)] = float(v)
        except (TypeError, ValueError):
            raise SchemaError(f"{where}: lengths keys are edge indices, "
                              "values are floats")
    _require(len(lengths) == len(gluing),
             f"{where}: one length per gluing pair expected")
    metric = ConeMetricSurface(genus=genus,
                               triangles=[tuple(t) for t in tris],
                               gluing=gluing, lengths=lengths)
    return validate(metric)


def metric_to_json(metric):
    slot_pairs = []
    lengths = {}
    for eid, (a, b) in enumerate(metric.gluing):
        slot_pairs.append([[int(a[0]), int(a[1])], [int(b[0]), int(b[1])]])
        lengths[str(metric.slot_to_edge[a])] = float(
            metric.lengths[metric.slot_to_edge[a]])
    return {"schema_version": SCHEMA_VERSION,
            "genus": metric.genus,
            "triangles": [[int(v) for v in t] for t in metric.triangles],
            "gluing": slot_pairs,
            "lengths": lengths}
