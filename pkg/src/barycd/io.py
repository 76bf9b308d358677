"""File schemas: spaces, measures, mixtures, point sets, and functions.

Space file (JSON):
    {"points": [{"id": 0, "label": "a", "coords": [0.0]}, ...],
     "metric": {"type": "matrix", "data": [[0, 1], [1, 0]]}
             | {"type": "euclidean"}
             | {"type": "graph", "edges": [[i, j, length], ...]},
     "ref_measure": [0.5, 0.5]}

The string "inf" denotes an infinite distance in matrix data.  A CSV
distance matrix is also accepted together with a sidecar mass file (one
value per line).  Measure files are {"space": <path-or-id>, "weights":
[...]}; the CLI additionally accepts the inline shorthands "dirac:i" and
"uniform:i,j,k".
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from .errors import SchemaError
from .measures import DiscreteMeasure, Mixture
from .space import DEFAULT_POINT_CAP, MetricMeasureSpace


def _parse_extended(value, where):
    if value == "inf":
        return math.inf
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if math.isnan(value):
            raise SchemaError(f"{where}: NaN is not allowed")
        return float(value)
    raise SchemaError(f"{where}: expected a number or \"inf\"")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def load_space(path, point_cap=DEFAULT_POINT_CAP) -> MetricMeasureSpace:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected an object")
    for key in ("points", "metric", "ref_measure"):
        if key not in doc:
            raise SchemaError(f"{path}: missing key {key!r}")
    points = doc["points"]
    if not isinstance(points, list) or not points:
        raise SchemaError(f"{path}: points must be a nonempty list")
    n = len(points)
    ids = []
    labels = []
    coords = []
    for p in points:
        if not isinstance(p, dict) or "id" not in p:
            raise SchemaError(f"{path}: each point needs an id")
        ids.append(p["id"])
        labels.append(p.get("label"))
        coords.append(p.get("coords"))
    if sorted(ids) != list(range(n)):
        raise SchemaError(f"{path}: point ids must be 0..{n - 1}")
    order = np.argsort(ids)
    labels = [labels[i] for i in order]
    coords = [coords[i] for i in order]
    have_labels = any(l is not None for l in labels)
    have_coords = all(c is not None for c in coords)
    metric = doc["metric"]
    if not isinstance(metric, dict) or "type" not in metric:
        raise SchemaError(f"{path}: metric must be an object with a type")
    mtype = metric["type"]
    if mtype == "matrix":
        data = metric.get("data")
        if not isinstance(data, list) or len(data) != n:
            raise SchemaError(f"{path}: metric data must be an {n}x{n} matrix")
        dist = np.empty((n, n))
        for i, row in enumerate(data):
            if not isinstance(row, list) or len(row) != n:
                raise SchemaError(f"{path}: metric row {i} has wrong length")
            for j, v in enumerate(row):
                dist[i, j] = _parse_extended(v, f"{path}: metric[{i}][{j}]")
    elif mtype == "euclidean":
        if not have_coords:
            raise SchemaError(f"{path}: euclidean metric needs coords on every point")
        pts = np.asarray(coords, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
    elif mtype == "graph":
        edges = metric.get("edges")
        if not isinstance(edges, list):
            raise SchemaError(f"{path}: graph metric needs an edge list")
        rows, cols, vals = [], [], []
        for e in edges:
            if not (isinstance(e, list) and len(e) == 3):
                raise SchemaError(f"{path}: edges must be [i, j, length]")
            i, j, length = e
            if not (0 <= i < n and 0 <= j < n) or length <= 0:
                raise SchemaError(f"{path}: bad edge {e}")
            rows += [i, j]
            cols += [j, i]
            vals += [float(length), float(length)]
        adj = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        dist = csgraph.shortest_path(adj, method="D", directed=False)
    else:
        raise SchemaError(f"{path}: unknown metric type {mtype!r}")
    ref = doc["ref_measure"]
    if not isinstance(ref, list) or len(ref) != n:
        raise SchemaError(f"{path}: ref_measure must list {n} masses")
    ref = np.asarray([_parse_extended(v, f"{path}: ref_measure") for v in ref])
    try:
        return MetricMeasureSpace(
            dist, ref,
            labels=labels if have_labels else None,
            coords=np.asarray(coords, dtype=float) if have_coords else None,
            meta={"source": str(path)},
            point_cap=point_cap)
    except Exception as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def load_space_csv(dist_path, mass_path, point_cap=DEFAULT_POINT_CAP):
    """Distance matrix from CSV plus a sidecar mass file (one value per line)."""
    try:
        with open(dist_path, newline="") as fh:
            rows = [[_parse_extended(_maybe_float(cell), dist_path)
                     for cell in row] for row in csv.reader(fh) if row]
    except OSError as exc:
        raise SchemaError(f"{dist_path}: {exc}") from exc
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise SchemaError(f"{dist_path}: expected a square matrix")
    try:
        with open(mass_path) as fh:
            masses = [float(line.strip()) for line in fh if line.strip()]
    except (OSError, ValueError) as exc:
        raise SchemaError(f"{mass_path}: {exc}") from exc
    if len(masses) != n:
        raise SchemaError(f"{mass_path}: expected {n} masses")
    try:
        return MetricMeasureSpace(np.asarray(rows), np.asarray(masses),
                                  meta={"source": str(dist_path)},
                                  point_cap=point_cap)
    except Exception as exc:
        raise SchemaError(f"{dist_path}: {exc}") from exc


def _maybe_float(cell):
    cell = cell.strip()
    if cell == "inf":
        return "inf"
    try:
        return float(cell)
    except ValueError as exc:
        raise SchemaError(f"bad CSV cell {cell!r}") from exc


def space_to_doc(space: MetricMeasureSpace) -> dict:
    points = []
    for i in range(space.n):
        p = {"id": i}
        if space.labels is not None:
            p["label"] = space.labels[i]
        if space.coords is not None:
            p["coords"] = [float(v) for v in np.atleast_1d(space.coords[i])]
        points.append(p)
    data = [["inf" if math.isinf(v) else float(v) for v in row]
            for row in space.dist]
    return {
        "points": points,
        "metric": {"type": "matrix", "data": data},
        "ref_measure": [float(v) for v in space.ref_mass],
    }


def save_space(space, path):
    with open(path, "w") as fh:
        json.dump(space_to_doc(space), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_measure(spec, space) -> DiscreteMeasure:
    """A measure from an inline shorthand or a JSON file.

    Shorthands: ``dirac:i`` and ``uniform:i,j,k``.
    """
    if isinstance(spec, str) and spec.startswith("dirac:"):
        try:
            return DiscreteMeasure.dirac(space, int(spec[6:]))
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"bad shorthand {spec!r}") from exc
    if isinstance(spec, str) and spec.startswith("uniform:"):
        try:
            idx = [int(tok) for tok in spec[8:].split(",") if tok]
            return DiscreteMeasure.uniform_on(space, idx)
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"bad shorthand {spec!r}") from exc
    doc = _load_json(spec) if isinstance(spec, str) else spec
    if not isinstance(doc, dict) or "weights" not in doc:
        raise SchemaError(f"{spec}: measure file needs a weights list")
    w = doc["weights"]
    if not isinstance(w, list) or len(w) != space.n:
        raise SchemaError(f"{spec}: weights must list {space.n} values")
    try:
        return DiscreteMeasure(space, np.asarray(w, dtype=float))
    except Exception as exc:
        raise SchemaError(f"{spec}: {exc}") from exc


def load_mixture(path, space) -> Mixture:
    doc = _load_json(path)
    comps = doc.get("components") if isinstance(doc, dict) else None
    if not isinstance(comps, list) or not comps:
        raise SchemaError(f"{path}: mixture needs a nonempty components list")
    lambdas = []
    measures = []
    for c in comps:
        if not isinstance(c, dict) or "lambda" not in c or "measure" not in c:
            raise SchemaError(f"{path}: each component needs lambda and measure")
        lambdas.append(float(c["lambda"]))
        measures.append(load_measure(c["measure"], space))
    try:
        return Mixture(np.asarray(lambdas), tuple(measures))
    except Exception as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def load_point_set(path, space):
    doc = _load_json(path)
    idx = doc.get("indices") if isinstance(doc, dict) else None
    if not isinstance(idx, list) or not idx:
        raise SchemaError(f"{path}: set file needs a nonempty indices list")
    return np.asarray(idx, dtype=int)


def load_function(path, space):
    doc = _load_json(path)
    vals = doc.get("values") if isinstance(doc, dict) else None
    if not isinstance(vals, list) or len(vals) != space.n:
        raise SchemaError(f"{path}: function file must list {space.n} values")
    out = np.empty(space.n)
    for i, v in enumerate(vals):
        if v == "-inf":
            out[i] = -math.inf
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            out[i] = float(v)
        else:
            raise SchemaError(f"{path}: values must be reals or \"-inf\"")
    return out
