"""JSON file formats: meshes, metrics, maps, boundary data, reports.

Canonical mesh ordering: each simplex's vertex tuple sorted ascending and
the simplex list sorted lexicographically; emitted files are deterministic
byte-for-byte for identical inputs.  Numbers are serialized with repr
(shortest round-trip, up to 17 significant digits).
"""

from __future__ import annotations

import json

import numpy as np

from .errors import UsageError
from .maps import PLMap
from .riemannian import PiecewiseMetric
from .simplicial import SimplicialComplex, build_complex


def _fail(path, what):
    raise UsageError(f"{path}: {what}")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        _fail(path, "file not found")
    except json.JSONDecodeError as exc:
        _fail(path, f"invalid JSON at line {exc.lineno}, column {exc.colno}")


def load_mesh(path) -> SimplicialComplex:
    data = _load_json(path)
    for key in ("dimension", "vertices", "simplices"):
        if key not in data:
            _fail(path, f"missing field {key!r}")
    verts = data["vertices"]
    simps = [tuple(s) for s in data["simplices"]]
    complex_ = build_complex(verts, simps)
    if complex_.n != data["dimension"]:
        _fail(path, f"declared dimension {data['dimension']} but top "
                    f"simplices have dimension {complex_.n}")
    return complex_


def mesh_payload(complex_: SimplicialComplex) -> dict:
    order = sorted(complex_.vertices)
    if order != list(range(len(order))):
        # renumber to a dense 0..V-1 id space for the file format
        remap = {v: i for i, v in enumerate(order)}
        simplices = sorted(tuple(sorted(remap[v] for v in t))
                           for t in complex_.top_simplices)
    else:
        simplices = sorted(complex_.top_simplices)
    return {
        "dimension": complex_.n,
        "vertices": [list(map(float, complex_.vertices[v])) for v in order],
        "simplices": [list(t) for t in simplices],
    }


def save_mesh(complex_, path):
    write_report(mesh_payload(complex_), path)


def load_metric(path, complex_) -> PiecewiseMetric:
    data = _load_json(path)
    mode = data.get("mode", "constant")
    if mode == "smooth":
        _fail(path, "smooth metrics are constructed programmatically; "
                    "files carry constant per-simplex arrays only")
    if mode != "constant":
        _fail(path, f"unknown metric mode {mode!r}")
    per = data.get("per_simplex")
    if per is None:
        _fail(path, "missing field 'per_simplex'")
    n = complex_.n
    arrays = []
    for i, flat in enumerate(per):
        arr = np.asarray(flat, dtype=float)
        if arr.size != n * n:
            _fail(path, f"per_simplex[{i}] has {arr.size} entries, "
                        f"expected {n * n}")
        arrays.append(arr.reshape(n, n))
    return PiecewiseMetric.from_arrays(complex_, arrays)


def metric_payload(metric: PiecewiseMetric) -> dict:
    return {
        "mode": "constant",
        "per_simplex": [list(map(float, a.ravel())) for a in metric.arrays],
    }


def load_plmap(path, complex_) -> PLMap:
    data = _load_json(path)
    vals = data.get("values")
    if vals is None:
        _fail(path, "missing field 'values'")
    if len(vals) != len(complex_.vertices):
        _fail(path, f"{len(vals)} value rows for {len(complex_.vertices)} vertices")
    order = sorted(complex_.vertices)
    return PLMap(complex_, {v: np.asarray(vals[i], dtype=float)
                            for i, v in enumerate(order)})


def plmap_payload(plmap: PLMap) -> dict:
    order = sorted(plmap.complex.vertices)
    return {
        "target_complex_dim": plmap.target_dim // 2,
        "values": [list(map(float, plmap.values[v])) for v in order],
    }


def load_function_family(path):
    """User polynomial test functions.

    Format: a list of entries {"n": complex dim, "exponents": [[e1..en]..],
    "coefficients": [[re, im]..], "name": optional}; coefficient pairs are
    matched to exponent rows by position.
    """
    from .target import polynomial

    data = _load_json(path)
    if not isinstance(data, list):
        _fail(path, "expected a list of polynomial entries")
    out = []
    for i, entry in enumerate(data):
        try:
            n = int(entry["n"])
            exps = [tuple(int(e) for e in row) for row in entry["exponents"]]
            coeffs = [complex(re, im) for re, im in entry["coefficients"]]
        except (KeyError, TypeError, ValueError) as exc:
            _fail(path, f"entry {i}: malformed polynomial ({exc})")
        if len(exps) != len(coeffs):
            _fail(path, f"entry {i}: {len(exps)} exponent rows for "
                        f"{len(coeffs)} coefficients")
        out.append(polynomial(n, dict(zip(exps, coeffs)),
                              name=entry.get("name", f"user{i}")))
    return out


def write_csv_table(columns: dict, path) -> str:
    """Convergence tables: one column per named series."""
    names = list(columns)
    rows = max(len(v) for v in columns.values()) if columns else 0
    lines = [",".join(["level"] + names)]
    for r in range(rows):
        cells = [str(r)]
        for k in names:
            vals = columns[k]
            cells.append(repr(float(vals[r])) if r < len(vals) else "")
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def load_boundary(path) -> dict:
    data = _load_json(path)
    out = {}
    for key, val in data.items():
        try:
            v = int(key)
        except ValueError:
            _fail(path, f"boundary keys must be vertex ids, got {key!r}")
        out[v] = np.asarray(val, dtype=float)
    return out


def write_report(obj, path=None) -> str:
    """Serialize a report deterministically; returns the text."""
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
