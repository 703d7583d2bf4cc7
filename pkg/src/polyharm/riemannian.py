"""Piecewise Riemannian metrics on simplicial complexes.

Every top simplex with sorted vertices (v0, ..., vn) carries reference
coordinates xi in the unit simplex {xi >= 0, sum xi <= 1}: vertex v0 sits at
the origin and vertex vi at e_i.  All per-simplex tensors (metric, map
differentials, hat gradients) are expressed in this frame.  The metric
induced by an embedding is then the Gram matrix of the edge vectors, and the
reference euclidean metric is the identity array.

Baseline mode stores one constant SPD array per top simplex, which makes PL
gradients, volumes and stiffness entries exact.  Smooth mode stores an
evaluator over reference coordinates and integrates by quadrature.

Metrics are immutable after construction; distance queries are independent
and concurrently evaluable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DegenerateSimplex, NotSPD, PointOffComplex
from .simplicial import SimplicialComplex

FACE_MATCH_TOL = 1e-12  # absolute tolerance for metric agreement across faces


# ---------------------------------------------------------------------------
# quadrature on the reference simplex
# ---------------------------------------------------------------------------

def simplex_rule(n: int, order: int):
    """Quadrature nodes and weights on the unit reference n-simplex.

    Weights sum to the simplex volume 1/n!.  Order 1 is the barycenter
    rule; order 2 on triangles is the edge-midpoint rule (degree 2);
    higher orders use a collapsed (Duffy) tensor Gauss-Legendre grid with
    ``order`` points per axis, exact for polynomials of total degree
    >= 2*order - 1 - n.
    """
    vol = 1.0 / math.factorial(n)
    if order <= 1:
        return np.full((1, n), 1.0 / (n + 1)), np.array([vol])
    if order == 2 and n == 2:
        pts = np.array([[0.5, 0.0], [0.0, 0.5], [0.5, 0.5]])
        return pts, np.full(3, vol / 3.0)
    return _duffy_rule(n, order)


def _duffy_rule(n: int, points_per_axis: int):
    x, w = np.polynomial.legendre.leggauss(points_per_axis)
    x = 0.5 * (x + 1.0)  # [0, 1]
    w = 0.5 * w
    grids = np.meshgrid(*([x] * n), indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([w] * n), indexing="ij")
    weights = np.ones(u.shape[0])
    for g in wgrids:
        weights = weights * g.ravel()
    pts = np.empty_like(u)
    rem = np.ones(u.shape[0])
    for k in range(n):
        pts[:, k] = u[:, k] * rem
        weights = weights * rem
        rem = rem * (1.0 - u[:, k])
    return pts, weights


# ---------------------------------------------------------------------------
# SPD helpers
# ---------------------------------------------------------------------------

def _require_spd(g, what="metric"):
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NotSPD(f"{what} is not square: shape {g.shape}")
    if not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise NotSPD(f"{what} is not symmetric")
    ev = np.linalg.eigvalsh(g)
    if ev[0] <= 0.0:
        raise NotSPD(f"{what} has non-positive eigenvalue {ev[0]:g}")
    return g


def ellipticity_constant(g) -> float:
    """Smallest Lambda with Lambda^-2 |xi|^2 <= xi.g.xi <= Lambda^2 |xi|^2.

    Equals max(sqrt(lambda_max), 1/sqrt(lambda_min)) over the eigenvalues
    of g.  Raises NotSPD when g is not symmetric positive definite.
    """
    g = _require_spd(g)
    ev = np.linalg.eigvalsh(g)
    return float(max(math.sqrt(ev[-1]), 1.0 / math.sqrt(ev[0])))


# ---------------------------------------------------------------------------
# the piecewise metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseMetric:
    """Per-top-simplex SPD metric in reference coordinates.

    mode is "constant" (one array per simplex) or "smooth" (one evaluator
    xi -> array per simplex).  ``arrays`` always holds the barycenter
    values so cheap queries never call evaluators.
    """

    complex: SimplicialComplex
    mode: str
    arrays: tuple  # barycenter value per top simplex
    evaluators: tuple = None  # smooth mode only
    quadrature_order: int = 1
    ellipticity: tuple = field(default=None, repr=False)
    continuity_flag: bool = field(default=None, repr=False)

    def __post_init__(self):
        if self.ellipticity is None:
            object.__setattr__(
                self, "ellipticity",
                tuple(ellipticity_constant(g) for g in self.arrays))
        if self.continuity_flag is None:
            object.__setattr__(self, "continuity_flag", self._faces_agree())

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_arrays(cls, complex_, arrays, quadrature_order=1):
        arrs = tuple(_require_spd(np.array(a, dtype=float)) for a in arrays)
        if len(arrs) != len(complex_.top_simplices):
            raise NotSPD(
                f"need {len(complex_.top_simplices)} arrays, got {len(arrs)}")
        for a in arrs:
            if a.shape != (complex_.n, complex_.n):
                raise NotSPD(f"array shape {a.shape} != ({complex_.n}, {complex_.n})")
        return cls(complex_, "constant", arrs, None, quadrature_order)

    @classmethod
    def euclidean(cls, complex_):
        """The reference euclidean metric: identity array on every simplex."""
        eye = np.eye(complex_.n)
        return cls(complex_, "constant",
                   tuple(eye.copy() for _ in complex_.top_simplices))

    @classmethod
    def from_embedding(cls, complex_):
        """Gram matrices of the embedded edge vectors."""
        arrays = []
        for t in complex_.top_simplices:
            coords = [complex_.vertices[v] for v in t]
            edges = np.stack([c - coords[0] for c in coords[1:]], axis=1)
            gram = edges.T @ edges
            try:
                arrays.append(_require_spd(gram))
            except NotSPD:
                raise DegenerateSimplex(f"simplex {t} has degenerate embedding")
        return cls(complex_, "constant", tuple(arrays))

    @classmethod
    def from_evaluators(cls, complex_, evaluators, quadrature_order=2):
        """Smooth mode: ``evaluators[i](xi)`` returns the SPD array on
        top simplex i at reference coordinates xi."""
        evs = tuple(evaluators)
        bary = [np.full(complex_.n, 1.0 / (complex_.n + 1))] * len(evs)
        arrays = tuple(_require_spd(np.asarray(ev(b), dtype=float))
                       for ev, b in zip(evs, bary))
        return cls(complex_, "smooth", arrays, evs, quadrature_order)

    # -- queries -----------------------------------------------------------

    @property
    def n(self):
        return self.complex.n

    @property
    def global_ellipticity(self) -> float:
        return max(self.ellipticity)

    def at(self, idx, xi=None):
        """Metric array on top simplex ``idx`` at reference point xi
        (barycenter when omitted)."""
        if self.mode == "constant" or xi is None:
            return self.arrays[idx]
        return _require_spd(np.asarray(self.evaluators[idx](np.asarray(xi)), float))

    def scaled(self, factor: float) -> "PiecewiseMetric":
        """Metric multiplied by a positive constant."""
        if factor <= 0:
            raise NotSPD("scale factor must be positive")
        if self.mode == "constant":
            return PiecewiseMetric(
                self.complex, "constant",
                tuple(factor * a for a in self.arrays))
        evs = tuple((lambda e: (lambda xi: factor * np.asarray(e(xi))))(e)
                    for e in self.evaluators)
        return PiecewiseMetric.from_evaluators(self.complex, evs,
                                               self.quadrature_order)

    # -- face compatibility -------------------------------------------------

    def _faces_agree(self) -> bool:
        cx = self.complex
        for face, cof in cx.cofaces.items():
            if len(cof) < 2:
                continue
            mats = [self._face_restriction(i, face) for i in cof]
            for m in mats[1:]:
                if np.abs(m - mats[0]).max() > FACE_MATCH_TOL:
                    return False
        return True

    def _face_restriction(self, idx, face):
        """Pullback of the simplex metric to a face, in the face's own
        sorted edge frame."""
        top = self.complex.top_simplices[idx]
        ref = _vertex_ref_coords(top)
        a = np.stack([ref[w] - ref[face[0]] for w in face[1:]], axis=1)
        xi = np.mean([ref[w] for w in face], axis=0)  # face barycenter
        g = self.at(idx, xi)
        return a.T @ g @ a


def _vertex_ref_coords(top):
    """Reference coordinates of each vertex of a sorted top simplex."""
    n = len(top) - 1
    out = {top[0]: np.zeros(n)}
    for i, v in enumerate(top[1:]):
        e = np.zeros(n)
        e[i] = 1.0
        out[v] = e
    return out


# ---------------------------------------------------------------------------
# volumes and gradient pairings
# ---------------------------------------------------------------------------

def simplex_volume(complex_, metric: PiecewiseMetric, idx, order=None) -> float:
    """Riemannian volume of top simplex ``idx``.

    Constant mode: sqrt(det g) / n!.  Smooth mode: quadrature of
    sqrt(det g(xi)) at the requested order (metric's default otherwise).
    """
    n = complex_.n
    if metric.mode == "constant":
        g = _require_spd(metric.arrays[idx])
        return float(math.sqrt(np.linalg.det(g)) / math.factorial(n))
    pts, wts = simplex_rule(n, order or max(metric.quadrature_order, 2))
    total = 0.0
    for xi, w in zip(pts, wts):
        g = metric.at(idx, xi)
        total += w * math.sqrt(np.linalg.det(g))
    return float(total)


def total_volume(complex_, metric, order=None) -> float:
    return sum(simplex_volume(complex_, metric, i, order)
               for i in range(len(complex_.top_simplices)))


def gradient_inner(metric: PiecewiseMetric, idx, du, dv, xi=None) -> float:
    """Inner product of the gradients of two PL functions on one simplex.

    du, dv are differentials (covector rows) in reference coordinates;
    the gradient pairing is du . g^-1 . dv.
    """
    g = _require_spd(metric.at(idx, xi))
    du = np.asarray(du, dtype=float)
    dv = np.asarray(dv, dtype=float)
    return float(du @ np.linalg.solve(g, dv))


# ---------------------------------------------------------------------------
# intrinsic distance by subdivision-graph shortest paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointAddress:
    """A point of the complex: top simplex index plus barycentric weights
    (n+1 nonnegative reals summing to one, aligned with the sorted vertex
    order of the simplex)."""

    top_index: int
    bary: tuple

    def ref_coords(self):
        return np.asarray(self.bary[1:], dtype=float)


def point_on(complex_, top_index, bary) -> PointAddress:
    bary = tuple(float(b) for b in bary)
    if not 0 <= top_index < len(complex_.top_simplices):
        raise PointOffComplex(f"no top simplex with index {top_index}")
    if len(bary) != complex_.n + 1:
        raise PointOffComplex("barycentric address has wrong length")
    if min(bary) < -1e-12 or abs(sum(bary) - 1.0) > 1e-9:
        raise PointOffComplex(f"invalid barycentric weights {bary}")
    return PointAddress(top_index, bary)


def vertex_address(complex_, v) -> PointAddress:
    """Address of a vertex (carried by the first top simplex containing it)."""
    for i, t in enumerate(complex_.top_simplices):
        if v in t:
            bary = [0.0] * (complex_.n + 1)
            bary[t.index(v)] = 1.0
            return PointAddress(i, tuple(bary))
    raise PointOffComplex(f"vertex {v!r} not on any top simplex")


@dataclass(frozen=True)
class DistanceEstimate:
    upper_bound: float
    graph_nodes: int
    graph_edges: int


def intrinsic_distance(complex_, metric, x, y, refinement_level=3) -> DistanceEstimate:
    """Upper bound for the intrinsic distance between two points.

    Nodes are the points of the 2^level-fold edge subdivision (plus x and
    y); within every top simplex all node pairs are joined by an edge
    weighted with the within-simplex metric length of the straight
    reference segment.  The estimate is monotone non-increasing in the
    level (dyadic lattices are nested) and converges to the intrinsic
    distance from above for constant-per-simplex metrics.
    """
    if not isinstance(x, PointAddress):
        x = point_on(complex_, *x)
    if not isinstance(y, PointAddress):
        y = point_on(complex_, *y)
    if refinement_level < 0:
        raise PointOffComplex("refinement_level must be >= 0")
    if x.top_index == y.top_index and np.allclose(x.bary, y.bary, rtol=0, atol=0):
        return DistanceEstimate(0.0, 0, 0)

    n = complex_.n
    level = int(refinement_level)
    lat = 2 ** level

    node_ids: dict = {}
    node_ref: dict = {}  # (simplex idx) -> list of (node id, xi)

    def node_key_for(top, beta):
        support = tuple((v, Fraction(b, lat)) for v, b in zip(top, beta) if b)
        return support

    for idx, top in enumerate(complex_.top_simplices):
        pts = []
        for beta in _compositions(lat, n + 1):
            key = node_key_for(top, beta)
            nid = node_ids.setdefault(key, len(node_ids))
            xi = np.array(beta[1:], dtype=float) / lat
            pts.append((nid, xi))
        node_ref[idx] = pts

    edges: dict = {}  # (id a, id b) -> min length over carrying simplices

    def connect(idx, pts):
        g = metric.at(idx)
        arr = np.stack([xi for _, xi in pts])
        ids = [nid for nid, _ in pts]
        diffs = arr[:, None, :] - arr[None, :, :]
        if metric.mode == "smooth":
            # midpoint evaluation, adequate for the upper-bound contract
            lens = np.empty(diffs.shape[:2])
            for a in range(len(pts)):
                for b in range(a + 1, len(pts)):
                    gm = metric.at(idx, 0.5 * (arr[a] + arr[b]))
                    lens[a, b] = math.sqrt(diffs[a, b] @ gm @ diffs[a, b])
        else:
            lens = np.sqrt(np.einsum("abi,ij,abj->ab", diffs, g, diffs))
        iu, ju = np.triu_indices(len(pts), k=1)
        for a, b in zip(iu, ju):
            key = (ids[a], ids[b]) if ids[a] < ids[b] else (ids[b], ids[a])
            w = lens[a, b]
            if key not in edges or w < edges[key]:
                edges[key] = w

    # attach the query points: a query point on a shared face is connected
    # inside every top simplex containing that face
    extra = []
    for label, addr in (("x", x), ("y", y)):
        top = complex_.top_simplices[addr.top_index]
        support = tuple(v for v, b in zip(top, addr.bary) if b > 1e-12)
        nid = len(node_ids) + len(extra)
        carriers = []
        for idx2, t2 in enumerate(complex_.top_simplices):
            if set(support) <= set(t2):
                bmap = dict(zip(top, addr.bary))
                xi2 = np.array([bmap.get(v, 0.0) for v in t2[1:]])
                carriers.append((idx2, xi2))
        extra.append((label, nid, carriers))

    for idx, pts in node_ref.items():
        all_pts = list(pts)
        for _, nid, carriers in extra:
            for cidx, xi2 in carriers:
                if cidx == idx:
                    all_pts.append((nid, xi2))
        connect(idx, all_pts)

    total_nodes = len(node_ids) + len(extra)
    rows = np.fromiter((k[0] for k in edges), dtype=int, count=len(edges))
    cols = np.fromiter((k[1] for k in edges), dtype=int, count=len(edges))
    vals = np.fromiter(edges.values(), dtype=float, count=len(edges))
    graph = coo_matrix((vals, (rows, cols)), shape=(total_nodes, total_nodes))
    src = extra[0][1]
    dst = extra[1][1]
    dist = dijkstra(graph, directed=False, indices=[src])[0]
    d = float(dist[dst])
    if not np.isfinite(d):
        raise PointOffComplex("no path between the points (disconnected graph?)")
    return DistanceEstimate(d, total_nodes, len(edges))


def _compositions(total, parts):
    """All nonnegative integer tuples of given length summing to total."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest
