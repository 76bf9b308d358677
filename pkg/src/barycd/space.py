"""Finite (extended) metric measure spaces.

A space is a finite point set carrying a symmetric extended distance matrix
(entries may be ``+inf``) and a strictly positive reference mass vector.
Infinite entries partition the points into ordinary metric components; every
operation propagates infinities explicitly rather than clamping them, so a
disconnected space stays visibly disconnected.

Conventions used throughout:

* ``inf + x = inf`` and ``min(inf, x) = x`` follow IEEE semantics;
* products ``0 * inf`` are never formed -- sums against possibly-infinite
  distances are always restricted to strictly positive weights first;
* deterministic tie-breaking is by lowest point index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from .errors import AllInfinite, BadParams, InfiniteDistance, MixedFiniteness

DEFAULT_POINT_CAP = 4096

# Float guard for the triangle check: grid metrics built from coordinate
# differences can miss exact equality by a few ulps.
_TRIANGLE_SLACK = 1e-12


class MetricMeasureSpace:
    """Immutable finite space ``(X, d, m)`` with extended distances.

    Parameters
    ----------
    dist : (n, n) array
        Extended distance matrix; entries are nonnegative reals or ``inf``.
    ref_mass : (n,) array
        Strictly positive reference masses (total mass need not be 1).
    labels : optional list of per-point labels.
    coords : optional (n, k) array of coordinates for generated spaces.
    meta : optional dict of generator metadata (e.g. disconnected flag).

    The constructor checks shapes and rejects NaN; the metric axioms are
    checked by :func:`validate_space`, which reports violations instead of
    raising.
    """

    __slots__ = ("dist", "ref_mass", "labels", "coords", "meta", "_sq_dist")

    def __init__(self, dist, ref_mass, labels=None, coords=None, meta=None,
                 point_cap=DEFAULT_POINT_CAP):
        dist = np.asarray(dist, dtype=float)
        ref_mass = np.asarray(ref_mass, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise BadParams("distance matrix must be square")
        n = dist.shape[0]
        if n == 0:
            raise BadParams("space must contain at least one point")
        if point_cap is not None and n > point_cap:
            raise BadParams(f"space has {n} points, cap is {point_cap}")
        if ref_mass.shape != (n,):
            raise BadParams("ref_mass length must match point count")
        if np.isnan(dist).any() or np.isnan(ref_mass).any():
            raise BadParams("NaN entries are not allowed")
        if labels is not None and len(labels) != n:
            raise BadParams("labels length must match point count")
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.shape[0] != n:
                raise BadParams("coords length must match point count")
            coords.setflags(write=False)
        dist.setflags(write=False)
        ref_mass.setflags(write=False)
        self.dist = dist
        self.ref_mass = ref_mass
        self.labels = list(labels) if labels is not None else None
        self.coords = coords
        self.meta = dict(meta) if meta else {}
        self._sq_dist = None

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def sq_dist(self):
        """Cached matrix of squared distances (``inf`` squares to ``inf``)."""
        if self._sq_dist is None:
            sq = self.dist * self.dist
            sq.setflags(write=False)
            self._sq_dist = sq
        return self._sq_dist

    @property
    def total_mass(self) -> float:
        return float(self.ref_mass.sum())

    def same_space(self, other: "MetricMeasureSpace") -> bool:
        """True if ``other`` is this space or an exact structural copy."""
        if other is self:
            return True
        return (self.n == other.n
                and np.array_equal(self.dist, other.dist)
                and np.array_equal(self.ref_mass, other.ref_mass))

    def __repr__(self):
        kind = self.meta.get("kind", "space")
        return f"MetricMeasureSpace({kind}, n={self.n})"


@dataclass(frozen=True)
class WeightedPointSet:
    """Weighted points ``sum_i w_i * delta_{x_i}`` with positive weights summing to 1."""

    entries: tuple  # of (point_index, weight)

    def __post_init__(self):
        idx = [i for i, _ in self.entries]
        w = np.array([v for _, v in self.entries], dtype=float)
        if len(self.entries) == 0:
            raise BadParams("weighted point set must be nonempty")
        if len(set(idx)) != len(idx):
            raise BadParams("duplicate point indices")
        if (w <= 0).any():
            raise BadParams("weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise BadParams(f"weights sum to {w.sum()}, expected 1")

    @property
    def indices(self):
        return np.array([i for i, _ in self.entries], dtype=int)

    @property
    def weights(self):
        return np.array([v for _, v in self.entries], dtype=float)


@dataclass
class Violation:
    rule: str
    where: tuple

    def as_dict(self):
        return {"rule": self.rule, "where": list(self.where)}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def by_rule(self, rule: str):
        return [v for v in self.violations if v.rule == rule]


def validate_space(space: MetricMeasureSpace) -> ValidationReport:
    """Check all metric-measure axioms, reporting every violated pair/triple.

    Rules: ``diagonal`` (d(i,i)=0), ``symmetry``, ``positivity`` (d(i,j)>0 for
    i != j), ``triangle`` (on triples whose right side is finite), ``mass``
    (ref_mass > 0).  Never raises; an empty report certifies validity.
    """
    d = space.dist
    n = space.n
    out = []
    for i in np.nonzero(np.diag(d) != 0)[0]:
        out.append(Violation("diagonal", (int(i),)))
    asym = np.argwhere(d != d.T)
    for i, j in asym:
        if i < j:
            out.append(Violation("symmetry", (int(i), int(j))))
    off = ~np.eye(n, dtype=bool)
    for i, j in np.argwhere(off & (d <= 0)):
        out.append(Violation("positivity", (int(i), int(j))))
    # d[i,k] <= d[i,j] + d[j,k] whenever the right side is finite;
    # a small relative slack guards against last-ulp rounding of sums.
    for j in range(n):
        rhs = d[:, j][:, None] + d[j, :][None, :]
        tol = _TRIANGLE_SLACK * np.maximum(1.0, np.where(np.isfinite(rhs), rhs, 1.0))
        bad = np.argwhere(d > rhs + tol)
        for i, k in bad:
            out.append(Violation("triangle", (int(i), int(j), int(k))))
    for i in np.nonzero(space.ref_mass <= 0)[0]:
        out.append(Violation("mass", (int(i),)))
    return ValidationReport(out)


def barycenter_objective(space: MetricMeasureSpace, input: WeightedPointSet):
    """Vector of ``sum_i w_i d^2(x_i, y)`` over all candidate points y."""
    idx = input.indices
    w = input.weights
    return w @ space.sq_dist[idx, :]


def point_barycenter(space: MetricMeasureSpace, input: WeightedPointSet):
    """Minimize ``sum_i w_i d^2(x_i, y)`` over all points y of the space.

    Returns ``(argmin_index, value)``; ties break to the lowest index.
    Raises :class:`AllInfinite` when no candidate has finite objective.
    """
    obj = barycenter_objective(space, input)
    k = int(np.argmin(obj))
    best = float(obj[k])
    if not np.isfinite(best):
        raise AllInfinite("no finite-cost barycenter: inputs span disjoint components")
    return k, best


def midpoint_search(space: MetricMeasureSpace, i: int, j: int):
    """Best approximate midpoint of points i and j.

    Returns ``(z, defect)`` where z minimizes
    ``max(|d(i,z) - d(i,j)/2|, |d(z,j) - d(i,j)/2|)`` and defect is the
    attained minimum; defect 0 certifies an exact midpoint in the space.
    """
    d = space.dist
    if not np.isfinite(d[i, j]):
        raise InfiniteDistance(f"d({i},{j}) is infinite")
    half = d[i, j] / 2.0
    defects = np.maximum(np.abs(d[i, :] - half), np.abs(d[:, j] - half))
    z = int(np.argmin(defects))
    return z, float(defects[z])


def eps_approximation_defect(source: MetricMeasureSpace,
                             target: MetricMeasureSpace,
                             phi):
    """Distance and covering defects of a map between spaces.

    ``distance_defect`` is the largest distortion ``|d2(phi x, phi y) - d1(x, y)|``
    over pairs finite in both spaces; ``covering_defect`` is the worst distance
    from a target point to the image of phi.  The map is an eps-approximation
    for ``eps = max(distance_defect, covering_defect)``.

    Raises :class:`MixedFiniteness` when exactly one of ``d1(x,y)``,
    ``d2(phi x, phi y)`` is infinite for some pair.
    """
    phi = np.asarray(phi, dtype=int)
    if phi.shape != (source.n,):
        raise BadParams("phi must map every source point")
    if (phi < 0).any() or (phi >= target.n).any():
        raise BadParams("phi has out-of-range values")
    d1 = source.dist
    d2img = target.dist[np.ix_(phi, phi)]
    f1 = np.isfinite(d1)
    f2 = np.isfinite(d2img)
    mixed = f1 != f2
    if mixed.any():
        x, y = map(int, np.argwhere(mixed)[0])
        raise MixedFiniteness(f"pair ({x},{y}) finite in one space only")
    both = f1
    distance_defect = float(np.abs(d2img - d1)[both].max()) if both.any() else 0.0
    covering = target.dist[phi, :].min(axis=0)
    covering_defect = float(covering.max())
    return distance_defect, covering_defect


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def _interval_weights(a, b, n, mass, density):
    h = (b - a) / (n - 1)
    x = a + h * np.arange(n)
    if mass == "trapezoid":
        w = np.full(n, h)
        w[0] = w[-1] = h / 2.0
    elif mass == "uniform":
        w = np.full(n, (b - a) / n)
    else:
        raise BadParams(f"unknown mass rule {mass!r}")
    if density is not None:
        dens = density(x) if callable(density) else np.asarray(density, dtype=float)
        if np.shape(dens) != (n,):
            raise BadParams("density must give one value per node")
        if (np.asarray(dens) <= 0).any():
            raise BadParams("density must be strictly positive")
        w = w * dens
    return x, w


def grid1d(a: float, b: float, n: int, mass="trapezoid", density=None,
           normalize=False) -> MetricMeasureSpace:
    """Regular grid on [a, b] with metric |x - y|.

    ``mass="trapezoid"`` gives node weights (h/2, h, ..., h, h/2) so the total
    mass equals the interval length; ``mass="uniform"`` gives (b-a)/n per node.
    An optional density (callable or per-node array) multiplies the weights;
    ``normalize=True`` rescales to total mass 1.
    """
    if n < 2:
        raise BadParams("grid1d needs n >= 2")
    if not a < b:
        raise BadParams("grid1d needs a < b")
    x, w = _interval_weights(a, b, n, mass, density)
    if normalize:
        w = w / w.sum()
    d = np.abs(x[:, None] - x[None, :])
    return MetricMeasureSpace(d, w, coords=x[:, None],
                              meta={"kind": "grid1d", "a": a, "b": b, "n": n})


def grid2d(a, b, nx, c, d, ny, mass="trapezoid", density=None,
           normalize=False) -> MetricMeasureSpace:
    """Regular grid on [a, b] x [c, d] with the Euclidean metric.

    Node weights are products of the 1d rules; points are enumerated row-major
    in (x, y).
    """
    if nx < 2 or ny < 2:
        raise BadParams("grid2d needs nx, ny >= 2")
    if not (a < b and c < d):
        raise BadParams("grid2d needs a < b and c < d")
    xs, wx = _interval_weights(a, b, nx, mass, None)
    ys, wy = _interval_weights(c, d, ny, mass, None)
    pts = np.array([(x, y) for x in xs for y in ys])
    w = np.array([u * v for u in wx for v in wy])
    if density is not None:
        dens = density(pts) if callable(density) else np.asarray(density, dtype=float)
        if np.shape(dens) != (len(pts),):
            raise BadParams("density must give one value per node")
        w = w * dens
    if normalize:
        w = w / w.sum()
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    return MetricMeasureSpace(dist, w, coords=pts,
                              meta={"kind": "grid2d", "nx": nx, "ny": ny})


def circle(L: float, n: int, normalize=False) -> MetricMeasureSpace:
    """n equispaced points on a circle of circumference L, arc-length metric."""
    if n < 2:
        raise BadParams("circle needs n >= 2")
    if L <= 0:
        raise BadParams("circle needs L > 0")
    k = np.arange(n)
    gaps = np.abs(k[:, None] - k[None, :])
    d = (L / n) * np.minimum(gaps, n - gaps)
    w = np.full(n, L / n)
    if normalize:
        w = w / w.sum()
    r = L / (2 * np.pi)
    theta = 2 * np.pi * k / n
    coords = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    return MetricMeasureSpace(d, w, coords=coords,
                              meta={"kind": "circle", "L": L, "n": n})


def graph_space(n: int, edges, ref_mass) -> MetricMeasureSpace:
    """Shortest-path metric of an undirected weighted graph.

    ``edges`` is an iterable of (i, j, length) with positive lengths.  A
    disconnected graph is permitted; cross-component distances come out
    ``inf`` and the result is flagged with ``meta["disconnected"]``.
    """
    if n < 1:
        raise BadParams("graph needs n >= 1")
    ref_mass = np.asarray(ref_mass, dtype=float)
    rows, cols, vals = [], [], []
    for i, j, length in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise BadParams(f"edge ({i},{j}) out of range")
        if i == j:
            raise BadParams("self-loops are not allowed")
        if length <= 0:
            raise BadParams("edge lengths must be positive")
        rows += [i, j]
        cols += [j, i]
        vals += [length, length]
    adj = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    d = csgraph.shortest_path(adj, method="D", directed=False)
    disconnected = bool(np.isinf(d).any())
    return MetricMeasureSpace(d, ref_mass,
                              meta={"kind": "graph", "disconnected": disconnected})


def generate_space(kind: str, **params) -> MetricMeasureSpace:
    """Dispatch to the named generator: grid1d | grid2d | circle | graph."""
    table = {"grid1d": grid1d, "grid2d": grid2d, "circle": circle,
             "graph": graph_space}
    if kind not in table:
        raise BadParams(f"unknown space kind {kind!r}")
    return table[kind](**params)
