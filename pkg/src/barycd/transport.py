"""Two-marginal optimal transport with squared-distance cost.

``w2_exact`` solves the transportation LP exactly (dense, desk scale) and is
the metric used everywhere else in the package; ``w2_entropic`` is a
log-domain Sinkhorn alternative for quick approximations; ``extract_monge``
diagnoses whether a coupling is concentrated on the graph of a map.

Infinite-cost arcs (extended-metric disconnections) are removed from the LP
up front; if that makes the problem infeasible the distance is ``+inf`` and
no coupling is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._linprog import solve_lp
from .errors import BadParams, Infeasible, InfiniteCost
from .measures import DiscreteMeasure, _require_same_space

MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class Coupling:
    """Joint measure on X x X with prescribed marginals and d^2 cost."""

    source: DiscreteMeasure
    target: DiscreteMeasure
    pi: np.ndarray
    cost: float
    marginal_tol: float = MARGINAL_TOL

    def __post_init__(self):
        space = _require_same_space(self.source, self.target)
        pi = np.asarray(self.pi, dtype=float)
        if pi.shape != (space.n, space.n):
            raise BadParams("coupling matrix has wrong shape")
        if (pi < 0).any():
            raise BadParams("coupling has negative mass")
        row_err = np.abs(pi.sum(axis=1) - self.source.weights).max()
        col_err = np.abs(pi.sum(axis=0) - self.target.weights).max()
        if max(row_err, col_err) > self.marginal_tol:
            raise BadParams(
                f"marginal error {max(row_err, col_err):.3e} exceeds "
                f"{self.marginal_tol:.1e}")
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)

    @property
    def space(self):
        return self.source.space

    def triplets(self, threshold=0.0):
        """Sparse (i, j, mass) list in deterministic row-major order."""
        out = []
        for i, j in np.argwhere(self.pi > threshold):
            out.append((int(i), int(j), float(self.pi[i, j])))
        return out


def _plan_cost(pi, sq_dist):
    """Cost of a plan, skipping zero-mass cells so 0 * inf never forms."""
    mask = pi > 0
    if not mask.any():
        return 0.0
    vals = sq_dist[mask]
    if np.isinf(vals).any():
        return float("inf")
    return float(np.sum(pi[mask] * vals))


def w2_exact(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Exact L2-optimal transport distance and an optimal vertex coupling.

    Returns ``(w2, coupling)``; ``(inf, None)`` when every feasible coupling
    has infinite cost.  Deterministic: repeated calls return the identical
    coupling.
    """
    space = _require_same_space(mu, nu)
    if mu.same_as(nu):
        pi = np.zeros((space.n, space.n))
        np.fill_diagonal(pi, mu.weights)
        return 0.0, Coupling(mu, nu, pi, 0.0)
    rows = mu.support
    cols = nu.support
    C = space.sq_dist[np.ix_(rows, cols)]
    finite = np.isfinite(C)
    if (~finite.any(axis=1)).any() or (~finite.any(axis=0)).any():
        return float("inf"), None
    arc_r, arc_c = np.nonzero(finite)
    nvar = arc_r.size
    nr, nc = rows.size, cols.size
    data = np.ones(2 * nvar)
    row_idx = np.concatenate([arc_r, nr + arc_c])
    col_idx = np.concatenate([np.arange(nvar), np.arange(nvar)])
    A = sp.csr_matrix((data, (row_idx, col_idx)), shape=(nr + nc, nvar))
    b = np.concatenate([mu.weights[rows], nu.weights[cols]])
    try:
        cost, x = solve_lp(C[arc_r, arc_c], A, b)
    except Infeasible:
        return float("inf"), None
    cost = max(cost, 0.0)
    pi = np.zeros((space.n, space.n))
    pi[rows[arc_r], cols[arc_c]] = x
    coupling = Coupling(mu, nu, pi, cost)
    return float(np.sqrt(cost)), coupling


def _round_to_marginals(P, a, b, finite_mask):
    """Repair a near-feasible plan to the exact marginals (a, b).

    Row/column scalings capped at 1 followed by a rank-one correction on
    finite-cost arcs; the residual after masking infinite arcs is negligible
    once the iteration has converged.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(P.sum(axis=1) > 0, a / P.sum(axis=1), 1.0)
    P = P * np.minimum(r, 1.0)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(P.sum(axis=0) > 0, b / P.sum(axis=0), 1.0)
    P = P * np.minimum(s, 1.0)[None, :]
    ea = a - P.sum(axis=1)
    eb = b - P.sum(axis=0)
    total = ea.sum()
    if total > 0:
        corr = np.outer(ea, eb) / total
        corr[~finite_mask] = 0.0
        P = P + corr
    return P


def w2_entropic(mu: DiscreteMeasure, nu: DiscreteMeasure, epsilon: float,
                max_iter: int = 2000, tol: float = 1e-9):
    """Log-domain Sinkhorn on the kernel ``exp(-d^2 / epsilon)``.

    Returns ``(value, coupling, converged)`` where value is the unregularized
    cost of the returned plan and ``converged`` is False when the marginal
    error still exceeds ``tol`` after ``max_iter`` sweeps.
    """
    if epsilon <= 0:
        raise BadParams("epsilon must be positive")
    space = _require_same_space(mu, nu)
    rows = mu.support
    cols = nu.support
    C = space.sq_dist[np.ix_(rows, cols)]
    finite = np.isfinite(C)
    if (~finite.any(axis=1)).any() or (~finite.any(axis=0)).any():
        raise InfiniteCost("supports joined only by infinite distances")
    a = mu.weights[rows]
    b = nu.weights[cols]
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
        log_b = np.log(b)
    neg_C = np.where(finite, -C / epsilon, -np.inf)
    f = np.zeros(rows.size)
    g = np.zeros(cols.size)
    converged = False
    err = np.inf
    for _ in range(max_iter):
        f = epsilon * (log_a - _lse(neg_C + g[None, :] / epsilon))
        g = epsilon * (log_b - _lse(neg_C.T + f[None, :] / epsilon))
        P = np.exp(neg_C + (f[:, None] + g[None, :]) / epsilon)
        err = max(np.abs(P.sum(axis=1) - a).max(),
                  np.abs(P.sum(axis=0) - b).max())
        if err <= tol:
            converged = True
            break
    P = _round_to_marginals(P, a, b, finite)
    achieved = max(np.abs(P.sum(axis=1) - a).max(),
                   np.abs(P.sum(axis=0) - b).max())
    pi = np.zeros((space.n, space.n))
    pi[np.ix_(rows, cols)] = P
    cost = _plan_cost(pi, space.sq_dist)
    coupling = Coupling(mu, nu, pi, cost,
                        marginal_tol=max(MARGINAL_TOL, 2.0 * achieved))
    return cost, coupling, converged


def _lse(logs):
    """Row-wise log-sum-exp that tolerates all--inf rows."""
    m = logs.max(axis=1)
    safe = np.isfinite(m)
    out = np.full(logs.shape[0], -np.inf)
    if safe.any():
        shifted = logs[safe] - m[safe, None]
        out[safe] = m[safe] + np.log(np.exp(shifted).sum(axis=1))
    return out


@dataclass
class MongeResult:
    is_map: bool
    mapping: dict
    offenders: list = field(default_factory=list)

    def as_dict(self):
        return {
            "is_map": self.is_map,
            "map": {str(k): v for k, v in sorted(self.mapping.items())},
            "offending_rows": [
                {"row": r, "splits": [[j, m] for j, m in s]}
                for r, s in self.offenders
            ],
        }


def extract_monge(coupling: Coupling, tol: float = 1e-9) -> MongeResult:
    """Check whether a coupling is induced by a map.

    A source atom is "mapped" when a single column carries at least
    ``(1 - tol)`` of its row mass; the result lists the induced map on mapped
    rows and the mass splits of the offending rows.
    """
    pi = coupling.pi
    row_mass = pi.sum(axis=1)
    mapping = {}
    offenders = []
    for i in np.nonzero(row_mass > 0)[0]:
        j = int(np.argmax(pi[i]))
        if pi[i, j] >= (1.0 - tol) * row_mass[i]:
            mapping[int(i)] = j
        else:
            splits = [(int(k), float(pi[i, k]))
                      for k in np.nonzero(pi[i] > 0)[0]]
            offenders.append((int(i), splits))
    return MongeResult(is_map=not offenders, mapping=mapping,
                       offenders=offenders)
