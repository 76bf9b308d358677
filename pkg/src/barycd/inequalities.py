"""Set-level and functional consequences of barycentric curvature bounds.

* Multi-marginal Brunn-Minkowski:  m(E) >= (sum_i lambda_i m(E_i)^(1/N))^N,
  where E collects the pointwise barycenters of all tuples from E_1 x...x E_n.
* Its logarithmic form:  m(E) >= prod_i m(E_i)^(lambda_i).
* A functional polar-duality bound:  prod_i integral(e^{f_i}) dm <= 1 for
  admissible families, i.e. those with
  sum_i f_i(x_i) <= (1/2) min_x sum_i d^2(x, x_i) on every tuple.

Unlike the tie-broken selection used by the solvers, the barycenter SET
keeps every minimizer within a 1e-12 window: the set in the inequalities is
defined by the barycenter relation, and dropping ties would undercount E and
could produce false failures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barycenter import DEFAULT_TUPLE_CAP, tuple_costs
from .errors import BadParams, NotProbability, TooLarge
from .reports import CertificationReport
from .space import MetricMeasureSpace

ARGMIN_TIE_TOL = 1e-12
HYPOTHESIS_TOL = 1e-12
EXACT_TOL = 1e-8


@dataclass(frozen=True)
class PointSet:
    """Nonempty sorted set of point indices with positive reference mass."""

    space: MetricMeasureSpace
    indices: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=int))
        if idx.size == 0:
            raise BadParams("point set must be nonempty")
        if idx[0] < 0 or idx[-1] >= self.space.n:
            raise BadParams("point index out of range")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def mass(self) -> float:
        return float(self.space.ref_mass[self.indices].sum())

    def __len__(self):
        return int(self.indices.size)


def _check_weights(weights, n):
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise BadParams("one weight per set required")
    if (w <= 0).any() or abs(w.sum() - 1.0) > 1e-12:
        raise BadParams("weights must be positive and sum to 1")
    return w


def barycenter_set(space, sets, weights, cap=DEFAULT_TUPLE_CAP):
    """All pointwise barycenters of tuples from the product of the sets.

    Every minimizer within ``ARGMIN_TIE_TOL`` of a tuple's optimum is
    included.  Tuples with all-infinite objective are skipped; their count is
    returned alongside.  Returns ``(PointSet, skipped_tuples)``.
    """
    if len(sets) == 0:
        raise BadParams("need at least one set")
    w = _check_weights(weights, len(sets))
    supports = [np.asarray(s.indices if isinstance(s, PointSet) else s,
                           dtype=int) for s in sets]
    costs, _, members = tuple_costs(space, w, supports, cap=cap,
                                    argmin_tol=ARGMIN_TIE_TOL)
    skipped = int(np.sum(~np.isfinite(costs)))
    if not members.any():
        raise BadParams("every tuple has infinite objective")
    return PointSet(space, np.nonzero(members)[0]), skipped


def bm_check(space, sets, weights, N: float,
             tolerance: float = EXACT_TOL,
             cap=DEFAULT_TUPLE_CAP) -> CertificationReport:
    """Multi-marginal Brunn-Minkowski check at dimension N."""
    if N < 1:
        raise BadParams("bm_check needs N >= 1")
    w = _check_weights(weights, len(sets))
    sets = [s if isinstance(s, PointSet) else PointSet(space, s) for s in sets]
    bary, skipped = barycenter_set(space, sets, w, cap=cap)
    masses = np.array([s.mass for s in sets])
    lhs = float(np.dot(w, masses ** (1.0 / N)) ** N)
    rhs = bary.mass
    return CertificationReport.from_sides(
        "brunn-minkowski", {"N": N, "weights": [float(v) for v in w]},
        lhs, rhs, tolerance,
        witnesses={"barycenter_set": [int(i) for i in bary.indices],
                   "set_masses": [float(m) for m in masses],
                   "barycenter_mass": rhs,
                   "skipped_tuples": skipped})


def log_bm_check(space, sets, weights, tolerance: float = EXACT_TOL,
                 cap=DEFAULT_TUPLE_CAP) -> CertificationReport:
    """Multi-marginal logarithmic Brunn-Minkowski check."""
    w = _check_weights(weights, len(sets))
    sets = [s if isinstance(s, PointSet) else PointSet(space, s) for s in sets]
    bary, skipped = barycenter_set(space, sets, w, cap=cap)
    masses = np.array([s.mass for s in sets])
    lhs = float(np.prod(masses ** w))
    rhs = bary.mass
    return CertificationReport.from_sides(
        "log-brunn-minkowski", {"weights": [float(v) for v in w]},
        lhs, rhs, tolerance,
        witnesses={"barycenter_set": [int(i) for i in bary.indices],
                   "set_masses": [float(m) for m in masses],
                   "barycenter_mass": rhs,
                   "skipped_tuples": skipped})


def _function_support(f):
    f = np.asarray(f, dtype=float)
    if np.isnan(f).any() or np.isposinf(f).any():
        raise BadParams("function values must be reals or -inf")
    sup = np.nonzero(np.isfinite(f))[0]
    if sup.size == 0:
        raise BadParams("function is -inf everywhere")
    return f, sup


def bs_hypothesis_defect(space, functions, cap=DEFAULT_TUPLE_CAP):
    """Worst violation of the half-cost admissibility constraint.

    ``defect = max over tuples [sum_i f_i(x_i) - (1/2) min_x sum_i d^2(x, x_i)]``;
    the family is admissible iff the defect is <= 0 (within 1e-12).  Returns
    ``(defect, witness_tuple)``.
    """
    if len(functions) < 1:
        raise BadParams("need at least one function")
    fs, sups = zip(*(_function_support(f) for f in functions))
    coeffs = np.ones(len(functions))
    costs, _ = tuple_costs(space, coeffs, sups, cap=cap)
    sizes = [len(s) for s in sups]
    # f-sum over tuples, same C-order enumeration as the cost kernel
    fsum = np.zeros(1)
    for f, sup in zip(fs, sups):
        fsum = (fsum[:, None] + f[sup][None, :]).ravel()
    vals = fsum - 0.5 * costs
    k = int(np.argmax(vals))
    witness = []
    rem = k
    for size, sup in zip(reversed(sizes), reversed(sups)):
        witness.append(int(sup[rem % size]))
        rem //= size
    return float(vals[k]), tuple(reversed(witness))


def bs_complete(space, functions, cap=DEFAULT_TUPLE_CAP):
    """Pointwise maximal completion of an admissible family.

    Given f_1..f_{k-1}, returns the largest f_k keeping the family
    admissible:

        f_k(y) = min over tuples of
                 [(1/2) min_x (sum_i d^2(x, x_i) + d^2(x, y)) - sum_i f_i(x_i)]
    """
    sq = space.sq_dist
    M = space.n
    if len(functions) == 0:
        # min_x d^2(x, y) = 0 at x = y
        return np.zeros(M)
    fs, sups = zip(*(_function_support(f) for f in functions))
    sizes = [len(s) for s in sups]
    total = int(np.prod(sizes))
    if total > cap:
        raise TooLarge("completion enumeration exceeds cap")
    out = np.full(M, np.inf)
    for flat in range(total):
        rem = flat
        base = np.zeros(M)
        fval = 0.0
        for size, sup, f in zip(reversed(sizes), reversed(sups), reversed(fs)):
            x = int(sup[rem % size])
            rem //= size
            base += sq[x, :]
            fval += f[x]
        # min over x of base(x) + d^2(x, y), for every y at once
        joint = (base[:, None] + sq).min(axis=0)
        np.minimum(out, 0.5 * joint - fval, out=out)
    if np.isneginf(out).any() or np.isnan(out).any():
        raise BadParams("completion is unbounded below")
    return out


def bs_check(space, functions, tolerance: float = EXACT_TOL,
             cap=DEFAULT_TUPLE_CAP) -> CertificationReport:
    """Functional polar-duality check: ``prod_i sum_x e^{f_i(x)} m_x <= 1``.

    Requires the reference measure to be a probability and the family to be
    admissible; an inadmissible family yields an "inadmissible" report with
    the witness tuple, not a verdict.
    """
    if abs(space.ref_mass.sum() - 1.0) > 1e-9:
        raise NotProbability("reference measure must sum to 1")
    defect, witness = bs_hypothesis_defect(space, functions, cap=cap)
    params = {"k": len(functions)}
    if defect > HYPOTHESIS_TOL:
        return CertificationReport.special(
            "blaschke-santalo", params, "inadmissible", tolerance,
            witnesses={"hypothesis_defect": defect,
                       "witness_tuple": list(witness)})
    integrals = []
    for f in functions:
        f = np.asarray(f, dtype=float)
        with np.errstate(over="ignore"):
            integrals.append(float(np.dot(np.exp(f), space.ref_mass)))
    lhs = float(np.prod(integrals))
    return CertificationReport.from_sides(
        "blaschke-santalo", params, lhs, 1.0, tolerance,
        witnesses={"integrals": integrals, "hypothesis_defect": defect})
