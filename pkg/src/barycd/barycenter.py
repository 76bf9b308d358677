"""Wasserstein barycenters via two cross-validating routes.

The barycenter of a finite mixture ``Omega = sum_i lambda_i delta_{mu_i}``
minimizes ``F(nu) = sum_i lambda_i W2^2(mu_i, nu)`` over probability measures
on the space's own point set (on a finite space these exhaust all candidates).

Route 1 (``barycenter_lp``): a single joint LP over couplings pi^i sharing a
free target marginal nu.  Route 2 (``solve_mmot`` + ``barycenter_from_mmot``):
solve the multi-marginal problem with the barycentric tuple cost
``c(x_1..x_n) = min_y sum_i lambda_i d^2(x_i, y)`` and push the optimal plan
forward through the deterministic argmin selection.  The two optima agree on
every finite-variance mixture, and ``superposition_check`` certifies that an
optimal plan only charges tuples whose selected point is a true pointwise
barycenter.

The LP optimum can be a face rather than a point; ``mode="min-entropy"``
descends the relative entropy over that face by conditional-gradient steps,
which is the barycenter the existential curvature conditions quantify over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._linprog import solve_lp
from .errors import (AllInfinite, BadParams, Infeasible, MissingPlan,
                     SolverFailure, SpaceMismatch, TooLarge)
from .measures import (DiscreteMeasure, Mixture, _require_same_space,
                       relative_entropy)
from .reports import CertificationReport
from .space import WeightedPointSet, point_barycenter
from .transport import Coupling, w2_exact

DEFAULT_TUPLE_CAP = 200_000


def _check_space(space, *others):
    for other in others:
        if not space.same_space(other):
            raise SpaceMismatch("operands live on different spaces")
# Both routes must land on the same optimum within this bound.
OBJECTIVE_TOL = 1e-7
# Entropy descent stays on the optimal face up to this objective slack.
FACE_PIN_SLACK = 1e-9
MAX_ENTROPY_STEPS = 200
MARGINAL_TOL = 1e-9


# ---------------------------------------------------------------------------
# Tuple cost kernel
# ---------------------------------------------------------------------------

def tuple_costs(space, coeffs, supports, cap=DEFAULT_TUPLE_CAP,
                argmin_tol=None):
    """Barycentric cost of every tuple in the product of the given supports.

    ``coeffs`` are arbitrary positive per-marginal coefficients (not
    necessarily normalized).  Tuples are enumerated in C order (last support
    varies fastest).  Returns ``(costs, argmins)``; when ``argmin_tol`` is
    given, additionally returns a boolean membership mask over candidate
    points of the union of near-argmin sets.
    """
    sizes = [len(s) for s in supports]
    total = math.prod(sizes)
    if total > cap:
        raise TooLarge(f"{total} tuples exceed cap {cap}")
    M = space.n
    sq = space.sq_dist
    parts = [c * sq[np.asarray(s, dtype=int), :]
             for c, s in zip(coeffs, supports)]
    costs = np.empty(total)
    argmins = np.empty(total, dtype=int)
    members = np.zeros(M, dtype=bool) if argmin_tol is not None else None
    block = max(1, (1 << 22) // max(M, 1))
    for start in range(0, total, block):
        idx = np.arange(start, min(start + block, total))
        rem = idx.copy()
        acc = np.zeros((idx.size, M))
        for i in reversed(range(len(sizes))):
            digit = rem % sizes[i]
            rem //= sizes[i]
            acc += parts[i][digit]
        best = acc.min(axis=1)
        costs[idx] = best
        argmins[idx] = acc.argmin(axis=1)
        if members is not None:
            finite = np.isfinite(best)
            if finite.any():
                near = acc[finite] <= best[finite, None] + argmin_tol
                members |= near.any(axis=0)
    if members is not None:
        return costs, argmins, members
    return costs, argmins


def _decode_tuple(flat, sizes, supports):
    out = []
    for size, sup in zip(reversed(sizes), reversed(supports)):
        out.append(int(sup[flat % size]))
        flat //= size
    return tuple(reversed(out))


def mmot_cost(space, weights, tup):
    """Cost ``min_y sum_i lambda_i d^2(x_i, y)`` of one tuple, with its argmin.

    Repeated points in the tuple have their weights merged.  Returns
    ``(value, argmin_point)``; raises :class:`AllInfinite` if no candidate is
    finite.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or len(tup) != weights.size:
        raise BadParams("one weight per tuple coordinate required")
    if (weights <= 0).any() or abs(weights.sum() - 1.0) > 1e-12:
        raise BadParams("weights must be positive and sum to 1")
    merged = {}
    for x, lam in zip(tup, weights):
        merged[int(x)] = merged.get(int(x), 0.0) + float(lam)
    wps = WeightedPointSet(tuple(sorted(merged.items())))
    y, value = point_barycenter(space, wps)
    return value, y


# ---------------------------------------------------------------------------
# Multi-marginal optimal transport
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiCoupling:
    """Sparse joint measure over n-tuples with prescribed marginals."""

    marginals: tuple  # of DiscreteMeasure
    atoms: tuple      # of (tuple_of_point_indices, mass)
    cost: float

    def __post_init__(self):
        space = _require_same_space(*self.marginals)
        n = len(self.marginals)
        acc = np.zeros((n, space.n))
        for tup, mass in self.atoms:
            if len(tup) != n:
                raise BadParams("atom arity does not match marginal count")
            if mass <= 0:
                raise BadParams("atom masses must be positive")
            for i, x in enumerate(tup):
                acc[i, x] += mass
        for i, mu in enumerate(self.marginals):
            err = np.abs(acc[i] - mu.weights).max()
            if err > MARGINAL_TOL:
                raise BadParams(
                    f"marginal {i} off by {err:.3e} (> {MARGINAL_TOL:.1e})")
        object.__setattr__(self, "marginals", tuple(self.marginals))
        object.__setattr__(self, "atoms", tuple(
            (tuple(int(x) for x in tup), float(m)) for tup, m in self.atoms))

    @property
    def space(self):
        return self.marginals[0].space

    @property
    def n(self):
        return len(self.marginals)

    def triplets(self):
        return [[list(t), m] for t, m in self.atoms]


def solve_mmot(space, measures, weights, cap=DEFAULT_TUPLE_CAP) -> MultiCoupling:
    """Exact multi-marginal optimal transport plan for the barycentric cost.

    Variables are the tuples of the support product; infinite-cost tuples are
    excluded up front, and the LP reports :class:`Infeasible` if that leaves
    the marginal constraints unsatisfiable.  The returned plan is a
    deterministic vertex of the coupling polytope.
    """
    weights = np.asarray(weights, dtype=float)
    if len(measures) < 1:
        raise BadParams("need at least one marginal")
    if weights.shape != (len(measures),):
        raise BadParams("one weight per marginal required")
    if (weights <= 0).any() or abs(weights.sum() - 1.0) > 1e-12:
        raise BadParams("weights must be positive and sum to 1")
    _check_space(space, *[m.space for m in measures])
    supports = [m.support for m in measures]
    sizes = [len(s) for s in supports]
    costs, _ = tuple_costs(space, weights, supports, cap=cap)
    finite = np.isfinite(costs)
    if not finite.any():
        raise Infeasible("every tuple has infinite cost")
    var_flat = np.nonzero(finite)[0]
    nvar = var_flat.size
    strides = np.ones(len(sizes), dtype=np.int64)
    for i in range(len(sizes) - 2, -1, -1):
        strides[i] = strides[i + 1] * sizes[i + 1]
    rows, cols = [], []
    offset = 0
    b = []
    for i, (sup, mu) in enumerate(zip(supports, measures)):
        digits = (var_flat // strides[i]) % sizes[i]
        rows.append(offset + digits)
        cols.append(np.arange(nvar))
        b.append(mu.weights[sup])
        offset += sizes[i]
    A = sp.csr_matrix(
        (np.ones(nvar * len(sizes)), (np.concatenate(rows), np.concatenate(cols))),
        shape=(offset, nvar))
    _, x = solve_lp(costs[var_flat], A, np.concatenate(b))
    keep = x > 1e-12
    atoms = []
    for flat, mass in zip(var_flat[keep], x[keep]):
        atoms.append((_decode_tuple(int(flat), sizes, supports), float(mass)))
    cost = float(np.dot(x[keep], costs[var_flat[keep]]))
    return MultiCoupling(tuple(measures), tuple(atoms), cost)


# ---------------------------------------------------------------------------
# Barycenter solutions
# ---------------------------------------------------------------------------

@dataclass
class BarycenterSolution:
    """A barycenter with its objective and the plan(s) that produced it."""

    nu_bar: DiscreteMeasure
    objective: float
    per_component_w2: np.ndarray
    weights: np.ndarray
    route: str
    mode: str = "vertex"
    mmot_plan: MultiCoupling | None = None
    selection: dict | None = None
    couplings: list | None = None
    solver_objective: float | None = None

    def as_dict(self):
        out = {
            "nu_bar": [float(v) for v in self.nu_bar.weights],
            "objective": self.objective,
            "per_component_w2": [float(v) for v in self.per_component_w2],
            "weights": [float(v) for v in self.weights],
            "route": self.route,
            "mode": self.mode,
        }
        if self.mmot_plan is not None:
            out["mmot_plan"] = self.mmot_plan.triplets()
        if self.selection is not None:
            out["selection"] = [[list(t), y] for t, y in
                                sorted(self.selection.items())]
        if self.couplings is not None:
            out["couplings"] = [c.triplets() for c in self.couplings]
        return out


def _recompute_objective(mixture, nu_bar):
    w2s = []
    for mu in mixture.components:
        w2, _ = w2_exact(mu, nu_bar)
        w2s.append(w2)
    w2s = np.asarray(w2s)
    return float(np.dot(mixture.lambdas, w2s ** 2)), w2s


def barycenter_from_mmot(space, plan: MultiCoupling, weights) -> BarycenterSolution:
    """Push an optimal multi-marginal plan through the barycenter selection.

    Each atom's tuple is sent to its lowest-index pointwise barycenter; the
    resulting measure attains ``sum_i lambda_i W2^2(mu_i, nu)`` equal to the
    plan's cost.  That equality is recomputed with exact transport solves and
    asserted, not assumed.
    """
    weights = np.asarray(weights, dtype=float)
    selection = {}
    nu_w = np.zeros(space.n)
    for tup, mass in plan.atoms:
        _, y = mmot_cost(space, weights, tup)
        selection[tup] = y
        nu_w[y] += mass
    nu_bar = DiscreteMeasure.from_solver(space, nu_w)
    mixture = Mixture(weights, tuple(plan.marginals))
    objective, w2s = _recompute_objective(mixture, nu_bar)
    if abs(objective - plan.cost) > OBJECTIVE_TOL:
        raise SolverFailure(
            f"pushforward objective {objective:.12g} disagrees with plan cost "
            f"{plan.cost:.12g}")
    return BarycenterSolution(nu_bar, objective, w2s, weights,
                              route="mmot", mmot_plan=plan,
                              selection=selection,
                              solver_objective=plan.cost)


def _joint_lp_matrices(space, mixture):
    """Arc layout and constraint matrix of the shared-marginal LP.

    Variables: one block per component over (support atom, target point)
    arcs with finite squared distance, then the free marginal nu over all
    points.  Constraints: component row marginals, column-marginal
    consistency with nu, and sum(nu) = 1.
    """
    M = space.n
    sq = space.sq_dist
    blocks = []
    ncols = 0
    rows, cols, vals, b, c = [], [], [], [], []
    row_off = 0
    for lam, mu in zip(mixture.lambdas, mixture.components):
        sup = mu.support
        C = sq[np.ix_(sup, np.arange(M))]
        finite = np.isfinite(C)
        if (~finite.any(axis=1)).any():
            raise Infeasible("a support atom has no finite-cost arc")
        arc_r, arc_c = np.nonzero(finite)
        blocks.append((sup, arc_r, arc_c, ncols))
        # row marginals: sum_y pi(x, y) = mu(x)
        rows.append(row_off + arc_r)
        cols.append(ncols + np.arange(arc_r.size))
        vals.append(np.ones(arc_r.size))
        b.extend(mu.weights[sup])
        c.extend(lam * C[arc_r, arc_c])
        row_off += sup.size
        ncols += arc_r.size
    nu_off = ncols
    ncols += M
    c.extend([0.0] * M)
    # column marginals: sum_x pi^i(x, y) - nu(y) = 0 for every i, y
    for sup, arc_r, arc_c, off in blocks:
        rows.append(row_off + arc_c)
        cols.append(off + np.arange(arc_r.size))
        vals.append(np.ones(arc_r.size))
        rows.append(row_off + np.arange(M))
        cols.append(nu_off + np.arange(M))
        vals.append(-np.ones(M))
        b.extend([0.0] * M)
        row_off += M
    # total mass of nu
    rows.append(np.full(M, row_off))
    cols.append(nu_off + np.arange(M))
    vals.append(np.ones(M))
    b.append(1.0)
    row_off += 1
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(row_off, ncols))
    return A, np.asarray(b), np.asarray(c), blocks, nu_off


def _entropy_gradient(nu_w, ref_mass):
    w = np.maximum(nu_w, 1e-300)
    return np.log(w / ref_mass) + 1.0


def _entropy_on_segment_min(nu, v, ref_mass):
    """Exact line search for relative entropy on the segment nu -> v.

    The derivative is increasing (entropy is convex along linear paths), so
    its root is found by bisection on [0, 1].
    """
    d = v - nu

    def deriv(t):
        w = nu + t * d
        w = np.maximum(w, 0.0)
        active = np.abs(d) > 0
        wa = np.maximum(w[active], 1e-300)
        return float(np.dot(d[active], np.log(wa / ref_mass[active]) + 1.0))

    lo, hi = 0.0, 1.0
    if deriv(0.0) >= 0:
        return 0.0
    if deriv(1.0) <= 0:
        return 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if deriv(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _min_entropy_polish(space, A, b, c, x0, opt, nu_off):
    """Descend relative entropy over the LP-optimal face.

    Conditional-gradient iterations; each direction is a vertex of the face
    polytope (optimal objective pinned within ``FACE_PIN_SLACK``).
    """
    M = space.n
    A_ub = sp.csr_matrix(c[None, :])
    b_ub = np.array([opt + FACE_PIN_SLACK])
    x = x0.copy()
    for _ in range(MAX_ENTROPY_STEPS):
        grad_nu = _entropy_gradient(x[nu_off:nu_off + M], space.ref_mass)
        direction_cost = np.zeros_like(c)
        direction_cost[nu_off:nu_off + M] = grad_nu
        _, v = solve_lp(direction_cost, A, b, A_ub=A_ub, b_ub=b_ub)
        gap = float(np.dot(grad_nu, x[nu_off:nu_off + M] - v[nu_off:nu_off + M]))
        if gap <= 1e-11:
            break
        t = _entropy_on_segment_min(x[nu_off:nu_off + M],
                                    v[nu_off:nu_off + M], space.ref_mass)
        if t <= 0.0:
            break
        x = (1.0 - t) * x + t * v
    return x


def barycenter_lp(space, omega: Mixture, mode: str = "vertex") -> BarycenterSolution:
    """Solve the barycenter problem as one joint LP with a free marginal.

    ``mode="vertex"`` returns the deterministic vertex optimum;
    ``mode="min-entropy"`` additionally minimizes relative entropy over the
    optimal face (the barycenter the existential certifiers quantify over).
    The recomputed objective ``sum_i lambda_i W2^2(mu_i, nu)`` is asserted to
    match the LP optimum.
    """
    if mode not in ("vertex", "min-entropy"):
        raise BadParams(f"unknown mode {mode!r}")
    _check_space(space, omega.space)
    A, b, c, blocks, nu_off = _joint_lp_matrices(space, omega)
    opt, x = solve_lp(c, A, b)
    if mode == "min-entropy":
        x = _min_entropy_polish(space, A, b, c, x, opt, nu_off)
    M = space.n
    nu_bar = DiscreteMeasure.from_solver(space, x[nu_off:nu_off + M])
    couplings = []
    for (sup, arc_r, arc_c, off), mu in zip(blocks, omega.components):
        pi = np.zeros((M, M))
        pi[sup[arc_r], arc_c] = x[off:off + arc_r.size]
        cost = float(np.dot(x[off:off + arc_r.size],
                            space.sq_dist[sup[arc_r], arc_c]))
        couplings.append(Coupling(mu, nu_bar, pi, cost,
                                  marginal_tol=1e-7))
    objective, w2s = _recompute_objective(omega, nu_bar)
    if abs(objective - opt) > OBJECTIVE_TOL:
        raise SolverFailure(
            f"recomputed objective {objective:.12g} disagrees with LP optimum "
            f"{opt:.12g}")
    return BarycenterSolution(nu_bar, objective, w2s, omega.lambdas.copy(),
                              route="lp", mode=mode, couplings=couplings,
                              solver_objective=opt)


def mixture_variance(space, omega: Mixture) -> float:
    """``Var(Omega) = min_nu sum_i lambda_i W2^2(mu_i, nu)``; inf if infeasible."""
    try:
        return barycenter_lp(space, omega).objective
    except Infeasible:
        return float("inf")


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def _joint_atoms_from_couplings(solution, cap=DEFAULT_TUPLE_CAP):
    """Reconstruct a joint plan by disintegrating the couplings over nu atoms.

    For each target atom y the conditional sources eta_i(. | y) are glued as a
    product, giving atoms ((x_1..x_n), y, mass).  On flat faces this plan is
    one valid choice among several; the check reports the plan it actually
    examined.
    """
    nu = solution.nu_bar.weights
    conds = []
    for coupling in solution.couplings:
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.where(nu[None, :] > 0, coupling.pi / nu[None, :], 0.0)
        conds.append(cond)
    atoms = []
    total = 0
    for y in np.nonzero(nu > 0)[0]:
        sups = [np.nonzero(cond[:, y] > 1e-14)[0] for cond in conds]
        count = math.prod(len(s) for s in sups)
        total += count
        if total > cap:
            raise TooLarge("joint plan reconstruction exceeds tuple cap")
        grids = np.meshgrid(*sups, indexing="ij")
        flat = [g.ravel() for g in grids]
        probs = np.ones(flat[0].size)
        for i, cond in enumerate(conds):
            probs = probs * cond[flat[i], y]
        for k in range(flat[0].size):
            m = float(nu[y] * probs[k])
            if m > 1e-15:
                atoms.append((tuple(int(f[k]) for f in flat), int(y), m))
    return atoms


def superposition_check(space, omega: Mixture, solution: BarycenterSolution,
                        tolerance: float = 1e-8,
                        cap=DEFAULT_TUPLE_CAP) -> CertificationReport:
    """Certify that the plan only charges barycentric tuples.

    For each atom ``((x_1..x_n), y, mass)`` the defect is
    ``sum_i lambda_i d^2(x_i, y) - min_z sum_i lambda_i d^2(x_i, z)``; the
    check passes iff the mass-weighted total defect is within tolerance.
    """
    lam = omega.lambdas
    sq = space.sq_dist
    if solution.mmot_plan is not None and solution.selection is not None:
        atoms = [(tup, solution.selection[tup], mass)
                 for tup, mass in solution.mmot_plan.atoms]
    elif solution.couplings is not None:
        atoms = _joint_atoms_from_couplings(solution, cap=cap)
    else:
        raise MissingPlan("solution carries neither an mmot plan nor couplings")
    total = 0.0
    total_mass = 0.0
    witnesses = []
    for tup, y, mass in atoms:
        realized = float(sum(l * sq[x, y] for l, x in zip(lam, tup)))
        best, _ = mmot_cost(space, lam, tup)
        defect = realized - best
        total += mass * defect
        total_mass += mass
        if defect > tolerance:
            witnesses.append({"tuple": list(tup), "point": int(y),
                              "mass": mass, "defect": defect})
    return CertificationReport.from_sides(
        "superposition",
        {"route": solution.route, "mode": solution.mode},
        lhs=total, rhs=0.0, tolerance=tolerance,
        witnesses={"failing_atoms": witnesses,
                   "atom_count": len(atoms), "total_mass": total_mass},
        metadata={"plan_source": "mmot" if solution.mmot_plan is not None
                  else "lp-disintegration"})


def uniqueness_gap(space, omega: Mixture, nu1: DiscreteMeasure,
                   nu2: DiscreteMeasure):
    """Convexity gap of the barycenter objective at the midpoint blend.

    ``gap = (F(nu1) + F(nu2))/2 - F((nu1 + nu2)/2) >= 0``.  A strictly
    positive gap with both endpoints optimal refutes joint optimality (a
    uniqueness witness); a zero gap flags a flat optimal face.  Returns
    ``(gap, F(blend))``.
    """
    if nu1.same_as(nu2):
        raise BadParams("nu1 and nu2 must be distinct")

    def F(nu):
        val, _ = _recompute_objective(omega, nu)
        return val

    blend = DiscreteMeasure(space, 0.5 * (nu1.weights + nu2.weights))
    f_blend = F(blend)
    gap = 0.5 * F(nu1) + 0.5 * F(nu2) - f_blend
    return gap, f_blend
