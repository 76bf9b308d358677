"""Thin deterministic wrapper around scipy's HiGHS LP backend.

All exact solvers in this package go through :func:`solve_lp`.  The dual
simplex method is pinned so repeated calls on identical inputs return the
identical basic (vertex) solution, and feasibility tolerances are tightened
well below the 1e-9 marginal tolerances the callers promise.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .errors import Infeasible, SolverFailure

# 1e-10 is the tightest tolerance the backend accepts.
_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def solve_lp(c, A_eq, b_eq, A_ub=None, b_ub=None):
    """Minimize ``c @ x`` over ``A_eq x = b_eq`` (and optional ``A_ub x <= b_ub``), x >= 0.

    Returns ``(objective, x)``; raises :class:`Infeasible` on status 2 and
    :class:`SolverFailure` on any other non-optimal status.  Tiny negative
    entries from the solver are clipped to zero.
    """
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub,
                  bounds=(0, None), method="highs-ds", options=_OPTIONS)
    if res.status == 2:
        raise Infeasible(res.message)
    if res.status != 0:
        raise SolverFailure(f"LP status {res.status}: {res.message}")
    x = np.asarray(res.x, dtype=float)
    if (x < -1e-9).any():
        raise SolverFailure("LP returned a significantly negative variable")
    np.maximum(x, 0.0, out=x)
    return float(res.fun), x
