"""Probability measures on a space and their entropy functionals.

Relative entropy is ``sum_i w_i ln(w_i / m_i)`` with the convention
``0 ln 0 = 0`` (natural log).  On a finite space with full-support reference
mass every measure is absolutely continuous, so the infinite-entropy branch
of the idealized definition can only be requested explicitly via the
``non_ac`` sentinel flag; certifier formulas then degrade as expected
(``u_n -> 0``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, SpaceMismatch
from .space import MetricMeasureSpace

WEIGHT_SUM_TOL = 1e-10
# Weights below this underflow threshold are treated as exact zeros in
# entropy sums (0 ln 0 = 0).
ENTROPY_FLOOR = 1e-300


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability weight vector over a space's points.

    Validated on construction; never silently renormalized.  ``non_ac`` marks
    the idealized non-absolutely-continuous sentinel (entropy ``+inf``).
    """

    space: MetricMeasureSpace
    weights: np.ndarray
    non_ac: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.space.n,):
            raise BadParams("weight vector length must match point count")
        if np.isnan(w).any():
            raise BadParams("NaN weights are not allowed")
        if (w < 0).any():
            raise BadParams("weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise BadParams(f"weights sum to {w.sum():.17g}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, space, i: int) -> "DiscreteMeasure":
        w = np.zeros(space.n)
        w[i] = 1.0
        return cls(space, w)

    @classmethod
    def uniform_on(cls, space, indices) -> "DiscreteMeasure":
        idx = np.asarray(indices, dtype=int)
        if idx.size == 0:
            raise BadParams("uniform measure needs a nonempty index set")
        w = np.zeros(space.n)
        w[idx] = 1.0 / idx.size
        return cls(space, w)

    @classmethod
    def from_ref(cls, space) -> "DiscreteMeasure":
        """The reference measure, normalized to a probability."""
        return cls(space, space.ref_mass / space.ref_mass.sum())

    @classmethod
    def from_solver(cls, space, w, tol=1e-8) -> "DiscreteMeasure":
        """Construct from LP output: clip solver noise, renormalize explicitly.

        Entries below ``-tol`` or a total off by more than ``tol`` indicate a
        solver bug and raise instead of being patched over.
        """
        w = np.asarray(w, dtype=float)
        if (w < -tol).any():
            raise BadParams("solver weights have a significantly negative entry")
        w = np.maximum(w, 0.0)
        s = w.sum()
        if abs(s - 1.0) > tol:
            raise BadParams(f"solver weights sum to {s:.17g}")
        return cls(space, w / s)

    @property
    def support(self):
        return np.nonzero(self.weights > 0)[0]

    def same_as(self, other: "DiscreteMeasure") -> bool:
        return self.space.same_space(other.space) and np.array_equal(
            self.weights, other.weights)


def _require_same_space(*measures):
    base = measures[0].space
    for mu in measures[1:]:
        if not base.same_space(mu.space):
            raise SpaceMismatch("measures live on different spaces")
    return base


def variance(mu: DiscreteMeasure):
    """``min_x sum_z mu(z) d^2(x, z)`` and its argmin (lowest index on ties).

    The value may be ``inf`` when the support spans disjoint components.
    """
    sup = mu.support
    obj = mu.space.sq_dist[:, sup] @ mu.weights[sup]
    k = int(np.argmin(obj))
    return float(obj[k]), k


def relative_entropy(mu: DiscreteMeasure) -> float:
    """``sum_i w_i ln(w_i / m_i)`` with 0 ln 0 = 0; ``inf`` for the sentinel."""
    if mu.non_ac:
        return float("inf")
    w = mu.weights
    m = mu.space.ref_mass
    sup = w > ENTROPY_FLOOR
    return float(np.sum(w[sup] * np.log(w[sup] / m[sup])))


def renyi_entropy(mu: DiscreteMeasure, N: float) -> float:
    """``sum_i w_i^(1 - 1/N) m_i^(1/N)`` restricted to the support of mu."""
    if N < 1:
        raise BadParams("renyi_entropy needs N >= 1")
    if mu.non_ac:
        return float("inf")
    w = mu.weights
    m = mu.space.ref_mass
    sup = w > ENTROPY_FLOOR
    return float(np.sum(w[sup] ** (1.0 - 1.0 / N) * m[sup] ** (1.0 / N)))


def u_n(mu: DiscreteMeasure, N: float) -> float:
    """``exp(-relative_entropy(mu) / N)``; 0 when the entropy is infinite."""
    if N <= 0:
        raise BadParams("u_n needs N > 0")
    ent = relative_entropy(mu)
    if np.isinf(ent):
        return 0.0
    return float(np.exp(-ent / N))


def pushforward(mu: DiscreteMeasure, phi) -> DiscreteMeasure:
    """Image measure ``(phi_# mu)(y) = sum_{x: phi(x) = y} mu(x)``."""
    phi = np.asarray(phi, dtype=int)
    n = mu.space.n
    if phi.shape != (n,):
        raise BadParams("phi must map every point")
    if (phi < 0).any() or (phi >= n).any():
        raise BadParams("phi has out-of-range values")
    w = np.bincount(phi, weights=mu.weights, minlength=n)
    return DiscreteMeasure(mu.space, w)


@dataclass(frozen=True)
class Mixture:
    """Finitely supported measure on measures: ``Omega = sum_i lambda_i delta_{mu_i}``."""

    lambdas: np.ndarray
    components: tuple  # of DiscreteMeasure

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size != len(self.components):
            raise BadParams("one weight per component required")
        if lam.size < 1:
            raise BadParams("mixture needs at least one component")
        if (lam <= 0).any():
            raise BadParams("mixture weights must be strictly positive")
        if abs(lam.sum() - 1.0) > 1e-12:
            raise BadParams(f"mixture weights sum to {lam.sum():.17g}")
        _require_same_space(*self.components)
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def space(self):
        return self.components[0].space

    @property
    def n_components(self):
        return len(self.components)

    @classmethod
    def of(cls, pairs) -> "Mixture":
        lam = [l for l, _ in pairs]
        mus = [m for _, m in pairs]
        return cls(np.asarray(lam, dtype=float), tuple(mus))
