"""Seeded random mixtures for curvature certification trials.

Components are normalized sub-uniform measures: a random support with
weights proportional to ``ref_mass * U(0,1)``, so densities against the
reference measure stay bounded.  Every stream is derived from
``(seed, trial)`` and is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams
from .measures import DiscreteMeasure, Mixture


@dataclass(frozen=True)
class SamplerConfig:
    trials: int = 100
    components: tuple = (2, 3)
    support_size: tuple = (1, 6)
    seed: int = 0

    def __post_init__(self):
        if self.trials < 0:
            raise BadParams("trials must be nonnegative")
        lo, hi = self.components
        if not (1 <= lo <= hi):
            raise BadParams("bad component-count range")
        lo, hi = self.support_size
        if not (1 <= lo <= hi):
            raise BadParams("bad support-size range")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def sample_measure(space, rng, support_size) -> DiscreteMeasure:
    lo, hi = support_size
    hi = min(hi, space.n)
    lo = min(lo, hi)
    size = int(rng.integers(lo, hi + 1))
    support = np.sort(rng.choice(space.n, size=size, replace=False))
    u = rng.uniform(0.0, 1.0, size=size)
    w = space.ref_mass[support] * u
    if w.sum() <= 0:
        w = space.ref_mass[support].astype(float)
    weights = np.zeros(space.n)
    weights[support] = w / w.sum()
    return DiscreteMeasure(space, weights)


def sample_mixture(space, config: SamplerConfig, trial: int) -> Mixture:
    rng = trial_rng(config.seed, trial)
    lo, hi = config.components
    ncomp = int(rng.integers(lo, hi + 1))
    lambdas = rng.dirichlet(np.ones(ncomp))
    comps = tuple(sample_measure(space, rng, config.support_size)
                  for _ in range(ncomp))
    return Mixture(lambdas, comps)


def diameter_probe(space) -> Mixture | None:
    """Two Diracs at a maximal finite-distance pair, equal weights.

    The classic extremal instance for entropy convexity checks; None when the
    space has no finite off-diagonal distance.
    """
    d = np.where(np.isfinite(space.dist), space.dist, -np.inf)
    np.fill_diagonal(d, -np.inf)
    if not np.isfinite(d).any():
        return None
    i, j = np.unravel_index(int(np.argmax(d)), d.shape)
    if d[i, j] <= 0:
        return None
    return Mixture(np.array([0.5, 0.5]),
                   (DiscreteMeasure.dirac(space, int(i)),
                    DiscreteMeasure.dirac(space, int(j))))
