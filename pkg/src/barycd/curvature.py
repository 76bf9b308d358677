"""Jensen-type inequality certifiers and barycentric curvature bounds.

The entropy form (``wji_certify``) checks, for a mixture with barycenter
``nu``:

    Ent(nu) <= sum_i lambda_i Ent(mu_i) - (K/2) sum_i lambda_i W2^2(nu, mu_i)

and the dimensional form (``dimensional_jensen_certify``) checks

    sum_i lambda_i [theta_i / gsin(K/N, theta_i)] u_N(mu_i)
        <= u_N(nu) sum_i lambda_i [theta_i / gtan(K/N, theta_i)]

with ``theta_i = W2(nu, mu_i)``.  A space satisfies the curvature bound when
SOME barycenter of every finite mixture passes; certifiers therefore search
the optimal face with the min-entropy mode before declaring failure, since a
vertex barycenter can spuriously violate the inequality on a flat face.

``bcd_certify`` samples seeded random mixtures and fails on the first
violated instance; a pass is evidence, not proof, and the report says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .barycenter import barycenter_lp
from .distortion import (ratio_theta_over_gsin, ratio_theta_over_gtan)
from .errors import BadBracket, BadParams, Infeasible
from .measures import DiscreteMeasure, Mixture, relative_entropy, u_n
from .reports import CertificationReport
from .sampling import SamplerConfig, diameter_probe, sample_mixture
from .transport import w2_exact

EXACT_TOL = 1e-8


@dataclass(frozen=True)
class CurvatureParams:
    """Curvature lower bound K and dimension upper bound N (N >= 1 or inf)."""

    K: float
    N: float = math.inf

    def __post_init__(self):
        if not (self.N >= 1):
            raise BadParams("N must be >= 1 or inf")

    def as_dict(self):
        return {"K": self.K, "N": "inf" if math.isinf(self.N) else self.N}


def _witnesses(omega, solution, entropies):
    return {
        "barycenter": [float(v) for v in solution.nu_bar.weights],
        "barycenter_entropy": relative_entropy(solution.nu_bar),
        "components": [
            {"lambda": float(l), "w2": float(w), "entropy": float(e),
             "weights": [float(v) for v in mu.weights]}
            for l, w, e, mu in zip(omega.lambdas, solution.per_component_w2,
                                   entropies, omega.components)
        ],
        "variance": float(np.dot(omega.lambdas,
                                 solution.per_component_w2 ** 2)),
        "mode": solution.mode,
    }


def wji_certify(space, omega: Mixture, K: float, mode: str = "min-entropy",
                tolerance: float = EXACT_TOL) -> CertificationReport:
    """Entropy Jensen inequality at curvature K for one mixture instance."""
    params = {"K": K, "N": "inf", "mode": mode}
    try:
        solution = barycenter_lp(space, omega, mode=mode)
    except Infeasible:
        return CertificationReport.special(
            "wji", params, "vacuous", tolerance,
            metadata={"reason": "infinite variance: no finite-cost barycenter"})
    entropies = np.array([relative_entropy(mu) for mu in omega.components])
    variance = float(np.dot(omega.lambdas, solution.per_component_w2 ** 2))
    lhs = relative_entropy(solution.nu_bar)
    rhs = float(np.dot(omega.lambdas, entropies)) - 0.5 * K * variance
    return CertificationReport.from_sides(
        "wji", params, lhs, rhs, tolerance,
        witnesses=_witnesses(omega, solution, entropies))


def dimensional_jensen_certify(space, omega: Mixture, K: float, N: float,
                               mode: str = "min-entropy",
                               tolerance: float = EXACT_TOL) -> CertificationReport:
    """Dimensional Jensen inequality at (K, N) for one mixture instance.

    For K > 0 every component must stay below the tangent pole
    ``W2(nu, mu_i) < pi / (2 sqrt(K/N))``; otherwise the instance is reported
    as degenerate (the distortion coefficients are infinite and the
    inequality is vacuous there).
    """
    if not (1 <= N < math.inf):
        raise BadParams("dimensional certifier needs N in [1, inf)")
    params = {"K": K, "N": N, "mode": mode}
    try:
        solution = barycenter_lp(space, omega, mode=mode)
    except Infeasible:
        return CertificationReport.special(
            "dimensional-jensen", params, "vacuous", tolerance,
            metadata={"reason": "infinite variance: no finite-cost barycenter"})
    kappa = K / N
    thetas = solution.per_component_w2
    if K > 0:
        pole = math.pi / (2.0 * math.sqrt(kappa))
        if (thetas >= pole).any():
            return CertificationReport.special(
                "dimensional-jensen", params, "degenerate", tolerance,
                witnesses={"thetas": [float(t) for t in thetas],
                           "pole": pole},
                metadata={"reason": "component beyond the tangent pole"})
    entropies = np.array([relative_entropy(mu) for mu in omega.components])
    u_comp = np.array([u_n(mu, N) for mu in omega.components])
    lhs = float(sum(l * ratio_theta_over_gsin(kappa, th) * u
                    for l, th, u in zip(omega.lambdas, thetas, u_comp)))
    rhs = float(u_n(solution.nu_bar, N) *
                sum(l * ratio_theta_over_gtan(kappa, th)
                    for l, th in zip(omega.lambdas, thetas)))
    return CertificationReport.from_sides(
        "dimensional-jensen", params, lhs, rhs, tolerance,
        witnesses=_witnesses(omega, solution, entropies))


def certify_instance(space, omega: Mixture, params: CurvatureParams,
                     mode: str = "min-entropy",
                     tolerance: float = EXACT_TOL) -> CertificationReport:
    """Route one mixture to the entropy or dimensional certifier by N."""
    if math.isinf(params.N):
        return wji_certify(space, omega, params.K, mode=mode,
                           tolerance=tolerance)
    return dimensional_jensen_certify(space, omega, params.K, params.N,
                                      mode=mode, tolerance=tolerance)


def bcd_certify(space, params: CurvatureParams,
                config: SamplerConfig | None = None,
                tolerance: float = EXACT_TOL):
    """Search for violations of the barycentric curvature condition.

    Runs a deterministic diameter probe (two Diracs at a farthest finite
    pair) followed by ``config.trials`` seeded random mixtures, all in
    min-entropy mode.  Returns ``(verdict, report)`` where the report is the
    first violated instance, or else the minimum-slack passing instance.
    A pass is evidence over the sampled instances, not a proof.
    """
    config = config or SamplerConfig()
    instances = []
    probe = diameter_probe(space)
    if probe is not None:
        instances.append(("probe:diameter-diracs", probe))
    for trial in range(config.trials):
        instances.append((f"trial:{trial}", sample_mixture(space, config, trial)))
    worst = None
    degenerate = vacuous = 0
    checked = 0
    for name, omega in instances:
        report = certify_instance(space, omega, params,
                                  mode="min-entropy", tolerance=tolerance)
        report.metadata["instance"] = name
        if report.verdict == "degenerate":
            degenerate += 1
            continue
        if report.verdict == "vacuous":
            vacuous += 1
            continue
        checked += 1
        if report.failed:
            report.metadata.update(_evidence_meta(config, checked, degenerate,
                                                  vacuous))
            return False, report
        if worst is None or report.slack < worst.slack:
            worst = report
    if worst is None:
        worst = CertificationReport.special(
            "bcd", {**params.as_dict(), "mode": "min-entropy"}, "pass",
            tolerance, metadata={"reason": "all instances vacuous/degenerate"})
    worst.metadata.update(_evidence_meta(config, checked, degenerate, vacuous))
    return True, worst


def _evidence_meta(config, checked, degenerate, vacuous):
    return {
        "seed": config.seed,
        "trials": config.trials,
        "instances_checked": checked,
        "degenerate_instances": degenerate,
        "vacuous_instances": vacuous,
        "note": "sampled evidence, not a proof",
    }


def best_k(space, N: float, config: SamplerConfig, lo: float, hi: float,
           iters: int = 20, tolerance: float = EXACT_TOL) -> float:
    """Largest certified curvature bound by bisection on ``bcd_certify``.

    Requires a pass at ``lo`` and a failure at ``hi``; the result is within
    ``(hi - lo) / 2^iters`` of the empirical boundary.
    """
    if not lo < hi:
        raise BadBracket("need lo < hi")
    ok_lo, _ = bcd_certify(space, CurvatureParams(lo, N), config, tolerance)
    if not ok_lo:
        raise BadBracket(f"bcd_certify fails at K = {lo}")
    ok_hi, _ = bcd_certify(space, CurvatureParams(hi, N), config, tolerance)
    if ok_hi:
        raise BadBracket(f"bcd_certify passes at K = {hi}")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok, _ = bcd_certify(space, CurvatureParams(mid, N), config, tolerance)
        if ok:
            lo = mid
        else:
            hi = mid
    return lo


def cd_twopoint_certify(space, mu0: DiscreteMeasure, mu1: DiscreteMeasure,
                        t: float, K: float, mode: str = "min-entropy",
                        tolerance: float = EXACT_TOL) -> CertificationReport:
    """Entropy displacement convexity as the two-component mixture case.

    Certifies the Jensen inequality for ``Omega = (1-t) delta_{mu0} +
    t delta_{mu1}`` using the realized variance
    ``(1-t) W2^2(nu, mu0) + t W2^2(nu, mu1)``; the geodesic coefficient
    ``(1-t) t W2^2(mu0, mu1)`` is reported alongside for comparison (the two
    agree exactly when midpoint defects vanish).
    """
    if not 0.0 < t < 1.0:
        raise BadParams("t must lie in (0, 1)")
    omega = Mixture(np.array([1.0 - t, t]), (mu0, mu1))
    report = wji_certify(space, omega, K, mode=mode, tolerance=tolerance)
    report.inequality = "cd-twopoint"
    report.params["t"] = t
    if report.verdict in ("pass", "fail"):
        w2_ends, _ = w2_exact(mu0, mu1)
        report.witnesses["geodesic_coefficient"] = (1.0 - t) * t * w2_ends ** 2
        report.witnesses["t"] = t
    return report
