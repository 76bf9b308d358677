"""Curvature distortion coefficients.

The comparison functions ``gsin``/``gcos`` solve ``u'' + kappa u = 0`` with
sine/cosine initial data; they specialize to trigonometric, linear, and
hyperbolic branches by the sign of kappa.  From them the one-parameter
distortion families are assembled:

* ``sigma(K, N, t, theta)`` -- ``+inf`` when ``K theta^2 >= N pi^2``, ``t``
  when ``K theta^2 = 0``, and ``gsin(K/N, t theta) / gsin(K/N, theta)``
  otherwise;
* ``tau(K, N, t, theta) = t^(1/N) * sigma(K, N-1, t, theta)^((N-1)/N)`` with
  the exponent-zero convention ``tau = t`` at ``N = 1``.

For positive kappa the principal domain is ``theta < pi / sqrt(kappa)`` and
the tangent ratio additionally needs ``theta < pi / (2 sqrt(kappa))``; calls
at or beyond those bounds raise :class:`DomainError`, which certifiers
surface as a degenerate (vacuous) regime rather than a verdict.
"""

from __future__ import annotations

import math

from .errors import BadParams, DomainError

# Below this the ratios theta/gsin and theta/gtan take their limit value 1
# exactly; direct evaluation is used at and above it.
SMALL_THETA = 1e-8


def gsin(kappa: float, theta: float) -> float:
    """Generalized sine: sin / linear / sinh branch by the sign of kappa."""
    if theta < 0:
        raise BadParams("theta must be nonnegative")
    if kappa > 0:
        rt = math.sqrt(kappa)
        if theta >= math.pi / rt:
            raise DomainError(
                f"theta={theta:.6g} outside principal domain [0, pi/sqrt(kappa))")
        return math.sin(rt * theta) / rt
    if kappa == 0:
        return theta
    rt = math.sqrt(-kappa)
    return math.sinh(rt * theta) / rt


def gcos(kappa: float, theta: float) -> float:
    """Generalized cosine: cos / 1 / cosh branch by the sign of kappa."""
    if theta < 0:
        raise BadParams("theta must be nonnegative")
    if kappa > 0:
        return math.cos(math.sqrt(kappa) * theta)
    if kappa == 0:
        return 1.0
    return math.cosh(math.sqrt(-kappa) * theta)


def gtan(kappa: float, theta: float) -> float:
    """Generalized tangent ``gsin / gcos``; pole at ``pi / (2 sqrt(kappa))``."""
    if kappa > 0 and theta >= math.pi / (2 * math.sqrt(kappa)):
        raise DomainError(
            f"theta={theta:.6g} at or beyond the tangent pole "
            f"pi/(2 sqrt(kappa))")
    return gsin(kappa, theta) / gcos(kappa, theta)


def s_c_t(kappa: float, theta: float):
    """The triple ``(gsin, gcos, gtan)`` at (kappa, theta).

    Raises :class:`DomainError` if any of the three is outside its principal
    domain (for kappa > 0 that is the tangent pole, the tightest bound).
    """
    t = gtan(kappa, theta)
    return gsin(kappa, theta), gcos(kappa, theta), t


def sigma(K: float, N: float, t: float, theta: float) -> float:
    """Distortion coefficient ``sigma_{K,N}^{(t)}(theta)``; ``inf`` is a value."""
    if N < 1:
        raise BadParams("sigma needs N >= 1")
    if not 0.0 <= t <= 1.0:
        raise BadParams("t must lie in [0, 1]")
    if theta < 0:
        raise BadParams("theta must be nonnegative")
    if K * theta * theta >= N * math.pi * math.pi:
        return math.inf
    if K * theta * theta == 0.0:
        return float(t)
    kappa = K / N
    try:
        return gsin(kappa, t * theta) / gsin(kappa, theta)
    except DomainError:
        # sqrt(K/N) * theta rounded onto the boundary: the ratio diverges.
        return math.inf


def tau(K: float, N: float, t: float, theta: float) -> float:
    """Distortion coefficient ``tau_{K,N}^{(t)}(theta)``.

    ``tau = t`` exactly when N = 1 (the zero exponent annihilates the sigma
    factor) and when K = 0.
    """
    if N < 1:
        raise BadParams("tau needs N >= 1")
    if N == 1:
        if not 0.0 <= t <= 1.0:
            raise BadParams("t must lie in [0, 1]")
        return float(t)
    sig = sigma(K, N - 1, t, theta)
    if math.isinf(sig):
        return math.inf
    return t ** (1.0 / N) * sig ** ((N - 1.0) / N)


def ratio_theta_over_gsin(kappa: float, theta: float) -> float:
    """``theta / gsin(kappa, theta)`` with limit value 1 below SMALL_THETA."""
    if theta < 0:
        raise BadParams("theta must be nonnegative")
    if theta < SMALL_THETA:
        return 1.0
    return theta / gsin(kappa, theta)


def ratio_theta_over_gtan(kappa: float, theta: float) -> float:
    """``theta / gtan(kappa, theta)`` with limit value 1 below SMALL_THETA."""
    if theta < 0:
        raise BadParams("theta must be nonnegative")
    if theta < SMALL_THETA:
        return 1.0
    return theta / gtan(kappa, theta)
