"""Explicit solutions and kernels, evaluable as oracles.

Four closed forms are provided:

  * singular_steady_state  S(r) = K0^{1/(p-1)} r^{-alpha}, the stationary
    solution of the radial equation (singular at the origin), K0 > 0.
  * pulse_steady_state     the even stationary pulse of
    psi_t = psi_zz - K0 psi + psi^p, K0 > 0.
  * eternal_solution       U(r, t) = r^{-alpha} pulse(ln r + K t), defined
    for all real t; stationary exactly when K = 0 (p = p_s).
  * heat_kernel            mass / sqrt(4 pi t) * exp(-zeta^2 / 4t), the
    large-time attractor profile of decaying solutions.

The pulse involves [1 - tanh^2(theta)]^{1/(p-1)}.  Forming 1 - tanh^2
directly loses all precision once tanh(theta) rounds toward 1 (relative
error reaches 1e-7 near theta = 10 and the difference collapses to 0 near
theta = 19), so the equivalent form 4 / (e^theta + e^{-theta})^2 --
rearranged as 4 e^{-2|theta|} / (1 + e^{-2|theta|})^2 to avoid overflow --
is used for every theta; it is exact algebra and stable on the whole line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DerivedConstants

REGION_INNER = "Inner"
REGION_OUTER = "Outer"
REGION_INTERFACE = "Interface"

AT_ZERO = "AtZero"
AT_INFINITY = "AtInfinity"

# Rounding may push the [1 - tanh^2] base a hair below zero; anything that
# is negative beyond noise level is a real error.
_NEGATIVE_BASE_FLOOR = -1e-15

_INTERFACE_RTOL = 1e-12


def _require_positive_absorption(constants: DerivedConstants) -> None:
    if not (constants.K0 > 0.0):
        raise ValueError(
            f"closed form requires K0 > 0 (p above the critical exponent), got K0={constants.K0}"
        )


def _sech_squared(theta):
    """1 - tanh^2(theta) via 4 e^{-2|theta|} / (1 + e^{-2|theta|})^2."""
    e = np.exp(-2.0 * np.abs(np.asarray(theta, dtype=float)))
    return 4.0 * e / (1.0 + e) ** 2


def _clamped_power(base, exponent):
    """base**exponent with tiny negative bases (rounding debris) mapped to 0."""
    base = np.asarray(base, dtype=float)
    if np.any(base < _NEGATIVE_BASE_FLOOR):
        raise ValueError("power base is negative beyond rounding tolerance")
    return np.maximum(base, 0.0) ** exponent


def singular_steady_state(r, constants: DerivedConstants):
    """S(r) = K0^{1/(p-1)} r^{-alpha}; strictly decreasing, diverges at r=0."""
    _require_positive_absorption(constants)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("radius must be strictly positive")
    p = constants.params.p
    return constants.K0 ** (1.0 / (p - 1.0)) * r ** (-constants.alpha)


def pulse_steady_state(z, constants: DerivedConstants):
    """Even stationary pulse [K0(p+1)/2]^{1/(p-1)} sech^{2/(p-1)}((p-1)sqrt(K0) z/2)."""
    _require_positive_absorption(constants)
    p = constants.params.p
    z = np.asarray(z, dtype=float)
    amplitude = (constants.K0 * (p + 1.0) / 2.0) ** (1.0 / (p - 1.0))
    theta = 0.5 * (p - 1.0) * math.sqrt(constants.K0) * z
    return amplitude * _clamped_power(_sech_squared(theta), 1.0 / (p - 1.0))


def eternal_solution(r, t, constants: DerivedConstants):
    """U(r, t) = r^{-alpha} * pulse(ln r + K t); defined for all real t."""
    _require_positive_absorption(constants)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("radius must be strictly positive")
    z = np.log(r) + constants.K * t
    return r ** (-constants.alpha) * pulse_steady_state(z, constants)


def heat_kernel(zeta, t, mass: float):
    """mass / sqrt(4 pi t) * exp(-zeta^2 / 4t); integrates to mass over the line."""
    if not (t > 0.0):
        raise ValueError(f"time must be positive, got {t!r}")
    if mass < 0.0:
        raise ValueError(f"mass must be non-negative, got {mass!r}")
    zeta = np.asarray(zeta, dtype=float)
    return mass / math.sqrt(4.0 * math.pi * t) * np.exp(-(zeta**2) / (4.0 * t))


def eternal_solution_asymptote(branch: str, t: float, constants: DerivedConstants):
    """Power-law behavior of the eternal solution at r -> 0 or r -> infinity.

    Returns (prefactor, exponent) such that U(r, t) / (prefactor * r**exponent)
    tends to 1 in the corresponding limit.  At p = p_s (K = 0) the prefactors
    are time independent.
    """
    _require_positive_absorption(constants)
    p = constants.params.p
    rootK0 = math.sqrt(constants.K0)
    base = (2.0 * constants.K0 * (p + 1.0)) ** (1.0 / (p - 1.0))
    if branch == AT_ZERO:
        return base * math.exp(rootK0 * constants.K * t), rootK0 - constants.alpha
    if branch == AT_INFINITY:
        return base * math.exp(-rootK0 * constants.K * t), -rootK0 - constants.alpha
    raise ValueError(f"unknown branch {branch!r}")


def region_of(r: float, t: float, constants: DerivedConstants) -> str:
    """Classify (r, t) against the moving boundary r = e^{-K t}.

    Inner: r < e^{-Kt}; Outer: r > e^{-Kt}; Interface when equal to
    relative tolerance 1e-12.  On the inner and outer sets the eternal
    solution is strictly monotone in time, with directions that swap as p
    crosses p_s; no monotonicity is claimed on the interface itself.
    """
    if not (r > 0.0):
        raise ValueError("radius must be strictly positive")
    if not (t > 0.0):
        raise ValueError("time must be positive")
    boundary = math.exp(-constants.K * t)
    if abs(r - boundary) <= _INTERFACE_RTOL * boundary:
        return REGION_INTERFACE
    return REGION_INNER if r < boundary else REGION_OUTER


@dataclass(frozen=True)
class ClosedForm:
    """An evaluable closed form tagged by kind.

    kind is one of "singular_steady", "pulse", "eternal", "heat_kernel";
    mass is only meaningful for the heat kernel.
    """

    kind: str
    constants: DerivedConstants | None = None
    mass: float | None = None

    _KINDS = ("singular_steady", "pulse", "eternal", "heat_kernel")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown closed form kind {self.kind!r}")
        if self.kind == "heat_kernel":
            if self.mass is None or not (self.mass >= 0.0) or not math.isfinite(self.mass):
                raise ValueError("heat kernel requires a finite non-negative mass")
        else:
            if self.constants is None:
                raise ValueError(f"{self.kind} requires derived constants")
            _require_positive_absorption(self.constants)

    def evaluate(self, x, t: float = 0.0):
        """Evaluate at radius (or z / zeta, by kind) x and time t."""
        if self.kind == "singular_steady":
            return singular_steady_state(x, self.constants)
        if self.kind == "pulse":
            return pulse_steady_state(x, self.constants)
        if self.kind == "eternal":
            return eternal_solution(x, t, self.constants)
        return heat_kernel(x, t, self.mass)
