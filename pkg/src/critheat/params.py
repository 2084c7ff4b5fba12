"""Problem parameters, derived constants and regime classification.

The model is the radial heat equation with singular density and weighted
source,

    r^{-2} u_t = u_rr + (N-1)/r u_r + r^sigma u^p,

whose radially symmetric solutions map onto the one-dimensional equation

    psi_t = psi_zz - K0 psi + psi^p,    z = ln r + K t,

after the amplitude change psi = r^alpha u.  Everything downstream is
driven by the constants computed here:

    alpha = (sigma+2)/(p-1)
    K0    = alpha (N-2-alpha)        (linear absorption coefficient)
    K     = N-2-2 alpha              (drift speed of the moving frame)

The sign of K0 coincides with the sign of p - p_c and the sign of K with
the sign of p - p_s, where p_c = (N+sigma)/(N-2) and
p_s = (N+2 sigma+2)/(N-2) for N >= 3 (both +inf for N in {1, 2}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

# Regime labels (pure functions of sign(K0) and sigma).
FUJITA_BLOWUP = "FujitaBlowup"
FISHER_KPP = "FisherKPP"
CRITICAL_PC = "CriticalPc"
SIGMA_MINUS_TWO = "SigmaMinusTwo"

# Fujita exponent of psi_t = psi_zz + psi^p on the line.
P_FUJITA_LINE = 3.0

# Relative tolerance for the p == p_c / p == p_s equality tests.  The
# critical case switches the governing equation (K0 = 0), so equality is
# decided by exact rational comparison first and this tolerance second.
_CRITICAL_RTOL = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    """Exponent triple (N, p, sigma) defining one problem instance."""

    N: int
    p: float
    sigma: float

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N!r}")
        if not (self.p > 1.0):
            raise ValueError(f"p must exceed 1, got {self.p!r}")
        if not (self.sigma >= -2.0):
            raise ValueError(f"sigma must be >= -2, got {self.sigma!r}")


@dataclass(frozen=True)
class DerivedConstants:
    """All derived constants for one parameter triple.

    p_c and p_s are +inf in dimensions 1 and 2 (represented as math.inf,
    never as a large sentinel).  p_F is the Fujita exponent of the
    unabsorbed 1-D reaction-diffusion equation, relevant when K0 = 0.
    """

    params: ProblemParams
    alpha: float
    K0: float
    K: float
    p_c: float
    p_s: float
    p_F: float = P_FUJITA_LINE


def derive_constants(params: ProblemParams) -> DerivedConstants:
    """Compute alpha, K0, K and the two critical exponents."""
    N, p, sigma = params.N, params.p, params.sigma
    alpha = (sigma + 2.0) / (p - 1.0)
    K0 = alpha * (N - 2.0 - alpha)
    K = N - 2.0 - 2.0 * alpha
    if N >= 3:
        p_c = (N + sigma) / (N - 2.0)
        p_s = (N + 2.0 * sigma + 2.0) / (N - 2.0)
    else:
        p_c = math.inf
        p_s = math.inf
    return DerivedConstants(params=params, alpha=alpha, K0=K0, K=K, p_c=p_c, p_s=p_s)


def _exactly_critical(p: float, N: int, sigma: float) -> bool:
    """Exact rational test p == (N+sigma)/(N-2); floats are exact rationals."""
    if N < 3:
        return False
    target = (Fraction(N) + Fraction(sigma)) / Fraction(N - 2)
    return Fraction(p) == target


def is_critical_p(params: ProblemParams) -> bool:
    """Whether p sits on the Fujita-type exponent p_c (exact or to 1e-12)."""
    N, p, sigma = params.N, params.p, params.sigma
    if N < 3 or sigma <= -2.0:
        return False
    if _exactly_critical(p, N, sigma):
        return True
    p_c = (N + sigma) / (N - 2.0)
    return abs(p - p_c) <= _CRITICAL_RTOL * abs(p_c)


def classify_regime(params: ProblemParams) -> str:
    """Classify which dynamical regime the parameter triple belongs to.

    Exactly one label applies:
      SigmaMinusTwo  iff sigma = -2
      FujitaBlowup   iff N in {1,2}, or N >= 3 and p < p_c  (K0 < 0)
      CriticalPc     iff p = p_c (exact rational or 1e-12 relative)
      FisherKPP      otherwise (K0 > 0)
    """
    if params.sigma == -2.0:
        return SIGMA_MINUS_TWO
    if params.N <= 2:
        return FUJITA_BLOWUP
    if is_critical_p(params):
        return CRITICAL_PC
    p_c = (params.N + params.sigma) / (params.N - 2.0)
    if params.p < p_c:
        return FUJITA_BLOWUP
    return FISHER_KPP
