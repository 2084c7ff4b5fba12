"""Coordinate and amplitude changes between the radial and Fisher-KPP frames.

A radial profile u(r) and its Fisher-frame counterpart psi(z) are related by

    psi(z) = r^alpha u(r),    z = ln r + K t,

which maps the radial equation onto psi_t = psi_zz - K0 psi + psi^p and
preserves ordering between solutions.  Radial grids are always log-uniform
(r_i = e^{y_i}), so both frames share one uniform node set and the frame
changes are exact node-wise rescalings, free of interpolation error.

Also here: the weighted mass integral

    M(u0) = int_0^inf r^{alpha - 1} u0(r) dr = int_R psi0(z) dz,

which sets the amplitude of the large-time Gaussian attractor, and the
initial-condition families accepted in run configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .closed_forms import eternal_solution, singular_steady_state
from .params import DerivedConstants

FRAME_RADIAL = "radial_r"
FRAME_LOG = "log_y"
FRAME_TRAVELING = "traveling_z"

_ROUNDTRIP_NEG_TOL = -1e-14


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid with n nodes on [z_min, z_max]."""

    z_min: float
    z_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 nodes, got {self.n}")
        if not (self.z_min < self.z_max):
            raise ValueError(f"empty grid interval [{self.z_min}, {self.z_max}]")

    @property
    def h(self) -> float:
        return (self.z_max - self.z_min) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n)


@dataclass
class Field:
    """A sampled non-negative profile on a grid at one time.

    frame tags what the grid coordinate means: "radial_r" and "log_y" both
    store log-radius nodes y (radii are e^y), "traveling_z" stores
    z = y + K t.
    """

    grid: Grid1D
    values: np.ndarray
    t: float = 0.0
    frame: str = FRAME_TRAVELING

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid with n={self.grid.n}"
            )
        if self.frame not in (FRAME_RADIAL, FRAME_LOG, FRAME_TRAVELING):
            raise ValueError(f"unknown frame {self.frame!r}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        if np.any(self.values < 0.0):
            if np.min(self.values) < _ROUNDTRIP_NEG_TOL:
                raise ValueError("field values must be non-negative")
            self.values = np.maximum(self.values, 0.0)

    @property
    def radii(self) -> np.ndarray:
        """Radii of the nodes (only meaningful in the radial/log frames)."""
        return np.exp(self.grid.nodes)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.t, self.frame)


def to_fisher(u: Field, constants: DerivedConstants) -> Field:
    """Map a radial-frame field to the traveling Fisher frame at the same time."""
    if u.frame != FRAME_RADIAL:
        raise ValueError(f"expected a radial-frame field, got frame {u.frame!r}")
    y = u.grid.nodes
    values = np.exp(constants.alpha * y) * u.values
    shift = constants.K * u.t
    grid = Grid1D(u.grid.z_min + shift, u.grid.z_max + shift, u.grid.n)
    return Field(grid, values, t=u.t, frame=FRAME_TRAVELING)


def from_fisher(psi: Field, constants: DerivedConstants) -> Field:
    """Exact inverse of to_fisher: u(r) = r^{-alpha} psi(ln r + K t)."""
    if psi.frame != FRAME_TRAVELING:
        raise ValueError(f"expected a traveling-frame field, got frame {psi.frame!r}")
    shift = constants.K * psi.t
    grid = Grid1D(psi.grid.z_min - shift, psi.grid.z_max - shift, psi.grid.n)
    y = grid.nodes
    values = np.exp(-constants.alpha * y) * psi.values
    return Field(grid, values, t=psi.t, frame=FRAME_RADIAL)


def map_initial(u0, constants: DerivedConstants, grid: Grid1D) -> Field:
    """Sample psi0(z) = e^{alpha z} u0(e^z) on the grid (t = 0, so z = y)."""
    z = grid.nodes
    values = np.exp(constants.alpha * z) * np.asarray(u0(np.exp(z)), dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("initial condition produced non-finite samples")
    return Field(grid, values, t=0.0, frame=FRAME_TRAVELING)


def sup_norm(f: Field) -> float:
    return float(np.max(f.values))


def l1_norm(f: Field) -> float:
    """Trapezoid integral of the sampled values over the grid."""
    return float(np.trapezoid(f.values, dx=f.grid.h))


def interpolate(f: Field, coordinate: float) -> float:
    """Piecewise-linear interpolation; exact at the nodes."""
    if not (f.grid.z_min <= coordinate <= f.grid.z_max):
        raise ValueError(
            f"coordinate {coordinate} outside grid [{f.grid.z_min}, {f.grid.z_max}]"
        )
    return float(np.interp(coordinate, f.grid.nodes, f.values))


# ---------------------------------------------------------------------------
# weighted mass
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MassResult:
    """Outcome of the weighted-mass quadrature; value is +inf when diverged."""

    value: float
    diverged: bool = False

    def __float__(self):
        return self.value


def _adaptive_simpson(f, a, b, tol, depth=24, init_panels=16):
    """Recursive adaptive Simpson on [a, b].

    The interval is pre-split into init_panels panels before adapting, so
    features much narrower than the interval are not skipped by the sparse
    first samples.
    """
    edges = np.linspace(a, b, init_panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        fa, fm, fb = f(lo), f(0.5 * (lo + hi)), f(hi)
        whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)
        total += _simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / init_panels, depth)
    return total


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1
    )


def weighted_mass(
    u0,
    constants: DerivedConstants,
    r_lo: float = 1e-8,
    r_hi: float = 1e8,
    tol: float = 1e-9,
    divergence_cap: float = 1e12,
) -> MassResult:
    """M(u0) = int r^{alpha-1} u0(r) dr by per-decade adaptive Simpson.

    The infinite integral is truncated to [r_lo, r_hi] and computed decade
    by decade.  If the running sum exceeds divergence_cap, or the last
    decade's contribution fails to decay relative to the previous one, the
    result is flagged divergent and reported as +inf.
    """
    alpha = constants.alpha

    def integrand(r):
        return float(r ** (alpha - 1.0) * u0(r))

    edges = [r_lo]
    while edges[-1] < r_hi * (1.0 - 1e-12):
        edges.append(min(edges[-1] * 10.0, r_hi))
    contributions = []
    total = 0.0
    n_dec = len(edges) - 1
    for a, b in zip(edges[:-1], edges[1:]):
        part = _adaptive_simpson(integrand, a, b, tol / n_dec)
        contributions.append(part)
        total += part
        if total > divergence_cap:
            return MassResult(math.inf, diverged=True)
    # Tail check: the final decade must be a genuinely small and shrinking
    # correction, otherwise the integral over (0, inf) is not represented
    # by its truncation.
    tail, prev = contributions[-1], contributions[-2] if n_dec >= 2 else 0.0
    floor = max(tol, 1e-12 * max(total, 1.0))
    if tail > floor and tail > 0.5 * prev:
        return MassResult(math.inf, diverged=True)
    return MassResult(total)


# ---------------------------------------------------------------------------
# ratio extrema against a reference profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatioExtrema:
    """inf / sup of u0 / reference over a declared sample window.

    These are window-restricted estimates of extrema over (0, inf); the
    window and sample count are carried alongside the values for honesty
    about the truncation.
    """

    inf_ratio: float
    sup_ratio: float
    r_window: tuple
    n_samples: int


def ratio_extrema(
    u0,
    constants: DerivedConstants,
    r_window: tuple = (1e-3, 1e3),
    n_samples: int = 2001,
    reference=None,
) -> RatioExtrema:
    """Extrema of u0(r)/reference(r) on log-spaced samples of the window.

    The default reference is the eternal solution at t = 0, making this the
    numerical surrogate for the separatrix comparison constants.
    """
    if reference is None:
        reference = lambda r: eternal_solution(r, 0.0, constants)
    r = np.logspace(math.log10(r_window[0]), math.log10(r_window[1]), n_samples)
    ref = np.asarray(reference(r), dtype=float)
    if np.any(ref <= 0.0):
        raise ValueError("reference profile vanishes on the sample window")
    ratio = np.asarray(u0(r), dtype=float) / ref
    return RatioExtrema(float(ratio.min()), float(ratio.max()), r_window, n_samples)


# ---------------------------------------------------------------------------
# initial-condition families (the JSON "initial_condition" kinds)
# ---------------------------------------------------------------------------

def smooth_bump(r, center: float, width: float, height: float):
    """C-infinity bump: height * exp(1 - 1/(1-s^2)), s = (r-center)/width."""
    r = np.asarray(r, dtype=float)
    s = (r - center) / width
    out = np.zeros_like(r)
    inside = np.abs(s) < 1.0
    out[inside] = height * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def plateau_profile(r, height: float, r_knee: float):
    """height for r <= r_knee, cosine rolloff to 0 by r = 2 r_knee."""
    r = np.asarray(r, dtype=float)
    out = np.full_like(r, height)
    ramp = (r > r_knee) & (r < 2.0 * r_knee)
    out[ramp] = height * 0.5 * (1.0 + np.cos(math.pi * (r[ramp] - r_knee) / r_knee))
    out[r >= 2.0 * r_knee] = 0.0
    return out


def build_initial_condition(spec: dict, constants: DerivedConstants):
    """Turn a JSON initial-condition spec into a callable u0(r).

    Supported kinds (all accept an optional multiplicative "scale",
    default 1):
      {"kind": "bump", "center": c, "width": w, "height": h}
      {"kind": "scaled_U", "lambda": lam}
      {"kind": "capped_S", "cap": c}
      {"kind": "plateau", "A": a, "r_knee": k}
      {"kind": "zero"}
    """
    kind = spec.get("kind")
    scale = float(spec.get("scale", 1.0))
    if kind == "bump":
        c, w, h = float(spec["center"]), float(spec["width"]), float(spec["height"])
        return lambda r: scale * smooth_bump(r, c, w, h)
    if kind == "scaled_U":
        lam = float(spec["lambda"])
        return lambda r: scale * lam * eternal_solution(r, 0.0, constants)
    if kind == "capped_S":
        cap = float(spec["cap"])
        return lambda r: scale * np.minimum(cap, singular_steady_state(r, constants))
    if kind == "plateau":
        a, k = float(spec["A"]), float(spec["r_knee"])
        return lambda r: scale * plateau_profile(r, a, k)
    if kind == "zero":
        return lambda r: np.zeros_like(np.asarray(r, dtype=float))
    raise ValueError(f"unknown initial condition kind {kind!r}")
