"""Run configuration: JSON schema, validation, defaults and stable digests.

A run config is a flat JSON document.  Unknown keys are rejected with the
offending key path; every omitted key is materialized to its default, and
the digest is the SHA-256 of the canonical (sorted-key) JSON form of the
fully materialized document, so identical configs always hash identically.

Schema (defaults in parentheses):

    N, p, sigma            problem exponents (required)
    frame                  "fisher" | "radial"            ("fisher")
    grid                   fisher: {z_min (-40), z_max (40), n (1601)}
                           radial: {r_lo (e^-40), r_hi (e^40), n (1601)}
    dt_init (1e-2), dt_safety (0.5), t_max (50.0)
    blowup_threshold (1e8), decay_threshold (1e-8)
    bc                     {"left": BC, "right": BC}, BC = {"kind":
                           "dirichlet"|"ode_limit", "value": v} (zero pins)
    initial_condition      see transform.build_initial_condition
                           ({"kind": "zero"})
    snapshot_times         list of times in [0, t_max]     ([])
    experiment             free-form dict, validated per subcommand ({})
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fkpp_solver import BoundaryCondition, SolverConfig
from .params import DerivedConstants, ProblemParams, derive_constants
from .radial_solver import RadialConfig
from .transform import Grid1D

FISHER_FRAME = "fisher"
RADIAL_FRAME = "radial"


class ConfigError(ValueError):
    """Schema violation; the message carries the offending key path."""


def _json_default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if x == math.inf:
        return "inf"
    raise TypeError(f"not JSON serializable: {type(x)}")


def stable_digest(obj) -> str:
    """SHA-256 of the canonical JSON form of obj."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


_IC_REQUIRED = {
    "bump": {"center", "width", "height"},
    "scaled_U": {"lambda"},
    "capped_S": {"cap"},
    "plateau": {"A", "r_knee"},
    "zero": set(),
}

_BC_KINDS = ("dirichlet", "ode_limit")


def _number(raw, key, path, default=None, required=False, integer=False):
    if key not in raw:
        if required:
            raise ConfigError(f"{path}{key}: missing required key")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}{key}: expected a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{path}{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _check_keys(raw: dict, allowed, path=""):
    extra = set(raw) - set(allowed)
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"{path}{key}: unknown key")


def _validate_bc(raw, path) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected an object")
    _check_keys(raw, {"kind", "value"}, path + ".")
    kind = raw.get("kind", "dirichlet")
    if kind not in _BC_KINDS:
        raise ConfigError(f"{path}.kind: must be one of {_BC_KINDS}, got {kind!r}")
    value = _number(raw, "value", path + ".", default=0.0)
    if value < 0.0:
        raise ConfigError(f"{path}.value: boundary data must be non-negative")
    return {"kind": kind, "value": value}


def _validate_ic(raw, path="initial_condition") -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = raw.get("kind")
    if kind not in _IC_REQUIRED:
        raise ConfigError(
            f"{path}.kind: must be one of {sorted(_IC_REQUIRED)}, got {kind!r}"
        )
    required = _IC_REQUIRED[kind]
    _check_keys(raw, required | {"kind", "scale"}, path + ".")
    out = {"kind": kind}
    for key in sorted(required):
        out[key] = _number(raw, key, path + ".", required=True)
    if "scale" in raw:
        out["scale"] = _number(raw, "scale", path + ".")
    return out


_TOP_KEYS = (
    "N", "p", "sigma", "frame", "grid", "dt_init", "dt_safety", "t_max",
    "blowup_threshold", "decay_threshold", "bc", "initial_condition",
    "snapshot_times", "experiment",
)


@dataclass(frozen=True)
class RunConfig:
    """A validated, fully materialized run configuration."""

    materialized: dict
    digest: str

    @property
    def frame(self) -> str:
        return self.materialized["frame"]

    @property
    def experiment(self) -> dict:
        return self.materialized["experiment"]

    @property
    def initial_condition(self) -> dict:
        return self.materialized["initial_condition"]

    @property
    def snapshot_times(self) -> tuple:
        return tuple(self.materialized["snapshot_times"])

    def params(self) -> ProblemParams:
        m = self.materialized
        return ProblemParams(N=m["N"], p=m["p"], sigma=m["sigma"])

    def constants(self) -> DerivedConstants:
        return derive_constants(self.params())

    def fisher_grid(self) -> Grid1D:
        g = self.materialized["grid"]
        if self.frame != FISHER_FRAME:
            raise ConfigError("grid: not a fisher-frame grid")
        return Grid1D(g["z_min"], g["z_max"], g["n"])

    def _bc(self, side: str) -> BoundaryCondition:
        b = self.materialized["bc"][side]
        return BoundaryCondition(b["kind"], b["value"])

    def solver_config(self) -> SolverConfig:
        m = self.materialized
        return SolverConfig(
            grid=self.fisher_grid(),
            dt_init=m["dt_init"],
            dt_safety=m["dt_safety"],
            t_max=m["t_max"],
            blowup_threshold=m["blowup_threshold"],
            decay_threshold=m["decay_threshold"],
            left_bc=self._bc("left"),
            right_bc=self._bc("right"),
            snapshot_times=self.snapshot_times,
        )

    def radial_config(self) -> RadialConfig:
        m = self.materialized
        g = m["grid"]
        if self.frame != RADIAL_FRAME:
            raise ConfigError("grid: not a radial-frame grid")
        return RadialConfig(
            r_lo=g["r_lo"],
            r_hi=g["r_hi"],
            n=g["n"],
            dt_init=m["dt_init"],
            dt_safety=m["dt_safety"],
            t_max=m["t_max"],
            blowup_threshold=m["blowup_threshold"],
            decay_threshold=m["decay_threshold"],
            bc_lo=self._bc("left"),
            bc_hi=self._bc("right"),
            snapshot_times=self.snapshot_times,
        )


def parse_config(source) -> RunConfig:
    """Parse and validate a config from a path, JSON text, or dict."""
    if isinstance(source, dict):
        raw = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            try:
                text = Path(text).read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config file {source!r}: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(raw, _TOP_KEYS)

    N = _number(raw, "N", "", required=True, integer=True)
    p = _number(raw, "p", "", required=True)
    sigma = _number(raw, "sigma", "", required=True)
    try:
        ProblemParams(N=N, p=p, sigma=sigma)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    frame = raw.get("frame", FISHER_FRAME)
    if frame not in (FISHER_FRAME, RADIAL_FRAME):
        raise ConfigError(f"frame: must be 'fisher' or 'radial', got {frame!r}")

    grid_raw = raw.get("grid", {})
    if not isinstance(grid_raw, dict):
        raise ConfigError("grid: expected an object")
    if frame == FISHER_FRAME:
        _check_keys(grid_raw, {"z_min", "z_max", "n"}, "grid.")
        grid = {
            "z_min": _number(grid_raw, "z_min", "grid.", default=-40.0),
            "z_max": _number(grid_raw, "z_max", "grid.", default=40.0),
            "n": _number(grid_raw, "n", "grid.", default=1601, integer=True),
        }
        if not grid["z_min"] < grid["z_max"]:
            raise ConfigError("grid.z_min: must be below grid.z_max")
    else:
        _check_keys(grid_raw, {"r_lo", "r_hi", "n"}, "grid.")
        grid = {
            "r_lo": _number(grid_raw, "r_lo", "grid.", default=math.exp(-40.0)),
            "r_hi": _number(grid_raw, "r_hi", "grid.", default=math.exp(40.0)),
            "n": _number(grid_raw, "n", "grid.", default=1601, integer=True),
        }
        if not 0.0 < grid["r_lo"] < grid["r_hi"]:
            raise ConfigError("grid.r_lo: need 0 < r_lo < r_hi")
    if grid["n"] < 3:
        raise ConfigError("grid.n: need at least 3 nodes")

    dt_init = _number(raw, "dt_init", "", default=1e-2)
    dt_safety = _number(raw, "dt_safety", "", default=0.5)
    t_max = _number(raw, "t_max", "", default=50.0)
    blowup = _number(raw, "blowup_threshold", "", default=1e8)
    decay = _number(raw, "decay_threshold", "", default=1e-8)
    if not dt_init > 0.0:
        raise ConfigError("dt_init: must be positive")
    if not 0.0 < dt_safety <= 1.0:
        raise ConfigError("dt_safety: must lie in (0, 1]")
    if not t_max > 0.0:
        raise ConfigError("t_max: must be positive")
    if not blowup > 1.0 > decay > 0.0:
        raise ConfigError("blowup_threshold/decay_threshold: need blowup > 1 > decay > 0")

    bc_raw = raw.get("bc", {})
    if not isinstance(bc_raw, dict):
        raise ConfigError("bc: expected an object")
    _check_keys(bc_raw, {"left", "right"}, "bc.")
    bc = {
        "left": _validate_bc(bc_raw.get("left", {}), "bc.left"),
        "right": _validate_bc(bc_raw.get("right", {}), "bc.right"),
    }
    if frame == RADIAL_FRAME:
        for side in ("left", "right"):
            if bc[side]["kind"] == "ode_limit":
                raise ConfigError(f"bc.{side}.kind: ode_limit is not defined for the radial frame")

    ic = _validate_ic(raw.get("initial_condition", {"kind": "zero"}))

    snaps_raw = raw.get("snapshot_times", [])
    if not isinstance(snaps_raw, list):
        raise ConfigError("snapshot_times: expected a list")
    snapshot_times = []
    for i, ts in enumerate(snaps_raw):
        if isinstance(ts, bool) or not isinstance(ts, (int, float)):
            raise ConfigError(f"snapshot_times[{i}]: expected a number")
        if not 0.0 <= ts <= t_max:
            raise ConfigError(f"snapshot_times[{i}]: {ts} outside [0, t_max]")
        snapshot_times.append(float(ts))

    experiment = raw.get("experiment", {})
    if not isinstance(experiment, dict):
        raise ConfigError("experiment: expected an object")

    materialized = {
        "N": N,
        "p": p,
        "sigma": sigma,
        "frame": frame,
        "grid": grid,
        "dt_init": dt_init,
        "dt_safety": dt_safety,
        "t_max": t_max,
        "blowup_threshold": blowup,
        "decay_threshold": decay,
        "bc": bc,
        "initial_condition": ic,
        "snapshot_times": sorted(snapshot_times),
        "experiment": experiment,
    }
    return RunConfig(materialized=materialized, digest=stable_digest(materialized))


def take_experiment_keys(experiment: dict, defaults: dict) -> dict:
    """Fill defaults into an experiment dict, rejecting unknown keys."""
    _check_keys(experiment, set(defaults), "experiment.")
    out = dict(defaults)
    out.update(experiment)
    return out
