"""Command-line front end.

Every subcommand reads a JSON run configuration (--config), writes CSV
tables and a JSON report into --out, and optionally renders figures from
the CSVs (--svg).  Exit codes: 0 when all declared tolerances pass, 1 on a
tolerance failure, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import plots
from .closed_forms import (
    eternal_solution,
    heat_kernel,
    pulse_steady_state,
    singular_steady_state,
)
from .config import (
    ConfigError,
    FISHER_FRAME,
    RADIAL_FRAME,
    parse_config,
    take_experiment_keys,
)
from .experiments import (
    BLOWUP,
    BracketError,
    classify_datum,
    critical_pc_suite,
    decay_rate_fit,
    fujita_sweep,
    gaussian_profile_deviation,
    separatrix_bisect,
    sigma_minus2_suite,
    sweep_passes,
)
from .fkpp_solver import BLEW_UP, SolverConfig, solve
from .output import emit_csv, emit_json, format_cell
from .params import ProblemParams, classify_regime
from .radial_solver import residual as radial_residual
from .radial_solver import solve_radial
from .transform import (
    FRAME_RADIAL,
    Field,
    Grid1D,
    build_initial_condition,
    from_fisher,
    l1_norm,
    map_initial,
    to_fisher,
    weighted_mass,
)

_STATUS = {"blew_up": "Blowup", "decayed": "Decay", "undetermined": "Undetermined"}


def _fmt(x) -> str:
    return format_cell(x)


def _load(args):
    if args.config is None:
        raise ConfigError("--config is required for this command")
    return parse_config(args.config)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_derive(args) -> int:
    cfg = _load(args)
    constants = cfg.constants()
    regime = classify_regime(cfg.params())
    print("N,p,sigma,alpha,K0,K,p_c,p_s,regime")
    cells = [cfg.params().N, cfg.params().p, cfg.params().sigma,
             constants.alpha, constants.K0, constants.K,
             constants.p_c, constants.p_s, regime]
    print(",".join(_fmt(c) for c in cells))
    return 0


def _parse_grid_spec(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--grid expects lo:hi:n, got {spec!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 2 or not lo < hi:
        raise ConfigError(f"--grid invalid range {spec!r}")
    return lo, hi, n


def cmd_closed_form(args) -> int:
    cfg = _load(args)
    constants = cfg.constants()
    times = [float(x) for x in args.times.split(",")] if args.times else [0.0]
    out = _outdir(args)

    radial = args.which in ("S", "U")
    lo, hi, n = _parse_grid_spec(args.grid or ("0.05:20:801" if radial else "-20:20:801"))
    if radial:
        if lo <= 0.0:
            raise ConfigError("--grid lower bound must be positive for S and U")
        xs = np.geomspace(lo, hi, n)
    else:
        xs = np.linspace(lo, hi, n)

    rows = []
    for t in times:
        if args.which == "S":
            vals = singular_steady_state(xs, constants)
        elif args.which == "U":
            vals = eternal_solution(xs, t, constants)
        elif args.which == "pulse":
            vals = pulse_steady_state(xs, constants)
        else:
            vals = heat_kernel(xs, t, args.mass)
        rows.extend((x, t, v) for x, v in zip(xs, vals))
    csv_path = emit_csv(out / "closed_form.csv", ["r_or_z", "t", "value"], rows)
    if args.svg:
        plots.plot_profiles(csv_path, out / "closed_form.svg",
                            group_col="t", x_col="r_or_z", value_col="value",
                            logx=radial)
    return 0


def _write_outcome(out, cfg, outcome, frame: str):
    status = outcome.status
    blow = status.kind == BLEW_UP
    doc = {
        "status": _STATUS[status.kind],
        "t_star": status.t if blow else None,
        "t_reached": status.t,
        "z_star": status.z_star,
        "blowup_threshold": cfg.materialized["blowup_threshold"],
        "config": cfg.materialized,
    }
    if frame == RADIAL_FRAME and blow and status.z_star is not None:
        doc["r_star"] = math.exp(status.z_star)
    emit_json(out / "outcome.json", doc)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    frame = args.frame or cfg.frame
    if frame != cfg.frame:
        raise ConfigError(f"--frame {frame} does not match config frame {cfg.frame}")
    constants = cfg.constants()
    u0 = build_initial_condition(cfg.initial_condition, constants)
    out = _outdir(args)

    if frame == FISHER_FRAME:
        solver_cfg = cfg.solver_config()
        psi0 = map_initial(u0, constants, solver_cfg.grid)
        outcome = solve(psi0, constants, solver_cfg)
        coord, value_name = "z", "psi"
        snap_rows = [
            (s.t, z, v)
            for s in outcome.snapshots
            for z, v in zip(s.grid.nodes, s.values)
        ]
    else:
        radial_cfg = cfg.radial_config()
        outcome = solve_radial(u0, constants, radial_cfg)
        coord, value_name = "r", "u"
        snap_rows = [
            (s.t, r, v)
            for s in outcome.snapshots
            for r, v in zip(np.exp(s.grid.nodes), s.values)
        ]

    trace_rows = [
        (t, sup, en)
        for (t, sup), (_, en) in zip(outcome.sup_trace, outcome.energy_trace)
    ]
    trace_csv = emit_csv(out / "sup_trace.csv", ["t", "sup", "energy"], trace_rows)
    snap_csv = emit_csv(out / "snapshots.csv", ["t", coord, value_name], snap_rows)
    _write_outcome(out, cfg, outcome, frame)
    if args.svg:
        plots.plot_trace(trace_csv, out / "sup_trace.svg")
        if snap_rows:
            plots.plot_profiles(snap_csv, out / "snapshots.svg",
                                group_col="t", x_col=coord, value_col=value_name)
    return 0


def cmd_residual(args) -> int:
    cfg = _load(args)
    constants = cfg.constants()
    if args.which == "S":
        form = lambda r, t: singular_steady_state(r, constants)
        time_dep = False
    else:
        form = lambda r, t: eternal_solution(r, t, constants)
        time_dep = True
    out = _outdir(args)
    rows = []
    orders_ok = True
    prev = None
    for level in range(args.refinements):
        n = (args.n0 - 1) * 2**level + 1
        grid = Grid1D(math.log(args.r_lo), math.log(args.r_hi), n)
        res = radial_residual(form, constants, grid, t=args.time, time_dependent=time_dep)
        order = math.log2(prev / res) if prev is not None else math.nan
        if prev is not None and not (args.order_lo <= order <= args.order_hi):
            orders_ok = False
        rows.append((grid.h, res, order))
        prev = res
    csv_path = emit_csv(out / "residual.csv", ["h", "sup_residual", "order"], rows)
    emit_json(out / "report.json", {
        "which": args.which,
        "rows": [{"h": h, "sup_residual": r, "order": o} for h, r, o in rows],
        "order_band": [args.order_lo, args.order_hi],
        "passed": orders_ok,
        "config": cfg.materialized,
    })
    if args.svg:
        plots.plot_xy(csv_path, out / "residual.svg", "h", "sup_residual", loglog=True)
    return 0 if orders_ok else 1


def cmd_roundtrip(args) -> int:
    cfg = _load(args)
    constants = cfg.constants()
    exp = take_experiment_keys(cfg.experiment, {"t": 0.7})
    u0 = build_initial_condition(cfg.initial_condition, constants)
    if cfg.frame == FISHER_FRAME:
        g = cfg.fisher_grid()
    else:
        g = cfg.radial_config().grid
    y = g.nodes
    u = Field(g, u0(np.exp(y)), t=float(exp["t"]), frame=FRAME_RADIAL)
    back = from_fisher(to_fisher(u, constants), constants)
    err = np.abs(back.values - u.values)
    scale = max(1.0, float(u.values.max()))
    max_err = float(err.max())
    passed = max_err <= 1e-14 * scale
    out = _outdir(args)
    csv_path = emit_csv(out / "roundtrip.csv", ["y", "u", "roundtrip_u", "abs_error"],
                        zip(y, u.values, back.values, err))
    emit_json(out / "report.json", {
        "max_abs_error": max_err,
        "tolerance": 1e-14 * scale,
        "passed": passed,
        "config": cfg.materialized,
    })
    if args.svg:
        plots.plot_xy(csv_path, out / "roundtrip.svg", "y", "abs_error")
    return 0 if passed else 1


def cmd_classify(args) -> int:
    cfg = _load(args)
    exp = take_experiment_keys(cfg.experiment, {"horizon": None, "expected": None})
    status = classify_datum(
        cfg.initial_condition, cfg.params(),
        horizon=exp["horizon"], grid=cfg.fisher_grid(),
        dt_init=cfg.materialized["dt_init"], dt_safety=cfg.materialized["dt_safety"],
        blowup_threshold=cfg.materialized["blowup_threshold"],
        decay_threshold=cfg.materialized["decay_threshold"],
    )
    passed = exp["expected"] is None or status == exp["expected"]
    out = _outdir(args)
    emit_json(out / "report.json", {
        "status": status,
        "expected": exp["expected"],
        "passed": passed,
        "config": cfg.materialized,
    })
    return 0 if passed else 1


def cmd_separatrix(args) -> int:
    cfg = _load(args)
    exp = take_experiment_keys(cfg.experiment, {
        "lam_lo": 0.5, "lam_hi": 1.5, "iterations": 12, "horizon": 30.0,
        "band": [0.9, 1.1],
    })
    result = separatrix_bisect(
        cfg.params(), lam_lo=exp["lam_lo"], lam_hi=exp["lam_hi"],
        iterations=int(exp["iterations"]), horizon=exp["horizon"],
        grid=cfg.fisher_grid(),
    )
    band = exp["band"]
    passed = band[0] <= result.lam_star <= band[1]
    out = _outdir(args)
    csv_path = emit_csv(out / "evaluations.csv", ["lambda", "status", "is_blowup"],
                        [(lam, st, int(st == BLOWUP)) for lam, st in result.evaluations])
    emit_json(out / "report.json", {
        "lam_star": result.lam_star,
        "bracket": [result.lam_lo, result.lam_hi],
        "bracket_width": result.bracket_width,
        "iterations": result.iterations,
        "band": band,
        "passed": passed,
        "config": cfg.materialized,
    })
    if args.svg:
        plots.plot_xy(csv_path, out / "evaluations.svg", "lambda", "is_blowup")
    return 0 if passed else 1


def cmd_decay_fit(args) -> int:
    cfg = _load(args)
    constants = cfg.constants()
    exp = take_experiment_keys(cfg.experiment, {
        "window_fraction": 0.5, "slope_band": None,
    })
    band = exp["slope_band"]
    if band is None:
        if constants.K0 <= 0.0:
            raise ConfigError("experiment.slope_band: required when K0 <= 0")
        band = [-1.05 * constants.K0, -0.95 * constants.K0]
    solver_cfg = cfg.solver_config()
    psi0 = map_initial(build_initial_condition(cfg.initial_condition, constants),
                       constants, solver_cfg.grid)
    outcome = solve(psi0, constants, solver_cfg)
    fit = decay_rate_fit(outcome.sup_trace, window_fraction=exp["window_fraction"])
    passed = band[0] <= fit.slope <= band[1]
    out = _outdir(args)
    trace_csv = emit_csv(out / "sup_trace.csv", ["t", "sup", "energy"],
                         [(t, s, e) for (t, s), (_, e)
                          in zip(outcome.sup_trace, outcome.energy_trace)])
    emit_json(out / "report.json", {
        "status": _STATUS[outcome.status.kind],
        "slope": fit.slope,
        "prefactor": fit.prefactor,
        "r_squared": fit.r_squared,
        "fit_window": fit.window,
        "slope_band": band,
        "passed": passed,
        "config": cfg.materialized,
    })
    if args.svg:
        plots.plot_trace(trace_csv, out / "sup_trace.svg")
    return 0 if passed else 1


def cmd_gauss_check(args) -> int:
    cfg = _load(args)
    constants = cfg.constants()
    exp = take_experiment_keys(cfg.experiment, {
        "snapshot_times": [2.0, 4.0, 8.0, 16.0],
        "window": [-20.0, 20.0],
        "mass_tolerance": 1e-6,
        "fine_window": [-6.0, 6.0],
        "fine_n": 24001,
    })
    u0 = build_initial_condition(cfg.initial_condition, constants)
    mass = weighted_mass(u0, constants)
    if mass.diverged:
        raise ConfigError("initial_condition: weighted mass diverges; "
                          "the attractor comparison needs finite mass")
    fine = Grid1D(exp["fine_window"][0], exp["fine_window"][1], int(exp["fine_n"]))
    l1 = l1_norm(map_initial(u0, constants, fine))
    mass_match = abs(mass.value - l1) <= exp["mass_tolerance"]

    snaps = tuple(float(t) for t in exp["snapshot_times"])
    m = cfg.materialized
    solver_cfg = SolverConfig(
        grid=cfg.fisher_grid(), dt_init=m["dt_init"], dt_safety=m["dt_safety"],
        t_max=max(snaps), blowup_threshold=m["blowup_threshold"],
        decay_threshold=m["decay_threshold"], snapshot_times=snaps,
    )
    psi0 = map_initial(u0, constants, solver_cfg.grid)
    outcome = solve(psi0, constants, solver_cfg)
    dev = gaussian_profile_deviation(outcome.snapshots, constants, mass.value,
                                     window=tuple(exp["window"]))
    passed = dev.passed and mass_match
    out = _outdir(args)
    csv_path = emit_csv(out / "deviations.csv", ["t", "D"],
                        zip(dev.times, dev.deviations))
    emit_json(out / "report.json", {
        "mass": mass.value,
        "l1_of_initial": l1,
        "mass_match": mass_match,
        "deviations": list(dev.deviations),
        "final_threshold": dev.final_threshold,
        "deviation_passed": dev.passed,
        "passed": passed,
        "config": cfg.materialized,
    })
    if args.svg:
        plots.plot_xy(csv_path, out / "deviations.svg", "t", "D")
    return 0 if passed else 1


def cmd_sigma2(args) -> int:
    cfg = _load(args)
    exp = take_experiment_keys(cfg.experiment, {
        "scenario": "PlateauA", "horizon": 5.0, "A": 1.0, "r_knee": 0.25,
        "q": None, "probe_z": -15.0, "interior_r_lo": 1.0,
    })
    bump_spec = cfg.initial_condition if cfg.initial_condition["kind"] == "bump" else None
    report = sigma_minus2_suite(
        exp["scenario"], cfg.params(), horizon=exp["horizon"],
        grid=cfg.fisher_grid(), plateau_height=exp["A"], plateau_knee=exp["r_knee"],
        bump_spec=bump_spec, q=exp["q"], probe_z=exp["probe_z"],
        interior_r_lo=exp["interior_r_lo"],
    )
    out = _outdir(args)
    (out / "report.json").write_text(report.to_json() + "\n")
    return 0 if report.passed else 1


def cmd_pc_case(args) -> int:
    cfg = _load(args)
    exp = take_experiment_keys(cfg.experiment, {
        "horizon": None, "small_horizon": 20.0, "small_amplitude": 1e-3,
    })
    report = critical_pc_suite(
        cfg.params(), cfg.initial_condition, horizon=exp["horizon"],
        grid=cfg.fisher_grid(), small_amplitude=exp["small_amplitude"],
        small_horizon=exp["small_horizon"],
    )
    out = _outdir(args)
    (out / "report.json").write_text(report.to_json() + "\n")
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    cfg = _load(args)
    exp = take_experiment_keys(cfg.experiment, {"entries": [], "horizon": None})
    entries = []
    for i, entry in enumerate(exp["entries"]):
        if not isinstance(entry, dict):
            raise ConfigError(f"experiment.entries[{i}]: expected an object")
        try:
            params = ProblemParams(N=int(entry["N"]), p=float(entry["p"]),
                                   sigma=float(entry["sigma"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"experiment.entries[{i}]: {exc}") from exc
        ic = entry.get("initial_condition", cfg.initial_condition)
        entries.append((params, ic))
    rows = fujita_sweep(entries, horizon=exp["horizon"], grid=cfg.fisher_grid())
    passed = sweep_passes(rows)
    out = _outdir(args)
    emit_csv(out / "sweep.csv", ["N", "p", "sigma", "regime", "K0", "status"],
             [(r.params.N, r.params.p, r.params.sigma, r.regime, r.K0, r.status)
              for r in rows])
    emit_json(out / "report.json", {
        "rows": [{"N": r.params.N, "p": r.params.p, "sigma": r.params.sigma,
                  "regime": r.regime, "K0": r.K0, "status": r.status} for r in rows],
        "passed": passed,
        "config": cfg.materialized,
    })
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="critheat",
        description="Simulations and verifications for a heat equation with "
                    "singular density and weighted source.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to the JSON run configuration")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--svg", action="store_true",
                        help="render figures next to the emitted CSV files")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("derive", parents=[common],
                   help="print derived constants as one CSV row")

    p_cf = sub.add_parser("closed-form", parents=[common],
                          help="sample a closed form onto a grid")
    p_cf.add_argument("--which", required=True, choices=("S", "pulse", "U", "gauss"))
    p_cf.add_argument("--grid", help="lo:hi:n (log-spaced radii for S and U)")
    p_cf.add_argument("--times", help="comma-separated times (default 0)")
    p_cf.add_argument("--mass", type=float, default=1.0,
                      help="mass of the heat kernel (gauss only)")

    p_sim = sub.add_parser("simulate", parents=[common], help="time-integrate a datum")
    p_sim.add_argument("--frame", choices=(FISHER_FRAME, RADIAL_FRAME),
                       help="must match the config frame when given")

    p_res = sub.add_parser("residual", parents=[common],
                           help="grid-refinement study of a closed-form residual")
    p_res.add_argument("--which", required=True, choices=("S", "U"))
    p_res.add_argument("--refinements", type=int, default=3)
    p_res.add_argument("--r-lo", type=float, default=0.1, dest="r_lo")
    p_res.add_argument("--r-hi", type=float, default=10.0, dest="r_hi")
    p_res.add_argument("--n0", type=int, default=501)
    p_res.add_argument("--time", type=float, default=0.7)
    p_res.add_argument("--order-lo", type=float, default=1.8, dest="order_lo")
    p_res.add_argument("--order-hi", type=float, default=2.2, dest="order_hi")

    sub.add_parser("roundtrip", parents=[common],
                   help="frame-change round-trip identity check")
    sub.add_parser("classify", parents=[common],
                   help="classify a datum as Blowup/Decay/Undetermined")
    sub.add_parser("separatrix", parents=[common],
                   help="bisect the amplitude threshold around the explicit solution")
    sub.add_parser("decay-fit", parents=[common],
                   help="fit the exponential decay rate of a run")
    sub.add_parser("gauss-check", parents=[common],
                   help="large-time Gaussian attractor comparison")
    sub.add_parser("sigma2", parents=[common],
                   help="limiting-case suite at sigma = -2")
    sub.add_parser("pc-case", parents=[common],
                   help="two-sided behavior at the critical exponent")
    sub.add_parser("sweep", parents=[common],
                   help="classify a list of parameter/datum entries")
    return parser


_COMMANDS = {
    "derive": cmd_derive,
    "closed-form": cmd_closed_form,
    "simulate": cmd_simulate,
    "residual": cmd_residual,
    "roundtrip": cmd_roundtrip,
    "classify": cmd_classify,
    "separatrix": cmd_separatrix,
    "decay-fit": cmd_decay_fit,
    "gauss-check": cmd_gauss_check,
    "sigma2": cmd_sigma2,
    "pc-case": cmd_pc_case,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, BracketError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
