import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from critheat import (
    BLEW_UP,
    DECAYED,
    UNDETERMINED,
    BoundaryCondition,
    Field,
    FRAME_TRAVELING,
    Grid1D,
    ProblemParams,
    SolverConfig,
    derive_constants,
    energy,
    pulse_steady_state,
    reaction_ode_value,
    smooth_bump,
    solve,
    step,
)

C35 = derive_constants(ProblemParams(N=4, p=3.5, sigma=1.0))
CRD = derive_constants(ProblemParams(N=3, p=2.0, sigma=-2.0))  # K0 = 0


def traveling(grid, values, t=0.0):
    return Field(grid, values, t=t, frame=FRAME_TRAVELING)


# ---------------------------------------------------------------------------
# exact boundary ODE
# ---------------------------------------------------------------------------

def test_reaction_ode_closed_form_against_integrator():
    for K0, p, a0, t in [(0.96, 3.5, 0.5, 0.8), (0.0, 2.0, 0.7, 0.4), (-2.0, 3.0, 0.1, 0.5)]:
        exact = reaction_ode_value(a0, K0, p, t)
        num = solve_ivp(lambda _, y: -K0 * y + y**p, (0.0, t), [a0],
                        rtol=1e-12, atol=1e-14).y[0, -1]
        assert exact == pytest.approx(num, rel=1e-9)


def test_reaction_ode_blowup_and_zero():
    # K0 = 0, p = 2, a0 = 1 blows up at t = 1
    assert reaction_ode_value(1.0, 0.0, 2.0, 0.999) == pytest.approx(1000.0, rel=1e-10)
    assert math.isinf(reaction_ode_value(1.0, 0.0, 2.0, 1.0))
    assert reaction_ode_value(0.0, 0.0, 2.0, 5.0) == 0.0


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------

def test_zero_is_a_fixed_point():
    g = Grid1D(-10.0, 10.0, 201)
    cfg = SolverConfig(grid=g)
    out = step(traveling(g, np.zeros(g.n)), 1e-3, C35, cfg)
    assert np.all(out.values == 0.0)
    assert out.t == pytest.approx(1e-3)


def test_flat_equilibrium_is_preserved():
    p = C35.params.p
    c_eq = C35.K0 ** (1.0 / (p - 1.0))
    g = Grid1D(-10.0, 10.0, 201)
    cfg = SolverConfig(grid=g,
                       left_bc=BoundaryCondition("dirichlet", c_eq),
                       right_bc=BoundaryCondition("dirichlet", c_eq))
    psi = traveling(g, np.full(g.n, c_eq))
    out = step(psi, 1e-3, C35, cfg)
    assert np.max(np.abs(out.values - c_eq)) < 1e-12


def test_single_step_pulse_drift_is_small():
    g = Grid1D(-40.0, 40.0, 8001)
    cfg = SolverConfig(grid=g)
    psi = traveling(g, pulse_steady_state(g.nodes, C35))
    out = step(psi, 1e-4, C35, cfg)
    assert np.max(np.abs(out.values - psi.values)) < 1e-6


def test_step_rejects_bad_dt():
    g = Grid1D(-1.0, 1.0, 11)
    cfg = SolverConfig(grid=g)
    with pytest.raises(ValueError, match="dt"):
        step(traveling(g, np.zeros(11)), -1.0, C35, cfg)


# ---------------------------------------------------------------------------
# full solves
# ---------------------------------------------------------------------------

def test_zero_datum_decays_immediately():
    g = Grid1D(-10.0, 10.0, 101)
    out = solve(traveling(g, np.zeros(g.n)), C35, SolverConfig(grid=g, t_max=1.0))
    assert out.status.kind == DECAYED
    assert out.status.t == 0.0


def test_pulse_scaling_separates_blowup_from_decay():
    g = Grid1D(-20.0, 20.0, 401)
    pulse = pulse_steady_state(g.nodes, C35)
    cfg = SolverConfig(grid=g, t_max=40.0)
    up = solve(traveling(g, 1.2 * pulse), C35, cfg)
    assert up.status.kind == BLEW_UP
    assert up.status.t < 40.0
    down = solve(traveling(g, 0.8 * pulse), C35, cfg)
    assert down.status.kind == DECAYED


def test_undetermined_trace_stays_within_thresholds():
    g = Grid1D(-20.0, 20.0, 201)
    cfg = SolverConfig(grid=g, t_max=0.5)
    psi0 = traveling(g, smooth_bump(np.exp(g.nodes), 1.0, 0.5, 0.3))
    out = solve(psi0, C35, cfg)
    assert out.status.kind == UNDETERMINED
    sups = out.sup_trace[:, 1]
    assert np.all((sups > cfg.decay_threshold) & (sups < cfg.blowup_threshold))
    assert out.final is not None and out.final.t == pytest.approx(0.5)


def test_snapshots_are_recorded_at_requested_times():
    g = Grid1D(-20.0, 20.0, 201)
    times = (0.0, 0.1, 0.25)
    cfg = SolverConfig(grid=g, t_max=0.5, snapshot_times=times)
    psi0 = traveling(g, smooth_bump(np.exp(g.nodes), 1.0, 0.5, 0.3))
    out = solve(psi0, C35, cfg)
    assert [s.t for s in out.snapshots] == list(times)
    np.testing.assert_array_equal(out.snapshots[0].values, psi0.values)


def test_order_preservation_between_nested_data():
    rng = np.random.default_rng(2)
    g = Grid1D(-10.0, 10.0, 201)
    r = np.exp(g.nodes)
    for _ in range(3):
        lo_vals = smooth_bump(r, rng.uniform(0.8, 1.2), 0.5, rng.uniform(0.2, 0.5))
        hi_vals = lo_vals + smooth_bump(r, rng.uniform(0.8, 1.2), 0.4, rng.uniform(0.1, 0.3))
        cfg = SolverConfig(grid=g, t_max=0.5, snapshot_times=(0.25, 0.5))
        lo = solve(traveling(g, lo_vals), C35, cfg)
        hi = solve(traveling(g, hi_vals), C35, cfg)
        for s_lo, s_hi in zip(lo.snapshots, hi.snapshots):
            assert np.all(s_lo.values <= s_hi.values + 1e-12)


def test_grid_convergence_toward_the_pulse():
    # the pulse is steady, so the deviation after t = 1 at fixed dt is the
    # accumulated spatial error; it must shrink at second order
    devs = []
    for n in (301, 601, 1201):
        g = Grid1D(-15.0, 15.0, n)
        cfg = SolverConfig(grid=g, dt_init=5e-5, t_max=1.0)
        out = solve(traveling(g, pulse_steady_state(g.nodes, C35)), C35, cfg)
        assert out.status.kind == UNDETERMINED
        devs.append(np.max(np.abs(out.final.values - pulse_steady_state(g.nodes, C35))))
    orders = [math.log2(devs[i] / devs[i + 1]) for i in range(2)]
    assert all(1.8 <= o <= 2.2 for o in orders), (devs, orders)


# ---------------------------------------------------------------------------
# energy diagnostic
# ---------------------------------------------------------------------------

def test_energy_of_zero_field():
    g = Grid1D(-5.0, 5.0, 101)
    assert energy(traveling(g, np.zeros(g.n)), C35) == 0.0


def test_energy_of_small_bump_is_positive():
    # gradient term is O(eps^2), reaction term O(eps^{p+1})
    g = Grid1D(-5.0, 5.0, 2001)
    vals = smooth_bump(g.nodes, 0.0, 1.0, 1e-3)
    assert energy(traveling(g, vals), C35) > 0.0


def test_energy_goes_negative_before_blowup_without_absorption():
    g = Grid1D(-20.0, 20.0, 801)
    psi0 = traveling(g, smooth_bump(np.exp(g.nodes), 1.0, 0.5, 3.0))
    out = solve(psi0, CRD, SolverConfig(grid=g, t_max=10.0))
    assert out.status.kind == BLEW_UP
    energies = out.energy_trace[:, 1]
    assert energies[-1] < 0.0
    # gradient-flow structure: non-increasing up to quadrature tolerance
    assert np.all(np.diff(energies) <= 1e-6 * np.maximum(1.0, np.abs(energies[:-1])))


def test_solver_config_validation():
    g = Grid1D(-1.0, 1.0, 11)
    with pytest.raises(ValueError):
        SolverConfig(grid=g, dt_safety=1.5)
    with pytest.raises(ValueError):
        SolverConfig(grid=g, decay_threshold=2.0)
    with pytest.raises(ValueError):
        SolverConfig(grid=g, t_max=1.0, snapshot_times=(2.0,))
    with pytest.raises(ValueError, match="boundary"):
        BoundaryCondition("robin")
