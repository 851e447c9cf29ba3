"""Tests for the time-domain integrator: kernel moments, propagation,
tail averaging, and agreement with the residue solver."""

import csv

import numpy as np
import pytest

from driventls import ConfigError, FlatBath, NotSettled, PhononBath, \
    StepTooCoarse
from driventls.frames import (DQDParams, bare_frame, coupling_table,
                              dispersive_coeffs, dressed_frame,
                              observable_table)
from driventls.poles import assemble_system, solve_residues, steady_observable
from driventls.renorm import solve_self_consistent
from driventls.timedomain import (Trajectory, TrajectoryConfig, _slow_series,
                                  converged_average, kernel_moments,
                                  observable_series, propagate, time_average,
                                  write_trajectory_csv)

STRONG = PhononBath(coupling=0.2, separation=20.0, cutoff=2.0)
WEAK = PhononBath(coupling=0.02, separation=20.0, cutoff=2.0)
RES_BIAS = np.sqrt(1.0 - 0.09)


def fig_params(bias=RES_BIAS):
    return DQDParams(bias=bias, tunneling=0.3, drive_angle=np.pi / 2.0,
                     drive_amplitude=0.2)


# ---------------------------------------------------------------- kernel

def test_moment_sum_matches_static_response():
    # integral of the correlation over the whole window equals the
    # boundary value of the one-sided response, -i F(0)/2
    m0 = kernel_moments(STRONG, 0.02, 5000)
    target = -0.5j * STRONG.hilbert_transform(0.0)
    assert abs(m0.sum() - target) < 1e-4
    assert abs(target - (-0.5j * 0.61261057)) < 2e-6


def test_moments_match_correlation_cells():
    # cell moments against direct quadrature of the correlation over
    # single cells, away from the zero-delay divergence
    dt = 0.02
    m0 = kernel_moments(STRONG, dt, 1100)
    nodes, wts = np.polynomial.legendre.leggauss(8)
    for j in (25, 250, 1000):
        a, b = j * dt, (j + 1) * dt
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        direct = half * sum(w * STRONG.correlation(mid + half * x)
                            for x, w in zip(nodes, wts))
        assert abs(m0[j] - direct) < 2e-7


def test_fourier_inversion_recovers_density():
    # 2 Re integral of C(tau) exp(+i|w|tau) returns J at the emission
    # frequency -|w|; midpoint phases against the cell moments
    dt = 0.02
    n = 5000
    m0 = kernel_moments(STRONG, dt, n)
    mids = (np.arange(n) + 0.5) * dt
    for om in (0.6, 1.0, 1.5, 2.0, 3.0):
        approx = 2.0 * np.real(np.sum(m0 * np.exp(1j * om * mids)))
        true = STRONG.spectral_density(-om)
        assert abs(approx - true) / true < 1e-3


def test_zero_coupling_moments_vanish():
    off = PhononBath(coupling=0.0, separation=20.0, cutoff=2.0)
    assert np.all(kernel_moments(off, 0.02, 100) == 0.0)


def test_moments_reject_synthetic_bath():
    with pytest.raises(ConfigError):
        kernel_moments(FlatBath(level=0.3), 0.02, 100)


# ---------------------------------------------------------------- config

def test_config_validation():
    with pytest.raises(ConfigError):
        TrajectoryConfig(dt=-0.01)
    with pytest.raises(ConfigError):
        TrajectoryConfig(t_max=100.0, average_window=80.0)


def test_step_cap():
    bare = bare_frame(fig_params())
    cfg = TrajectoryConfig(dt=0.2, t_max=100.0, average_window=40.0)
    with pytest.raises(ConfigError):
        propagate(bare, bare.theta, STRONG, cfg)


def test_kernel_window_floor():
    # at 60 time units the last cell moment is still above a millionth
    # of the peak cell, so the window is rejected
    bare = bare_frame(fig_params())
    cfg = TrajectoryConfig(t_max=200.0, kernel_window=60.0,
                           average_window=80.0)
    with pytest.raises(ConfigError):
        propagate(bare, bare.theta, STRONG, cfg)


# ----------------------------------------------------------- propagation

def test_zero_coupling_trajectory_constant():
    # with no bath the renormalized frame absorbs the whole slow
    # Hamiltonian; the interaction-picture state is frozen
    off = PhononBath(coupling=0.0, separation=20.0, cutoff=2.0)
    bare = bare_frame(fig_params())
    cfg = TrajectoryConfig(t_max=80.0, dt=0.02, kernel_window=10.0,
                           average_window=30.0)
    traj = propagate(bare, bare.theta, off, cfg)
    assert np.max(np.abs(traj.states - traj.states[0])) < 1e-14
    assert traj.trace_deviation < 1e-14
    assert traj.hermiticity_deviation < 1e-14
    obs = observable_table(bare.theta, traj.frame)
    ground = np.diag([1.0, 0.0]).astype(complex)
    expected = np.trace(obs.matrix((0, 0)) @ ground).real
    assert time_average(traj, obs) == pytest.approx(expected, abs=1e-10)


def test_trace_and_hermiticity_preserved():
    bare = bare_frame(fig_params())
    cfg = TrajectoryConfig(t_max=60.0, dt=0.04, kernel_window=100.0,
                           average_window=25.0)
    traj = propagate(bare, bare.theta, STRONG, cfg)
    assert traj.trace_deviation < 1e-10
    assert traj.hermiticity_deviation < 1e-10
    assert np.max(np.abs(traj.states[0] - np.diag([1.0, 0.0]))) == 0.0


def test_convergence_order():
    # halving the step shrinks the averaged change by at least 2x;
    # with the corrector the observed factor is far larger
    bare = bare_frame(fig_params())
    means = {}
    for dt in (0.08, 0.04, 0.02):
        cfg = TrajectoryConfig(t_max=150.0, dt=dt, kernel_window=80.0,
                               average_window=60.0)
        traj = propagate(bare, bare.theta, STRONG, cfg)
        obs = observable_table(bare.theta, traj.frame)
        vals = _slow_series(traj, obs)
        m = int(round(60.0 / dt))
        window = vals[-(m + 1):]
        means[dt] = float(window.sum() - 0.5 * (window[0] + window[-1])) \
            / (window.size - 1)
    d1 = abs(means[0.08] - means[0.04])
    d2 = abs(means[0.04] - means[0.02])
    assert d1 > 2.0 * d2


# -------------------------------------------------------------- averaging

def synthetic_constant_trajectory(rho, n=4000, dt=0.05):
    frame = dressed_frame(0.01, 0.19)
    cfg = TrajectoryConfig(t_max=n * dt, dt=dt, average_window=60.0)
    states = np.broadcast_to(rho, (n + 1, 2, 2)).copy()
    return Trajectory(times=np.arange(n + 1) * dt, states=states,
                      frame=frame, theta=0.30469265, config=cfg,
                      trace_deviation=0.0, hermiticity_deviation=0.0)


def test_constant_trajectory_average():
    theta = 0.30469265
    traj = synthetic_constant_trajectory(0.5 * np.eye(2, dtype=complex))
    obs = observable_table(theta, traj.frame)
    slow = np.trace(obs.matrix((0, 0)) @ (0.5 * np.eye(2))).real
    # every oscillating table matrix is traceless against the identity
    assert time_average(traj, obs) == pytest.approx(slow, abs=1e-14)

    rho = np.diag([0.7, 0.3]).astype(complex)
    traj2 = synthetic_constant_trajectory(rho)
    slow2 = np.trace(obs.matrix((0, 0)) @ rho).real
    # the oscillating pair is off-diagonal, so a diagonal state is exact
    assert time_average(traj2, obs) == pytest.approx(slow2, abs=1e-12)


def test_not_settled_on_short_run():
    # single-period window early in the relaxation still sees the decay
    bare = bare_frame(fig_params())
    cfg = TrajectoryConfig(average_window=35.0)
    traj = propagate(bare, bare.theta, STRONG, cfg)
    obs = observable_table(bare.theta, traj.frame)
    with pytest.raises(NotSettled):
        time_average(traj, obs)


def test_init_independence():
    # the settled average must not remember the starting state
    bare = bare_frame(fig_params())
    cfg = TrajectoryConfig(t_max=3000.0, dt=0.08, average_window=1000.0)
    obs = None
    vals = []
    for init in (None, 0.5 * np.eye(2, dtype=complex)):
        traj = propagate(bare, bare.theta, STRONG, cfg, init=init)
        if obs is None:
            obs = observable_table(bare.theta, traj.frame)
        vals.append(time_average(traj, obs))
    assert abs(vals[0] - vals[1]) < 1e-3


def test_step_halving_gate():
    bare = bare_frame(fig_params())
    cfg = TrajectoryConfig(t_max=3000.0, dt=0.08, average_window=1000.0)
    obs = observable_table(
        bare.theta, solve_self_consistent(bare, bare.theta, STRONG).frame)
    result = converged_average(bare, bare.theta, STRONG, cfg, obs)
    assert result.step_change <= 1e-3
    with pytest.raises(StepTooCoarse):
        converged_average(bare, bare.theta, STRONG, cfg, obs, limit=1e-12)


def test_weak_coupling_matches_pole_solver():
    # the flagship cross-check: independent time integration against the
    # residue solver in the weak-coupling regime
    bare = bare_frame(fig_params())
    sol = solve_self_consistent(bare, bare.theta, WEAK)
    table = coupling_table(bare.theta, sol.frame)
    disp = dispersive_coeffs(bare.theta, sol.frame, bare, WEAK)
    res = solve_residues(assemble_system(table, disp, sol.frame, WEAK))
    obs = observable_table(bare.theta, sol.frame)
    pole_value = steady_observable(res, obs)

    cfg = TrajectoryConfig(t_max=16000.0, dt=0.08, average_window=4000.0)
    traj = propagate(bare, bare.theta, WEAK, cfg)
    avg = time_average(traj, obs)
    assert abs(avg - pole_value) <= 0.02
    assert abs(avg - pole_value) < 2e-3  # observed margin is much wider


# ------------------------------------------------------------------ dump

def test_trajectory_csv_dump(tmp_path):
    off = PhononBath(coupling=0.0, separation=20.0, cutoff=2.0)
    bare = bare_frame(fig_params())
    cfg = TrajectoryConfig(t_max=80.0, dt=0.02, kernel_window=10.0,
                           average_window=30.0)
    traj = propagate(bare, bare.theta, off, cfg)
    obs = observable_table(bare.theta, traj.frame)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, obs, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["time", "pop_ground", "coherence_re", "coherence_im",
                       "pop_excited", "observable"]
    assert len(rows) == traj.times.size + 1
    first = [float(x) for x in rows[1]]
    assert first[0] == 0.0
    assert first[1] == pytest.approx(1.0, abs=1e-12)
    assert first[4] == pytest.approx(0.0, abs=1e-12)
    vals = observable_series(traj, obs)
    assert first[5] == pytest.approx(vals[0], abs=1e-9)
