"""Bias sweeps over the approximation ladder, and plot-ready CSV output.

A sweep walks a strictly increasing bias grid and solves the requested
comparison modes at every point: the fully renormalized dynamical
solve, the dynamical solve in the bare frame with the rescaled drive,
the flat-memory baseline, and the undriven reference.  Per-point
failures downgrade to a validity flag so one bad grid point cannot
abort a long sweep.  Output is deterministic: fixed iteration order,
fixed segmentation, and 12-significant-digit formatting, so identical
configurations produce byte-identical files.
"""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from pathlib import Path

import numpy as np

from .bath import PhononBath
from .errors import ConfigError, DriventlsError, IllConditionedWarning, NoConvergence
from .frames import (DQDParams, bare_frame, coupling_table, dispersive_coeffs,
                     dressed_frame, observable_table)
from .poles import (assemble_system, markov_steady, solve_residues,
                    steady_observable, system_residual)
from .renorm import approx_renorm, solve_self_consistent

MODES = ("full", "bare-dynamical", "markov", "no-drive")
_DYNAMICAL = ("full", "bare-dynamical")
# grid points per warm-start chain; fixed so the row values cannot
# depend on the worker count
SEGMENT_POINTS = 64


@dataclass(frozen=True)
class SweepConfig:
    """Everything one sweep needs: the drive geometry minus the swept
    bias, the bias grid, the bath, and the requested comparison mode."""

    tunneling: float
    drive_angle: float
    drive_amplitude: float
    bias_min: float
    bias_max: float
    steps: int
    bath: PhononBath
    mode: str = "full"
    tol: float = 1e-10
    workers: int = 1
    output: str | None = None
    # sensitivity knob, config-file only: keep the slow-Hamiltonian /
    # dispersive mismatch in the bare-frame dynamical solve instead of
    # imposing the cancellation
    dressing_mismatch: bool = False

    def __post_init__(self):
        if not isinstance(self.steps, int) or self.steps < 2:
            raise ConfigError(
                f"steps must be an integer >= 2 (got {self.steps!r})")
        if not self.bias_min < self.bias_max:
            raise ConfigError(
                f"bias-min must be strictly below bias-max "
                f"(got {self.bias_min!r} >= {self.bias_max!r})")
        if self.mode not in MODES + ("all",):
            raise ConfigError(
                f"mode must be one of {', '.join(MODES + ('all',))} "
                f"(got {self.mode!r})")
        if self.tunneling <= 0.0:
            raise ConfigError(
                f"delta must be a positive real (got {self.tunneling!r})")
        if self.drive_amplitude < 0.0:
            raise ConfigError(
                f"drive must be a nonnegative real "
                f"(got {self.drive_amplitude!r})")
        if self.tol <= 0.0:
            raise ConfigError(f"tol must be positive (got {self.tol!r})")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(
                f"workers must be an integer >= 1 (got {self.workers!r})")

    def grid(self):
        g = np.linspace(self.bias_min, self.bias_max, self.steps)
        if not np.all(np.diff(g) > 0.0):
            raise ConfigError(
                "bias grid is not strictly increasing; widen the range "
                "or reduce steps")
        return g

    def requested_modes(self):
        return list(MODES) if self.mode == "all" else [self.mode]


@dataclass(frozen=True)
class SweepRow:
    """One grid point: frame data, per-mode observables, diagnostics.

    Missing entries stay None and are emitted as blank cells; `valid`
    is set only when every requested observable was computed."""

    bias: float
    detuning_bare: float
    detuning: float | None
    rabi: float | None
    gap: float | None
    observables: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    kernels: dict = field(default_factory=dict)
    conditions: dict = field(default_factory=dict)
    valid: bool = False
    note: str = ""


@dataclass(frozen=True)
class SpectrumRow:
    frequency: float
    density: float | None
    dispersion: float | None
    valid: bool
    note: str = ""


def _dynamical_value(theta, frame, bare, bath, mismatch):
    """Residue solve in a given frame; returns the contracted
    observable plus (residual, kernel dimension, condition) and any
    conditioning complaints."""
    table = coupling_table(theta, frame)
    disp = dispersive_coeffs(theta, frame, bare, bath)
    system = assemble_system(table, disp, frame, bath,
                             use_hamiltonian_components=mismatch)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        resset = solve_residues(system)
    notes = [str(w.message) for w in caught
             if issubclass(w.category, IllConditionedWarning)]
    obs = observable_table(theta, frame)
    value = steady_observable(resset, obs)
    diag = (system_residual(system, resset), system.kernel_dimension,
            system.conditioning)
    return value, diag, notes


def _markov_value(theta, frame, bath):
    table = coupling_table(theta, frame)
    resset = markov_steady(table, bath)
    obs = observable_table(theta, frame)
    return steady_observable(resset, obs)


def _solve_row(cfg, bias, seed):
    """One grid point.  Returns the row and the warm-start seed for the
    next point in the chain (None when the renormalization failed)."""
    params = DQDParams(bias=float(bias), tunneling=cfg.tunneling,
                      drive_angle=cfg.drive_angle,
                      drive_amplitude=cfg.drive_amplitude)
    bare = bare_frame(params)
    theta = bare.theta
    wanted = cfg.requested_modes()
    notes = []
    observables = {}
    residuals = {}
    kernels = {}
    conditions = {}

    # the renormalized triple is only solved (and emitted) when the
    # full mode asks for it; the other modes run in the bare frame
    sol = None
    next_seed = None
    if "full" in wanted:
        try:
            sol = solve_self_consistent(bare, theta, cfg.bath, tol=cfg.tol,
                                        seed=seed)
            next_seed = (sol.frame.detuning, sol.frame.rabi)
        except DriventlsError as exc:
            notes.append(f"renorm: {exc}")

    bare_dressed = None
    if "bare-dynamical" in wanted or "markov" in wanted:
        try:
            _, omega_ap = approx_renorm(bare, cfg.bath)
            bare_dressed = dressed_frame(bare.detuning, omega_ap)
        except DriventlsError as exc:
            notes.append(f"bare frame: {exc}")

    for mode in wanted:
        try:
            if mode == "full":
                if sol is None:
                    raise NoConvergence("renormalized frame unavailable")
                value, diag, warned = _dynamical_value(
                    theta, sol.frame, bare, cfg.bath, mismatch=False)
            elif mode == "bare-dynamical":
                if bare_dressed is None:
                    raise NoConvergence("bare dressed frame unavailable")
                value, diag, warned = _dynamical_value(
                    theta, bare_dressed, bare, cfg.bath,
                    mismatch=cfg.dressing_mismatch)
            elif mode == "markov":
                if bare_dressed is None:
                    raise NoConvergence("bare dressed frame unavailable")
                value = _markov_value(theta, bare_dressed, cfg.bath)
                diag, warned = None, []
            else:
                value = float(np.sin(0.5 * theta) ** 2)
                diag, warned = None, []
        except DriventlsError as exc:
            notes.append(f"{mode}: {exc}")
            continue
        observables[mode] = value
        notes.extend(f"{mode}: {w}" for w in warned)
        if diag is not None:
            residuals[mode], kernels[mode], conditions[mode] = diag

    row = SweepRow(
        bias=float(bias),
        detuning_bare=bare.detuning,
        detuning=None if sol is None else sol.frame.detuning,
        rabi=None if sol is None else sol.frame.rabi,
        gap=None if sol is None else sol.frame.rabi_prime,
        observables=observables,
        residuals=residuals,
        kernels=kernels,
        conditions=conditions,
        valid=all(m in observables for m in wanted),
        note="; ".join(notes),
    )
    return row, next_seed


def _segment_rows(cfg, biases):
    """Sequential warm-start chain over one contiguous grid segment;
    the first point always starts cold."""
    rows = []
    seed = None
    for b in biases:
        row, seed = _solve_row(cfg, b, seed)
        rows.append(row)
    return rows


def run_sweep(config):
    """All grid points of a sweep, in bias order.

    The grid is cut into fixed-size contiguous segments; each segment
    is an independent warm-start chain, so the emitted rows do not
    depend on how many workers processed them.
    """
    grid = config.grid()
    segments = [tuple(float(b) for b in grid[i:i + SEGMENT_POINTS])
                for i in range(0, grid.size, SEGMENT_POINTS)]
    n_workers = min(config.workers, len(segments))
    if n_workers <= 1:
        parts = [_segment_rows(config, seg) for seg in segments]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(_segment_rows, repeat(config), segments))
    return [row for part in parts for row in part]


def emit_spectrum(bath, omega_min, omega_max, points):
    """Tabulate the bath spectral density and its dispersive transform
    on a uniform frequency grid."""
    if not isinstance(points, int) or points < 2:
        raise ConfigError(f"points must be an integer >= 2 (got {points!r})")
    if not omega_min < omega_max:
        raise ConfigError(
            f"omega-min must be strictly below omega-max "
            f"(got {omega_min!r} >= {omega_max!r})")
    rows = []
    for w in np.linspace(omega_min, omega_max, points):
        try:
            density = float(bath.spectral_density(w))
            dispersion = float(bath.hilbert_transform(w))
        except DriventlsError as exc:
            rows.append(SpectrumRow(float(w), None, None, False, str(exc)))
            continue
        rows.append(SpectrumRow(float(w), density, dispersion, True))
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def config_pairs(cfg):
    """Resolved configuration as ordered (key, value) text pairs; keys
    match the command-line flag names."""
    b = cfg.bath
    return [
        ("delta", _fmt(cfg.tunneling)),
        ("delta-angle", _fmt(cfg.drive_angle)),
        ("drive", _fmt(cfg.drive_amplitude)),
        ("coupling", _fmt(b.coupling)),
        ("d-star", _fmt(b.separation)),
        ("omega-c", _fmt(b.cutoff)),
        ("quad-tol", _fmt(b.quad_tol)),
        ("bias-min", _fmt(cfg.bias_min)),
        ("bias-max", _fmt(cfg.bias_max)),
        ("steps", _fmt(cfg.steps)),
        ("mode", cfg.mode),
        ("tol", _fmt(cfg.tol)),
        ("workers", _fmt(cfg.workers)),
        ("dressing-mismatch", _fmt(cfg.dressing_mismatch)),
        ("output", cfg.output if cfg.output else "-"),
    ]


def _open_dest(dest):
    if isinstance(dest, (str, Path)):
        return open(dest, "w", encoding="utf-8", newline=""), True
    return dest, False


def write_sweep_csv(rows, config, dest):
    """Sweep rows as CSV behind a comment block echoing the resolved
    configuration.  Column set follows the requested mode."""
    fh, own = _open_dest(dest)
    try:
        fh.write("# driventls sweep\n")
        for key, value in config_pairs(config):
            fh.write(f"# {key} = {value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        wanted = config.requested_modes()
        dynamical = [m for m in _DYNAMICAL if m in wanted]
        header = ["bias", "detuning_bare", "detuning_renorm",
                  "rabi_renorm", "gap_renorm"]
        header += [f"observable_{m.replace('-', '_')}" for m in wanted]
        for m in dynamical:
            tag = m.replace("-", "_")
            header += [f"residual_{tag}", f"kernel_{tag}", f"condition_{tag}"]
        header += ["valid", "note"]
        writer.writerow(header)
        for r in rows:
            rec = [_fmt(r.bias), _fmt(r.detuning_bare), _fmt(r.detuning),
                   _fmt(r.rabi), _fmt(r.gap)]
            rec += [_fmt(r.observables.get(m)) for m in wanted]
            for m in dynamical:
                rec += [_fmt(r.residuals.get(m)), _fmt(r.kernels.get(m)),
                        _fmt(r.conditions.get(m))]
            rec += [_fmt(r.valid), r.note]
            writer.writerow(rec)
    finally:
        if own:
            fh.close()


def write_spectrum_csv(rows, bath, grid_info, dest):
    """Spectrum table as CSV with the same reproducibility header."""
    omega_min, omega_max, points = grid_info
    fh, own = _open_dest(dest)
    try:
        fh.write("# driventls spectrum\n")
        for key, value in [("coupling", _fmt(bath.coupling)),
                           ("d-star", _fmt(bath.separation)),
                           ("omega-c", _fmt(bath.cutoff)),
                           ("quad-tol", _fmt(bath.quad_tol)),
                           ("omega-min", _fmt(omega_min)),
                           ("omega-max", _fmt(omega_max)),
                           ("points", _fmt(points))]:
            fh.write(f"# {key} = {value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frequency", "spectral_density",
                        "hilbert_transform", "valid", "note"])
        for r in rows:
            writer.writerow([_fmt(r.frequency), _fmt(r.density),
                             _fmt(r.dispersion), _fmt(r.valid), r.note])
    finally:
        if own:
            fh.close()
