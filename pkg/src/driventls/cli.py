"""Command-line front end.

Subcommands: `sweep` (bias sweeps, CSV), `spectrum` (bath tables),
`oracle` (single-point comparison against the time-domain integrator),
`check` (solver invariant suite at a given configuration).

Configuration is resolved in three layers: documented defaults, then
an optional flat key-value file, then explicit flags.  Keys mirror the
flag names.  Unknown keys are rejected, not ignored.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .bath import PhononBath
from .errors import ConfigError, DriventlsError
from .frames import (DQDParams, bare_frame, coupling_table,
                     dispersive_coeffs, observable_table)
from .poles import (assemble_system, solve_residues, steady_observable,
                    system_residual)
from .renorm import solve_self_consistent
from .sweep import (MODES, SweepConfig, emit_spectrum, run_sweep,
                    write_spectrum_csv, write_sweep_csv)
from .timedomain import (TrajectoryConfig, converged_average, propagate,
                         write_trajectory_csv)


def _float(v):
    return float(v)


def _int(v):
    return int(str(v))


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def _finite(x):
    return math.isfinite(x)


# key -> (caster, range predicate or None, accepted-range text)
_KEYS = {
    "delta": (_float, lambda x: _finite(x) and x > 0.0, "positive real"),
    "delta-angle": (_float, _finite, "finite real"),
    "drive": (_float, lambda x: _finite(x) and x >= 0.0, "nonnegative real"),
    "coupling": (_float, lambda x: _finite(x) and x >= 0.0,
                 "nonnegative real"),
    "d-star": (_float, lambda x: _finite(x) and x > 0.0, "positive real"),
    "omega-c": (_float, lambda x: _finite(x) and x > 0.0, "positive real"),
    "quad-tol": (_float, lambda x: 0.0 < x <= 1e-3, "real in (0, 1e-3]"),
    "tol": (_float, lambda x: 0.0 < x <= 1e-3, "real in (0, 1e-3]"),
    "bias-min": (_float, _finite, "finite real"),
    "bias-max": (_float, _finite, "finite real"),
    "steps": (_int, lambda n: n >= 2, "integer >= 2"),
    "mode": (str, lambda s: s in MODES + ("all",),
             "one of " + ", ".join(MODES + ("all",))),
    "workers": (_int, lambda n: n >= 1, "integer >= 1"),
    "output": (str, None, "path"),
    "dressing-mismatch": (_bool, None, "boolean"),
}

_DEFAULTS = {
    "delta": 0.3,
    "delta-angle": math.pi / 2.0,
    "drive": 0.2,
    "coupling": 0.2,
    "d-star": 20.0,
    "omega-c": 2.0,
    "quad-tol": 1e-9,
    "tol": 1e-10,
    "bias-min": None,
    "bias-max": None,
    "steps": None,
    "mode": "full",
    "workers": 1,
    "output": None,
    "dressing-mismatch": False,
}

_REQUIRED = ("bias-min", "bias-max", "steps")

# argparse attribute -> config key
_FLAG_ATTRS = {
    "delta": "delta",
    "delta_angle": "delta-angle",
    "drive": "drive",
    "coupling": "coupling",
    "d_star": "d-star",
    "omega_c": "omega-c",
    "quad_tol": "quad-tol",
    "tol": "tol",
    "bias_min": "bias-min",
    "bias_max": "bias-max",
    "steps": "steps",
    "mode": "mode",
    "workers": "workers",
    "output": "output",
}


def _coerce(key, value):
    cast, check, hint = _KEYS[key]
    try:
        out = cast(value)
    except (TypeError, ValueError):
        raise ConfigError(
            f"invalid value for '{key}': {value!r}; expected {hint}"
        ) from None
    if check is not None and not check(out):
        raise ConfigError(
            f"value for '{key}' out of range: {value!r}; expected {hint}")
    return out


def _read_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    pairs = []
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, value = line.partition("=")
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise ConfigError(
                    f"{path}:{num}: expected 'key = value', got {raw!r}")
            key, value = parts
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError(
                f"{path}:{num}: unknown config key '{key}'; accepted keys: "
                + ", ".join(sorted(_KEYS)))
        if not value:
            raise ConfigError(f"{path}:{num}: empty value for '{key}'")
        pairs.append((key, value))
    return pairs


def _resolve_common(flags, file):
    """Defaults, then file values, then flags; every value coerced and
    range-checked on the way in."""
    resolved = dict(_DEFAULTS)
    if file is not None:
        for key, raw in _read_config_file(file):
            resolved[key] = _coerce(key, raw)
    for key, value in flags.items():
        if key not in _KEYS:
            raise ConfigError(
                f"unknown config key '{key}'; accepted keys: "
                + ", ".join(sorted(_KEYS)))
        if value is None:
            continue
        resolved[key] = _coerce(key, value)
    return resolved


def _bath_from(resolved):
    return PhononBath(coupling=resolved["coupling"],
                      separation=resolved["d-star"],
                      cutoff=resolved["omega-c"],
                      quad_tol=resolved["quad-tol"])


def parse_config(flags, file=None):
    """Resolve a full sweep configuration.

    `flags` maps config keys to explicit values (None entries are
    skipped); `file` optionally names a flat key-value file.  The grid
    keys bias-min, bias-max and steps must come from one of the two.
    """
    resolved = _resolve_common(flags, file)
    missing = [k for k in _REQUIRED if resolved[k] is None]
    if missing:
        raise ConfigError("missing required key(s): " + ", ".join(
            f"'{k}' ({_KEYS[k][2]})" for k in missing))
    return SweepConfig(
        tunneling=resolved["delta"],
        drive_angle=resolved["delta-angle"],
        drive_amplitude=resolved["drive"],
        bias_min=resolved["bias-min"],
        bias_max=resolved["bias-max"],
        steps=resolved["steps"],
        bath=_bath_from(resolved),
        mode=resolved["mode"],
        tol=resolved["tol"],
        workers=resolved["workers"],
        output=resolved["output"],
        dressing_mismatch=resolved["dressing-mismatch"],
    )


def _flag_values(ns):
    return {key: getattr(ns, attr)
            for attr, key in _FLAG_ATTRS.items() if hasattr(ns, attr)}


def _fmt12(x):
    return format(float(x), ".12g")


def _cmd_sweep(ns):
    cfg = parse_config(_flag_values(ns), ns.config)
    rows = run_sweep(cfg)
    flagged = sum(1 for r in rows if not r.valid)
    if cfg.output:
        write_sweep_csv(rows, cfg, cfg.output)
        tail = f" ({flagged} flagged)" if flagged else ""
        print(f"{len(rows)} rows -> {cfg.output}{tail}", file=sys.stderr)
    else:
        write_sweep_csv(rows, cfg, sys.stdout)
    return 0


def _cmd_spectrum(ns):
    resolved = _resolve_common(_flag_values(ns), ns.config)
    bath = _bath_from(resolved)
    rows = emit_spectrum(bath, ns.omega_min, ns.omega_max, ns.points)
    grid_info = (ns.omega_min, ns.omega_max, ns.points)
    if resolved["output"]:
        write_spectrum_csv(rows, bath, grid_info, resolved["output"])
        print(f"{len(rows)} rows -> {resolved['output']}", file=sys.stderr)
    else:
        write_spectrum_csv(rows, bath, grid_info, sys.stdout)
    return 0


def _poles_point(bare, theta, bath, tol):
    """Full renormalized residue solve at one bias; returns the
    solution, the observable table and the contracted value."""
    sol = solve_self_consistent(bare, theta, bath, tol=tol)
    table = coupling_table(theta, sol.frame)
    disp = dispersive_coeffs(theta, sol.frame, bare, bath)
    system = assemble_system(table, disp, sol.frame, bath)
    resset = solve_residues(system)
    obs = observable_table(theta, sol.frame)
    value = steady_observable(resset, obs)
    return sol, system, resset, obs, value


def _cmd_oracle(ns):
    resolved = _resolve_common(_flag_values(ns), ns.config)
    bath = _bath_from(resolved)
    params = DQDParams(bias=ns.bias, tunneling=resolved["delta"],
                       drive_angle=resolved["delta-angle"],
                       drive_amplitude=resolved["drive"])
    bare = bare_frame(params)
    theta = bare.theta
    sol, _, _, obs, poles_value = _poles_point(
        bare, theta, bath, resolved["tol"])
    tcfg = TrajectoryConfig(dt=ns.dt, t_max=ns.t_max,
                            kernel_window=ns.kernel_window,
                            average_window=ns.average_window)
    result = converged_average(bare, theta, bath, tcfg, obs)
    if resolved["output"]:
        traj = propagate(bare, theta, bath, tcfg)
        write_trajectory_csv(traj, obs, resolved["output"])
        print(f"trajectory -> {resolved['output']}", file=sys.stderr)
    for key, value in [
        ("bias", ns.bias),
        ("theta", theta),
        ("detuning_renorm", sol.frame.detuning),
        ("rabi_renorm", sol.frame.rabi),
        ("gap_renorm", sol.frame.rabi_prime),
        ("poles_value", poles_value),
        ("oracle_value", result.value),
        ("oracle_coarse", result.coarse_value),
        ("step_change", result.step_change),
        ("difference", poles_value - result.value),
    ]:
        print(f"{key} = {_fmt12(value)}")
    return 0


def _cmd_check(ns):
    cfg = parse_config(_flag_values(ns), ns.config)
    bath = cfg.bath
    results = []

    def record(ok, text):
        results.append((ok, text))

    # spectral support and sign conventions
    pos = max(abs(float(bath.spectral_density(w))) for w in (0.0, 0.5, 1.0))
    record(pos == 0.0, "density vanishes on the nonnegative axis")
    neg = [float(bath.spectral_density(w)) for w in (-0.25, -1.0, -1.75)]
    record(all(j >= 0.0 for j in neg), "density nonnegative below zero")
    f0 = float(bath.hilbert_transform(0.0))
    if bath.coupling > 0.0:
        record(f0 > 0.0, f"dispersion positive at zero (F0 = {_fmt12(f0)})")
    else:
        record(f0 == 0.0, "dispersion vanishes with the coupling")

    grid = cfg.grid()
    sample = sorted(set(
        int(i) for i in np.linspace(0, cfg.steps - 1, min(5, cfg.steps))))
    for idx in sample:
        bias = float(grid[idx])
        tag = f"bias {bias:.6g}"
        params = DQDParams(bias=bias, tunneling=cfg.tunneling,
                          drive_angle=cfg.drive_angle,
                          drive_amplitude=cfg.drive_amplitude)
        bare = bare_frame(params)
        try:
            sol, system, resset, obs, value = _poles_point(
                bare, bare.theta, bath, cfg.tol)
        except DriventlsError as exc:
            record(False, f"{tag}: solve failed: {exc}")
            continue
        op = sol.frame.rabi_prime
        rho0 = resset.rho(0.0)
        plus = resset.rho(op)
        minus = resset.rho(-op)
        record(system.kernel_dimension == 1,
               f"{tag}: kernel dimension {system.kernel_dimension}")
        tr_err = abs(complex(np.trace(rho0)) - 1.0)
        record(tr_err == 0.0, f"{tag}: exact unit trace")
        emergent = max(abs(complex(np.trace(plus))),
                       abs(complex(np.trace(minus))))
        record(emergent <= 1e-10,
               f"{tag}: emergent trace {emergent:.2e} <= 1e-10")
        herm = max(float(np.max(np.abs(rho0 - rho0.conj().T))),
                   float(np.max(np.abs(plus - minus.conj().T))))
        record(herm <= 1e-8, f"{tag}: hermiticity closure {herm:.2e} <= 1e-08")
        rel = system_residual(system, resset)
        record(rel <= 1e-8, f"{tag}: relative residual {rel:.2e} <= 1e-08")
        record(system.conditioning < 1e12,
               f"{tag}: conditioning {system.conditioning:.2e} < 1e+12")
        record(sol.consistency_gap <= 1e-6,
               f"{tag}: dressing consistency {sol.consistency_gap:.2e}"
               " <= 1e-06")

    failed = sum(1 for ok, _ in results if not ok)
    for ok, text in results:
        print(("ok   " if ok else "FAIL ") + text)
    print(f"check: {len(results) - failed} passed, {failed} failed")
    return 1 if failed else 0


def _add_common(sp):
    sp.add_argument("--config", metavar="FILE",
                    help="flat key = value config file, # comments")
    sp.add_argument("--delta", type=float, metavar="X",
                    help="interdot tunneling (default 0.3)")
    sp.add_argument("--delta-angle", type=float, metavar="X",
                    help="drive quadrature angle (default pi/2)")
    sp.add_argument("--drive", type=float, metavar="X",
                    help="drive amplitude (default 0.2)")
    sp.add_argument("--coupling", type=float, metavar="X",
                    help="bath coupling strength (default 0.2)")
    sp.add_argument("--d-star", type=float, metavar="X",
                    help="dot separation parameter (default 20)")
    sp.add_argument("--omega-c", type=float, metavar="X",
                    help="bath frequency cutoff (default 2)")
    sp.add_argument("--quad-tol", type=float, metavar="X",
                    help="quadrature error target (default 1e-9)")
    sp.add_argument("--tol", type=float, metavar="X",
                    help="frame self-consistency tolerance (default 1e-10)")
    sp.add_argument("--output", metavar="PATH",
                    help="write output here instead of stdout")


def _add_grid(sp):
    sp.add_argument("--bias-min", type=float, metavar="X",
                    help="sweep start (required, via flag or config file)")
    sp.add_argument("--bias-max", type=float, metavar="X",
                    help="sweep end (required)")
    sp.add_argument("--steps", type=int, metavar="N",
                    help="grid points, >= 2 (required)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="driventls",
        description="Periodic steady states of a driven dissipative "
                    "two-level system, solved in the Laplace domain")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser(
        "sweep", help="bias sweep over the approximation ladder (CSV out)")
    _add_common(sw)
    _add_grid(sw)
    sw.add_argument("--mode", choices=MODES + ("all",),
                    help="approximation level (default full)")
    sw.add_argument("--workers", type=int, metavar="N",
                    help="worker processes (default 1; results identical)")
    sw.set_defaults(func=_cmd_sweep)

    spx = sub.add_parser(
        "spectrum", help="bath spectral density and dispersive transform")
    _add_common(spx)
    spx.add_argument("--omega-min", type=float, default=-2.5, metavar="X",
                     help="lowest tabulated frequency (default -2.5)")
    spx.add_argument("--omega-max", type=float, default=1.0, metavar="X",
                     help="highest tabulated frequency (default 1.0)")
    spx.add_argument("--points", type=int, default=301, metavar="N",
                     help="grid points (default 301)")
    spx.set_defaults(func=_cmd_spectrum)

    orc = sub.add_parser(
        "oracle", help="compare the pole solve against the time-domain "
                       "integrator at one bias")
    _add_common(orc)
    orc.add_argument("--bias", type=float, required=True, metavar="X",
                     help="bias point to compare at")
    orc.add_argument("--dt", type=float, default=0.08, metavar="X",
                     help="integrator step (default 0.08)")
    orc.add_argument("--t-max", type=float, default=3000.0, metavar="X",
                     help="trajectory length (default 3000; use 16000 at "
                          "weak coupling)")
    orc.add_argument("--kernel-window", type=float, default=100.0,
                     metavar="X", help="memory truncation (default 100)")
    orc.add_argument("--average-window", type=float, default=1000.0,
                     metavar="X",
                     help="tail averaging span (default 1000; use 4000 at "
                          "weak coupling)")
    orc.set_defaults(func=_cmd_oracle)

    ck = sub.add_parser(
        "check", help="run the solver invariant suite on a configuration")
    _add_common(ck)
    _add_grid(ck)
    ck.set_defaults(func=_cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DriventlsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
