"""Periodic steady states of a driven dissipative two-level system.

Solver library built around a Laplace-domain pole ansatz for the density
matrix of a driven double quantum dot coupled to a piezo-electric phonon
bath, with bath-induced renormalization of detuning and Rabi frequency, a
Markovian baseline, and a time-domain integrator for validation.
"""

from .bath import Bath, CustomBath, FlatBath, PhononBath
from .frames import (
    BareFrame,
    CouplingTable,
    DispersiveCoeffs,
    DQDParams,
    DressedFrame,
    bare_frame,
    coupling_table,
    dispersive_coeffs,
    dressed_frame,
    observable_table,
)
from .errors import (
    ConfigError,
    DegenerateFrequencies,
    DriventlsError,
    IllConditionedWarning,
    NoConvergence,
    NotSettled,
    PolaronDivergence,
    QuadratureFailure,
    SingularSystem,
    StepTooCoarse,
    UndrivenDegenerate,
)
from .renorm import RenormSolution, approx_renorm, solve_self_consistent
from .poles import (
    ResidueSet,
    ResidueSystem,
    assemble_system,
    markov_steady,
    solve_residues,
    steady_observable,
    system_residual,
)
from .timedomain import (
    AverageResult,
    Trajectory,
    TrajectoryConfig,
    converged_average,
    kernel_moments,
    observable_series,
    propagate,
    time_average,
    write_trajectory_csv,
)
from .sweep import (
    SpectrumRow,
    SweepConfig,
    SweepRow,
    emit_spectrum,
    run_sweep,
    write_spectrum_csv,
    write_sweep_csv,
)
from .cli import main, parse_config

__version__ = "0.1.0"
